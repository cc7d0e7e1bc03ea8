#include "shortfall/config.hpp"

#include <algorithm>
#include <fstream>

#include "shortfall/errors.hpp"

namespace shortfall {

RebalanceFrequency parse_frequency(std::string_view text) {
    if (text == "daily") return RebalanceFrequency::daily;
    if (text == "weekly") return RebalanceFrequency::weekly;
    if (text == "monthly") return RebalanceFrequency::monthly;
    if (text == "quarterly") return RebalanceFrequency::quarterly;
    throw ValidationError("unknown rebalance frequency '" + std::string(text) + "'");
}

std::string_view to_string(RebalanceFrequency f) {
    switch (f) {
        case RebalanceFrequency::daily: return "daily";
        case RebalanceFrequency::weekly: return "weekly";
        case RebalanceFrequency::monthly: return "monthly";
        case RebalanceFrequency::quarterly: return "quarterly";
    }
    return "monthly";
}

void AnalysisConfig::validate() const {
    if (confidence_levels.empty()) throw ValidationError("confidence_levels is empty");
    for (double p : confidence_levels) {
        if (!(p > 0.0 && p < 1.0)) {
            throw ValidationError("confidence level must lie in (0, 1), got " + std::to_string(p));
        }
    }
    if (half_life_days < 1) throw ValidationError("half_life_days must be >= 1");
    if (warmup_observations < 2) throw ValidationError("warmup_observations must be >= 2");
    if (!(eigen_floor >= 0.0)) throw ValidationError("eigen_floor must be nonnegative");
}

namespace {

const std::vector<std::string> kConfigKeys = {"confidence_levels", "half_life_days",
                                              "rebalance_frequency", "eigen_floor",
                                              "seed", "warmup_observations"};

template <typename T>
T get_as(const nlohmann::json& doc, const char* key) {
    try {
        return doc.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("config key '") + key + "': " + e.what());
    }
}

}  // namespace

AnalysisConfig config_from_json(const nlohmann::json& doc, const std::vector<std::string>& extra_keys) {
    if (!doc.is_object()) throw ValidationError("config must be a JSON object");
    for (const auto& [key, value] : doc.items()) {
        const bool known = std::find(kConfigKeys.begin(), kConfigKeys.end(), key) != kConfigKeys.end() ||
                           std::find(extra_keys.begin(), extra_keys.end(), key) != extra_keys.end();
        if (!known) throw ValidationError("unknown config key '" + key + "'");
    }
    AnalysisConfig config;
    if (doc.contains("confidence_levels")) {
        config.confidence_levels = get_as<std::vector<double>>(doc, "confidence_levels");
    }
    if (doc.contains("half_life_days")) config.half_life_days = get_as<int>(doc, "half_life_days");
    if (doc.contains("rebalance_frequency")) {
        config.rebalance_frequency = parse_frequency(get_as<std::string>(doc, "rebalance_frequency"));
    }
    if (doc.contains("eigen_floor")) config.eigen_floor = get_as<double>(doc, "eigen_floor");
    if (doc.contains("seed")) config.seed = get_as<std::uint64_t>(doc, "seed");
    if (doc.contains("warmup_observations")) {
        config.warmup_observations = get_as<int>(doc, "warmup_observations");
    }
    config.validate();
    return config;
}

nlohmann::json config_to_json(const AnalysisConfig& config) {
    return {{"confidence_levels", config.confidence_levels},
            {"half_life_days", config.half_life_days},
            {"rebalance_frequency", std::string(to_string(config.rebalance_frequency))},
            {"eigen_floor", config.eigen_floor},
            {"seed", config.seed},
            {"warmup_observations", config.warmup_observations}};
}

nlohmann::json load_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config file '" + path.string() + "'");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("config '" + path.string() + "': " + e.what());
    }
}

}  // namespace shortfall
