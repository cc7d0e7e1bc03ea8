#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace shortfall {

enum class RebalanceFrequency { daily, weekly, monthly, quarterly };

RebalanceFrequency parse_frequency(std::string_view text);
std::string_view to_string(RebalanceFrequency f);

/// Run parameters shared by every workflow.
struct AnalysisConfig {
    std::vector<double> confidence_levels{0.60, 0.90, 0.95, 0.99};
    int half_life_days = 21;
    RebalanceFrequency rebalance_frequency = RebalanceFrequency::monthly;
    /// Relative eigenvalue floor: eigenvalues below eigen_floor * max eigenvalue are lifted.
    double eigen_floor = 1e-12;
    std::uint64_t seed = 0;
    int warmup_observations = 252;

    /// Throws ValidationError when any field is out of range.
    void validate() const;
};

/// Reads the AnalysisConfig keys of a flat JSON object. Missing keys keep
/// their defaults; keys outside `AnalysisConfig` and `extra_keys` are rejected.
AnalysisConfig config_from_json(const nlohmann::json& doc,
                                const std::vector<std::string>& extra_keys = {});

nlohmann::json config_to_json(const AnalysisConfig& config);

/// Loads a JSON config document (throws ParseError / ValidationError).
nlohmann::json load_json_file(const std::filesystem::path& path);

}  // namespace shortfall
