#include "shortfall/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "shortfall/backtest.hpp"
#include "shortfall/config.hpp"
#include "shortfall/covariance.hpp"
#include "shortfall/errors.hpp"
#include "shortfall/esterror.hpp"
#include "shortfall/format.hpp"
#include "shortfall/optimize.hpp"
#include "shortfall/panel.hpp"
#include "shortfall/random.hpp"
#include "shortfall/risk.hpp"
#include "shortfall/scenario.hpp"

namespace shortfall {

namespace {

using ordered_json = nlohmann::ordered_json;
namespace fs = std::filesystem;

struct CommonOptions {
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    bool quiet = false;
    int threads = 1;
};

void add_common(CLI::App* cmd, CommonOptions& common) {
    cmd->add_option("--config", common.config_path, "JSON run configuration");
    cmd->add_option("--out", common.out_dir, "Output directory")->required();
    cmd->add_option("--seed", common.seed, "Override the configured seed");
    cmd->add_flag("--quiet", common.quiet, "Suppress progress output");
    cmd->add_option("--threads", common.threads, "Worker threads")->check(CLI::PositiveNumber);
}

/// Config document (empty object without --config) plus the AnalysisConfig it holds.
struct LoadedConfig {
    nlohmann::json doc = nlohmann::json::object();
    AnalysisConfig analysis;
};

LoadedConfig load_config(const CommonOptions& common, const std::vector<std::string>& extra_keys) {
    LoadedConfig loaded;
    if (!common.config_path.empty()) loaded.doc = load_json_file(common.config_path);
    loaded.analysis = config_from_json(loaded.doc, extra_keys);
    if (common.seed) loaded.analysis.seed = *common.seed;
    return loaded;
}

template <typename T>
std::optional<T> config_value(const nlohmann::json& doc, const char* key) {
    if (!doc.contains(key) || doc.at(key).is_null()) return std::nullopt;
    try {
        return doc.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("config key '") + key + "': " + e.what());
    }
}

template <typename T>
T pick(const std::optional<T>& flag, const nlohmann::json& doc, const char* key, T fallback) {
    if (flag) return *flag;
    if (auto v = config_value<T>(doc, key)) return *v;
    return fallback;
}

fs::path prepare_out(const std::string& dir) {
    const fs::path path(dir);
    std::error_code ec;
    fs::create_directories(path, ec);
    if (ec || !fs::is_directory(path)) throw ValidationError("cannot create output directory '" + dir + "'");
    return path;
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write " + path.string());
    out << text;
}

ReturnPanel read_panel(const std::string& path) {
    if (!fs::exists(path)) throw ParseError("panel file '" + path + "' does not exist");
    return load_panel(path);
}

Eigen::VectorXd named_vector(const nlohmann::json& value, const std::vector<std::string>& names,
                             const std::string& what) {
    const auto n = static_cast<Eigen::Index>(names.size());
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    if (value.is_array()) {
        if (static_cast<Eigen::Index>(value.size()) != n) {
            throw ValidationError(what + " has " + std::to_string(value.size()) + " entries, expected " +
                                  std::to_string(n));
        }
        for (Eigen::Index i = 0; i < n; ++i) v(i) = value.at(static_cast<std::size_t>(i)).get<double>();
        return v;
    }
    if (!value.is_object()) throw ValidationError(what + " must be an array or an object keyed by column");
    for (const auto& [key, x] : value.items()) {
        const auto it = std::find(names.begin(), names.end(), key);
        if (it == names.end()) throw ValidationError(what + " names unknown column '" + key + "'");
        v(it - names.begin()) = x.get<double>();
    }
    return v;
}

/// Constraint document: an optional preset plus extra rows and bounds.
///   {"preset": "full_investment_long_only" | "index_style" | "none",
///    "index_column": "...", "style_bound": 2,
///    "equalities": [{"coefficients": {...}, "rhs": 1}], "inequalities": [...],
///    "bounds": {"name": [lower, upper]}}      (null = unbounded side)
ConstraintSet constraints_from_json(const nlohmann::json& doc, const std::vector<std::string>& names) {
    static const std::vector<std::string> keys = {"preset", "index_column", "style_bound",
                                                  "equalities", "inequalities", "bounds"};
    if (!doc.is_object()) throw ValidationError("constraints document must be a JSON object");
    for (const auto& [key, value] : doc.items()) {
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
            throw ValidationError("unknown constraint key '" + key + "'");
        }
    }
    try {
        const std::string preset = doc.value("preset", std::string("full_investment_long_only"));
        const auto n = static_cast<Eigen::Index>(names.size());
        ConstraintSet set(n);
        if (preset == "full_investment_long_only") {
            set = ConstraintSet::full_investment_long_only(n);
        } else if (preset == "index_style") {
            set = index_style_constraints(names, doc.value("index_column", names.front()),
                                          doc.value("style_bound", 2.0));
        } else if (preset != "none") {
            throw ValidationError("unknown constraint preset '" + preset + "'");
        }
        for (const auto& row : doc.value("equalities", nlohmann::json::array())) {
            set.add_equality(named_vector(row.at("coefficients"), names, "equality"), row.at("rhs").get<double>());
        }
        for (const auto& row : doc.value("inequalities", nlohmann::json::array())) {
            set.add_inequality(named_vector(row.at("coefficients"), names, "inequality"),
                               row.at("rhs").get<double>());
        }
        if (doc.contains("bounds")) {
            for (const auto& [key, pair] : doc.at("bounds").items()) {
                const auto it = std::find(names.begin(), names.end(), key);
                if (it == names.end()) throw ValidationError("bounds name unknown column '" + key + "'");
                if (!pair.is_array() || pair.size() != 2) throw ValidationError("bounds must be [lower, upper]");
                const double lo = pair[0].is_null() ? -std::numeric_limits<double>::infinity() : pair[0].get<double>();
                const double hi = pair[1].is_null() ? std::numeric_limits<double>::infinity() : pair[1].get<double>();
                set.set_bounds(it - names.begin(), lo, hi);
            }
        }
        return set;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("constraints document: ") + e.what());
    }
}

ordered_json weights_json(const Eigen::VectorXd& w, const std::vector<std::string>& names) {
    ordered_json out = ordered_json::object();
    for (std::size_t i = 0; i < names.size(); ++i) out[names[i]] = w(static_cast<Eigen::Index>(i));
    return out;
}


struct OptimizeOptions {
    std::string panel;
    std::string constraints;
    std::string alpha;
    std::optional<std::string> objective;
    std::optional<double> confidence;
    std::optional<std::string> analysis_date;
    std::optional<double> shortfall_aversion;
    std::optional<double> variance_aversion;
};

int cmd_optimize(const CommonOptions& common, const OptimizeOptions& opt, std::ostream& out) {
    const LoadedConfig cfg = load_config(common, {"objective", "confidence", "analysis_date",
                                                  "shortfall_aversion", "variance_aversion"});
    const ReturnPanel panel = read_panel(opt.panel);
    const fs::path dir = prepare_out(common.out_dir);

    const std::string objective = pick(opt.objective, cfg.doc, "objective", std::string("shortfall"));
    const double p = pick(opt.confidence, cfg.doc, "confidence", 0.95);
    if (!(p > 0.0 && p < 1.0)) throw ValidationError("confidence must lie in (0, 1)");
    const auto date_text = opt.analysis_date ? opt.analysis_date : config_value<std::string>(cfg.doc, "analysis_date");
    // Default: the day after the last panel date, so every row is history.
    const Date analysis_date = date_text ? Date::parse(*date_text)
                                         : Date(panel.dates().back().days() + std::chrono::days{1});

    ConstraintSet constraints = ConstraintSet::full_investment_long_only(panel.cols());
    if (!opt.constraints.empty()) constraints = constraints_from_json(load_json_file(opt.constraints), panel.names());

    const auto& names = panel.names();
    ordered_json doc;
    doc["schema_version"] = 1;
    doc["command"] = "optimize";
    doc["objective"] = objective;
    doc["analysis_date"] = analysis_date.to_string();
    doc["confidence"] = p;

    OptimizationResult result;
    std::optional<Eigen::Index> scenario_count;
    if (objective == "shortfall") {
        const ScenarioSet scenarios = forecast_scenarios(panel, analysis_date, cfg.analysis, common.threads);
        scenario_count = scenarios.count();
        result = minimize_shortfall(scenarios, p, constraints);
    } else if (objective == "variance") {
        const CovarianceEstimate cov = ewma_covariance(panel, cfg.analysis.half_life_days, analysis_date);
        result = minimize_variance(cov, constraints);
    } else if (objective == "combined") {
        ObjectiveSpec spec;
        spec.confidence = p;
        spec.shortfall_aversion = pick(opt.shortfall_aversion, cfg.doc, "shortfall_aversion", 1.0);
        spec.variance_aversion = pick(opt.variance_aversion, cfg.doc, "variance_aversion", 1.0);
        spec.alpha = opt.alpha.empty() ? Eigen::VectorXd::Zero(panel.cols())
                                       : named_vector(load_json_file(opt.alpha), names, "alpha");
        doc["shortfall_aversion"] = spec.shortfall_aversion;
        doc["variance_aversion"] = spec.variance_aversion;
        const ScenarioSet scenarios = forecast_scenarios(panel, analysis_date, cfg.analysis, common.threads);
        scenario_count = scenarios.count();
        const CovarianceEstimate cov = ewma_covariance(panel, cfg.analysis.half_life_days, analysis_date);
        result = maximize_mean_variance_shortfall(scenarios, cov, spec, constraints);
    } else {
        throw ValidationError("unknown objective '" + objective + "' (shortfall, variance, combined)");
    }

    doc["weights"] = weights_json(result.weights, names);
    doc["objective_value"] = result.objective_value;
    doc["shortfall"] = result.shortfall ? ordered_json(result.shortfall->value) : ordered_json(nullptr);
    doc["variance"] = result.variance ? ordered_json(*result.variance) : ordered_json(nullptr);
    doc["scenario_count"] = scenario_count ? ordered_json(*scenario_count) : ordered_json(nullptr);
    doc["diagnostics"] = {{"feasibility_residual", result.diagnostics.feasibility_residual},
                          {"optimality_gap", result.diagnostics.optimality_gap},
                          {"iterations", result.diagnostics.iterations}};
    doc["config"] = config_to_json(cfg.analysis);
    write_file(dir / "optimize.json", doc.dump(2) + "\n");
    if (!common.quiet) out << "optimize: wrote " << (dir / "optimize.json").string() << "\n";
    return kExitOk;
}


struct BacktestOptions {
    std::string panel;
    std::optional<std::string> start;
    std::optional<std::string> end;
    std::optional<std::string> index_column;
    std::optional<double> style_bound;
    std::optional<int> beta_window;
    std::vector<double> confidences;
};

std::vector<Regime> regimes_from_json(const nlohmann::json& doc) {
    std::vector<Regime> regimes;
    if (!doc.contains("regimes")) return regimes;
    try {
        for (const auto& r : doc.at("regimes")) {
            Regime regime;
            regime.label = r.at("label").get<std::string>();
            for (const auto& range : r.at("ranges")) {
                if (!range.is_array() || range.size() != 2) throw ValidationError("regime range must be [first, last]");
                regime.ranges.push_back({Date::parse(range[0].get<std::string>()), Date::parse(range[1].get<std::string>())});
            }
            regimes.push_back(std::move(regime));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("config key 'regimes': ") + e.what());
    }
    return regimes;
}

int cmd_backtest(const CommonOptions& common, const BacktestOptions& opt, std::ostream& out) {
    const LoadedConfig cfg = load_config(common, {"start_date", "end_date", "index_column", "style_bound",
                                                  "beta_window", "regimes"});
    const ReturnPanel panel = read_panel(opt.panel);

    BacktestConfig bt;
    bt.confidences = opt.confidences.empty() ? cfg.analysis.confidence_levels : opt.confidences;
    bt.rebalance_frequency = cfg.analysis.rebalance_frequency;
    bt.half_life_days = cfg.analysis.half_life_days;
    bt.warmup_observations = cfg.analysis.warmup_observations;
    bt.eigen_floor = cfg.analysis.eigen_floor > 0.0 ? cfg.analysis.eigen_floor : 1e-300;
    bt.threads = common.threads;
    bt.index_column = pick(opt.index_column, cfg.doc, "index_column", panel.names().front());
    bt.style_bound = pick(opt.style_bound, cfg.doc, "style_bound", 2.0);
    const int beta_window = pick(opt.beta_window, cfg.doc, "beta_window", 504);
    if (beta_window < 2) throw ValidationError("beta_window must be >= 2");

    const auto start_text = opt.start ? opt.start : config_value<std::string>(cfg.doc, "start_date");
    const auto end_text = opt.end ? opt.end : config_value<std::string>(cfg.doc, "end_date");
    // Default start: the first date whose scenario set has a non-empty tail
    // at every confidence level.
    long scenarios_needed = 1;
    for (double p : bt.confidences) {
        while (tail_count(scenarios_needed, p) < 1) ++scenarios_needed;
    }
    const auto default_start = static_cast<std::size_t>(
        std::min<Eigen::Index>(bt.warmup_observations + scenarios_needed, panel.rows() - 1));
    bt.start_date = start_text ? Date::parse(*start_text) : panel.dates()[default_start];
    bt.end_date = end_text ? Date::parse(*end_text) : panel.dates().back();
    if (bt.start_date < panel.dates().front()) {
        throw InsufficientHistoryError("start date " + bt.start_date.to_string() + " precedes the panel (" +
                                       panel.dates().front().to_string() + ")");
    }

    const fs::path dir = prepare_out(common.out_dir);
    if (!common.quiet) out << "backtest: " << bt.start_date.to_string() << " to " << bt.end_date.to_string() << "\n";
    const BacktestReport report = run_backtest(panel, bt);

    std::vector<Regime> regimes{{"full", {{report.dates.front(), report.dates.back()}}}};
    for (auto& r : regimes_from_json(cfg.doc)) regimes.push_back(std::move(r));

    nlohmann::json run = {{"command", "backtest"},
                          {"config", config_to_json(cfg.analysis)},
                          {"confidences", bt.confidences},
                          {"start_date", bt.start_date.to_string()},
                          {"end_date", bt.end_date.to_string()},
                          {"style_bound", bt.style_bound},
                          {"beta_window", beta_window}};
    write_backtest_report(report, regimes, beta_window, dir, run);
    if (!common.quiet) {
        out << "backtest: " << report.rebalances.size() << " rebalances, " << report.dates.size()
            << " days, output in " << dir.string() << "\n";
    }
    return kExitOk;
}


struct EsterrorOptions {
    std::optional<int> assets;
    std::vector<int> lengths;
    std::optional<int> replications;
    std::vector<double> confidences;
    std::optional<int> baseline_samples;
};

int cmd_esterror(const CommonOptions& common, const EsterrorOptions& opt, std::ostream& out) {
    const LoadedConfig cfg = load_config(common, {"n_assets", "sample_lengths", "replications", "baseline_samples"});
    EstimationStudyConfig study;
    study.n_assets = pick(opt.assets, cfg.doc, "n_assets", 10);
    study.sample_lengths = opt.lengths.empty()
                               ? config_value<std::vector<int>>(cfg.doc, "sample_lengths").value_or(study.sample_lengths)
                               : opt.lengths;
    study.replications = pick(opt.replications, cfg.doc, "replications", 100);
    study.confidences = opt.confidences.empty() ? cfg.analysis.confidence_levels : opt.confidences;
    for (double p : study.confidences) {
        if (!(p > 0.0 && p < 1.0)) throw ValidationError("confidence must lie in (0, 1), got " + format_number(p));
    }
    study.seed = cfg.analysis.seed;
    study.threads = common.threads;
    const int baseline_samples = pick(opt.baseline_samples, cfg.doc, "baseline_samples", 100000);

    const fs::path dir = prepare_out(common.out_dir);
    if (!common.quiet) {
        out << "esterror: " << study.n_assets << " assets, " << study.sample_lengths.size() << " lengths x "
            << study.confidences.size() << " confidences x " << study.replications << " replications\n";
    }
    const auto reports = run_estimation_study(study);
    const double baseline = random_weight_baseline(study.n_assets, baseline_samples, study.seed);
    nlohmann::json run = {{"command", "esterror"},
                          {"seed", study.seed},
                          {"sample_lengths", study.sample_lengths},
                          {"confidences", study.confidences},
                          {"baseline_samples", baseline_samples}};
    write_estimation_study(reports, study, baseline, dir, run);
    if (!common.quiet) out << "esterror: output in " << dir.string() << "\n";
    return kExitOk;
}


struct NnOptions {
    std::string panel;
    std::optional<std::string> split;
    std::optional<std::string> first;
    std::optional<std::string> second;
    std::optional<int> replications;
    std::vector<double> confidences;
};

DateRange parse_range(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw ValidationError("date range must be FIRST:LAST, got '" + text + "'");
    DateRange r{Date::parse(text.substr(0, colon)), Date::parse(text.substr(colon + 1))};
    if (r.last < r.first) throw ValidationError("date range '" + text + "' is reversed");
    return r;
}

int cmd_nn(const CommonOptions& common, const NnOptions& opt, std::ostream& out) {
    const LoadedConfig cfg = load_config(common, {"split_date", "first_period", "second_period", "replications"});
    const ReturnPanel panel = read_panel(opt.panel);
    const int replications = pick(opt.replications, cfg.doc, "replications", 1000);
    const std::vector<double> confidences =
        opt.confidences.empty() ? cfg.analysis.confidence_levels : opt.confidences;
    for (double p : confidences) {
        if (!(p > 0.0 && p < 1.0)) throw ValidationError("confidence must lie in (0, 1), got " + format_number(p));
    }

    const Date far_past(1, 1, 1);
    const Date far_future(9999, 12, 31);
    DateRange first{far_past, far_future};
    DateRange second{far_past, far_future};
    const auto split_text = opt.split ? opt.split : config_value<std::string>(cfg.doc, "split_date");
    const auto first_text = opt.first ? opt.first : config_value<std::string>(cfg.doc, "first_period");
    const auto second_text = opt.second ? opt.second : config_value<std::string>(cfg.doc, "second_period");
    if (first_text && second_text) {
        first = parse_range(*first_text);
        second = parse_range(*second_text);
    } else if (split_text) {
        const Date split = Date::parse(*split_text);
        first.last = Date(split.days() - std::chrono::days{1});
        second.first = split;
    } else {
        throw ValidationError("nn needs --split or both --first and --second");
    }

    const fs::path dir = prepare_out(common.out_dir);
    // Each factor is scaled by its own trailing EWMA volatility, which makes
    // the matched volatility of the scaled series one.
    std::string csv =
        "name,tail,confidence,nn_first,first_low,first_high,nn_second,second_low,second_high,"
        "difference,difference_low,difference_high,persistence_rejected\n";
    ordered_json rows = ordered_json::array();
    for (Eigen::Index j = 0; j < panel.cols(); ++j) {
        const std::string& name = panel.names()[static_cast<std::size_t>(j)];
        const ReturnPanel column(panel.dates(), {name}, panel.returns().col(j));
        const NormalizedHistory g =
            normalize_history(column, cfg.analysis.half_life_days, cfg.analysis.warmup_observations,
                              cfg.analysis.eigen_floor > 0.0 ? cfg.analysis.eigen_floor : 1e-300, common.threads);
        std::vector<double> a, b;
        for (std::size_t t = 0; t < g.dates.size(); ++t) {
            const double v = g.residuals(static_cast<Eigen::Index>(t), 0);
            if (first.first <= g.dates[t] && g.dates[t] <= first.last) a.push_back(v);
            if (second.first <= g.dates[t] && g.dates[t] <= second.last) b.push_back(v);
        }
        if (a.empty() || b.empty()) {
            throw EmptyWindowError("factor '" + name + "': a comparison period has no normalized observations");
        }
        for (std::size_t ci = 0; ci < confidences.size(); ++ci) {
            for (const Tail tail : {Tail::loss, Tail::gain}) {
                const std::uint64_t seed =
                    derive_seed(cfg.analysis.seed, {static_cast<std::uint64_t>(j), ci, tail == Tail::loss ? 0u : 1u});
                const BootstrapComparison cmp =
                    bootstrap_nn_ci(a, b, confidences[ci], tail, replications, seed, 1.0, 1.0, common.threads);
                csv += name + "," + std::string(to_string(tail)) + "," + format_number(confidences[ci]);
                for (double v : {cmp.first.nn, cmp.first.ci_low, cmp.first.ci_high, cmp.second.nn, cmp.second.ci_low,
                                 cmp.second.ci_high, cmp.difference, cmp.difference_low, cmp.difference_high}) {
                    csv += "," + format_number(v);
                }
                csv += cmp.persistence_rejected() ? ",1\n" : ",0\n";
                rows.push_back({{"name", name},
                                {"tail", std::string(to_string(tail))},
                                {"confidence", confidences[ci]},
                                {"first", {{"nn", cmp.first.nn}, {"ci_low", cmp.first.ci_low}, {"ci_high", cmp.first.ci_high},
                                           {"observations", a.size()}}},
                                {"second", {{"nn", cmp.second.nn}, {"ci_low", cmp.second.ci_low}, {"ci_high", cmp.second.ci_high},
                                            {"observations", b.size()}}},
                                {"difference", {{"value", cmp.difference}, {"ci_low", cmp.difference_low},
                                                {"ci_high", cmp.difference_high}}},
                                {"persistence_rejected", cmp.persistence_rejected()}});
            }
        }
    }
    write_file(dir / "nn.csv", csv);
    ordered_json summary;
    summary["schema_version"] = 1;
    summary["command"] = "nn";
    summary["config"] = config_to_json(cfg.analysis);
    summary["replications"] = replications;
    summary["first_period"] = {first.first.to_string(), first.last.to_string()};
    summary["second_period"] = {second.first.to_string(), second.last.to_string()};
    summary["results"] = rows;
    write_file(dir / "nn_summary.json", summary.dump(2) + "\n");
    if (!common.quiet) out << "nn: " << rows.size() << " comparisons, output in " << dir.string() << "\n";
    return kExitOk;
}

int exit_code_for(const Error& e) {
    if (dynamic_cast<const InfeasibleError*>(&e)) return kExitInfeasible;
    if (dynamic_cast<const NumericalError*>(&e) || dynamic_cast<const UnboundedError*>(&e)) return kExitNumerical;
    return kExitInputError;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Shortfall portfolio optimization toolkit", "shortfall"};
    app.require_subcommand(1);

    CommonOptions common;

    OptimizeOptions opt_optimize;
    auto* optimize = app.add_subcommand("optimize", "Solve one portfolio problem at an analysis date");
    add_common(optimize, common);
    optimize->add_option("--panel", opt_optimize.panel, "Return panel CSV")->required();
    optimize->add_option("--constraints", opt_optimize.constraints, "Constraints JSON document");
    optimize->add_option("--alpha", opt_optimize.alpha, "Expected returns JSON (combined objective)");
    optimize->add_option("--objective", opt_optimize.objective, "shortfall | variance | combined");
    optimize->add_option("--confidence", opt_optimize.confidence, "Shortfall confidence level");
    optimize->add_option("--analysis-date", opt_optimize.analysis_date, "Analysis date (YYYY-MM-DD)");
    optimize->add_option("--shortfall-aversion", opt_optimize.shortfall_aversion);
    optimize->add_option("--variance-aversion", opt_optimize.variance_aversion);

    BacktestOptions opt_backtest;
    auto* backtest = app.add_subcommand("backtest", "Rolling minimum-shortfall vs minimum-variance backtest");
    add_common(backtest, common);
    backtest->add_option("--panel", opt_backtest.panel, "Return panel CSV")->required();
    backtest->add_option("--start", opt_backtest.start, "First backtest date");
    backtest->add_option("--end", opt_backtest.end, "Last backtest date");
    backtest->add_option("--index-column", opt_backtest.index_column);
    backtest->add_option("--style-bound", opt_backtest.style_bound);
    backtest->add_option("--beta-window", opt_backtest.beta_window);
    backtest->add_option("--confidence", opt_backtest.confidences, "Confidence levels")->delimiter(',');

    EsterrorOptions opt_esterror;
    auto* esterror = app.add_subcommand("esterror", "Monte Carlo estimation-error study");
    add_common(esterror, common);
    esterror->add_option("--assets", opt_esterror.assets);
    esterror->add_option("--lengths", opt_esterror.lengths, "Sample lengths")->delimiter(',');
    esterror->add_option("--replications", opt_esterror.replications);
    esterror->add_option("--confidence", opt_esterror.confidences, "Confidence levels")->delimiter(',');
    esterror->add_option("--baseline-samples", opt_esterror.baseline_samples);

    NnOptions opt_nn;
    auto* nn = app.add_subcommand("nn", "Non-normality statistics and bootstrap persistence test");
    add_common(nn, common);
    nn->add_option("--panel", opt_nn.panel, "Return panel CSV")->required();
    nn->add_option("--split", opt_nn.split, "Second period starts on this date");
    nn->add_option("--first", opt_nn.first, "First period FIRST:LAST");
    nn->add_option("--second", opt_nn.second, "Second period FIRST:LAST");
    nn->add_option("--replications", opt_nn.replications);
    nn->add_option("--confidence", opt_nn.confidences, "Confidence levels")->delimiter(',');

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: usage: " << e.what() << "\n";
        return kExitInputError;
    }

    try {
        if (*optimize) return cmd_optimize(common, opt_optimize, out);
        if (*backtest) return cmd_backtest(common, opt_backtest, out);
        if (*esterror) return cmd_esterror(common, opt_esterror, out);
        return cmd_nn(common, opt_nn, out);
    } catch (const Error& e) {
        err << "error: " << e.category() << ": " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const fs::filesystem_error& e) {
        err << "error: io: " << e.what() << "\n";
        return kExitInputError;
    } catch (const std::exception& e) {
        err << "error: internal: " << e.what() << "\n";
        return kExitNumerical;
    }
}

}  // namespace shortfall
