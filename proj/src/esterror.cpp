#include "shortfall/esterror.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include "shortfall/errors.hpp"
#include "shortfall/format.hpp"
#include "shortfall/optimize.hpp"
#include "shortfall/parallel.hpp"
#include "shortfall/random.hpp"
#include "shortfall/risk.hpp"

namespace shortfall {

double weight_error_angle(const Eigen::VectorXd& w, const Eigen::VectorXd& w_true) {
    if (w.size() != w_true.size()) throw ValidationError("weight vectors differ in length");
    const double nw = w.norm();
    const double nt = w_true.norm();
    if (!(nw > 0.0) || !(nt > 0.0)) throw ZeroVectorError("angle undefined for a zero weight vector");
    const double cosine = std::clamp(w.dot(w_true) / (nw * nt), -1.0, 1.0);
    return std::acos(cosine) * 180.0 / std::numbers::pi;
}

double boundary_angle(int n) {
    if (n < 1) throw ValidationError("simplex dimension must be >= 1");
    const double dim = static_cast<double>(n);
    // log V_feasible = 0.5 log(n+1) - log n!
    const double log_feasible = 0.5 * std::log(dim + 1.0) - std::lgamma(dim + 1.0);
    // Unit n-ball volume pi^(n/2) / Gamma(n/2 + 1).
    const double log_unit_ball = 0.5 * dim * std::log(std::numbers::pi) - std::lgamma(0.5 * dim + 1.0);
    const double log_radius = (log_feasible - std::log(2.0) - log_unit_ball) / dim;
    const double radius = std::exp(log_radius);
    const double optimum_length = 1.0 / std::sqrt(dim + 1.0);
    return std::atan(radius / optimum_length) * 180.0 / std::numbers::pi;
}

double random_weight_baseline(int n_assets, int samples, std::uint64_t seed) {
    if (n_assets < 1 || samples < 1) throw ValidationError("need n_assets >= 1 and samples >= 1");
    Rng rng(derive_seed(seed, {0x62617365ULL}));
    std::exponential_distribution<double> expo(1.0);
    const Eigen::VectorXd equal = Eigen::VectorXd::Constant(n_assets, 1.0 / n_assets);
    Eigen::VectorXd w(n_assets);
    double total = 0.0;
    for (int s = 0; s < samples; ++s) {
        for (int i = 0; i < n_assets; ++i) w(i) = expo(rng);
        w /= w.sum();
        total += weight_error_angle(w, equal);
    }
    return total / samples;
}

std::vector<TrialReport> run_estimation_study(const EstimationStudyConfig& config) {
    const int n = config.n_assets;
    if (n < 2) throw ValidationError("estimation study needs at least 2 assets");
    if (config.replications < 1) throw ValidationError("replications must be >= 1");
    if (config.sample_lengths.empty() || config.confidences.empty()) {
        throw ValidationError("sample_lengths and confidences must be non-empty");
    }
    for (int t : config.sample_lengths) {
        if (t < 1) throw ValidationError("sample lengths must be positive");
        for (double p : config.confidences) {
            if (tail_count(t, p) < 1) {
                throw DegenerateTailError("sample length " + std::to_string(t) + " has an empty tail at p = " +
                                          std::to_string(p));
            }
        }
    }

    const std::size_t lengths = config.sample_lengths.size();
    const std::size_t levels = config.confidences.size();
    const auto reps = static_cast<std::size_t>(config.replications);
    const ConstraintSet constraints = ConstraintSet::full_investment_long_only(n);
    const Eigen::VectorXd equal = Eigen::VectorXd::Constant(n, 1.0 / n);
    const double optimum_sigma = 1.0 / std::sqrt(static_cast<double>(n));

    // Per (length, replication) task; one slot per confidence.
    std::vector<double> risk(lengths * reps * levels), angle(lengths * reps * levels);
    parallel_for(lengths * reps, config.threads, [&](std::size_t task) {
        const std::size_t li = task / reps;
        const std::size_t r = task % reps;
        const int t = config.sample_lengths[li];
        Rng rng(derive_seed(config.seed, {static_cast<std::uint64_t>(t), r}));
        std::normal_distribution<double> normal(0.0, 1.0);
        Eigen::MatrixXd sample(t, n);
        for (int i = 0; i < t; ++i) {
            for (int j = 0; j < n; ++j) sample(i, j) = normal(rng);
        }
        for (std::size_t ci = 0; ci < levels; ++ci) {
            const double p = config.confidences[ci];
            OptimizationResult result;
            try {
                result = minimize_shortfall(sample, p, constraints);
            } catch (const Error& e) {
                throw NumericalError("estimation trial T=" + std::to_string(t) + " p=" + std::to_string(p) +
                                     " replication " + std::to_string(r) + ": " + e.what());
            }
            const std::size_t slot = (li * reps + r) * levels + ci;
            // Population shortfall of i.i.d. N(0,1) assets depends on w only through |w|.
            risk[slot] = normal_shortfall(result.weights.norm(), p) / normal_shortfall(optimum_sigma, p);
            angle[slot] = weight_error_angle(result.weights, equal);
        }
    });

    std::vector<TrialReport> reports;
    const double beta = boundary_angle(n - 1);
    for (std::size_t li = 0; li < lengths; ++li) {
        for (std::size_t ci = 0; ci < levels; ++ci) {
            double risk_sum = 0.0;
            double angle_sum = 0.0;
            for (std::size_t r = 0; r < reps; ++r) {
                const std::size_t slot = (li * reps + r) * levels + ci;
                risk_sum += risk[slot];
                angle_sum += angle[slot];
            }
            reports.push_back(TrialReport{n, config.sample_lengths[li], config.confidences[ci],
                                          config.replications, risk_sum / static_cast<double>(reps),
                                          angle_sum / static_cast<double>(reps), beta});
        }
    }
    return reports;
}

void write_estimation_study(const std::vector<TrialReport>& reports, const EstimationStudyConfig& config,
                            double baseline_deg, const std::filesystem::path& directory,
                            const nlohmann::json& run_info) {
    const std::size_t levels = config.confidences.size();
    if (reports.size() != config.sample_lengths.size() * levels) {
        throw ValidationError("study reports do not match the configured grid");
    }
    std::filesystem::create_directories(directory);
    auto write_grid = [&](const std::string& file, double TrialReport::*metric) {
        std::string text = "sample_length";
        for (double p : config.confidences) text += "," + format_number(p);
        text += "\n";
        for (std::size_t li = 0; li < config.sample_lengths.size(); ++li) {
            text += std::to_string(config.sample_lengths[li]);
            for (std::size_t ci = 0; ci < levels; ++ci) text += "," + format_number(reports[li * levels + ci].*metric);
            text += "\n";
        }
        std::ofstream out(directory / file, std::ios::binary | std::ios::trunc);
        if (!out) throw ValidationError("cannot write " + (directory / file).string());
        out << text;
    };
    write_grid("risk_error.csv", &TrialReport::mean_risk_error);
    write_grid("weight_error.csv", &TrialReport::mean_weight_error_deg);

    nlohmann::json summary;
    summary["schema_version"] = 1;
    summary["run"] = run_info;
    summary["n_assets"] = config.n_assets;
    summary["replications"] = config.replications;
    summary["boundary_angle_deg"] = boundary_angle(config.n_assets - 1);
    summary["random_weight_baseline_deg"] = baseline_deg;
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& r : reports) {
        cells.push_back({{"sample_length", r.sample_length},
                         {"confidence", r.confidence},
                         {"mean_risk_error", r.mean_risk_error},
                         {"mean_weight_error_deg", r.mean_weight_error_deg}});
    }
    summary["cells"] = cells;
    std::ofstream out(directory / "esterror_summary.json", std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write esterror_summary.json");
    out << summary.dump(2) << "\n";
}

}  // namespace shortfall
