#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace shortfall {

/// Averages over the replications of one (sample length, confidence) cell.
struct TrialReport {
    int n_assets = 0;
    int sample_length = 0;
    double confidence = 0.0;
    int replications = 0;
    double mean_risk_error = 0.0;        ///< mean of true shortfall(w) / true minimum shortfall
    double mean_weight_error_deg = 0.0;  ///< mean angle between w and the equal-weight optimum
    double boundary_angle_deg = 0.0;
};

/// Angle between two weight vectors in degrees. Throws ZeroVectorError.
double weight_error_angle(const Eigen::VectorXd& w, const Eigen::VectorXd& w_true);

/// Half-volume boundary angle for a simplex of dimension n (n + 1 assets):
/// the radius of the n-ball holding half the volume sqrt(n+1)/n! of the
/// feasible simplex, seen from the equal-weight vector of length 1/sqrt(n+1).
double boundary_angle(int n);

/// Mean angle between uniform random simplex points and equal weights.
double random_weight_baseline(int n_assets, int samples, std::uint64_t seed);

struct EstimationStudyConfig {
    int n_assets = 10;
    std::vector<int> sample_lengths{1000, 3000, 5000, 7000};
    std::vector<double> confidences{0.60, 0.90, 0.95, 0.99};
    int replications = 100;
    std::uint64_t seed = 0;
    int threads = 1;
};

/// Monte Carlo study of shortfall minimization on i.i.d. standard normal
/// returns under full investment + long-only constraints. Replication r at
/// sample length T draws from the stream (seed, T, r) and is reused across
/// confidences. Reports are ordered by sample length, then confidence.
std::vector<TrialReport> run_estimation_study(const EstimationStudyConfig& config);

/// risk_error.csv and weight_error.csv (one row per sample length, one
/// column per confidence) plus esterror_summary.json.
void write_estimation_study(const std::vector<TrialReport>& reports, const EstimationStudyConfig& config,
                            double baseline_deg, const std::filesystem::path& directory,
                            const nlohmann::json& run_info);

}  // namespace shortfall
