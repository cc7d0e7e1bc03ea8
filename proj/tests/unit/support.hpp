#pragma once

#include <chrono>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "shortfall/date.hpp"
#include "shortfall/panel.hpp"

namespace testing {

inline Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = normal(rng);
    }
    return m;
}

inline std::vector<double> gaussian_draws(std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> v(count);
    for (auto& x : v) x = normal(rng);
    return v;
}

inline std::vector<shortfall::Date> consecutive_days(std::size_t count, shortfall::Date first = {2000, 1, 3}) {
    std::vector<shortfall::Date> dates;
    dates.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        dates.emplace_back(first.days() + std::chrono::days{static_cast<int>(i)});
    }
    return dates;
}

inline std::vector<std::string> column_names(Eigen::Index n) {
    std::vector<std::string> names;
    for (Eigen::Index j = 0; j < n; ++j) names.push_back("F" + std::to_string(j));
    return names;
}

inline shortfall::ReturnPanel panel_from(const Eigen::MatrixXd& returns, shortfall::Date first = {2000, 1, 3}) {
    return shortfall::ReturnPanel(consecutive_days(static_cast<std::size_t>(returns.rows()), first),
                                  column_names(returns.cols()), returns);
}

/// Random symmetric positive-definite matrix.
inline Eigen::MatrixXd random_spd(Eigen::Index n, std::uint64_t seed) {
    const Eigen::MatrixXd a = gaussian_matrix(n, n, seed);
    return a * a.transpose() + 0.5 * Eigen::MatrixXd::Identity(n, n);
}

/// Standard normal CDF from the complementary error function.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// Gaussian expected shortfall at level p by quadrature: the quantile by
/// bisection of the CDF, then Simpson's rule for the tail mean of x phi(x).
inline double gaussian_shortfall_by_quadrature(double p) {
    double lo = -10.0, hi = 10.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (normal_cdf(mid) < p ? lo : hi) = mid;
    }
    const double q = 0.5 * (lo + hi);
    const int intervals = 200000;
    const double upper = 40.0;
    const double h = (upper - q) / intervals;
    auto f = [](double x) { return x * std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); };
    double sum = f(q) + f(upper);
    for (int i = 1; i < intervals; ++i) sum += f(q + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
    return sum * h / 3.0 / (1.0 - p);
}

/// Fresh empty directory under the system temp directory.
inline std::filesystem::path scratch_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("shortfall_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace testing
