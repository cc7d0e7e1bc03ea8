#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "shortfall/date.hpp"

namespace shortfall {

/// Expected tail loss. Positive `value` means a loss.
struct ShortfallValue {
    double value = 0.0;
    double confidence = 0.0;
    long tail_count = 0;  ///< K = floor(T (1 - p))
};

enum class Tail { loss, gain };
std::string_view to_string(Tail tail);
Tail parse_tail(std::string_view text);

struct NNReport {
    double nn = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    Tail tail = Tail::loss;
    double confidence = 0.0;
};

struct BootstrapComparison {
    NNReport first;
    NNReport second;
    double difference = 0.0;  ///< first.nn - second.nn
    double difference_low = 0.0;
    double difference_high = 0.0;
    int replications = 0;

    /// Persistence is rejected when the difference interval excludes zero.
    bool persistence_rejected() const { return difference_low > 0.0 || difference_high < 0.0; }
};

/// Periods per year used for annualization of daily data.
inline constexpr int kTradingDaysPerYear = 252;

/// K = floor(T (1 - p)), robust to the binary representation of p
/// (e.g. T = 10, p = 0.9 gives 1, not 0).
long tail_count(long sample_size, double p);

/// -(1/K) * sum of the K smallest returns. Throws DegenerateTailError when K = 0.
ShortfallValue empirical_shortfall(std::span<const double> returns, double p);

/// Zero-mean Gaussian expected shortfall sigma * phi(Phi^-1(p)) / (1 - p).
double normal_shortfall(double sigma, double p);

/// Standard normal quantile.
double normal_quantile(double p);

/// Non-normality: empirical shortfall of the tail over the Gaussian
/// shortfall at the matched volatility, minus one. The gain tail negates
/// the sample first.
double nn_statistic(std::span<const double> sample, double p, Tail tail, double sigma_matched);

/// Independent with-replacement resampling of both samples; percentile 95%
/// intervals for each NN and for their difference. Replicate r draws from
/// streams derived from (seed, r), so results do not depend on `threads`.
BootstrapComparison bootstrap_nn_ci(std::span<const double> first, std::span<const double> second,
                                    double p, Tail tail, int replications, std::uint64_t seed,
                                    double sigma_first = 1.0, double sigma_second = 1.0,
                                    int threads = 1);

/// Sample standard deviation (divisor T-1) times sqrt(periods_per_year).
double realized_volatility(std::span<const double> returns, int periods_per_year = kTradingDaysPerYear);

/// Annualized mean over annualized volatility; no risk-free adjustment.
/// Throws ZeroVolatilityError on a flat series.
double sharpe_ratio(std::span<const double> returns, int periods_per_year = kTradingDaysPerYear);

struct DatedSeries {
    std::vector<Date> dates;
    std::vector<double> values;
};

/// Trailing-window OLS slope of `portfolio` on `market` (sample moments),
/// one value per date with a full window. Throws ZeroVarianceError when
/// the market is flat over a window.
DatedSeries rolling_beta(const DatedSeries& portfolio, const DatedSeries& market, int window = 504);

/// Linear-interpolation percentile (q in [0, 1]) of unsorted data.
double percentile(std::vector<double> data, double q);

}  // namespace shortfall
