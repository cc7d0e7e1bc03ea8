#include "shortfall/risk.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/special_functions/erf.hpp>

#include "shortfall/errors.hpp"
#include "shortfall/parallel.hpp"
#include "shortfall/random.hpp"

namespace shortfall {

std::string_view to_string(Tail tail) { return tail == Tail::loss ? "loss" : "gain"; }

Tail parse_tail(std::string_view text) {
    if (text == "loss") return Tail::loss;
    if (text == "gain") return Tail::gain;
    throw ValidationError("unknown tail '" + std::string(text) + "'");
}

long tail_count(long sample_size, double p) {
    if (!(p > 0.0 && p < 1.0)) throw ValidationError("confidence must lie in (0, 1)");
    if (sample_size < 0) throw ValidationError("negative sample size");
    const double exact = static_cast<double>(sample_size) * (1.0 - p);
    // 1 - p is inexact in binary; absorb the representation error before flooring.
    return static_cast<long>(std::floor(exact + 1e-9 * std::max(1.0, exact)));
}

ShortfallValue empirical_shortfall(std::span<const double> returns, double p) {
    const long k = tail_count(static_cast<long>(returns.size()), p);
    if (k < 1) {
        throw DegenerateTailError("tail is empty: T = " + std::to_string(returns.size()) +
                                  ", p = " + std::to_string(p));
    }
    std::vector<double> sorted(returns.begin(), returns.end());
    const auto kth = sorted.begin() + (k - 1);
    std::nth_element(sorted.begin(), kth, sorted.end());
    std::sort(sorted.begin(), kth + 1);
    double sum = 0.0;
    for (auto it = sorted.begin(); it != kth + 1; ++it) sum += *it;
    return ShortfallValue{-sum / static_cast<double>(k), p, k};
}

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw ValidationError("quantile level must lie in (0, 1)");
    return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

double normal_shortfall(double sigma, double p) {
    if (!(p > 0.0 && p < 1.0)) throw ValidationError("confidence must lie in (0, 1)");
    if (!(sigma >= 0.0)) throw ValidationError("volatility must be nonnegative");
    const double z = normal_quantile(p);
    const double density = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
    return sigma * density / (1.0 - p);
}

double nn_statistic(std::span<const double> sample, double p, Tail tail, double sigma_matched) {
    if (!(sigma_matched > 0.0)) throw ValidationError("matched volatility must be positive");
    ShortfallValue s;
    if (tail == Tail::gain) {
        std::vector<double> negated(sample.size());
        std::transform(sample.begin(), sample.end(), negated.begin(), [](double x) { return -x; });
        s = empirical_shortfall(negated, p);
    } else {
        s = empirical_shortfall(sample, p);
    }
    return s.value / normal_shortfall(sigma_matched, p) - 1.0;
}

double percentile(std::vector<double> data, double q) {
    if (data.empty()) throw ValidationError("percentile of empty data");
    std::sort(data.begin(), data.end());
    const double pos = q * static_cast<double>(data.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, data.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return data[lo] + frac * (data[hi] - data[lo]);
}

namespace {

void resample(std::span<const double> source, Rng& rng, std::vector<double>& out) {
    std::uniform_int_distribution<std::size_t> pick(0, source.size() - 1);
    out.resize(source.size());
    for (auto& x : out) x = source[pick(rng)];
}

NNReport make_report(double nn, const std::vector<double>& draws, Tail tail, double p) {
    // The percentile interval can miss a skewed point estimate; widen it to cover nn.
    const double lo = percentile(draws, 0.025);
    const double hi = percentile(draws, 0.975);
    return NNReport{nn, std::min(lo, nn), std::max(hi, nn), tail, p};
}

}  // namespace

BootstrapComparison bootstrap_nn_ci(std::span<const double> first, std::span<const double> second,
                                    double p, Tail tail, int replications, std::uint64_t seed,
                                    double sigma_first, double sigma_second, int threads) {
    if (replications < 100) throw ValidationError("bootstrap needs at least 100 replications");
    const double nn_first = nn_statistic(first, p, tail, sigma_first);
    const double nn_second = nn_statistic(second, p, tail, sigma_second);

    const auto reps = static_cast<std::size_t>(replications);
    std::vector<double> draws_first(reps), draws_second(reps), draws_diff(reps);
    parallel_for(reps, threads, [&](std::size_t r) {
        Rng rng_first(derive_seed(seed, {r, 0}));
        Rng rng_second(derive_seed(seed, {r, 1}));
        std::vector<double> buffer;
        resample(first, rng_first, buffer);
        draws_first[r] = nn_statistic(buffer, p, tail, sigma_first);
        resample(second, rng_second, buffer);
        draws_second[r] = nn_statistic(buffer, p, tail, sigma_second);
        draws_diff[r] = draws_first[r] - draws_second[r];
    });

    BootstrapComparison out;
    out.first = make_report(nn_first, draws_first, tail, p);
    out.second = make_report(nn_second, draws_second, tail, p);
    out.difference = nn_first - nn_second;
    out.difference_low = std::min(percentile(draws_diff, 0.025), out.difference);
    out.difference_high = std::max(percentile(draws_diff, 0.975), out.difference);
    out.replications = replications;
    return out;
}

namespace {

struct Moments {
    double mean;
    double sd;
};

Moments sample_moments(std::span<const double> x) {
    if (x.size() < 2) throw ValidationError("need at least 2 returns");
    const double n = static_cast<double>(x.size());
    double sum = 0.0;
    for (double v : x) sum += v;
    const double mean = sum / n;
    double ss = 0.0;
    double s = 0.0;
    for (double v : x) {
        ss += (v - mean) * (v - mean);
        s += v - mean;
    }
    // Corrected two-pass: removes the rounding error of the mean.
    const double var = std::max(0.0, (ss - s * s / n) / (n - 1.0));
    return {mean, std::sqrt(var)};
}

}  // namespace

double realized_volatility(std::span<const double> returns, int periods_per_year) {
    if (periods_per_year < 1) throw ValidationError("periods_per_year must be positive");
    return sample_moments(returns).sd * std::sqrt(static_cast<double>(periods_per_year));
}

double sharpe_ratio(std::span<const double> returns, int periods_per_year) {
    if (periods_per_year < 1) throw ValidationError("periods_per_year must be positive");
    const Moments m = sample_moments(returns);
    double scale = 0.0;
    for (double v : returns) scale = std::max(scale, std::abs(v));
    if (m.sd <= 1e-14 * scale || m.sd == 0.0) {
        throw ZeroVolatilityError("Sharpe ratio undefined for a series with zero volatility");
    }
    const double ppy = static_cast<double>(periods_per_year);
    return (m.mean * ppy) / (m.sd * std::sqrt(ppy));
}

DatedSeries rolling_beta(const DatedSeries& portfolio, const DatedSeries& market, int window) {
    if (window < 2) throw ValidationError("rolling window must be >= 2");
    if (portfolio.dates != market.dates || portfolio.values.size() != portfolio.dates.size() ||
        market.values.size() != market.dates.size()) {
        throw ValidationError("portfolio and market series must share one date axis");
    }
    DatedSeries out;
    const std::size_t w = static_cast<std::size_t>(window);
    for (std::size_t end = w; end <= market.values.size(); ++end) {
        const std::size_t begin = end - w;
        double mp = 0.0;
        double mm = 0.0;
        for (std::size_t i = begin; i < end; ++i) {
            mp += portfolio.values[i];
            mm += market.values[i];
        }
        mp /= static_cast<double>(w);
        mm /= static_cast<double>(w);
        double cov = 0.0;
        double var = 0.0;
        double scale = 0.0;
        for (std::size_t i = begin; i < end; ++i) {
            const double dm = market.values[i] - mm;
            cov += (portfolio.values[i] - mp) * dm;
            var += dm * dm;
            scale = std::max(scale, std::abs(market.values[i]));
        }
        if (var <= 1e-28 * scale * scale * static_cast<double>(w) || var == 0.0) {
            throw ZeroVarianceError("market is flat in the window ending " +
                                    market.dates[end - 1].to_string());
        }
        out.dates.push_back(market.dates[end - 1]);
        out.values.push_back(cov / var);
    }
    return out;
}

}  // namespace shortfall
