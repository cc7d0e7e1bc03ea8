#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "shortfall/config.hpp"
#include "shortfall/date.hpp"
#include "shortfall/optimize.hpp"
#include "shortfall/panel.hpp"
#include "shortfall/risk.hpp"

namespace shortfall {

struct BacktestConfig {
    std::vector<double> confidences{0.60, 0.90, 0.95, 0.99};
    RebalanceFrequency rebalance_frequency = RebalanceFrequency::monthly;
    int half_life_days = 21;
    Date start_date;
    Date end_date;  ///< inclusive
    std::string index_column;  ///< empty: the first panel column
    double style_bound = 2.0;
    int warmup_observations = 252;
    double eigen_floor = 1e-12;  ///< relative, as in AnalysisConfig
    int threads = 1;

    /// Throws ValidationError for out-of-range fields or an unknown index column.
    void validate(const ReturnPanel& panel) const;
};

/// Weights chosen at one rebalance date (from data strictly before it).
struct RebalanceRecord {
    Date date;
    Eigen::Index scenario_count = 0;
    Eigen::VectorXd min_variance;
    Diagnostics min_variance_diagnostics;
    std::vector<Eigen::VectorXd> min_shortfall;  ///< one per confidence
    std::vector<Diagnostics> min_shortfall_diagnostics;
};

struct BacktestReport {
    std::vector<std::string> names;
    std::string index_column;
    Eigen::Index index_position = 0;
    std::vector<double> confidences;

    std::vector<Date> dates;        ///< backtest date axis
    Eigen::MatrixXd factor_returns;  ///< panel rows on the axis
    std::vector<std::size_t> holding;  ///< rebalance in force on each date
    std::vector<RebalanceRecord> rebalances;

    std::vector<double> index_returns;
    std::vector<double> min_variance_returns;
    std::vector<std::vector<double>> min_shortfall_returns;  ///< [confidence][date]
    std::vector<std::vector<double>> active_returns;         ///< shortfall minus variance

    /// Position of `p` in `confidences`. Throws UnknownConfidenceError.
    std::size_t confidence_index(double p) const;

    /// Active weights (min-shortfall minus min-variance) of one rebalance.
    Eigen::VectorXd active_weights(std::size_t rebalance, std::size_t confidence) const;
};

/// Rebalance dates: the first panel date on or after `start`, then the first
/// panel date of every later day / ISO week / month / quarter up to `end`.
std::vector<Date> rebalance_schedule(const std::vector<Date>& dates, const Date& start, const Date& end,
                                     RebalanceFrequency frequency);

/// Rolling rebalance of the minimum-variance and minimum-shortfall portfolios
/// under the index/style constraint set. Weights set at a rebalance date apply
/// to that date's returns and every later one until the next rebalance.
BacktestReport run_backtest(const ReturnPanel& panel, const BacktestConfig& config);

/// Running sum and running compounded growth (prod(1 + r) - 1).
std::vector<double> cumulative_simple(const std::vector<double>& returns);
std::vector<double> cumulative_compounded(const std::vector<double>& returns);

/// Per-factor cumulative contributions to the active return at confidence
/// `p`: the running sum of excess exposure times factor return. The row sums
/// equal the simple-sum cumulative active return.
struct Attribution {
    std::vector<Date> dates;
    std::vector<std::string> names;
    Eigen::MatrixXd cumulative;  ///< dates x factors
};
Attribution return_attribution(const BacktestReport& report, double p);

/// Closed date range [first, last].
struct DateRange {
    Date first;
    Date last;
};

struct Regime {
    std::string label;
    std::vector<DateRange> ranges;
};

struct RealizedStats {
    std::string strategy;
    std::string regime;
    long observations = 0;
    double volatility = 0.0;
    std::optional<double> sharpe;    ///< empty for a flat series
    std::optional<double> shortfall;  ///< 95% shortfall; empty when the tail is empty
};

/// Strategy series keyed by label: index, minvar, xsf<pct>, active<pct>.
struct StrategySeries {
    std::string label;
    const std::vector<double>* returns;
};
std::vector<StrategySeries> strategy_series(const BacktestReport& report);

/// Label suffix of a confidence level, e.g. 0.6 -> "60", 0.975 -> "97.5".
std::string confidence_label(double p);

/// Volatility, Sharpe ratio and 95% shortfall per strategy and regime.
/// Throws EmptyRegimeError when a regime selects no backtest date.
std::vector<RealizedStats> realized_stats_table(const BacktestReport& report, const std::vector<Regime>& regimes);

/// Rolling beta of each non-index strategy against the index column.
std::vector<std::pair<std::string, DatedSeries>> strategy_betas(const BacktestReport& report, int window);

/// Writes returns_*, weights_*, attribution_*, beta_* CSV files and
/// summary.json into `directory`.
void write_backtest_report(const BacktestReport& report, const std::vector<Regime>& regimes, int beta_window,
                           const std::filesystem::path& directory, const nlohmann::json& run_info);

}  // namespace shortfall
