#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "shortfall/config.hpp"
#include "shortfall/date.hpp"
#include "shortfall/panel.hpp"

namespace shortfall {

/// Forecast return scenarios for one analysis date: each historical row is
/// stripped of the covariance prevailing at its own date and rescaled by
/// the covariance at the analysis date.
struct ScenarioSet {
    Date analysis_date;
    std::vector<std::string> names;
    Eigen::MatrixXd scenarios;       ///< T' x N, one row per source date
    std::vector<Date> source_dates;  ///< historical date of each row, ascending

    Eigen::Index count() const { return scenarios.rows(); }
    ReturnPanel to_panel() const;
};

/// Uncorrelated returns g_t = Sigma_t^{-1/2} f_t for every row after the warmup.
struct NormalizedHistory {
    std::vector<Date> dates;          ///< dates of the retained rows
    std::vector<std::string> names;
    Eigen::MatrixXd residuals;        ///< one row per retained date
    Eigen::Index first_row = 0;       ///< panel row of residuals.row(0)
};

/// Sigma_t is the EWMA covariance of all rows strictly before t. The first
/// `warmup` rows only seed Sigma_t and are not emitted. `relative_floor`
/// lifts eigenvalues of each Sigma_t below relative_floor * its largest
/// eigenvalue. Throws InsufficientHistoryError when rows <= warmup.
NormalizedHistory normalize_history(const ReturnPanel& panel, int half_life_days, int warmup,
                                    double relative_floor, int threads = 1);

/// Scenarios for `analysis_date` built from an already normalized history:
/// the rows of `history` dated strictly before the analysis date, each
/// multiplied by Sigma_T^{1/2}.
ScenarioSet scenarios_from_history(const NormalizedHistory& history, const ReturnPanel& panel,
                                   const Date& analysis_date, const AnalysisConfig& config);

/// Full pipeline for a single analysis date.
ScenarioSet forecast_scenarios(const ReturnPanel& panel, const Date& analysis_date,
                               const AnalysisConfig& config, int threads = 1);

}  // namespace shortfall
