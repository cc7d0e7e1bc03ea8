#include "shortfall/scenario.hpp"

#include <algorithm>

#include "shortfall/covariance.hpp"
#include "shortfall/errors.hpp"
#include "shortfall/parallel.hpp"

namespace shortfall {

ReturnPanel ScenarioSet::to_panel() const { return ReturnPanel(source_dates, names, scenarios); }

NormalizedHistory normalize_history(const ReturnPanel& panel, int half_life_days, int warmup,
                                    double relative_floor, int threads) {
    if (warmup < 2) throw ValidationError("warmup must be >= 2");
    if (!(relative_floor > 0.0)) throw ValidationError("eigen floor must be positive");
    const Eigen::Index rows = panel.rows();
    const Eigen::Index n = panel.cols();
    if (rows <= warmup) {
        throw InsufficientHistoryError("need more than " + std::to_string(warmup) +
                                       " observations to normalize history, have " +
                                       std::to_string(rows));
    }
    const double decay = ewma_decay(half_life_days);
    const Eigen::MatrixXd& f = panel.returns();

    // Running weighted sums reproduce 2^(-age/h)-weighted estimates as of each date.
    const Eigen::Index retained = rows - warmup;
    std::vector<Eigen::MatrixXd> sigmas(static_cast<std::size_t>(retained));
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(n, n);
    double weight_sum = 0.0;
    for (Eigen::Index t = 0; t < rows; ++t) {
        if (t >= warmup) sigmas[static_cast<std::size_t>(t - warmup)] = sum / weight_sum;
        sum *= decay;
        sum.noalias() += f.row(t).transpose() * f.row(t);
        weight_sum = weight_sum * decay + 1.0;
    }

    NormalizedHistory out;
    out.names = panel.names();
    out.first_row = warmup;
    out.dates.assign(panel.dates().begin() + warmup, panel.dates().end());
    out.residuals.resize(retained, n);
    parallel_for(static_cast<std::size_t>(retained), threads, [&](std::size_t i) {
        const auto& sigma = sigmas[i];
        const Eigen::MatrixXd inv_sqrt = matrix_inv_sqrt(sigma, absolute_floor(sigma, relative_floor));
        const Eigen::Index t = warmup + static_cast<Eigen::Index>(i);
        out.residuals.row(static_cast<Eigen::Index>(i)) = (inv_sqrt * f.row(t).transpose()).transpose();
    });
    return out;
}

ScenarioSet scenarios_from_history(const NormalizedHistory& history, const ReturnPanel& panel,
                                   const Date& analysis_date, const AnalysisConfig& config) {
    const Eigen::Index prior = panel.count_before(analysis_date);
    if (prior <= config.warmup_observations) {
        throw InsufficientHistoryError("analysis date " + analysis_date.to_string() + " has " +
                                       std::to_string(prior) + " prior observations; need more than " +
                                       std::to_string(config.warmup_observations));
    }
    if (history.first_row != config.warmup_observations || history.names != panel.names()) {
        throw ValidationError("normalized history does not match panel/config");
    }
    const Eigen::Index available =
        static_cast<Eigen::Index>(std::lower_bound(history.dates.begin(), history.dates.end(),
                                                   analysis_date) -
                                  history.dates.begin());
    const Eigen::Index count = prior - config.warmup_observations;
    if (available < count) throw ValidationError("normalized history is shorter than the panel prefix");

    const Eigen::MatrixXd sigma_now = ewma_covariance(panel.returns(), prior, config.half_life_days);
    const Eigen::MatrixXd sqrt_now = matrix_sqrt(sigma_now, absolute_floor(sigma_now, config.eigen_floor));

    ScenarioSet out;
    out.analysis_date = analysis_date;
    out.names = panel.names();
    out.source_dates.assign(history.dates.begin(), history.dates.begin() + count);
    // Rows of g are row vectors, so f~' = g' * S (S symmetric).
    out.scenarios.noalias() = history.residuals.topRows(count) * sqrt_now;
    return out;
}

ScenarioSet forecast_scenarios(const ReturnPanel& panel, const Date& analysis_date,
                               const AnalysisConfig& config, int threads) {
    config.validate();
    const Eigen::Index prior = panel.count_before(analysis_date);
    if (prior <= config.warmup_observations) {
        throw InsufficientHistoryError("analysis date " + analysis_date.to_string() + " has " +
                                       std::to_string(prior) + " prior observations; need more than " +
                                       std::to_string(config.warmup_observations));
    }
    const ReturnPanel prefix = panel.slice_rows(0, prior);
    const double floor = config.eigen_floor > 0.0 ? config.eigen_floor : 1e-300;
    const NormalizedHistory history =
        normalize_history(prefix, config.half_life_days, config.warmup_observations, floor, threads);
    return scenarios_from_history(history, prefix, analysis_date, config);
}

}  // namespace shortfall
