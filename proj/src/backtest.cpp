#include "shortfall/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "shortfall/covariance.hpp"
#include "shortfall/errors.hpp"
#include "shortfall/format.hpp"
#include "shortfall/parallel.hpp"
#include "shortfall/scenario.hpp"

namespace shortfall {

void BacktestConfig::validate(const ReturnPanel& panel) const {
    if (confidences.empty()) throw ValidationError("at least one confidence level is required");
    for (double p : confidences) {
        if (!(p > 0.0 && p < 1.0)) throw ValidationError("confidence levels must lie in (0, 1)");
    }
    if (half_life_days < 1) throw ValidationError("half_life_days must be >= 1");
    if (warmup_observations < 2) throw ValidationError("warmup_observations must be >= 2");
    if (!(style_bound > 0.0)) throw ValidationError("style_bound must be positive");
    if (!(eigen_floor > 0.0)) throw ValidationError("eigen_floor must be positive for the backtest");
    if (!(start_date < end_date)) throw ValidationError("start_date must precede end_date");
    if (!index_column.empty() && !panel.column_index(index_column)) {
        throw ValidationError("index column '" + index_column + "' not in panel");
    }
}

std::size_t BacktestReport::confidence_index(double p) const {
    for (std::size_t i = 0; i < confidences.size(); ++i) {
        if (std::abs(confidences[i] - p) <= 1e-12) return i;
    }
    throw UnknownConfidenceError("confidence " + format_number(p) + " is not part of the backtest");
}

Eigen::VectorXd BacktestReport::active_weights(std::size_t rebalance, std::size_t confidence) const {
    const auto& r = rebalances.at(rebalance);
    return r.min_shortfall.at(confidence) - r.min_variance;
}

std::vector<Date> rebalance_schedule(const std::vector<Date>& dates, const Date& start, const Date& end,
                                     RebalanceFrequency frequency) {
    auto period = [frequency](const Date& d) -> long {
        switch (frequency) {
            case RebalanceFrequency::daily: return d.days().time_since_epoch().count();
            case RebalanceFrequency::weekly: return d.iso_week_key();
            case RebalanceFrequency::monthly: return d.year() * 12L + static_cast<long>(d.month()) - 1;
            case RebalanceFrequency::quarterly:
                return d.year() * 4L + static_cast<long>((d.month() - 1) / 3);
        }
        return 0;
    };
    std::vector<Date> out;
    auto it = std::lower_bound(dates.begin(), dates.end(), start);
    long last_period = 0;
    for (; it != dates.end() && *it <= end; ++it) {
        const long key = period(*it);
        if (out.empty() || key != last_period) out.push_back(*it);
        last_period = key;
    }
    return out;
}

BacktestReport run_backtest(const ReturnPanel& panel, const BacktestConfig& config) {
    config.validate(panel);
    const std::string index_column = config.index_column.empty() ? panel.names().front() : config.index_column;
    const Eigen::Index index_pos = *panel.column_index(index_column);

    const std::vector<Date> schedule =
        rebalance_schedule(panel.dates(), config.start_date, config.end_date, config.rebalance_frequency);
    if (schedule.empty()) {
        throw ValidationError("no panel dates between " + config.start_date.to_string() + " and " +
                              config.end_date.to_string());
    }
    const Eigen::Index first_row = panel.count_before(schedule.front());
    if (first_row <= config.warmup_observations) {
        throw InsufficientHistoryError("first rebalance " + schedule.front().to_string() + " has " +
                                       std::to_string(first_row) + " prior observations; need more than " +
                                       std::to_string(config.warmup_observations));
    }
    const Eigen::Index end_row = panel.count_before(config.end_date) +
                                 (std::binary_search(panel.dates().begin(), panel.dates().end(), config.end_date) ? 1 : 0);

    AnalysisConfig analysis;
    analysis.confidence_levels = config.confidences;
    analysis.half_life_days = config.half_life_days;
    analysis.rebalance_frequency = config.rebalance_frequency;
    analysis.eigen_floor = config.eigen_floor;
    analysis.warmup_observations = config.warmup_observations;

    // Sigma_t at each row only uses earlier rows, so one pass over the rows
    // the backtest can reach serves every rebalance.
    const ReturnPanel reachable = panel.slice_rows(0, end_row);
    const NormalizedHistory history = normalize_history(reachable, config.half_life_days,
                                                        config.warmup_observations, config.eigen_floor,
                                                        config.threads);
    const ConstraintSet constraints = index_style_constraints(panel.names(), index_column, config.style_bound);

    BacktestReport report;
    report.names = panel.names();
    report.index_column = index_column;
    report.index_position = index_pos;
    report.confidences = config.confidences;
    const std::size_t levels = config.confidences.size();

    for (const Date& date : schedule) {
        RebalanceRecord record;
        record.date = date;
        record.min_shortfall.resize(levels);
        record.min_shortfall_diagnostics.resize(levels);
        try {
            const ScenarioSet scenarios = scenarios_from_history(history, reachable, date, analysis);
            const Eigen::Index prior = reachable.count_before(date);
            const Eigen::MatrixXd sigma = ewma_covariance(reachable.returns(), prior, config.half_life_days);
            record.scenario_count = scenarios.count();
            // Task 0 is the variance problem, task 1 + c the shortfall problem at confidence c.
            parallel_for(levels + 1, config.threads, [&](std::size_t task) {
                if (task == 0) {
                    const OptimizationResult r = minimize_variance(sigma, constraints);
                    record.min_variance = r.weights;
                    record.min_variance_diagnostics = r.diagnostics;
                } else {
                    const OptimizationResult r =
                        minimize_shortfall(scenarios.scenarios, config.confidences[task - 1], constraints);
                    record.min_shortfall[task - 1] = r.weights;
                    record.min_shortfall_diagnostics[task - 1] = r.diagnostics;
                }
            });
        } catch (const Error& e) {
            rethrow_with_context(e, "rebalance " + date.to_string());
        }
        report.rebalances.push_back(std::move(record));
    }

    const Eigen::Index begin = first_row;
    const Eigen::Index count = end_row - begin;
    report.dates.assign(panel.dates().begin() + begin, panel.dates().begin() + end_row);
    report.factor_returns = panel.returns().middleRows(begin, count);
    report.holding.resize(static_cast<std::size_t>(count));
    report.index_returns.resize(static_cast<std::size_t>(count));
    report.min_variance_returns.resize(static_cast<std::size_t>(count));
    report.min_shortfall_returns.assign(levels, std::vector<double>(static_cast<std::size_t>(count)));
    report.active_returns.assign(levels, std::vector<double>(static_cast<std::size_t>(count)));

    std::size_t current = 0;
    for (Eigen::Index t = 0; t < count; ++t) {
        const auto ut = static_cast<std::size_t>(t);
        while (current + 1 < report.rebalances.size() && report.rebalances[current + 1].date <= report.dates[ut]) {
            ++current;
        }
        report.holding[ut] = current;
        const auto& rb = report.rebalances[current];
        const Eigen::VectorXd f = report.factor_returns.row(t).transpose();
        report.index_returns[ut] = f(index_pos);
        report.min_variance_returns[ut] = rb.min_variance.dot(f);
        for (std::size_t c = 0; c < levels; ++c) {
            report.min_shortfall_returns[c][ut] = rb.min_shortfall[c].dot(f);
            report.active_returns[c][ut] = report.min_shortfall_returns[c][ut] - report.min_variance_returns[ut];
        }
    }
    return report;
}

std::vector<double> cumulative_simple(const std::vector<double>& returns) {
    std::vector<double> out(returns.size());
    double total = 0.0;
    for (std::size_t i = 0; i < returns.size(); ++i) out[i] = total += returns[i];
    return out;
}

std::vector<double> cumulative_compounded(const std::vector<double>& returns) {
    std::vector<double> out(returns.size());
    double growth = 1.0;
    for (std::size_t i = 0; i < returns.size(); ++i) {
        growth *= 1.0 + returns[i];
        out[i] = growth - 1.0;
    }
    return out;
}

Attribution return_attribution(const BacktestReport& report, double p) {
    const std::size_t c = report.confidence_index(p);
    Attribution out;
    out.dates = report.dates;
    out.names = report.names;
    const auto rows = static_cast<Eigen::Index>(report.dates.size());
    const auto n = static_cast<Eigen::Index>(report.names.size());
    out.cumulative.resize(rows, n);
    Eigen::RowVectorXd running = Eigen::RowVectorXd::Zero(n);
    for (Eigen::Index t = 0; t < rows; ++t) {
        const Eigen::VectorXd excess = report.active_weights(report.holding[static_cast<std::size_t>(t)], c);
        running += excess.transpose().cwiseProduct(report.factor_returns.row(t));
        out.cumulative.row(t) = running;
    }
    return out;
}

std::string confidence_label(double p) {
    const double pct = std::round(p * 100.0 * 1e9) / 1e9;
    return format_number(pct);
}

std::vector<StrategySeries> strategy_series(const BacktestReport& report) {
    std::vector<StrategySeries> out;
    out.push_back({"index", &report.index_returns});
    out.push_back({"minvar", &report.min_variance_returns});
    for (std::size_t c = 0; c < report.confidences.size(); ++c) {
        out.push_back({"xsf" + confidence_label(report.confidences[c]), &report.min_shortfall_returns[c]});
    }
    for (std::size_t c = 0; c < report.confidences.size(); ++c) {
        out.push_back({"active" + confidence_label(report.confidences[c]), &report.active_returns[c]});
    }
    return out;
}

std::vector<RealizedStats> realized_stats_table(const BacktestReport& report, const std::vector<Regime>& regimes) {
    std::vector<RealizedStats> table;
    const auto series = strategy_series(report);
    for (const auto& regime : regimes) {
        std::vector<std::size_t> rows;
        for (std::size_t t = 0; t < report.dates.size(); ++t) {
            const Date& d = report.dates[t];
            const bool inside = std::any_of(regime.ranges.begin(), regime.ranges.end(),
                                            [&](const DateRange& r) { return r.first <= d && d <= r.last; });
            if (inside) rows.push_back(t);
        }
        if (rows.empty()) throw EmptyRegimeError("regime '" + regime.label + "' contains no backtest dates");
        for (const auto& s : series) {
            std::vector<double> values;
            values.reserve(rows.size());
            for (std::size_t t : rows) values.push_back((*s.returns)[t]);
            RealizedStats row;
            row.strategy = s.label;
            row.regime = regime.label;
            row.observations = static_cast<long>(values.size());
            row.volatility = values.size() >= 2 ? realized_volatility(values) : 0.0;
            if (values.size() >= 2) {
                try {
                    row.sharpe = sharpe_ratio(values);
                } catch (const ZeroVolatilityError&) {
                }
            }
            if (tail_count(static_cast<long>(values.size()), 0.95) >= 1) {
                row.shortfall = empirical_shortfall(values, 0.95).value;
            }
            table.push_back(std::move(row));
        }
    }
    return table;
}

std::vector<std::pair<std::string, DatedSeries>> strategy_betas(const BacktestReport& report, int window) {
    std::vector<std::pair<std::string, DatedSeries>> out;
    const DatedSeries market{report.dates, report.index_returns};
    if (static_cast<long>(report.dates.size()) < window) {
        for (const auto& s : strategy_series(report)) {
            if (s.label != "index") out.emplace_back(s.label, DatedSeries{});
        }
        return out;
    }
    for (const auto& s : strategy_series(report)) {
        if (s.label == "index") continue;
        out.emplace_back(s.label, rolling_beta(DatedSeries{report.dates, *s.returns}, market, window));
    }
    return out;
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write " + path.string());
    out << text;
    if (!out) throw ValidationError("failed writing " + path.string());
}

std::string header_row(const std::vector<std::string>& columns) {
    std::string line = "date";
    for (const auto& c : columns) line += "," + c;
    return line + "\n";
}

nlohmann::json optional_number(const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

void write_backtest_report(const BacktestReport& report, const std::vector<Regime>& regimes, int beta_window,
                           const std::filesystem::path& directory, const nlohmann::json& run_info) {
    std::filesystem::create_directories(directory);

    for (const auto& s : strategy_series(report)) {
        const auto simple = cumulative_simple(*s.returns);
        const auto compounded = cumulative_compounded(*s.returns);
        std::string text = header_row({"return", "cumulative_simple", "cumulative_compounded"});
        for (std::size_t t = 0; t < report.dates.size(); ++t) {
            text += report.dates[t].to_string() + "," + format_number((*s.returns)[t]) + "," +
                    format_number(simple[t]) + "," + format_number(compounded[t]) + "\n";
        }
        write_text(directory / ("returns_" + s.label + ".csv"), text);
    }

    auto write_weights = [&](const std::string& label, auto&& weights_of) {
        std::string text = header_row(report.names);
        for (std::size_t r = 0; r < report.rebalances.size(); ++r) {
            text += report.rebalances[r].date.to_string();
            const Eigen::VectorXd w = weights_of(r);
            for (Eigen::Index i = 0; i < w.size(); ++i) text += "," + format_number(w(i));
            text += "\n";
        }
        write_text(directory / ("weights_" + label + ".csv"), text);
    };
    write_weights("minvar", [&](std::size_t r) { return report.rebalances[r].min_variance; });
    for (std::size_t c = 0; c < report.confidences.size(); ++c) {
        const std::string label = confidence_label(report.confidences[c]);
        write_weights("xsf" + label, [&](std::size_t r) { return report.rebalances[r].min_shortfall[c]; });
        write_weights("active" + label, [&](std::size_t r) { return report.active_weights(r, c); });

        const Attribution attribution = return_attribution(report, report.confidences[c]);
        std::vector<std::string> columns = attribution.names;
        columns.push_back("total");
        std::string text = header_row(columns);
        for (Eigen::Index t = 0; t < attribution.cumulative.rows(); ++t) {
            text += attribution.dates[static_cast<std::size_t>(t)].to_string();
            for (Eigen::Index j = 0; j < attribution.cumulative.cols(); ++j) {
                text += "," + format_number(attribution.cumulative(t, j));
            }
            text += "," + format_number(attribution.cumulative.row(t).sum()) + "\n";
        }
        write_text(directory / ("attribution_active" + label + ".csv"), text);
    }

    for (const auto& [label, beta] : strategy_betas(report, beta_window)) {
        std::string text = header_row({"beta"});
        for (std::size_t t = 0; t < beta.dates.size(); ++t) {
            text += beta.dates[t].to_string() + "," + format_number(beta.values[t]) + "\n";
        }
        write_text(directory / ("beta_" + label + ".csv"), text);
    }

    nlohmann::json summary;
    summary["schema_version"] = 1;
    summary["run"] = run_info;
    summary["index_column"] = report.index_column;
    summary["first_date"] = report.dates.empty() ? "" : report.dates.front().to_string();
    summary["last_date"] = report.dates.empty() ? "" : report.dates.back().to_string();
    summary["observations"] = report.dates.size();
    summary["rebalances"] = report.rebalances.size();
    double worst_feasibility = 0.0;
    double worst_gap = 0.0;
    for (const auto& r : report.rebalances) {
        worst_feasibility = std::max(worst_feasibility, r.min_variance_diagnostics.feasibility_residual);
        worst_gap = std::max(worst_gap, std::abs(r.min_variance_diagnostics.optimality_gap));
        for (const auto& d : r.min_shortfall_diagnostics) {
            worst_feasibility = std::max(worst_feasibility, d.feasibility_residual);
            worst_gap = std::max(worst_gap, std::abs(d.optimality_gap));
        }
    }
    summary["max_feasibility_residual"] = worst_feasibility;
    summary["max_optimality_gap"] = worst_gap;
    nlohmann::json stats = nlohmann::json::array();
    for (const auto& row : realized_stats_table(report, regimes)) {
        stats.push_back({{"strategy", row.strategy},
                         {"regime", row.regime},
                         {"observations", row.observations},
                         {"realized_volatility", row.volatility},
                         {"sharpe_ratio", optional_number(row.sharpe)},
                         {"shortfall_95", optional_number(row.shortfall)}});
    }
    summary["realized_statistics"] = stats;
    write_text(directory / "summary.json", summary.dump(2) + "\n");
}

}  // namespace shortfall
