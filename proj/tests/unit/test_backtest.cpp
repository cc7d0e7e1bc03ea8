#include <doctest.h>

#include <algorithm>
#include <numbers>
#include <random>

#include "shortfall/backtest.hpp"
#include "shortfall/covariance.hpp"
#include "shortfall/errors.hpp"
#include "shortfall/scenario.hpp"
#include "support.hpp"

using namespace shortfall;

namespace {

ReturnPanel fixture() { return load_panel(std::filesystem::path(SHORTFALL_FIXTURE_DIR) / "factors.csv"); }

BacktestConfig fixture_config(const ReturnPanel& p) {
    BacktestConfig c;
    c.confidences = {0.6, 0.95};
    c.warmup_observations = 100;
    c.start_date = p.dates()[200];
    c.end_date = p.dates().back();
    return c;
}

double sorted_tail_mean(std::vector<double> v, long k) {
    std::sort(v.begin(), v.end());
    double s = 0.0;
    for (long i = 0; i < k; ++i) s += v[static_cast<std::size_t>(i)];
    return -s / static_cast<double>(k);
}

// Index plus two styles: the style weights are (a, -a), so the shortfall is a
// convex piecewise-linear function of a whose minimum lies at a crossing of two
// scenario returns or at a bound.
double exact_one_dimensional_minimum(const Eigen::MatrixXd& r, long k, double bound) {
    const Eigen::VectorXd base = r.col(0);
    const Eigen::VectorXd slope = r.col(1) - r.col(2);
    std::vector<double> candidates{-bound, bound};
    for (Eigen::Index i = 0; i < r.rows(); ++i) {
        for (Eigen::Index j = i + 1; j < r.rows(); ++j) {
            if (slope(i) == slope(j)) continue;
            const double a = (base(j) - base(i)) / (slope(i) - slope(j));
            if (std::abs(a) <= bound) candidates.push_back(a);
        }
    }
    double best = std::numeric_limits<double>::infinity();
    for (double a : candidates) {
        const Eigen::VectorXd pr = base + a * slope;
        best = std::min(best, sorted_tail_mean(std::vector<double>(pr.data(), pr.data() + pr.size()), k));
    }
    return best;
}

}  // namespace

TEST_CASE("rebalance schedules take the first date of each period") {
    const auto dates = testing::consecutive_days(120, Date(2021, 1, 1));
    const Date end = dates.back();
    const auto monthly = rebalance_schedule(dates, Date(2021, 1, 15), end, RebalanceFrequency::monthly);
    REQUIRE(monthly.size() == 4);
    CHECK(monthly[0] == Date(2021, 1, 15));
    CHECK(monthly[1] == Date(2021, 2, 1));
    CHECK(monthly[3] == Date(2021, 4, 1));
    const auto quarterly = rebalance_schedule(dates, dates.front(), end, RebalanceFrequency::quarterly);
    REQUIRE(quarterly.size() == 2);
    CHECK(quarterly[1] == Date(2021, 4, 1));
    const auto weekly = rebalance_schedule(dates, Date(2021, 1, 1), Date(2021, 1, 20), RebalanceFrequency::weekly);
    // 2021-01-01 is a Friday; ISO weeks start on Mondays.
    REQUIRE(weekly.size() == 4);
    CHECK(weekly[1] == Date(2021, 1, 4));
    CHECK(weekly[3] == Date(2021, 1, 18));
    CHECK(rebalance_schedule(dates, Date(2021, 1, 1), Date(2021, 1, 5), RebalanceFrequency::daily).size() == 5);
}

TEST_CASE("cumulative series") {
    const std::vector<double> r{0.1, -0.05, 0.02};
    const auto s = cumulative_simple(r);
    const auto c = cumulative_compounded(r);
    CHECK(s[2] == doctest::Approx(0.07));
    CHECK(c[2] == doctest::Approx(1.1 * 0.95 * 1.02 - 1.0));
    CHECK(confidence_label(0.6) == "60");
    CHECK(confidence_label(0.975) == "97.5");
}

TEST_CASE("hand-worked single rebalance") {
    // 20 warmup rows, 10 scenarios, rebalance on row 30, held for five days.
    const Eigen::MatrixXd values = testing::gaussian_matrix(35, 3, 404) * 0.01;
    const ReturnPanel panel(testing::consecutive_days(35, Date(2001, 1, 1)), {"IDX", "S1", "S2"}, values);
    BacktestConfig cfg;
    cfg.confidences = {0.6};
    cfg.rebalance_frequency = RebalanceFrequency::quarterly;
    cfg.half_life_days = 5;
    cfg.warmup_observations = 20;
    cfg.start_date = panel.dates()[30];
    cfg.end_date = panel.dates()[34];
    const BacktestReport report = run_backtest(panel, cfg);
    REQUIRE(report.rebalances.size() == 1);
    const RebalanceRecord& rb = report.rebalances[0];
    CHECK(rb.date == panel.dates()[30]);
    CHECK(rb.scenario_count == 10);
    REQUIRE(report.dates.size() == 5);

    // Minimum variance of (1, a, -a): a quadratic in a.
    const Eigen::MatrixXd s = ewma_covariance(panel, 5, rb.date).matrix;
    const double curvature = s(1, 1) + s(2, 2) - 2.0 * s(1, 2);
    const double a_star = std::clamp(-(s(0, 1) - s(0, 2)) / curvature, -2.0, 2.0);
    CHECK(rb.min_variance(0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rb.min_variance(1) == doctest::Approx(a_star).epsilon(1e-9));
    CHECK(rb.min_variance(2) == doctest::Approx(-a_star).epsilon(1e-9));

    // Minimum shortfall over the same line, K = floor(10 * 0.4) = 4.
    AnalysisConfig analysis;
    analysis.half_life_days = 5;
    analysis.warmup_observations = 20;
    const Eigen::MatrixXd scen = forecast_scenarios(panel, rb.date, analysis).scenarios;
    const Eigen::VectorXd w = rb.min_shortfall[0];
    const Eigen::VectorXd pr = scen * w;
    CHECK(w(0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(w(1) + w(2) == doctest::Approx(0.0).scale(1.0));
    CHECK(sorted_tail_mean(std::vector<double>(pr.data(), pr.data() + pr.size()), 4) ==
          doctest::Approx(exact_one_dimensional_minimum(scen, 4, 2.0)).epsilon(1e-10));

    for (std::size_t t = 0; t < 5; ++t) {
        const Eigen::Vector3d f = values.row(30 + static_cast<Eigen::Index>(t)).transpose();
        CHECK(report.index_returns[t] == f(0));
        CHECK(report.min_variance_returns[t] == doctest::Approx(rb.min_variance.dot(f)).epsilon(1e-15));
        CHECK(report.min_shortfall_returns[0][t] == doctest::Approx(w.dot(f)).epsilon(1e-15));
        CHECK(report.active_returns[0][t] ==
              doctest::Approx(w.dot(f) - rb.min_variance.dot(f)).epsilon(1e-12).scale(1e-3));
    }
}

TEST_CASE("fixture backtest invariants") {
    const ReturnPanel p = fixture();
    const BacktestConfig cfg = fixture_config(p);
    const BacktestReport r = run_backtest(p, cfg);
    REQUIRE(r.rebalances.size() >= 6);
    CHECK(r.index_column == "MKT");
    for (std::size_t k = 0; k < r.rebalances.size(); ++k) {
        const auto& rb = r.rebalances[k];
        std::vector<Eigen::VectorXd> portfolios{rb.min_variance};
        portfolios.insert(portfolios.end(), rb.min_shortfall.begin(), rb.min_shortfall.end());
        for (const auto& w : portfolios) {
            CHECK(std::abs(w(0) - 1.0) <= 1e-7);
            CHECK(w.tail(2).cwiseAbs().maxCoeff() <= 2.0 + 1e-7);
            CHECK(std::abs(w.tail(2).sum()) <= 1e-7);
        }
        for (std::size_t c = 0; c < cfg.confidences.size(); ++c) {
            const Eigen::VectorXd active = r.active_weights(k, c);
            CHECK(active == rb.min_shortfall[c] - rb.min_variance);
            CHECK(std::abs(active(0)) <= 1e-7);
            CHECK(rb.min_shortfall_diagnostics[c].feasibility_residual <= 1e-7);
        }
    }
    // Strategy returns are the stored weights times that day's panel row.
    for (std::size_t t = 0; t < r.dates.size(); ++t) {
        const auto& rb = r.rebalances[r.holding[t]];
        CHECK(rb.date <= r.dates[t]);
        const Eigen::VectorXd f = r.factor_returns.row(static_cast<Eigen::Index>(t)).transpose();
        CHECK(r.min_variance_returns[t] == rb.min_variance.dot(f));
        CHECK(r.min_shortfall_returns[1][t] == rb.min_shortfall[1].dot(f));
        CHECK(r.active_returns[1][t] == r.min_shortfall_returns[1][t] - r.min_variance_returns[t]);
    }
    CHECK(r.confidence_index(0.95) == 1);
    CHECK_THROWS_AS(r.confidence_index(0.9), UnknownConfidenceError);
}

TEST_CASE("no look-ahead: later data cannot change a rebalance") {
    const ReturnPanel p = fixture();
    const BacktestConfig cfg = fixture_config(p);
    const BacktestReport base = run_backtest(p, cfg);
    for (std::size_t k : {std::size_t{0}, base.rebalances.size() / 2, base.rebalances.size() - 1}) {
        const Date d = base.rebalances[k].date;
        const Eigen::Index row = p.count_before(d);
        Eigen::MatrixXd changed = p.returns();
        changed.bottomRows(p.rows() - row) = testing::gaussian_matrix(p.rows() - row, 3, 5 + k) * 0.05;
        const BacktestReport other = run_backtest(ReturnPanel(p.dates(), p.names(), changed), cfg);
        for (std::size_t j = 0; j <= k; ++j) {
            CHECK(other.rebalances[j].min_variance == base.rebalances[j].min_variance);
            for (std::size_t c = 0; c < 2; ++c) CHECK(other.rebalances[j].min_shortfall[c] == base.rebalances[j].min_shortfall[c]);
        }
    }
}

TEST_CASE("attribution sums to the simple active return") {
    const ReturnPanel p = fixture();
    const BacktestReport r = run_backtest(p, fixture_config(p));
    const Attribution a = return_attribution(r, 0.6);
    REQUIRE(a.cumulative.rows() == static_cast<Eigen::Index>(r.dates.size()));
    const auto simple = cumulative_simple(r.active_returns[0]);
    const double years = static_cast<double>(r.dates.size()) / 252.0;
    double worst = 0.0;
    for (std::size_t t = 0; t < r.dates.size(); ++t) {
        worst = std::max(worst, std::abs(a.cumulative.row(static_cast<Eigen::Index>(t)).sum() - simple[t]));
    }
    CHECK(worst <= 1e-3 * std::max(years, 1.0));
    CHECK(worst <= 1e-12);

    // Independent recomputation: exposure times factor return, accumulated per factor.
    Eigen::VectorXd running = Eigen::VectorXd::Zero(3);
    for (std::size_t t = 0; t < r.dates.size(); ++t) {
        const Eigen::VectorXd e = r.active_weights(r.holding[t], 0);
        running += e.cwiseProduct(r.factor_returns.row(static_cast<Eigen::Index>(t)).transpose());
        CHECK((a.cumulative.row(static_cast<Eigen::Index>(t)).transpose() - running).cwiseAbs().maxCoeff() < 1e-14);
    }
    // The index exposure is zero, so its contribution is zero.
    CHECK(a.cumulative.col(0).cwiseAbs().maxCoeff() < 1e-15);
    CHECK_THROWS_AS(return_attribution(r, 0.5), UnknownConfidenceError);
}

TEST_CASE("identical Gaussian styles leave no active return") {
    Eigen::MatrixXd values = testing::gaussian_matrix(400, 3, 61) * 0.01;
    values.col(2) = values.col(1);
    const ReturnPanel p = testing::panel_from(values, Date(2010, 1, 4));
    BacktestConfig cfg;
    cfg.confidences = {0.6, 0.95};
    cfg.warmup_observations = 100;
    cfg.start_date = p.dates()[250];
    cfg.end_date = p.dates().back();
    const BacktestReport r = run_backtest(p, cfg);
    for (std::size_t c = 0; c < 2; ++c) {
        const auto cum = cumulative_simple(r.active_returns[c]);
        CHECK(std::abs(cum.back()) < 10.0 * 1e-7 * static_cast<double>(cum.size()));
    }
}

TEST_CASE("the 60% active portfolio tilts away from a negatively skewed style") {
    // Both styles have unit variance and covariance rho with the standard
    // normal index, so minimum variance has no preference between them. SKEW
    // loads on min(I, 0): negatively skewed and falling hardest in index sell-offs.
    const double rho = 0.7;
    const double c = 2.0 * rho;  // cov(min(I, 0), I) = 1/2
    const double mean_min = -1.0 / std::sqrt(2.0 * std::numbers::pi);
    const double var_min = 0.5 - 1.0 / (2.0 * std::numbers::pi);
    const double skew_noise = std::sqrt(1.0 - c * c * var_min);
    std::mt19937_64 rng(8080);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd values(1500, 3);
    for (Eigen::Index t = 0; t < 1500; ++t) {
        const double idx = normal(rng);
        values(t, 0) = 0.01 * idx;
        values(t, 1) = 0.01 * (c * (std::min(idx, 0.0) - mean_min) + skew_noise * normal(rng));
        values(t, 2) = 0.01 * (rho * idx + std::sqrt(1.0 - rho * rho) * normal(rng));
    }
    const ReturnPanel p(testing::consecutive_days(1500, Date(2015, 1, 1)), {"IDX", "SKEW", "SYM"}, values);
    BacktestConfig cfg;
    cfg.confidences = {0.6};
    cfg.warmup_observations = 252;
    cfg.half_life_days = 63;
    cfg.start_date = p.dates()[1000];
    cfg.end_date = p.dates().back();
    const BacktestReport r = run_backtest(p, cfg);
    double mean_excess = 0.0;
    for (std::size_t k = 0; k < r.rebalances.size(); ++k) mean_excess += r.active_weights(k, 0)(1);
    mean_excess /= static_cast<double>(r.rebalances.size());
    CHECK(mean_excess < 0.0);
}

TEST_CASE("realized statistics table") {
    const ReturnPanel p = fixture();
    const BacktestReport r = run_backtest(p, fixture_config(p));
    const Regime full{"full", {{r.dates.front(), r.dates.back()}}};
    const auto table = realized_stats_table(r, {full});
    const auto series = strategy_series(r);
    REQUIRE(table.size() == series.size());
    CHECK(series[0].label == "index");
    CHECK(series[2].label == "xsf60");
    CHECK(series[4].label == "active60");
    for (std::size_t i = 0; i < table.size(); ++i) {
        const auto& v = *series[i].returns;
        CHECK(table[i].strategy == series[i].label);
        CHECK(table[i].observations == static_cast<long>(v.size()));
        CHECK(table[i].volatility == doctest::Approx(realized_volatility(v)).epsilon(1e-14));
        CHECK(*table[i].sharpe == doctest::Approx(sharpe_ratio(v)).epsilon(1e-14));
        const long k = static_cast<long>(std::floor(static_cast<double>(v.size()) * 0.05 + 1e-9));
        CHECK(*table[i].shortfall == doctest::Approx(sorted_tail_mean(v, k)).epsilon(1e-14));
    }
    const Regime half{"first_half", {{r.dates.front(), r.dates[r.dates.size() / 2]}}};
    CHECK(realized_stats_table(r, {half})[0].observations == static_cast<long>(r.dates.size() / 2 + 1));
    const Regime none{"empty", {{Date(1990, 1, 1), Date(1990, 12, 31)}}};
    CHECK_THROWS_AS(realized_stats_table(r, {none}), EmptyRegimeError);
}

TEST_CASE("constant strategy has zero volatility and shortfall equal to minus the return") {
    BacktestReport r;
    r.dates = testing::consecutive_days(40);
    r.index_returns.assign(40, 0.002);
    r.min_variance_returns.assign(40, 0.002);
    const auto table = realized_stats_table(r, {Regime{"all", {{r.dates.front(), r.dates.back()}}}});
    REQUIRE(table.size() == 2);
    CHECK(table[0].volatility == 0.0);
    CHECK_FALSE(table[0].sharpe.has_value());
    CHECK(*table[0].shortfall == doctest::Approx(-0.002));
}

TEST_CASE("backtest errors and report files") {
    const ReturnPanel p = fixture();
    BacktestConfig cfg = fixture_config(p);
    cfg.index_column = "NOPE";
    CHECK_THROWS_AS(run_backtest(p, cfg), ValidationError);
    cfg = fixture_config(p);
    cfg.start_date = p.dates()[50];
    CHECK_THROWS_AS(run_backtest(p, cfg), InsufficientHistoryError);
    cfg = fixture_config(p);
    cfg.end_date = p.dates()[100];
    CHECK_THROWS_AS(run_backtest(p, cfg), ValidationError);

    const BacktestReport r = run_backtest(p, fixture_config(p));
    const auto betas = strategy_betas(r, 60);
    REQUIRE(betas.size() == 5);
    CHECK(betas[0].first == "minvar");
    CHECK(betas[0].second.values.size() == r.dates.size() - 59);

    const auto dir = testing::scratch_dir("backtest");
    write_backtest_report(r, {Regime{"full", {{r.dates.front(), r.dates.back()}}}}, 60, dir, nlohmann::json::object());
    for (const char* name : {"returns_index.csv", "returns_minvar.csv", "returns_xsf60.csv", "returns_xsf95.csv",
                             "returns_active60.csv", "weights_minvar.csv", "weights_xsf60.csv",
                             "weights_active95.csv", "attribution_active60.csv", "beta_minvar.csv",
                             "beta_active95.csv", "summary.json"}) {
        CHECK_MESSAGE(std::filesystem::exists(dir / name), std::string(name));
    }
}
