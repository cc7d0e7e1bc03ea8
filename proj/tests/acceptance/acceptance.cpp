// Acceptance suite: one PASS/FAIL line per criterion; exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <thread>

#include "../unit/support.hpp"
#include "shortfall/backtest.hpp"
#include "shortfall/covariance.hpp"
#include "shortfall/esterror.hpp"
#include "shortfall/optimize.hpp"
#include "shortfall/risk.hpp"
#include "shortfall/scenario.hpp"

using namespace shortfall;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool condition, const std::string& what) {
        if (!condition) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + std::string("failed: ") + what;
        }
    }
    void note(const std::string& text) { detail += (detail.empty() ? "" : "; ") + text; }
};

std::string fmt(double v, int digits = 4) {
    std::ostringstream s;
    s.precision(digits);
    s << v;
    return s.str();
}

// Independent estimator: sorted portfolio returns, mean of the K smallest.
double sorted_shortfall(const Eigen::VectorXd& pr, double p) {
    std::vector<double> v(pr.data(), pr.data() + pr.size());
    std::sort(v.begin(), v.end());
    const auto k = static_cast<std::size_t>(std::floor(static_cast<double>(v.size()) * (1.0 - p) + 1e-9));
    double s = 0.0;
    for (std::size_t i = 0; i < k; ++i) s += v[i];
    return -s / static_cast<double>(k);
}

double angle_deg(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return std::acos(std::clamp(a.dot(b) / (a.norm() * b.norm()), -1.0, 1.0)) * 180.0 / std::numbers::pi;
}

Outcome lp_oracle() {
    Outcome o;
    const auto start = Clock::now();
    std::mt19937_64 rng(1);
    const ConstraintSet c = ConstraintSet::full_investment_long_only(3);
    double worst_excess = -std::numeric_limits<double>::infinity();
    double worst_consistency = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const Eigen::MatrixXd r = testing::gaussian_matrix(50, 3, rng()) * 0.01;
        for (double p : {0.6, 0.9}) {
            const OptimizationResult lp = minimize_shortfall(r, p, c);
            const OptimizationResult grid = brute_force_shortfall(r, p, c, 0.01);
            worst_excess = std::max(worst_excess, lp.objective_value - grid.objective_value);
            worst_consistency = std::max(worst_consistency,
                                         std::abs(lp.shortfall->value - sorted_shortfall(r * lp.weights, p)));
        }
    }
    const double elapsed = seconds_since(start);
    o.require(worst_excess <= 1e-6, "LP exceeds grid minimum by " + fmt(worst_excess));
    o.require(worst_consistency <= 1e-8, "LP/estimator mismatch " + fmt(worst_consistency));
    o.require(elapsed < 30.0, "runtime " + fmt(elapsed) + " s");
    o.note("max(LP - grid) = " + fmt(worst_excess) + ", max |LP - estimator| = " + fmt(worst_consistency) +
           ", " + fmt(elapsed, 3) + " s");
    return o;
}

Outcome gaussian_reduction() {
    Outcome o;
    const auto start = Clock::now();
    const Eigen::MatrixXd chol = testing::random_spd(5, 8).llt().matrixL();
    const Eigen::MatrixXd r = testing::gaussian_matrix(50000, 5, 123) * chol.transpose() * 0.01;
    const Eigen::MatrixXd sigma = r.transpose() * r / 50000.0;
    ConstraintSet c(5);
    c.add_equality(Eigen::VectorXd::Ones(5), 1.0);
    const Eigen::VectorXd v = minimize_variance(sigma, c).weights;
    for (double p : {0.60, 0.95}) {
        const double a = angle_deg(minimize_shortfall(r, p, c).weights, v);
        o.require(a < 5.0, "angle at p=" + fmt(p) + " is " + fmt(a));
        o.note("angle(p=" + fmt(p) + ") = " + fmt(a) + " deg");
    }
    const double elapsed = seconds_since(start);
    o.require(elapsed < 60.0, "runtime " + fmt(elapsed) + " s");
    o.note(fmt(elapsed, 3) + " s");
    return o;
}

Outcome figure_two_protocol() {
    Outcome o;
    const auto start = Clock::now();
    EstimationStudyConfig cfg;  // N = 10, T in {1000, 3000, 5000, 7000}, p in {.6, .9, .95, .99}, 100 replications
    cfg.seed = 0;
    cfg.threads = 1;
    const auto reports = run_estimation_study(cfg);
    const double elapsed = seconds_since(start);
    const double bound = boundary_angle(9);
    std::map<double, std::vector<const TrialReport*>> by_confidence;
    for (const auto& r : reports) {
        by_confidence[r.confidence].push_back(&r);
        o.require(r.mean_weight_error_deg < bound, "angle " + fmt(r.mean_weight_error_deg) + " at T=" +
                                                       std::to_string(r.sample_length) + ", p=" + fmt(r.confidence));
        if (r.sample_length == 7000 && r.confidence <= 0.95) {
            o.require(r.mean_risk_error <= 1.10, "risk error " + fmt(r.mean_risk_error) + " at p=" + fmt(r.confidence));
        }
    }
    std::string grid;
    for (const auto& [p, row] : by_confidence) {
        int inversions = 0;
        for (std::size_t i = 1; i < row.size(); ++i) {
            if (row[i]->mean_weight_error_deg > row[i - 1]->mean_weight_error_deg) ++inversions;
        }
        o.require(inversions <= 1, std::to_string(inversions) + " inversions at p=" + fmt(p));
        grid += " p=" + fmt(p) + ":";
        for (const auto* r : row) grid += " " + fmt(r->mean_weight_error_deg, 3);
    }
    o.require(elapsed < 900.0, "single-threaded runtime " + fmt(elapsed) + " s");
    double worst_risk = 0.0;
    for (const auto& r : reports) {
        if (r.sample_length == 7000 && r.confidence <= 0.95) worst_risk = std::max(worst_risk, r.mean_risk_error);
    }
    o.note("bound " + fmt(bound) + " deg; angles by T" + grid + "; max risk error (T=7000, p<=0.95) " +
           fmt(worst_risk) + "; " + fmt(elapsed, 3) + " s single-threaded");
    return o;
}

Outcome boundary_angles() {
    Outcome o;
    const double b9 = boundary_angle(9);
    const double b1 = boundary_angle(1);
    const double hand = std::atan(0.5) * 180.0 / std::numbers::pi;  // r = sqrt(2)/4 over |w| = 1/sqrt(2)
    o.require(b9 >= 34.5 && b9 <= 35.7, "boundary_angle(9) = " + fmt(b9));
    o.require(std::abs(b1 - hand) <= 0.01 && std::abs(b1 - 26.57) <= 0.01, "boundary_angle(1) = " + fmt(b1));
    o.note("boundary_angle(9) = " + fmt(b9, 6) + ", boundary_angle(1) = " + fmt(b1, 6));
    return o;
}

Outcome gaussian_constant() {
    Outcome o;
    const double oracle = testing::gaussian_shortfall_by_quadrature(0.95);
    const auto draws = testing::gaussian_draws(1'000'000, 2024);
    const double s = empirical_shortfall(draws, 0.95).value;
    o.require(std::abs(s - 2.0627) <= 0.01, "empirical " + fmt(s, 6));
    o.require(std::abs(oracle - 2.0627) <= 1e-4, "quadrature " + fmt(oracle, 6));
    o.note("empirical " + fmt(s, 6) + ", quadrature oracle " + fmt(oracle, 6));
    return o;
}

Outcome nn_calibration() {
    Outcome o;
    const auto gauss = testing::gaussian_draws(1'000'000, 77);
    double worst = 0.0;
    for (double p : {0.60, 0.95, 0.99}) {
        for (Tail tail : {Tail::loss, Tail::gain}) worst = std::max(worst, std::abs(nn_statistic(gauss, p, tail, 1.0)));
    }
    o.require(worst < 0.03, "Gaussian |NN| = " + fmt(worst));

    std::mt19937_64 rng(78);
    std::student_t_distribution<double> t3(3.0);
    std::vector<double> fat(1'000'000);
    for (auto& x : fat) x = t3(rng) / std::sqrt(3.0);  // unit variance
    const double nn_fat = nn_statistic(fat, 0.99, Tail::loss, 1.0);
    o.require(nn_fat > 0.0, "t(3) NN = " + fmt(nn_fat));

    int covered = 0;
    for (int e = 0; e < 100; ++e) {
        const auto series = testing::gaussian_draws(10000, 5000 + static_cast<std::uint64_t>(e));
        const std::span<const double> all(series);
        const auto c = bootstrap_nn_ci(all.first(5000), all.last(5000), 0.95, Tail::loss, 500,
                                       static_cast<std::uint64_t>(e));
        if (!c.persistence_rejected()) ++covered;
    }
    o.require(covered >= 90, "difference CI covers zero in " + std::to_string(covered) + "/100");
    o.note("max Gaussian |NN| = " + fmt(worst) + ", t(3) NN(0.99) = " + fmt(nn_fat) + ", CI covers zero in " +
           std::to_string(covered) + "/100");
    return o;
}

Outcome scenario_identity() {
    Outcome o;
    AnalysisConfig cfg;
    cfg.warmup_observations = 50;
    cfg.half_life_days = 21;

    // Every row is +/- v, so each trailing covariance estimate is the same matrix.
    const Eigen::Vector3d v(0.01, -0.02, 0.005);
    const auto signs = testing::gaussian_draws(400, 17);
    Eigen::MatrixXd rows(400, 3);
    for (Eigen::Index t = 0; t < 400; ++t) rows.row(t) = (signs[static_cast<std::size_t>(t)] < 0 ? -1.0 : 1.0) * v.transpose();
    const ReturnPanel flat = testing::panel_from(rows);
    const Date after(flat.dates().back().days() + std::chrono::days{1});
    const ScenarioSet same = forecast_scenarios(flat, after, cfg);
    const double identity_err = (same.scenarios - rows.bottomRows(350)).cwiseAbs().maxCoeff();
    o.require(identity_err <= 1e-8, "identity error " + fmt(identity_err));

    // Reconstruction: the scenarios' second moment matches the current estimate.
    Eigen::Matrix3d c;
    c << 1.0, 0.6, 0.5, 0.6, 1.5, 0.7, 0.5, 0.7, 1.2;
    const Eigen::Matrix3d chol = c.llt().matrixL();
    const Eigen::MatrixXd sim = testing::gaussian_matrix(4000, 3, 12) * chol.transpose() * 0.01;
    const ReturnPanel panel = testing::panel_from(sim);
    const Date end(panel.dates().back().days() + std::chrono::days{1});
    cfg.warmup_observations = 252;
    cfg.half_life_days = 63;
    const ScenarioSet s = forecast_scenarios(panel, end, cfg);
    const Eigen::MatrixXd now = ewma_covariance(panel, 63, end).matrix;
    const Eigen::MatrixXd recon = s.scenarios.transpose() * s.scenarios / static_cast<double>(s.count());
    const double recon_err = ((recon - now).cwiseAbs().array() / now.cwiseAbs().array()).maxCoeff();
    o.require(recon_err < 0.15, "reconstruction error " + fmt(recon_err));

    double homog_err = 0.0;
    for (double k : {0.5, 3.0, 250.0}) {
        const ScenarioSet scaled = forecast_scenarios(testing::panel_from(sim * k), end, cfg);
        homog_err = std::max(homog_err, (scaled.scenarios - k * s.scenarios).cwiseAbs().maxCoeff() /
                                            (k * s.scenarios.cwiseAbs().maxCoeff()));
    }
    o.require(homog_err <= 1e-10, "homogeneity error " + fmt(homog_err));
    o.require(s.count() == 4000 - 252, "scenario count " + std::to_string(s.count()));
    o.note("identity " + fmt(identity_err) + ", reconstruction " + fmt(recon_err) + " (relative), homogeneity " +
           fmt(homog_err));
    return o;
}

BacktestReport fixture_backtest(const ReturnPanel& p) {
    BacktestConfig cfg;
    cfg.confidences = {0.6, 0.95};
    cfg.warmup_observations = 100;
    cfg.start_date = p.dates()[200];
    cfg.end_date = p.dates().back();
    return run_backtest(p, cfg);
}

Outcome backtest_integrity() {
    Outcome o;
    const ReturnPanel p = load_panel(fs::path(SHORTFALL_FIXTURE_DIR) / "factors.csv");
    const BacktestReport base = fixture_backtest(p);

    bool lookahead_ok = true;
    for (std::size_t k = 0; k < base.rebalances.size(); ++k) {
        const Eigen::Index row = p.count_before(base.rebalances[k].date);
        Eigen::MatrixXd changed = p.returns();
        changed.bottomRows(p.rows() - row) = testing::gaussian_matrix(p.rows() - row, 3, 100 + k) * 0.05;
        const BacktestReport other = fixture_backtest(ReturnPanel(p.dates(), p.names(), changed));
        lookahead_ok = lookahead_ok && other.rebalances[k].min_variance == base.rebalances[k].min_variance;
        for (std::size_t c = 0; c < 2; ++c) {
            lookahead_ok = lookahead_ok && other.rebalances[k].min_shortfall[c] == base.rebalances[k].min_shortfall[c];
        }
    }
    o.require(lookahead_ok, "a rebalance changed when later data was perturbed");

    double worst_constraint = 0.0;
    for (const auto& rb : base.rebalances) {
        std::vector<Eigen::VectorXd> ws{rb.min_variance};
        ws.insert(ws.end(), rb.min_shortfall.begin(), rb.min_shortfall.end());
        for (const auto& w : ws) {
            worst_constraint = std::max({worst_constraint, std::abs(w(0) - 1.0), std::abs(w.tail(2).sum()),
                                         w.tail(2).cwiseAbs().maxCoeff() - 2.0});
        }
    }
    o.require(worst_constraint <= 1e-7, "constraint violation " + fmt(worst_constraint));

    double worst_attr = 0.0;
    const double years = static_cast<double>(base.dates.size()) / 252.0;
    for (double conf : {0.6, 0.95}) {
        const Attribution a = return_attribution(base, conf);
        const auto simple = cumulative_simple(base.active_returns[base.confidence_index(conf)]);
        for (std::size_t t = 0; t < simple.size(); ++t) {
            worst_attr = std::max(worst_attr, std::abs(a.cumulative.row(static_cast<Eigen::Index>(t)).sum() - simple[t]));
        }
    }
    o.require(worst_attr <= 1e-3 * std::max(1.0, years), "attribution gap " + fmt(worst_attr));

    // Both styles share variance and index covariance; SKEW is negatively
    // skewed through its loading on min(I, 0).
    const double rho = 0.7, c = 2.0 * rho;
    const double mean_min = -1.0 / std::sqrt(2.0 * std::numbers::pi);
    const double noise = std::sqrt(1.0 - c * c * (0.5 - 1.0 / (2.0 * std::numbers::pi)));
    std::mt19937_64 rng(8080);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd values(1500, 3);
    for (Eigen::Index t = 0; t < 1500; ++t) {
        const double idx = normal(rng);
        values(t, 0) = 0.01 * idx;
        values(t, 1) = 0.01 * (c * (std::min(idx, 0.0) - mean_min) + noise * normal(rng));
        values(t, 2) = 0.01 * (rho * idx + std::sqrt(1.0 - rho * rho) * normal(rng));
    }
    const ReturnPanel skew(testing::consecutive_days(1500, Date(2015, 1, 1)), {"IDX", "SKEW", "SYM"}, values);
    BacktestConfig cfg;
    cfg.confidences = {0.6};
    cfg.half_life_days = 63;
    cfg.start_date = skew.dates()[1000];
    cfg.end_date = skew.dates().back();
    const BacktestReport tilt = run_backtest(skew, cfg);
    double mean_excess = 0.0;
    for (std::size_t k = 0; k < tilt.rebalances.size(); ++k) mean_excess += tilt.active_weights(k, 0)(1);
    mean_excess /= static_cast<double>(tilt.rebalances.size());
    o.require(mean_excess < 0.0, "mean excess exposure to the skewed factor " + fmt(mean_excess));

    o.note(std::to_string(base.rebalances.size()) + " rebalances; look-ahead " + (lookahead_ok ? "clean" : "DIRTY") +
           "; max constraint violation " + fmt(worst_constraint) + "; attribution gap " + fmt(worst_attr) +
           "; mean excess SKEW exposure at 60% " + fmt(mean_excess));
    return o;
}

std::map<std::string, std::string> directory_contents(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        std::ifstream in(entry.path(), std::ios::binary);
        files[entry.path().filename().string()] = {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    }
    return files;
}

Outcome determinism() {
    Outcome o;
    const fs::path fixtures = SHORTFALL_FIXTURE_DIR;
    const fs::path root = testing::scratch_dir("acceptance_determinism");
    const std::string cli = SHORTFALL_CLI_PATH;
    const std::map<std::string, std::string> commands{
        {"optimize", "optimize --panel " + (fixtures / "factors.csv").string() + " --config " +
                         (fixtures / "optimize_config.json").string() + " --constraints " +
                         (fixtures / "index_style.json").string()},
        {"backtest", "backtest --panel " + (fixtures / "factors.csv").string() + " --config " +
                         (fixtures / "factors_backtest.json").string() + " --confidence 0.6,0.9,0.95,0.99"},
        {"nn", "nn --panel " + (fixtures / "fat_tailed.csv").string() + " --config " +
                   (fixtures / "nn_config.json").string()},
        {"esterror", "esterror --assets 5 --lengths 500,1000 --replications 10 --baseline-samples 5000 --seed 9"}};
    const unsigned hw = std::max(2u, std::thread::hardware_concurrency());
    for (const auto& [name, args] : commands) {
        std::vector<fs::path> dirs;
        for (const std::string& threads : std::vector<std::string>{"1", "1", std::to_string(hw), "3"}) {
            const fs::path out = root / (name + "_" + std::to_string(dirs.size()));
            const std::string line = "\"" + cli + "\" " + args + " --quiet --threads " + threads + " --out \"" + out.string() + "\"";
            const int status = std::system(line.c_str());
            o.require(status == 0, name + " exited with status " + std::to_string(status));
            dirs.push_back(out);
        }
        if (!o.pass) continue;
        const auto reference = directory_contents(dirs[0]);
        for (std::size_t i = 1; i < dirs.size(); ++i) {
            o.require(directory_contents(dirs[i]) == reference, name + " run " + std::to_string(i) + " differs");
        }
    }
    o.note("optimize, backtest, nn, esterror: 2 runs at --threads 1, then --threads " + std::to_string(hw) +
           " and 3, all byte-identical" + std::string(o.pass ? "" : " (see failures)"));
    return o;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"LP-oracle equivalence", lp_oracle},
        {"Gaussian reduction", gaussian_reduction},
        {"estimation-error protocol", figure_two_protocol},
        {"boundary angle", boundary_angles},
        {"Gaussian shortfall constant", gaussian_constant},
        {"NN calibration", nn_calibration},
        {"scenario identity", scenario_identity},
        {"backtest integrity", backtest_integrity},
        {"determinism", determinism},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        failures += o.pass ? 0 : 1;
        std::printf("%s criterion %zu (%s): %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                    o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
