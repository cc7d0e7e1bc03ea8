// Python bindings: panels come in as (dates, names, matrix) and dates as ISO strings.
#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "shortfall/backtest.hpp"
#include "shortfall/cli.hpp"
#include "shortfall/covariance.hpp"
#include "shortfall/errors.hpp"
#include "shortfall/esterror.hpp"
#include "shortfall/optimize.hpp"
#include "shortfall/risk.hpp"
#include "shortfall/scenario.hpp"

namespace py = pybind11;
using namespace shortfall;

namespace {

std::vector<std::string> date_strings(const std::vector<Date>& dates) {
    std::vector<std::string> out;
    out.reserve(dates.size());
    for (const auto& d : dates) out.push_back(d.to_string());
    return out;
}

std::vector<Date> parse_dates(const std::vector<std::string>& text) {
    std::vector<Date> out;
    out.reserve(text.size());
    for (const auto& t : text) out.push_back(Date::parse(t));
    return out;
}

py::dict result_dict(const OptimizationResult& r) {
    py::dict d;
    d["weights"] = r.weights;
    d["objective_value"] = r.objective_value;
    d["shortfall"] = r.shortfall ? py::cast(r.shortfall->value) : py::none();
    d["variance"] = r.variance ? py::cast(*r.variance) : py::none();
    d["feasibility_residual"] = r.diagnostics.feasibility_residual;
    d["optimality_gap"] = r.diagnostics.optimality_gap;
    d["iterations"] = r.diagnostics.iterations;
    return d;
}

py::dict nn_dict(const NNReport& r) {
    py::dict d;
    d["nn"] = r.nn;
    d["ci_low"] = r.ci_low;
    d["ci_high"] = r.ci_high;
    return d;
}

AnalysisConfig analysis_config(int half_life, int warmup, double eigen_floor) {
    AnalysisConfig c;
    c.half_life_days = half_life;
    c.warmup_observations = warmup;
    c.eigen_floor = eigen_floor;
    c.validate();
    return c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Expected-shortfall portfolio analytics";

    static py::exception<Error> error(m, "Error", PyExc_ValueError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::set_error(error, (std::string(e.category()) + ": " + e.what()).c_str());
        }
    });

    py::class_<ReturnPanel>(m, "ReturnPanel")
        .def(py::init([](const std::vector<std::string>& dates, std::vector<std::string> names,
                         Eigen::MatrixXd returns) {
                 return ReturnPanel(parse_dates(dates), std::move(names), std::move(returns));
             }),
             py::arg("dates"), py::arg("names"), py::arg("returns"))
        .def_property_readonly("dates", [](const ReturnPanel& p) { return date_strings(p.dates()); })
        .def_property_readonly("names", &ReturnPanel::names)
        .def_property_readonly("returns", &ReturnPanel::returns)
        .def("__len__", &ReturnPanel::rows)
        .def("to_csv", &format_panel);

    m.def("load_panel", [](const std::filesystem::path& path) { return load_panel(path); }, py::arg("path"));
    m.def("parse_panel", [](const std::string& text) { return parse_panel(text); }, py::arg("text"));

    m.def(
        "ewma_covariance",
        [](const ReturnPanel& panel, int half_life, const std::string& as_of) {
            return ewma_covariance(panel, half_life, Date::parse(as_of)).matrix;
        },
        py::arg("panel"), py::arg("half_life"), py::arg("as_of"));

    m.def(
        "forecast_scenarios",
        [](const ReturnPanel& panel, const std::string& analysis_date, int half_life, int warmup,
           double eigen_floor, int threads) {
            const ScenarioSet s = forecast_scenarios(panel, Date::parse(analysis_date),
                                                     analysis_config(half_life, warmup, eigen_floor), threads);
            return py::make_tuple(s.scenarios, date_strings(s.source_dates));
        },
        py::arg("panel"), py::arg("analysis_date"), py::arg("half_life") = 21, py::arg("warmup") = 252,
        py::arg("eigen_floor") = 1e-12, py::arg("threads") = 1,
        "Returns (scenarios, source_dates).");

    m.def("tail_count", &tail_count, py::arg("sample_size"), py::arg("p"));
    m.def(
        "empirical_shortfall",
        [](const std::vector<double>& r, double p) { return empirical_shortfall(r, p).value; }, py::arg("returns"),
        py::arg("p"));
    m.def("normal_shortfall", &normal_shortfall, py::arg("sigma"), py::arg("p"));
    m.def(
        "nn_statistic",
        [](const std::vector<double>& s, double p, const std::string& tail, double sigma) {
            return nn_statistic(s, p, parse_tail(tail), sigma);
        },
        py::arg("sample"), py::arg("p"), py::arg("tail") = "loss", py::arg("sigma") = 1.0);
    m.def(
        "bootstrap_nn_ci",
        [](const std::vector<double>& first, const std::vector<double>& second, double p, const std::string& tail,
           int replications, std::uint64_t seed, int threads) {
            BootstrapComparison c;
            {
                py::gil_scoped_release release;
                c = bootstrap_nn_ci(first, second, p, parse_tail(tail), replications, seed, 1.0, 1.0, threads);
            }
            py::dict d;
            d["first"] = nn_dict(c.first);
            d["second"] = nn_dict(c.second);
            d["difference"] = c.difference;
            d["difference_low"] = c.difference_low;
            d["difference_high"] = c.difference_high;
            d["persistence_rejected"] = c.persistence_rejected();
            return d;
        },
        py::arg("first"), py::arg("second"), py::arg("p"), py::arg("tail") = "loss", py::arg("replications") = 1000,
        py::arg("seed") = 0, py::arg("threads") = 1);
    m.def(
        "realized_volatility", [](const std::vector<double>& r) { return realized_volatility(r); }, py::arg("returns"));
    m.def(
        "sharpe_ratio", [](const std::vector<double>& r) { return sharpe_ratio(r); }, py::arg("returns"));

    py::class_<ConstraintSet>(m, "ConstraintSet")
        .def(py::init<Eigen::Index>(), py::arg("n_assets"))
        .def("add_equality", &ConstraintSet::add_equality, py::arg("coefficients"), py::arg("rhs"),
             py::return_value_policy::reference_internal)
        .def("add_inequality", &ConstraintSet::add_inequality, py::arg("coefficients"), py::arg("rhs"),
             py::return_value_policy::reference_internal)
        .def("set_bounds", &ConstraintSet::set_bounds, py::arg("i"), py::arg("lower"), py::arg("upper"),
             py::return_value_policy::reference_internal)
        .def("max_violation", &ConstraintSet::max_violation, py::arg("weights"))
        .def("__len__", &ConstraintSet::size)
        .def_static("full_investment_long_only", &ConstraintSet::full_investment_long_only, py::arg("n_assets"));
    m.def("index_style_constraints", &index_style_constraints, py::arg("names"), py::arg("index_column"),
          py::arg("style_bound") = 2.0);

    m.def(
        "minimize_shortfall",
        [](const Eigen::MatrixXd& scenarios, double p, const ConstraintSet& c) {
            return result_dict(minimize_shortfall(scenarios, p, c));
        },
        py::arg("scenarios"), py::arg("p"), py::arg("constraints"));
    m.def(
        "minimize_variance",
        [](const Eigen::MatrixXd& cov, const ConstraintSet& c) { return result_dict(minimize_variance(cov, c)); },
        py::arg("covariance"), py::arg("constraints"));
    m.def(
        "maximize_mean_variance_shortfall",
        [](const Eigen::MatrixXd& scenarios, const Eigen::MatrixXd& cov, const Eigen::VectorXd& alpha,
           double shortfall_aversion, double variance_aversion, double p, const ConstraintSet& c) {
            ObjectiveSpec spec{alpha, shortfall_aversion, variance_aversion, p};
            return result_dict(maximize_mean_variance_shortfall(scenarios, cov, spec, c));
        },
        py::arg("scenarios"), py::arg("covariance"), py::arg("alpha"), py::arg("shortfall_aversion") = 1.0,
        py::arg("variance_aversion") = 0.0, py::arg("p") = 0.95, py::arg("constraints"));
    m.def(
        "brute_force_shortfall",
        [](const Eigen::MatrixXd& scenarios, double p, const ConstraintSet& c, double step) {
            return result_dict(brute_force_shortfall(scenarios, p, c, step));
        },
        py::arg("scenarios"), py::arg("p"), py::arg("constraints"), py::arg("grid_step") = 0.01);

    m.def("boundary_angle", &boundary_angle, py::arg("n"));
    m.def("weight_error_angle", &weight_error_angle, py::arg("weights"), py::arg("reference"));
    m.def("random_weight_baseline", &random_weight_baseline, py::arg("n_assets"), py::arg("samples"),
          py::arg("seed") = 0);
    m.def(
        "run_estimation_study",
        [](int n_assets, std::vector<int> lengths, std::vector<double> confidences, int replications,
           std::uint64_t seed, int threads) {
            const EstimationStudyConfig cfg{n_assets, std::move(lengths), std::move(confidences), replications, seed,
                                            threads};
            std::vector<TrialReport> reports;
            {
                py::gil_scoped_release release;
                reports = run_estimation_study(cfg);
            }
            py::list out;
            for (const auto& r : reports) {
                py::dict d;
                d["sample_length"] = r.sample_length;
                d["confidence"] = r.confidence;
                d["risk_error"] = r.mean_risk_error;
                d["weight_error_deg"] = r.mean_weight_error_deg;
                d["boundary_angle_deg"] = r.boundary_angle_deg;
                out.append(d);
            }
            return out;
        },
        py::arg("n_assets") = 10, py::arg("sample_lengths") = std::vector<int>{1000, 3000, 5000, 7000},
        py::arg("confidences") = std::vector<double>{0.60, 0.90, 0.95, 0.99}, py::arg("replications") = 100,
        py::arg("seed") = 0, py::arg("threads") = 1);

    m.def(
        "run_backtest",
        [](const ReturnPanel& panel, const std::string& start, const std::string& end, std::vector<double> confidences,
           const std::string& frequency, int half_life, int warmup, const std::string& index_column,
           double style_bound, int threads) {
            BacktestConfig cfg;
            cfg.confidences = std::move(confidences);
            cfg.rebalance_frequency = parse_frequency(frequency);
            cfg.half_life_days = half_life;
            cfg.warmup_observations = warmup;
            cfg.start_date = Date::parse(start);
            cfg.end_date = Date::parse(end);
            cfg.index_column = index_column;
            cfg.style_bound = style_bound;
            cfg.threads = threads;
            BacktestReport r;
            {
                py::gil_scoped_release release;
                r = run_backtest(panel, cfg);
            }
            py::dict d;
            d["dates"] = date_strings(r.dates);
            d["index"] = r.index_returns;
            d["minvar"] = r.min_variance_returns;
            py::dict shortfall, active;
            for (std::size_t c = 0; c < r.confidences.size(); ++c) {
                shortfall[py::float_(r.confidences[c])] = r.min_shortfall_returns[c];
                active[py::float_(r.confidences[c])] = r.active_returns[c];
            }
            d["min_shortfall"] = shortfall;
            d["active"] = active;
            py::list rebalances;
            for (const auto& rb : r.rebalances) {
                py::dict e;
                e["date"] = rb.date.to_string();
                e["min_variance"] = rb.min_variance;
                e["min_shortfall"] = rb.min_shortfall;
                rebalances.append(e);
            }
            d["rebalances"] = rebalances;
            return d;
        },
        py::arg("panel"), py::arg("start"), py::arg("end"),
        py::arg("confidences") = std::vector<double>{0.60, 0.90, 0.95, 0.99}, py::arg("frequency") = "monthly",
        py::arg("half_life") = 21, py::arg("warmup") = 252, py::arg("index_column") = "", py::arg("style_bound") = 2.0,
        py::arg("threads") = 1);

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::ostringstream out, err;
            int code = 0;
            {
                py::gil_scoped_release release;
                code = run_cli(args, out, err);
            }
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs the command line in-process; returns (exit_code, stdout, stderr).");
}
