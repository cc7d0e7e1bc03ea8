#include "shortfall/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "shortfall/active_set_qp.hpp"
#include "shortfall/errors.hpp"
#include "shortfall/simplex.hpp"

namespace shortfall {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

ConstraintSet::ConstraintSet(Eigen::Index n_assets) {
    if (n_assets < 1) throw ValidationError("constraint set needs at least one weight");
    bounds_.resize(static_cast<std::size_t>(n_assets));
}

ConstraintSet& ConstraintSet::add_equality(Eigen::VectorXd coefficients, double rhs) {
    if (coefficients.size() != size()) throw ValidationError("equality has the wrong length");
    equalities_.push_back({std::move(coefficients), rhs});
    return *this;
}

ConstraintSet& ConstraintSet::add_inequality(Eigen::VectorXd coefficients, double rhs) {
    if (coefficients.size() != size()) throw ValidationError("inequality has the wrong length");
    inequalities_.push_back({std::move(coefficients), rhs});
    return *this;
}

ConstraintSet& ConstraintSet::set_bounds(Eigen::Index i, double lower, double upper) {
    if (i < 0 || i >= size()) throw ValidationError("bound index out of range");
    if (lower > upper) throw ValidationError("lower bound exceeds upper bound");
    bounds_[static_cast<std::size_t>(i)] = {lower, upper};
    return *this;
}

double ConstraintSet::max_violation(const Eigen::VectorXd& w) const {
    if (w.size() != size()) throw ValidationError("weight vector has the wrong length");
    double v = 0.0;
    for (const auto& e : equalities_) v = std::max(v, std::abs(e.coefficients.dot(w) - e.rhs));
    for (const auto& g : inequalities_) v = std::max(v, g.coefficients.dot(w) - g.rhs);
    for (Eigen::Index i = 0; i < size(); ++i) {
        const auto& b = bounds_[static_cast<std::size_t>(i)];
        v = std::max({v, b.lower - w(i), w(i) - b.upper});
    }
    return v;
}

void ConstraintSet::to_rows(Eigen::MatrixXd& eq, Eigen::VectorXd& eq_rhs, Eigen::MatrixXd& in,
                            Eigen::VectorXd& in_rhs) const {
    const Eigen::Index n = size();
    std::vector<LinearConstraint> eqs = equalities_;
    std::vector<LinearConstraint> ins = inequalities_;
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& b = bounds_[static_cast<std::size_t>(i)];
        Eigen::VectorXd unit = Eigen::VectorXd::Unit(n, i);
        if (b.lower == b.upper) {
            eqs.push_back({unit, b.lower});
            continue;
        }
        if (std::isfinite(b.upper)) ins.push_back({unit, b.upper});
        if (std::isfinite(b.lower)) ins.push_back({-unit, -b.lower});
    }
    eq.resize(static_cast<Eigen::Index>(eqs.size()), n);
    eq_rhs.resize(static_cast<Eigen::Index>(eqs.size()));
    for (std::size_t k = 0; k < eqs.size(); ++k) {
        eq.row(static_cast<Eigen::Index>(k)) = eqs[k].coefficients.transpose();
        eq_rhs(static_cast<Eigen::Index>(k)) = eqs[k].rhs;
    }
    in.resize(static_cast<Eigen::Index>(ins.size()), n);
    in_rhs.resize(static_cast<Eigen::Index>(ins.size()));
    for (std::size_t k = 0; k < ins.size(); ++k) {
        in.row(static_cast<Eigen::Index>(k)) = ins[k].coefficients.transpose();
        in_rhs(static_cast<Eigen::Index>(k)) = ins[k].rhs;
    }
}

ConstraintSet ConstraintSet::full_investment_long_only(Eigen::Index n_assets) {
    ConstraintSet c(n_assets);
    c.add_equality(Eigen::VectorXd::Ones(n_assets), 1.0);
    for (Eigen::Index i = 0; i < n_assets; ++i) c.set_bounds(i, 0.0, kInf);
    return c;
}

ConstraintSet index_style_constraints(const std::vector<std::string>& names,
                                      const std::string& index_column, double style_bound) {
    if (!(style_bound > 0.0)) throw ValidationError("style bound must be positive");
    const auto it = std::find(names.begin(), names.end(), index_column);
    if (it == names.end()) throw ValidationError("index column '" + index_column + "' not in panel");
    const auto n = static_cast<Eigen::Index>(names.size());
    const auto index = static_cast<Eigen::Index>(it - names.begin());
    ConstraintSet c(n);
    c.add_equality(Eigen::VectorXd::Unit(n, index), 1.0);
    if (n > 1) {
        Eigen::VectorXd styles = Eigen::VectorXd::Ones(n);
        styles(index) = 0.0;
        c.add_equality(styles, 0.0);
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        if (i != index) c.set_bounds(i, -style_bound, style_bound);
    }
    return c;
}

std::vector<double> portfolio_returns(const Eigen::MatrixXd& scenarios, const Eigen::VectorXd& weights) {
    if (scenarios.cols() != weights.size()) throw ValidationError("weights do not match scenario columns");
    const Eigen::VectorXd r = scenarios * weights;
    return std::vector<double>(r.data(), r.data() + r.size());
}

namespace {

/// min objective'w over the constraint set (inequalities carry slacks).
lp::Result solve_over_constraints(const ConstraintSet& constraints, const Eigen::VectorXd& objective) {
    const Eigen::Index n = constraints.size();
    Eigen::MatrixXd eq, in;
    Eigen::VectorXd eq_rhs, in_rhs;
    constraints.to_rows(eq, eq_rhs, in, in_rhs);
    const Eigen::Index me = eq.rows();
    const Eigen::Index mi = in.rows();
    lp::LinearProgram prog;
    prog.A = Eigen::MatrixXd::Zero(me + mi, n + mi);
    prog.A.topLeftCorner(me, n) = eq;
    prog.A.bottomLeftCorner(mi, n) = in;
    prog.A.bottomRightCorner(mi, mi).setIdentity();
    prog.b.resize(me + mi);
    prog.b << eq_rhs, in_rhs;
    prog.c = Eigen::VectorXd::Zero(n + mi);
    prog.c.head(n) = objective;
    prog.lower = Eigen::VectorXd::Zero(n + mi);
    prog.lower.head(n).setConstant(-kInf);
    prog.upper = Eigen::VectorXd::Constant(n + mi, kInf);
    lp::Result r = lp::solve(prog);
    if (r.status == lp::Status::infeasible) throw InfeasibleError("constraint set is infeasible");
    if (r.status == lp::Status::iteration_limit) throw NumericalError("constraint LP did not converge");
    if (r.status == lp::Status::optimal) r.x.conservativeResize(n);
    return r;
}

/// Equal weights when feasible, otherwise a vertex of the feasible set.
Eigen::VectorXd feasible_start(const ConstraintSet& constraints) {
    const Eigen::Index n = constraints.size();
    Eigen::VectorXd equal = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
    if (constraints.max_violation(equal) <= 1e-12) return equal;
    return solve_over_constraints(constraints, Eigen::VectorXd::Zero(n)).x;
}

/// Indices of the K smallest entries, ties broken by index.
std::vector<Eigen::Index> tail_set(const Eigen::VectorXd& returns, long k) {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(returns.size()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::partial_sort(order.begin(), order.begin() + k, order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return returns(a) < returns(b) || (returns(a) == returns(b) && a < b);
    });
    order.resize(static_cast<std::size_t>(k));
    std::sort(order.begin(), order.end());
    return order;
}

/// Portfolio whose tail seeds the simplex: the minimum second-moment portfolio
/// is close to the shortfall optimum for near-elliptical scenarios, so few
/// tail memberships change afterwards. Falls back to any feasible point.
Eigen::VectorXd crash_portfolio(const Eigen::MatrixXd& scenarios, const ConstraintSet& constraints,
                                const Eigen::VectorXd& fallback) {
    qp::QuadraticProgram prog;
    prog.H = scenarios.transpose() * scenarios / static_cast<double>(scenarios.rows());
    prog.c = Eigen::VectorXd::Zero(scenarios.cols());
    constraints.to_rows(prog.A_eq, prog.b_eq, prog.A_in, prog.b_in);
    try {
        return qp::solve(prog, {}, fallback).x;
    } catch (const Error&) {
        return fallback;
    }
}

struct LinearShortfallSolution {
    Eigen::VectorXd weights;
    double bound = 0.0;  ///< optimal value of min -alpha'w + Lambda s(w) from the dual
    long iterations = 0;
};

/// min -alpha'w + Lambda * s_p(w) over the constraint set, by the bounded
/// simplex on the dual: columns x_i in [0,1] (one per scenario), mu (free)
/// per equality, nu >= 0 per inequality; rows
///   (Lambda/K) R'x + E'mu - G'nu = -alpha,   sum x = K
/// (stored with the first block multiplied by K).
LinearShortfallSolution solve_linear_shortfall(const Eigen::MatrixXd& scenarios, const Eigen::VectorXd& alpha,
                                               double shortfall_aversion, double p,
                                               const ConstraintSet& constraints) {
    const Eigen::Index t_count = scenarios.rows();
    const Eigen::Index n = scenarios.cols();
    if (constraints.size() != n || alpha.size() != n) {
        throw ValidationError("constraint/alpha dimension does not match scenario columns");
    }
    const bool with_tail = shortfall_aversion > 0.0;
    const long k = tail_count(static_cast<long>(t_count), p);
    if (with_tail && k < 1) {
        throw DegenerateTailError("tail is empty: T = " + std::to_string(t_count) + ", p = " + std::to_string(p));
    }
    const Eigen::VectorXd start = feasible_start(constraints);

    // The argmin is invariant to scaling returns and alpha together.
    double scale = std::max(scenarios.size() > 0 ? scenarios.cwiseAbs().maxCoeff() : 0.0,
                            alpha.cwiseAbs().maxCoeff());
    if (!(scale > 0.0)) scale = 1.0;

    Eigen::MatrixXd eq, in;
    Eigen::VectorXd eq_rhs, in_rhs;
    constraints.to_rows(eq, eq_rhs, in, in_rhs);
    const Eigen::Index me = eq.rows();
    const Eigen::Index mi = in.rows();
    const Eigen::Index nx = with_tail ? t_count : 0;
    const Eigen::Index rows = n + (with_tail ? 1 : 0);
    const Eigen::Index cols = nx + me + mi;

    lp::LinearProgram dual;
    dual.A = Eigen::MatrixXd::Zero(rows, cols);
    dual.b = Eigen::VectorXd::Zero(rows);
    dual.c = Eigen::VectorXd::Zero(cols);
    dual.lower = Eigen::VectorXd::Zero(cols);
    dual.upper = Eigen::VectorXd::Constant(cols, kInf);
    // The weight rows are multiplied by K so their entries are comparable to
    // the sum(x) = K row; mu and nu are rescaled by the same factor.
    const auto kd = static_cast<double>(std::max(k, 1L));
    dual.b.head(n) = -kd * alpha / scale;
    if (with_tail) {
        const double coef = shortfall_aversion / scale;
        dual.A.topLeftCorner(n, nx) = coef * scenarios.transpose();
        dual.A.row(n).head(nx).setOnes();
        dual.b(n) = static_cast<double>(k);
        dual.upper.head(nx).setOnes();
    }
    if (me > 0) {
        dual.A.block(0, nx, n, me) = eq.transpose();
        dual.c.segment(nx, me) = -eq_rhs / kd;
        dual.lower.segment(nx, me).setConstant(-kInf);
    }
    if (mi > 0) {
        dual.A.block(0, nx + me, n, mi) = -in.transpose();
        dual.c.segment(nx + me, mi) = in_rhs / kd;
    }

    lp::Options options;
    if (with_tail) {
        // Crash start: the tail of the starting portfolio at its upper bound.
        options.start.assign(static_cast<std::size_t>(cols), lp::Start::lower);
        const Eigen::VectorXd crash = crash_portfolio(scenarios, constraints, start);
        for (Eigen::Index i : tail_set(scenarios * crash, k)) options.start[static_cast<std::size_t>(i)] = lp::Start::upper;
    }
    const lp::Result r = lp::solve(dual, options);
    switch (r.status) {
        case lp::Status::optimal: break;
        case lp::Status::infeasible:
            throw UnboundedError("objective is unbounded over the constraint set");
        case lp::Status::unbounded: throw InfeasibleError("constraint set is infeasible");
        case lp::Status::iteration_limit: throw NumericalError("simplex hit the iteration limit");
    }
    LinearShortfallSolution out;
    out.weights = -kd * r.duals.head(n);
    out.bound = -r.objective * scale;
    out.iterations = r.iterations;
    return out;
}

Eigen::VectorXd validate_alpha(const ObjectiveSpec& objective, Eigen::Index n) {
    if (objective.alpha.size() == 0) return Eigen::VectorXd::Zero(n);
    if (objective.alpha.size() != n) throw ValidationError("alpha has the wrong length");
    return objective.alpha;
}

void check_covariance(const Eigen::MatrixXd& covariance, Eigen::Index n) {
    if (covariance.rows() != n || covariance.cols() != n) {
        throw ValidationError("covariance dimension does not match the constraint set");
    }
    if ((covariance - covariance.transpose()).cwiseAbs().maxCoeff() >
        1e-12 * std::max(1.0, covariance.cwiseAbs().maxCoeff())) {
        throw ValidationError("covariance is not symmetric");
    }
}

qp::QuadraticProgram variance_program(const Eigen::MatrixXd& covariance, const Eigen::VectorXd& alpha,
                                      double variance_aversion, const ConstraintSet& constraints) {
    qp::QuadraticProgram prog;
    prog.H = 2.0 * variance_aversion * covariance;
    prog.c = -alpha;
    constraints.to_rows(prog.A_eq, prog.b_eq, prog.A_in, prog.b_in);
    return prog;
}

}  // namespace

OptimizationResult minimize_shortfall(const Eigen::MatrixXd& scenarios, double p,
                                      const ConstraintSet& constraints) {
    const LinearShortfallSolution sol =
        solve_linear_shortfall(scenarios, Eigen::VectorXd::Zero(scenarios.cols()), 1.0, p, constraints);
    OptimizationResult result;
    result.weights = sol.weights;
    result.shortfall = empirical_shortfall(portfolio_returns(scenarios, sol.weights), p);
    // The primal objective at (w, t*, z*) is the estimator itself.
    result.objective_value = result.shortfall->value;
    result.diagnostics.feasibility_residual = std::max(0.0, constraints.max_violation(sol.weights));
    result.diagnostics.optimality_gap = result.shortfall->value - sol.bound;
    result.diagnostics.iterations = sol.iterations;
    return result;
}

OptimizationResult minimize_shortfall(const ScenarioSet& scenarios, double p, const ConstraintSet& constraints) {
    return minimize_shortfall(scenarios.scenarios, p, constraints);
}

OptimizationResult minimize_variance(const Eigen::MatrixXd& covariance, const ConstraintSet& constraints) {
    const Eigen::Index n = constraints.size();
    check_covariance(covariance, n);
    const qp::Result r = qp::solve(variance_program(covariance, Eigen::VectorXd::Zero(n), 1.0, constraints),
                                   {}, feasible_start(constraints));
    OptimizationResult result;
    result.weights = r.x;
    result.variance = r.x.dot(covariance * r.x);
    result.objective_value = *result.variance;
    result.diagnostics.feasibility_residual = std::max(0.0, constraints.max_violation(r.x));
    result.diagnostics.optimality_gap = r.stationarity_residual;
    result.diagnostics.iterations = r.iterations;
    return result;
}

OptimizationResult minimize_variance(const CovarianceEstimate& covariance, const ConstraintSet& constraints) {
    return minimize_variance(covariance.matrix, constraints);
}

OptimizationResult maximize_mean_variance_shortfall(const Eigen::MatrixXd& scenarios,
                                                    const Eigen::MatrixXd& covariance,
                                                    const ObjectiveSpec& objective,
                                                    const ConstraintSet& constraints) {
    const Eigen::Index n = constraints.size();
    if (scenarios.cols() != n) throw ValidationError("scenario columns do not match the constraint set");
    check_covariance(covariance, n);
    const double shortfall_aversion = objective.shortfall_aversion;
    const double variance_aversion = objective.variance_aversion;
    if (!(shortfall_aversion >= 0.0) || !(variance_aversion >= 0.0)) {
        throw ValidationError("risk aversions must be nonnegative");
    }
    const Eigen::VectorXd alpha = validate_alpha(objective, n);
    if (shortfall_aversion == 0.0 && variance_aversion == 0.0 && alpha.isZero(0.0)) {
        throw ValidationError("objective is identically zero: set alpha or a risk aversion");
    }
    const double p = objective.confidence;
    const long k = tail_count(static_cast<long>(scenarios.rows()), p);
    if (shortfall_aversion > 0.0 && k < 1) throw DegenerateTailError("tail is empty at this confidence");

    OptimizationResult result;
    // Minimization form: f(w) = lambda w'Sigma w - alpha'w + Lambda s_p(w).
    auto evaluate = [&](const Eigen::VectorXd& w) {
        const double var = w.dot(covariance * w);
        double s = 0.0;
        if (k >= 1) s = empirical_shortfall(portfolio_returns(scenarios, w), p).value;
        return variance_aversion * var - alpha.dot(w) + shortfall_aversion * s;
    };
    double upper = 0.0;
    double lower = 0.0;

    if (variance_aversion == 0.0) {
        const LinearShortfallSolution sol =
            solve_linear_shortfall(scenarios, alpha, shortfall_aversion, p, constraints);
        result.weights = sol.weights;
        result.diagnostics.iterations = sol.iterations;
        upper = evaluate(sol.weights);
        lower = sol.bound;
    } else if (shortfall_aversion == 0.0) {
        const qp::Result r = qp::solve(variance_program(covariance, alpha, variance_aversion, constraints), {},
                                       feasible_start(constraints));
        result.weights = r.x;
        result.diagnostics.iterations = r.iterations;
        upper = evaluate(r.x);
        lower = upper - r.stationarity_residual;
    } else {
        // Cutting planes: s_p(w) >= -(1/K) sum_{i in S} w'r_i for every |S| = K,
        // with equality for the tail set of w.
        qp::QuadraticProgram master;
        master.H = Eigen::MatrixXd::Zero(n + 1, n + 1);
        master.H.topLeftCorner(n, n) = 2.0 * variance_aversion * covariance;
        master.c.resize(n + 1);
        master.c << -alpha, shortfall_aversion;
        Eigen::MatrixXd eq, in;
        Eigen::VectorXd eq_rhs, in_rhs;
        constraints.to_rows(eq, eq_rhs, in, in_rhs);
        master.A_eq = Eigen::MatrixXd::Zero(eq.rows(), n + 1);
        master.A_eq.leftCols(n) = eq;
        master.b_eq = eq_rhs;
        std::vector<Eigen::VectorXd> cut_rows;
        std::set<std::vector<Eigen::Index>> seen;

        auto add_cut = [&](const Eigen::VectorXd& w) {
            const auto tail = tail_set(scenarios * w, k);
            if (!seen.insert(tail).second) return false;
            Eigen::VectorXd row = Eigen::VectorXd::Zero(n + 1);
            for (Eigen::Index i : tail) row.head(n) -= scenarios.row(i).transpose();
            row.head(n) /= static_cast<double>(k);
            row(n) = -1.0;
            cut_rows.push_back(row);
            return true;
        };

        Eigen::VectorXd w = feasible_start(constraints);
        add_cut(w);
        Eigen::VectorXd best = w;
        upper = evaluate(w);
        lower = -kInf;
        Eigen::VectorXd x(n + 1);
        long total_iterations = 0;
        for (int round = 0; round < 5000; ++round) {
            const auto cuts = static_cast<Eigen::Index>(cut_rows.size());
            master.A_in = Eigen::MatrixXd::Zero(in.rows() + cuts, n + 1);
            master.A_in.topLeftCorner(in.rows(), n) = in;
            master.b_in = Eigen::VectorXd::Zero(in.rows() + cuts);
            master.b_in.head(in.rows()) = in_rhs;
            for (Eigen::Index c = 0; c < cuts; ++c) master.A_in.row(in.rows() + c) = cut_rows[static_cast<std::size_t>(c)];

            // Warm start: the last weights with theta lifted onto every cut.
            x.head(n) = w;
            double theta = -kInf;
            for (const auto& row : cut_rows) theta = std::max(theta, row.head(n).dot(w));
            x(n) = theta;
            const qp::Result r = qp::solve(master, {}, x);
            total_iterations += r.iterations;
            w = r.x.head(n);
            lower = std::max(lower, r.objective);
            const double value = evaluate(w);
            if (value < upper) {
                upper = value;
                best = w;
            }
            if (upper - lower <= 1e-10 * (1.0 + std::abs(upper))) break;
            if (!add_cut(w)) break;
            if (round == 4999) throw NumericalError("cutting-plane iterations did not converge");
        }
        result.weights = best;
        result.diagnostics.iterations = total_iterations;
    }

    result.objective_value = -upper;
    result.variance = result.weights.dot(covariance * result.weights);
    if (k >= 1) result.shortfall = empirical_shortfall(portfolio_returns(scenarios, result.weights), p);
    result.diagnostics.feasibility_residual = std::max(0.0, constraints.max_violation(result.weights));
    result.diagnostics.optimality_gap = upper - lower;
    return result;
}

OptimizationResult maximize_mean_variance_shortfall(const ScenarioSet& scenarios,
                                                    const CovarianceEstimate& covariance,
                                                    const ObjectiveSpec& objective,
                                                    const ConstraintSet& constraints) {
    return maximize_mean_variance_shortfall(scenarios.scenarios, covariance.matrix, objective, constraints);
}

OptimizationResult brute_force_shortfall(const Eigen::MatrixXd& scenarios, double p,
                                         const ConstraintSet& constraints, double grid_step) {
    const Eigen::Index n = constraints.size();
    if (scenarios.cols() != n) throw ValidationError("scenario columns do not match the constraint set");
    if (n > 4) throw ValidationError("brute-force search supports at most 4 weights");
    if (!(grid_step > 0.0)) throw ValidationError("grid step must be positive");
    if (tail_count(static_cast<long>(scenarios.rows()), p) < 1) {
        throw DegenerateTailError("tail is empty at this confidence");
    }

    // Solve the last weight from an equality when one involves it.
    const LinearConstraint* pivot = nullptr;
    for (const auto& e : constraints.equalities()) {
        if (std::abs(e.coefficients(n - 1)) > 1e-12) {
            pivot = &e;
            break;
        }
    }
    const Eigen::Index free_count = pivot ? n - 1 : n;
    std::vector<long> first(static_cast<std::size_t>(free_count)), last(static_cast<std::size_t>(free_count));
    for (Eigen::Index j = 0; j < free_count; ++j) {
        Bound b = constraints.bounds()[static_cast<std::size_t>(j)];
        // Tighten infinite bounds to those implied by the other constraints.
        for (const double sign : {1.0, -1.0}) {
            double& side = sign > 0 ? b.lower : b.upper;
            if (std::isfinite(side)) continue;
            const lp::Result r = solve_over_constraints(constraints, sign * Eigen::VectorXd::Unit(n, j));
            if (r.status != lp::Status::optimal) {
                throw ValidationError("brute-force search needs bounded enumerated weights");
            }
            side = r.x(j);
        }
        first[static_cast<std::size_t>(j)] = static_cast<long>(std::ceil(b.lower / grid_step - 1e-9));
        last[static_cast<std::size_t>(j)] = static_cast<long>(std::floor(b.upper / grid_step + 1e-9));
    }

    OptimizationResult best;
    double best_value = kInf;
    long evaluated = 0;
    std::vector<long> idx = first;
    Eigen::VectorXd w(n);
    while (true) {
        for (Eigen::Index j = 0; j < free_count; ++j) w(j) = static_cast<double>(idx[static_cast<std::size_t>(j)]) * grid_step;
        if (pivot) {
            const double partial = pivot->coefficients.head(n - 1).dot(w.head(n - 1));
            w(n - 1) = (pivot->rhs - partial) / pivot->coefficients(n - 1);
        }
        if (constraints.max_violation(w) <= 1e-9) {
            ++evaluated;
            const ShortfallValue s = empirical_shortfall(portfolio_returns(scenarios, w), p);
            if (s.value < best_value) {
                best_value = s.value;
                best.weights = w;
                best.shortfall = s;
            }
        }
        Eigen::Index j = 0;
        for (; j < free_count; ++j) {
            auto& i = idx[static_cast<std::size_t>(j)];
            if (i < last[static_cast<std::size_t>(j)]) {
                ++i;
                break;
            }
            i = first[static_cast<std::size_t>(j)];
        }
        if (j == free_count) break;
    }
    if (!std::isfinite(best_value)) throw InfeasibleError("no feasible grid point");
    best.objective_value = best_value;
    best.diagnostics.feasibility_residual = std::max(0.0, constraints.max_violation(best.weights));
    best.diagnostics.iterations = evaluated;
    return best;
}

OptimizationResult brute_force_shortfall(const ScenarioSet& scenarios, double p,
                                         const ConstraintSet& constraints, double grid_step) {
    return brute_force_shortfall(scenarios.scenarios, p, constraints, grid_step);
}

}  // namespace shortfall
