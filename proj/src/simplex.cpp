#include "shortfall/simplex.hpp"

#include <cmath>
#include <cstdint>
#include <limits>

#include "shortfall/errors.hpp"

namespace shortfall::lp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VarState : std::uint8_t { basic, at_lower, at_upper, at_zero };

class Solver {
public:
    Solver(const LinearProgram& lp, const Options& options);
    Result run();

private:
    enum class Outcome { optimal, unbounded, iteration_limit };

    Outcome iterate(const Eigen::VectorXd& cost);
    void factor();
    void compute_basic_values();
    double bound_value(Eigen::Index j) const;

    const Options& opt_;
    Eigen::Index m_ = 0;
    Eigen::Index n_ = 0;  // structural columns
    Eigen::MatrixXd a_;   // m x (n + m): structural then artificial
    Eigen::VectorXd b_;
    Eigen::VectorXd cost_;
    Eigen::VectorXd lo_, hi_, x_;
    std::vector<VarState> state_;
    std::vector<Eigen::Index> basis_;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
    Eigen::VectorXd duals_;
    long iterations_ = 0;
    double primal_tol_ = 0.0;
};

Solver::Solver(const LinearProgram& lp, const Options& options) : opt_(options) {
    m_ = lp.A.rows();
    n_ = lp.A.cols();
    if (lp.b.size() != m_ || lp.c.size() != n_ || lp.lower.size() != n_ || lp.upper.size() != n_) {
        throw ValidationError("linear program dimensions are inconsistent");
    }
    if (!opt_.start.empty() && static_cast<Eigen::Index>(opt_.start.size()) != n_) {
        throw ValidationError("start hint has the wrong length");
    }
    const Eigen::Index total = n_ + m_;
    a_.resize(m_, total);
    a_.leftCols(n_) = lp.A;
    a_.rightCols(m_).setZero();
    b_ = lp.b;
    cost_ = lp.c;
    lo_.resize(total);
    hi_.resize(total);
    x_.setZero(total);
    state_.assign(static_cast<std::size_t>(total), VarState::at_zero);
    lo_.head(n_) = lp.lower;
    hi_.head(n_) = lp.upper;

    for (Eigen::Index j = 0; j < n_; ++j) {
        if (lo_(j) > hi_(j)) throw ValidationError("variable lower bound exceeds upper bound");
        const bool want_upper = !opt_.start.empty() && opt_.start[static_cast<std::size_t>(j)] == Start::upper;
        if (std::isfinite(hi_(j)) && (want_upper || !std::isfinite(lo_(j)))) {
            state_[static_cast<std::size_t>(j)] = VarState::at_upper;
            x_(j) = hi_(j);
        } else if (std::isfinite(lo_(j))) {
            state_[static_cast<std::size_t>(j)] = VarState::at_lower;
            x_(j) = lo_(j);
        }
    }

    // Artificials absorb the initial residual with nonnegative values.
    Eigen::VectorXd residual = b_;
    for (Eigen::Index j = 0; j < n_; ++j) {
        if (x_(j) != 0.0) residual.noalias() -= a_.col(j) * x_(j);
    }
    basis_.resize(static_cast<std::size_t>(m_));
    for (Eigen::Index i = 0; i < m_; ++i) {
        const Eigen::Index j = n_ + i;
        a_(i, j) = residual(i) >= 0.0 ? 1.0 : -1.0;
        lo_(j) = 0.0;
        hi_(j) = kInf;
        x_(j) = std::abs(residual(i));
        state_[static_cast<std::size_t>(j)] = VarState::basic;
        basis_[static_cast<std::size_t>(i)] = j;
    }
    const double b_scale = m_ > 0 ? b_.cwiseAbs().maxCoeff() : 0.0;
    primal_tol_ = opt_.feasibility_tolerance * (1.0 + b_scale);
}

double Solver::bound_value(Eigen::Index j) const {
    switch (state_[static_cast<std::size_t>(j)]) {
        case VarState::at_lower: return lo_(j);
        case VarState::at_upper: return hi_(j);
        default: return 0.0;
    }
}

void Solver::factor() {
    if (m_ == 0) return;
    Eigen::MatrixXd basis_matrix(m_, m_);
    for (Eigen::Index i = 0; i < m_; ++i) basis_matrix.col(i) = a_.col(basis_[static_cast<std::size_t>(i)]);
    lu_.compute(basis_matrix);
    if (!(lu_.rcond() > 1e-14)) throw NumericalError("simplex basis became singular");
}

void Solver::compute_basic_values() {
    Eigen::VectorXd rhs = b_;
    const Eigen::Index total = n_ + m_;
    for (Eigen::Index j = 0; j < total; ++j) {
        if (state_[static_cast<std::size_t>(j)] == VarState::basic) continue;
        x_(j) = bound_value(j);
        if (x_(j) != 0.0) rhs.noalias() -= a_.col(j) * x_(j);
    }
    if (m_ == 0) return;
    const Eigen::VectorXd xb = lu_.solve(rhs);
    for (Eigen::Index i = 0; i < m_; ++i) x_(basis_[static_cast<std::size_t>(i)]) = xb(i);
}

Solver::Outcome Solver::iterate(const Eigen::VectorXd& cost) {
    const Eigen::Index total = n_ + m_;
    const double cost_scale = std::max(1.0, cost.cwiseAbs().maxCoeff());
    const double dual_tol = opt_.optimality_tolerance * cost_scale;
    int degenerate_run = 0;
    bool refresh = true;
    Eigen::VectorXd reduced;

    while (true) {
        if (iterations_ >= opt_.max_iterations) return Outcome::iteration_limit;
        // A bound flip leaves the basis, duals and reduced costs unchanged.
        if (refresh) {
            factor();
            compute_basic_values();
            Eigen::VectorXd cb(m_);
            for (Eigen::Index i = 0; i < m_; ++i) cb(i) = cost(basis_[static_cast<std::size_t>(i)]);
            duals_ = m_ > 0 ? Eigen::VectorXd(lu_.transpose().solve(cb)) : Eigen::VectorXd();
            reduced = cost - a_.transpose() * duals_;
        }

        const bool bland = degenerate_run > 50;
        Eigen::Index entering = -1;
        double best = 0.0;
        for (Eigen::Index j = 0; j < total; ++j) {
            const auto s = state_[static_cast<std::size_t>(j)];
            if (s == VarState::basic || lo_(j) == hi_(j)) continue;
            const double d = reduced(j);
            const bool eligible = (s == VarState::at_lower && d < -dual_tol) ||
                                  (s == VarState::at_upper && d > dual_tol) ||
                                  (s == VarState::at_zero && std::abs(d) > dual_tol);
            if (!eligible) continue;
            if (bland) {
                entering = j;
                break;
            }
            if (std::abs(d) > best) {
                best = std::abs(d);
                entering = j;
            }
        }
        if (entering < 0) return Outcome::optimal;

        const double direction = reduced(entering) < 0.0 ? 1.0 : -1.0;
        const Eigen::VectorXd alpha =
            m_ > 0 ? Eigen::VectorXd(lu_.solve(a_.col(entering))) : Eigen::VectorXd();
        const Eigen::VectorXd delta = -direction * alpha;  // d x_B / d step
        // Every row with a non-negligible pivot must take part in the ratio test;
        // Harris' second pass then prefers the larger pivots among near-ties.
        constexpr double pivot_tol = 1e-11;

        // Harris pass 1: largest step keeping every basic variable within tolerance.
        double relaxed = kInf;
        for (Eigen::Index i = 0; i < m_; ++i) {
            const Eigen::Index j = basis_[static_cast<std::size_t>(i)];
            if (delta(i) < -pivot_tol && std::isfinite(lo_(j))) {
                relaxed = std::min(relaxed, (x_(j) - lo_(j) + primal_tol_) / -delta(i));
            } else if (delta(i) > pivot_tol && std::isfinite(hi_(j))) {
                relaxed = std::min(relaxed, (hi_(j) - x_(j) + primal_tol_) / delta(i));
            }
        }
        // Pass 2: among rows blocking within that step, the largest pivot.
        Eigen::Index leaving = -1;
        double step = kInf;
        double best_pivot = 0.0;
        for (Eigen::Index i = 0; i < m_; ++i) {
            const Eigen::Index j = basis_[static_cast<std::size_t>(i)];
            double ratio = kInf;
            if (delta(i) < -pivot_tol && std::isfinite(lo_(j))) {
                ratio = std::max(0.0, (x_(j) - lo_(j)) / -delta(i));
            } else if (delta(i) > pivot_tol && std::isfinite(hi_(j))) {
                ratio = std::max(0.0, (hi_(j) - x_(j)) / delta(i));
            } else {
                continue;
            }
            if (ratio > relaxed) continue;
            const bool better = bland ? (leaving < 0 || ratio < step ||
                                         (ratio == step && j < basis_[static_cast<std::size_t>(leaving)]))
                                      : std::abs(delta(i)) > best_pivot;
            if (better) {
                leaving = i;
                step = ratio;
                best_pivot = std::abs(delta(i));
            }
        }

        const double own_range = hi_(entering) - lo_(entering);
        ++iterations_;
        if (std::isfinite(own_range) && own_range <= step) {
            state_[static_cast<std::size_t>(entering)] =
                direction > 0.0 ? VarState::at_upper : VarState::at_lower;
            x_(entering) = bound_value(entering);
            for (Eigen::Index i = 0; i < m_; ++i) x_(basis_[static_cast<std::size_t>(i)]) += own_range * delta(i);
            degenerate_run = 0;
            refresh = false;
            continue;
        }
        if (leaving < 0) return Outcome::unbounded;
        refresh = true;

        degenerate_run = step < 1e-12 ? degenerate_run + 1 : 0;
        const Eigen::Index out = basis_[static_cast<std::size_t>(leaving)];
        state_[static_cast<std::size_t>(out)] =
            delta(leaving) < 0.0 ? VarState::at_lower : VarState::at_upper;
        if (!std::isfinite(bound_value(out))) state_[static_cast<std::size_t>(out)] = VarState::at_zero;
        basis_[static_cast<std::size_t>(leaving)] = entering;
        state_[static_cast<std::size_t>(entering)] = VarState::basic;
    }
}

Result Solver::run() {
    Result result;
    const Eigen::Index total = n_ + m_;

    Eigen::VectorXd phase_one = Eigen::VectorXd::Zero(total);
    phase_one.tail(m_).setOnes();
    if (iterate(phase_one) == Outcome::iteration_limit) {
        result.status = Status::iteration_limit;
        result.iterations = iterations_;
        return result;
    }
    factor();
    compute_basic_values();
    if (x_.tail(m_).sum() > primal_tol_) {
        result.status = Status::infeasible;
        result.iterations = iterations_;
        return result;
    }

    // Artificials are pinned at zero; basic ones leave on the first pivot that moves them.
    for (Eigen::Index j = n_; j < total; ++j) {
        hi_(j) = 0.0;
        if (state_[static_cast<std::size_t>(j)] != VarState::basic) state_[static_cast<std::size_t>(j)] = VarState::at_lower;
    }
    Eigen::VectorXd phase_two = Eigen::VectorXd::Zero(total);
    // Phase-two costs come from the caller; artificials cost nothing.
    phase_two.head(n_) = cost_.head(n_);
    const Outcome outcome = iterate(phase_two);
    result.iterations = iterations_;
    if (outcome == Outcome::iteration_limit) {
        result.status = Status::iteration_limit;
        return result;
    }
    if (outcome == Outcome::unbounded) {
        result.status = Status::unbounded;
        return result;
    }
    factor();
    compute_basic_values();
    for (Eigen::Index j = 0; j < total; ++j) {
        if (lo_(j) - x_(j) > 10.0 * primal_tol_ || x_(j) - hi_(j) > 10.0 * primal_tol_) {
            throw NumericalError("simplex terminated with a basic variable outside its bounds");
        }
    }
    result.status = Status::optimal;
    result.x = x_.head(n_);
    result.duals = duals_;
    result.objective = phase_two.head(n_).dot(result.x);
    return result;
}

}  // namespace

Result solve(const LinearProgram& lp, const Options& options) {
    Solver solver(lp, options);
    return solver.run();
}

}  // namespace shortfall::lp
