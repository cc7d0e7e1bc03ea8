#include "shortfall/active_set_qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "shortfall/errors.hpp"
#include "shortfall/simplex.hpp"

namespace shortfall::qp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double max_violation(const QuadraticProgram& p, const Eigen::VectorXd& x) {
    double v = 0.0;
    if (p.A_eq.rows() > 0) v = std::max(v, (p.A_eq * x - p.b_eq).cwiseAbs().maxCoeff());
    if (p.A_in.rows() > 0) v = std::max(v, (p.A_in * x - p.b_in).maxCoeff());
    return v;
}

Eigen::VectorXd find_feasible_point(const QuadraticProgram& p) {
    const Eigen::Index n = p.H.rows();
    const Eigen::Index me = p.A_eq.rows();
    const Eigen::Index mi = p.A_in.rows();
    lp::LinearProgram feas;
    feas.A = Eigen::MatrixXd::Zero(me + mi, n + mi);
    if (me > 0) feas.A.topLeftCorner(me, n) = p.A_eq;
    if (mi > 0) {
        feas.A.bottomLeftCorner(mi, n) = p.A_in;
        feas.A.bottomRightCorner(mi, mi).setIdentity();
    }
    feas.b.resize(me + mi);
    feas.b << p.b_eq, p.b_in;
    feas.c = Eigen::VectorXd::Zero(n + mi);
    feas.lower = Eigen::VectorXd::Constant(n + mi, 0.0);
    feas.lower.head(n).setConstant(-kInf);
    feas.upper = Eigen::VectorXd::Constant(n + mi, kInf);
    const lp::Result r = lp::solve(feas);
    if (r.status == lp::Status::infeasible) throw InfeasibleError("constraint set is infeasible");
    if (r.status != lp::Status::optimal) throw NumericalError("feasibility search did not converge");
    return r.x.head(n);
}

}  // namespace

Result solve(const QuadraticProgram& problem, const Options& options,
             const std::optional<Eigen::VectorXd>& start) {
    const Eigen::Index n = problem.H.rows();
    const Eigen::Index me = problem.A_eq.rows();
    const Eigen::Index mi = problem.A_in.rows();
    if (problem.H.cols() != n || problem.c.size() != n || (me > 0 && problem.A_eq.cols() != n) ||
        (mi > 0 && problem.A_in.cols() != n) || problem.b_eq.size() != me || problem.b_in.size() != mi) {
        throw ValidationError("quadratic program dimensions are inconsistent");
    }

    // Objective scaling leaves the minimizer unchanged and makes tolerances absolute.
    const double scale = std::max({problem.H.cwiseAbs().maxCoeff(),
                                   n > 0 ? problem.c.cwiseAbs().maxCoeff() : 0.0, 1e-300});
    const Eigen::MatrixXd h = problem.H / scale;
    const Eigen::VectorXd c = problem.c / scale;

    Eigen::VectorXd x;
    if (start && start->size() == n && max_violation(problem, *start) <= options.feasibility_tolerance) {
        x = *start;
    } else {
        x = find_feasible_point(problem);
    }

    std::vector<Eigen::Index> active;
    auto working_matrix = [&] {
        Eigen::MatrixXd a(me + static_cast<Eigen::Index>(active.size()), n);
        if (me > 0) a.topRows(me) = problem.A_eq;
        for (std::size_t k = 0; k < active.size(); ++k) a.row(me + static_cast<Eigen::Index>(k)) = problem.A_in.row(active[k]);
        return a;
    };
    auto rank_of = [](const Eigen::MatrixXd& a) {
        if (a.rows() == 0) return Eigen::Index{0};
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a.transpose());
        qr.setThreshold(1e-10);
        return qr.rank();
    };

    Eigen::Index rank = rank_of(working_matrix());
    if (rank < me) throw ValidationError("equality constraints are linearly dependent");
    for (Eigen::Index i = 0; i < mi; ++i) {
        const double slack = problem.b_in(i) - problem.A_in.row(i).dot(x);
        if (std::abs(slack) > 1e-9 * (1.0 + std::abs(problem.b_in(i)))) continue;
        active.push_back(i);
        const Eigen::Index r = rank_of(working_matrix());
        if (r > rank) {
            rank = r;
        } else {
            active.pop_back();
        }
    }

    Result result;
    Eigen::VectorXd multipliers;
    long iter = 0;
    for (;; ++iter) {
        if (iter >= options.max_iterations) throw NumericalError("active-set QP hit the iteration limit");
        const Eigen::VectorXd g = h * x + c;
        const Eigen::MatrixXd aw = working_matrix();
        const Eigen::Index k = aw.rows();

        Eigen::HouseholderQR<Eigen::MatrixXd> qr;
        Eigen::MatrixXd q = Eigen::MatrixXd::Identity(n, n);
        if (k > 0) {
            qr.compute(aw.transpose());
            q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
        }
        const Eigen::MatrixXd z = q.rightCols(n - k);

        Eigen::VectorXd p = Eigen::VectorXd::Zero(n);
        bool ray = false;
        if (n - k > 0) {
            const Eigen::MatrixXd hr = z.transpose() * h * z;
            const Eigen::VectorXd gr = z.transpose() * g;
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(hr);
            if (eig.info() != Eigen::Success) throw NumericalError("reduced Hessian eigensolve failed");
            const double eig_tol = 1e-11 * std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
            Eigen::VectorXd newton = Eigen::VectorXd::Zero(n - k);
            Eigen::VectorXd flat = Eigen::VectorXd::Zero(n - k);
            for (Eigen::Index e = 0; e < n - k; ++e) {
                const auto v = eig.eigenvectors().col(e);
                const double proj = v.dot(gr);
                if (eig.eigenvalues()(e) > eig_tol) {
                    newton -= (proj / eig.eigenvalues()(e)) * v;
                } else {
                    flat += proj * v;
                }
            }
            if (flat.norm() > 1e-12 * std::max(1.0, gr.norm())) {
                ray = true;
                p = -z * flat;
            } else {
                p = z * newton;
            }
        }

        if (!ray && p.cwiseAbs().maxCoeff() <= 1e-13 * std::max(1.0, x.cwiseAbs().maxCoeff())) {
            // Stationary on the working set: A_W' lambda = -g.
            multipliers = k > 0 ? Eigen::VectorXd(qr.solve(-g)) : Eigen::VectorXd();
            Eigen::Index worst = -1;
            double most_negative = -1e-11 * std::max(1.0, g.cwiseAbs().maxCoeff());
            for (std::size_t a = 0; a < active.size(); ++a) {
                const double lambda = multipliers(me + static_cast<Eigen::Index>(a));
                if (lambda < most_negative) {
                    most_negative = lambda;
                    worst = static_cast<Eigen::Index>(a);
                }
            }
            if (worst < 0) break;
            active.erase(active.begin() + worst);
            continue;
        }

        double step = ray ? kInf : 1.0;
        Eigen::Index blocking = -1;
        for (Eigen::Index i = 0; i < mi; ++i) {
            if (std::find(active.begin(), active.end(), i) != active.end()) continue;
            const double ap = problem.A_in.row(i).dot(p);
            if (ap <= 1e-14 * problem.A_in.row(i).norm() * p.norm()) continue;
            const double s = std::max(0.0, (problem.b_in(i) - problem.A_in.row(i).dot(x)) / ap);
            if (s < step) {
                step = s;
                blocking = i;
            }
        }
        if (!std::isfinite(step)) throw UnboundedError("quadratic objective is unbounded below");
        x += step * p;
        if (blocking >= 0) active.push_back(blocking);
    }

    result.x = x;
    result.iterations = iter;
    result.objective = 0.5 * x.dot(problem.H * x) + problem.c.dot(x);
    result.eq_multipliers = multipliers.head(me) * scale;
    result.in_multipliers = Eigen::VectorXd::Zero(mi);
    for (std::size_t a = 0; a < active.size(); ++a) {
        result.in_multipliers(active[a]) = multipliers(me + static_cast<Eigen::Index>(a)) * scale;
    }
    Eigen::VectorXd stationarity = problem.H * x + problem.c;
    if (me > 0) stationarity += problem.A_eq.transpose() * result.eq_multipliers;
    if (mi > 0) stationarity += problem.A_in.transpose() * result.in_multipliers;
    result.stationarity_residual = n > 0 ? stationarity.cwiseAbs().maxCoeff() : 0.0;
    result.feasibility_residual = max_violation(problem, x);
    return result;
}

}  // namespace shortfall::qp
