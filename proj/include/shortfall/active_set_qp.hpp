#pragma once

#include <optional>

#include <Eigen/Dense>

namespace shortfall::qp {

/// min 1/2 x'Hx + c'x  s.t.  A_eq x = b_eq,  A_in x <= b_in,  with H symmetric PSD.
struct QuadraticProgram {
    Eigen::MatrixXd H;
    Eigen::VectorXd c;
    Eigen::MatrixXd A_eq;
    Eigen::VectorXd b_eq;
    Eigen::MatrixXd A_in;
    Eigen::VectorXd b_in;
};

struct Options {
    long max_iterations = 20000;
    double feasibility_tolerance = 1e-10;
};

struct Result {
    Eigen::VectorXd x;
    double objective = 0.0;
    Eigen::VectorXd eq_multipliers;  ///< lambda with Hx + c + A_eq' lambda_eq + A_in' lambda_in = 0
    Eigen::VectorXd in_multipliers;  ///< >= 0, zero for inactive rows
    double stationarity_residual = 0.0;
    double feasibility_residual = 0.0;
    long iterations = 0;
};

/// Primal active-set method (null-space steps) for convex QPs whose Hessian
/// may be singular. A feasible start is found with the simplex solver when
/// `start` is absent or infeasible. Throws InfeasibleError, UnboundedError
/// or NumericalError.
Result solve(const QuadraticProgram& problem, const Options& options = {},
             const std::optional<Eigen::VectorXd>& start = std::nullopt);

}  // namespace shortfall::qp
