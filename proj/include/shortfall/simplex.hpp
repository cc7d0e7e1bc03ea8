#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace shortfall::lp {

/// min c'x  s.t.  A x = b,  lower <= x <= upper  (bounds may be infinite).
struct LinearProgram {
    Eigen::MatrixXd A;
    Eigen::VectorXd b;
    Eigen::VectorXd c;
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
};

enum class Status { optimal, infeasible, unbounded, iteration_limit };

/// Where a nonbasic variable starts. Ignored for bounds that are infinite.
enum class Start { lower, upper };

struct Options {
    long max_iterations = 200000;
    double feasibility_tolerance = 1e-9;
    double optimality_tolerance = 1e-10;
    /// Optional per-variable starting position; defaults to the finite lower bound.
    std::vector<Start> start;
};

struct Result {
    Status status = Status::iteration_limit;
    Eigen::VectorXd x;
    /// Row multipliers pi with c - A'pi >= 0 at lower, <= 0 at upper.
    Eigen::VectorXd duals;
    double objective = 0.0;
    long iterations = 0;
};

/// Two-phase bounded-variable revised simplex with dense LU of the basis.
/// Intended for problems with few rows and many (possibly boxed) columns.
/// Dantzig pricing, Harris ratio test, Bland's rule after a run of
/// degenerate pivots.
Result solve(const LinearProgram& lp, const Options& options = {});

}  // namespace shortfall::lp
