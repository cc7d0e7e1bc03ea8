#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "shortfall/covariance.hpp"
#include "shortfall/risk.hpp"
#include "shortfall/scenario.hpp"

namespace shortfall {

/// a'w = rhs (equality) or a'w <= rhs (inequality).
struct LinearConstraint {
    Eigen::VectorXd coefficients;
    double rhs = 0.0;
};

struct Bound {
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
};

/// Linear equalities, inequalities and per-weight bounds on an N-vector.
class ConstraintSet {
public:
    explicit ConstraintSet(Eigen::Index n_assets);

    ConstraintSet& add_equality(Eigen::VectorXd coefficients, double rhs);
    ConstraintSet& add_inequality(Eigen::VectorXd coefficients, double rhs);
    ConstraintSet& set_bounds(Eigen::Index i, double lower, double upper);

    Eigen::Index size() const { return static_cast<Eigen::Index>(bounds_.size()); }
    const std::vector<LinearConstraint>& equalities() const { return equalities_; }
    const std::vector<LinearConstraint>& inequalities() const { return inequalities_; }
    const std::vector<Bound>& bounds() const { return bounds_; }

    /// Largest violation of any equality, inequality or bound at `w`.
    double max_violation(const Eigen::VectorXd& w) const;

    /// Bounds folded into rows: equalities (including lower == upper) and
    /// inequalities a'w <= b (including finite one-sided bounds).
    void to_rows(Eigen::MatrixXd& eq, Eigen::VectorXd& eq_rhs, Eigen::MatrixXd& in,
                 Eigen::VectorXd& in_rhs) const;

    /// sum(w) = 1 and w >= 0.
    static ConstraintSet full_investment_long_only(Eigen::Index n_assets);

private:
    std::vector<LinearConstraint> equalities_;
    std::vector<LinearConstraint> inequalities_;
    std::vector<Bound> bounds_;
};

/// Index weight fixed at 1, every other (style) weight in
/// [-style_bound, style_bound], style weights summing to zero.
ConstraintSet index_style_constraints(const std::vector<std::string>& names,
                                      const std::string& index_column, double style_bound = 2.0);

/// Inputs of the combined objective  max  w'alpha - Lambda * s_p(w) - lambda * w'Sigma w.
struct ObjectiveSpec {
    Eigen::VectorXd alpha;
    double shortfall_aversion = 1.0;  ///< Lambda
    double variance_aversion = 0.0;   ///< lambda
    double confidence = 0.95;
};

struct Diagnostics {
    double feasibility_residual = 0.0;  ///< max constraint violation of the weights
    double optimality_gap = 0.0;        ///< certificate: duality/KKT/bound gap
    long iterations = 0;
};

struct OptimizationResult {
    Eigen::VectorXd weights;
    /// Shortfall value for minimize_shortfall, w'Sigma w for minimize_variance,
    /// the maximized combined objective for maximize_mean_variance_shortfall.
    double objective_value = 0.0;
    std::optional<ShortfallValue> shortfall;
    std::optional<double> variance;
    Diagnostics diagnostics;
};

/// Minimum empirical shortfall via the linear program
///   min -t - (1/K) sum z_i  s.t.  t + z_i <= w'r_i, z_i <= 0, w in constraints,
/// solved through its dual (x in [0,1]^T, sum x = K). The weights are the
/// dual's row multipliers; `optimality_gap` is the difference between the
/// estimator at the weights and the dual objective.
OptimizationResult minimize_shortfall(const Eigen::MatrixXd& scenarios, double p,
                                      const ConstraintSet& constraints);
OptimizationResult minimize_shortfall(const ScenarioSet& scenarios, double p,
                                      const ConstraintSet& constraints);

/// Minimum w'Sigma w; `optimality_gap` is the KKT stationarity residual.
OptimizationResult minimize_variance(const Eigen::MatrixXd& covariance, const ConstraintSet& constraints);
OptimizationResult minimize_variance(const CovarianceEstimate& covariance, const ConstraintSet& constraints);

/// Combined objective. With variance_aversion = 0 it is the (alpha-shifted)
/// shortfall LP; with shortfall_aversion = 0 a QP; otherwise a cutting-plane
/// scheme whose cuts are the tail sets of the linearization, each master
/// problem a QP. `optimality_gap` is the final upper/lower bound gap.
OptimizationResult maximize_mean_variance_shortfall(const Eigen::MatrixXd& scenarios,
                                                    const Eigen::MatrixXd& covariance,
                                                    const ObjectiveSpec& objective,
                                                    const ConstraintSet& constraints);
OptimizationResult maximize_mean_variance_shortfall(const ScenarioSet& scenarios,
                                                    const CovarianceEstimate& covariance,
                                                    const ObjectiveSpec& objective,
                                                    const ConstraintSet& constraints);

/// Exhaustive grid search (N <= 4) over multiples of `grid_step` inside the
/// bounds; the last weight is solved from the first equality that involves
/// it. Infinite bounds on enumerated coordinates are replaced by the range
/// implied by the other constraints, which must be finite.
OptimizationResult brute_force_shortfall(const Eigen::MatrixXd& scenarios, double p,
                                         const ConstraintSet& constraints, double grid_step);
OptimizationResult brute_force_shortfall(const ScenarioSet& scenarios, double p,
                                         const ConstraintSet& constraints, double grid_step);

/// Portfolio returns R w as a vector.
std::vector<double> portfolio_returns(const Eigen::MatrixXd& scenarios, const Eigen::VectorXd& weights);

}  // namespace shortfall
