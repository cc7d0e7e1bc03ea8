#pragma once

#include <Eigen/Dense>

#include "shortfall/date.hpp"
#include "shortfall/panel.hpp"

namespace shortfall {

/// Symmetric PSD covariance matrix with the metadata of its estimation.
struct CovarianceEstimate {
    Eigen::MatrixXd matrix;
    Date as_of;
    int half_life_days = 0;
    Eigen::Index observation_count = 0;
};

/// Per-observation decay factor 2^(-1/half_life).
double ewma_decay(int half_life_days);

/// Zero-mean EWMA covariance of the observations dated strictly before
/// `as_of`, weights 2^(-age/half_life) with age 0 for the most recent row,
/// normalized by their sum. Throws EmptyWindowError with fewer than two rows.
CovarianceEstimate ewma_covariance(const ReturnPanel& panel, int half_life_days, const Date& as_of);

/// Same estimator on the first `count` rows of a raw return matrix.
Eigen::MatrixXd ewma_covariance(const Eigen::Ref<const Eigen::MatrixXd>& returns, Eigen::Index count,
                                int half_life_days);

/// Symmetric square root of the covariance with eigenvalues below
/// `eigen_floor` (absolute) lifted to it. Throws NumericalError if the
/// eigendecomposition fails.
Eigen::MatrixXd matrix_sqrt(const Eigen::MatrixXd& cov, double eigen_floor);
Eigen::MatrixXd matrix_sqrt(const CovarianceEstimate& cov, double eigen_floor);

/// Symmetric inverse square root of the floored covariance; requires
/// `eigen_floor > 0`.
Eigen::MatrixXd matrix_inv_sqrt(const Eigen::MatrixXd& cov, double eigen_floor);
Eigen::MatrixXd matrix_inv_sqrt(const CovarianceEstimate& cov, double eigen_floor);

/// Converts a relative floor into an absolute one (relative * largest eigenvalue),
/// never returning less than the smallest normal double.
double absolute_floor(const Eigen::MatrixXd& cov, double relative_floor);

}  // namespace shortfall
