#include "shortfall/covariance.hpp"

#include <cmath>
#include <limits>

#include "shortfall/errors.hpp"

namespace shortfall {

double ewma_decay(int half_life_days) {
    if (half_life_days < 1) throw ValidationError("half-life must be >= 1");
    return std::exp2(-1.0 / static_cast<double>(half_life_days));
}

Eigen::MatrixXd ewma_covariance(const Eigen::Ref<const Eigen::MatrixXd>& returns, Eigen::Index count,
                                int half_life_days) {
    if (count < 2) {
        throw EmptyWindowError("EWMA covariance needs at least 2 observations, have " +
                               std::to_string(count));
    }
    const Eigen::Index n = returns.cols();
    Eigen::MatrixXd weighted(count, n);
    double weight_sum = 0.0;
    for (Eigen::Index t = 0; t < count; ++t) {
        const double age = static_cast<double>(count - 1 - t);
        const double w = std::exp2(-age / static_cast<double>(half_life_days));
        weighted.row(t) = std::sqrt(w) * returns.row(t);
        weight_sum += w;
    }
    Eigen::MatrixXd sigma(n, n);
    sigma.setZero();
    sigma.selfadjointView<Eigen::Lower>().rankUpdate(weighted.transpose());
    sigma = sigma.selfadjointView<Eigen::Lower>();
    sigma /= weight_sum;
    return sigma;
}

CovarianceEstimate ewma_covariance(const ReturnPanel& panel, int half_life_days, const Date& as_of) {
    if (half_life_days < 1) throw ValidationError("half-life must be >= 1");
    const Eigen::Index count = panel.count_before(as_of);
    if (count < 2) {
        throw EmptyWindowError("EWMA covariance as of " + as_of.to_string() +
                               " needs at least 2 prior observations, have " + std::to_string(count));
    }
    return CovarianceEstimate{ewma_covariance(panel.returns(), count, half_life_days), as_of,
                              half_life_days, count};
}

double absolute_floor(const Eigen::MatrixXd& cov, double relative_floor) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov, Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
    const double largest = eig.eigenvalues().maxCoeff();
    return std::max(relative_floor * largest, std::numeric_limits<double>::min());
}

namespace {

template <typename Fn>
Eigen::MatrixXd spectral_map(const Eigen::MatrixXd& cov, double eigen_floor, Fn fn) {
    if (cov.rows() != cov.cols()) throw ValidationError("covariance must be square");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition did not converge");
    Eigen::VectorXd values = eig.eigenvalues();
    for (Eigen::Index i = 0; i < values.size(); ++i) values(i) = fn(std::max(values(i), eigen_floor));
    const Eigen::MatrixXd& v = eig.eigenvectors();
    Eigen::MatrixXd out = v * values.asDiagonal() * v.transpose();
    // Exact symmetry.
    return 0.5 * (out + out.transpose());
}

}  // namespace

Eigen::MatrixXd matrix_sqrt(const Eigen::MatrixXd& cov, double eigen_floor) {
    if (!(eigen_floor >= 0.0)) throw ValidationError("eigen_floor must be nonnegative");
    return spectral_map(cov, eigen_floor, [](double x) { return std::sqrt(x); });
}

Eigen::MatrixXd matrix_sqrt(const CovarianceEstimate& cov, double eigen_floor) {
    return matrix_sqrt(cov.matrix, eigen_floor);
}

Eigen::MatrixXd matrix_inv_sqrt(const Eigen::MatrixXd& cov, double eigen_floor) {
    if (!(eigen_floor > 0.0)) throw ValidationError("inverse square root needs eigen_floor > 0");
    return spectral_map(cov, eigen_floor, [](double x) { return 1.0 / std::sqrt(x); });
}

Eigen::MatrixXd matrix_inv_sqrt(const CovarianceEstimate& cov, double eigen_floor) {
    return matrix_inv_sqrt(cov.matrix, eigen_floor);
}

}  // namespace shortfall
