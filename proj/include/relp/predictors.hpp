#pragma once

#include "relp/market_data.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <optional>

namespace relp {

/// Moving-average-reversion prediction of the next price relatives, computed
/// from the last `window` observed periods ending at period t:
///
///     x_tilde = (1/W) * (1 + 1/x_t + 1/(x_t x_{t-1}) + ... + 1/(x_t ... x_{t-W+2}))
///
/// which equals the W-period average price divided by the latest price.
/// Throws HistoryError unless 1 <= window <= t <= n.
Eigen::VectorXd mar_predictor(const RelativesMatrix& relatives, std::size_t t, std::size_t window);

/// Cholesky factor of the ellipsoid shape matrix: Sigma = U^T U.
struct ShapeFactor {
    Eigen::MatrixXd U;           // upper triangular, positive diagonal
    Eigen::MatrixXd covariance;  // the (possibly regularized) Sigma that was factorized
    double sigma = 0.0;          // ||U||_F = sqrt(trace(Sigma))
    bool regularized = false;
};

/// Unbiased sample covariance of the rows of `samples` (rows = observations).
Eigen::MatrixXd sample_covariance(const Eigen::Ref<const RelativesTable>& samples);

/// Factorizes a covariance. A failed Cholesky is retried once with
/// Sigma + eps I, eps = 1e-8 * max(1, trace(Sigma)/m); a second failure returns nullopt.
std::optional<ShapeFactor> factorize_shape(const Eigen::MatrixXd& covariance);

/// Shape factor from the sample covariance of the m+1 periods ending at t.
/// Returns nullopt when fewer than m+1 periods are available or the
/// factorization fails after regularization; callers hold their portfolio then.
std::optional<ShapeFactor> shape_factor(const RelativesMatrix& relatives, std::size_t t);

}  // namespace relp
