#pragma once

#include <Eigen/Dense>

namespace relp {

/// Proportional transaction cost rate, identical for buying and selling.
struct CostSpec {
    double gamma = 0.0;

    /// Throws ConfigError unless 0 <= gamma < 1.
    void validate() const;
};

/// Net proportion w of wealth left after rebalancing from `b_hat` to `b_new`:
/// the unique root in (0, 1] of
///
///     w + gamma * || b_hat - w * b_new ||_1 = 1.
///
/// `b_hat` is the end-of-period holding (on the simplex) or the zero vector for
/// the initial purchase. The left-hand side is piecewise linear with slope at
/// least 1 - gamma, so the root is found by bisection on [0, 1].
double net_proportion(const Eigen::VectorXd& b_hat, const Eigen::VectorXd& b_new, const CostSpec& spec);

/// w + gamma * ||b_hat - w b_new||_1 - 1.
double net_proportion_residual(double w, const Eigen::VectorXd& b_hat, const Eigen::VectorXd& b_new,
                               double gamma);

/// Two-sided bounds on w for b_hat on the simplex:
/// (1-g)/(1-g+g d) <= w <= (1+g)/(1+g+g d), d = ||b_hat - b_new||_1.
struct NetProportionBounds {
    double lower;
    double upper;
};
NetProportionBounds net_proportion_bounds(const Eigen::VectorXd& b_hat, const Eigen::VectorXd& b_new,
                                          double gamma);

}  // namespace relp
