#include "relp/transaction_cost.hpp"

#include "relp/errors.hpp"

#include <cmath>
#include <string>

namespace relp {

namespace {
constexpr double kBisectionTol = 1e-12;
constexpr double kResidualTol = 1e-10;
}  // namespace

void CostSpec::validate() const {
    if (!(gamma >= 0.0) || !(gamma < 1.0)) {
        throw ConfigError("transaction cost rate must satisfy 0 <= gamma < 1, got " + std::to_string(gamma));
    }
}

double net_proportion_residual(double w, const Eigen::VectorXd& b_hat, const Eigen::VectorXd& b_new,
                               double gamma) {
    return w + gamma * (b_hat - w * b_new).lpNorm<1>() - 1.0;
}

double net_proportion(const Eigen::VectorXd& b_hat, const Eigen::VectorXd& b_new, const CostSpec& spec) {
    spec.validate();
    if (b_hat.size() != b_new.size()) throw ConfigError("net_proportion: dimension mismatch");
    const double gamma = spec.gamma;
    if (gamma == 0.0) return 1.0;
    if ((b_hat - b_new).lpNorm<Eigen::Infinity>() == 0.0) return 1.0;

    // f(0) = gamma*||b_hat||_1 - 1 < 0 and f(1) >= 0.
    double lo = 0.0;
    double hi = 1.0;
    if (net_proportion_residual(hi, b_hat, b_new, gamma) <= 0.0) return 1.0;
    while (hi - lo > kBisectionTol) {
        const double mid = 0.5 * (lo + hi);
        if (net_proportion_residual(mid, b_hat, b_new, gamma) < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // Final secant step on the bracketing linear piece.
    const double f_lo = net_proportion_residual(lo, b_hat, b_new, gamma);
    const double f_hi = net_proportion_residual(hi, b_hat, b_new, gamma);
    double w = (f_hi - f_lo) > 0.0 ? lo - f_lo * (hi - lo) / (f_hi - f_lo) : 0.5 * (lo + hi);
    if (std::abs(net_proportion_residual(w, b_hat, b_new, gamma)) > std::abs(f_hi)) w = hi;

    if (std::abs(net_proportion_residual(w, b_hat, b_new, gamma)) > kResidualTol) {
        throw SolverError("net_proportion did not converge");
    }
    return w;
}

NetProportionBounds net_proportion_bounds(const Eigen::VectorXd& b_hat, const Eigen::VectorXd& b_new,
                                          double gamma) {
    const double d = (b_hat - b_new).lpNorm<1>();
    return {(1.0 - gamma) / (1.0 - gamma + gamma * d), (1.0 + gamma) / (1.0 + gamma + gamma * d)};
}

}  // namespace relp
