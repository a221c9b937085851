#include "relp/baselines.hpp"

#include "relp/errors.hpp"
#include "relp/predictors.hpp"

#include <algorithm>
#include <cmath>

namespace relp {

Weights Ubah::next_portfolio(const HistoryView& history, const Weights& b_hat) {
    if (history.empty()) return uniform_portfolio(history.assets());
    return b_hat;
}

Weights Ucrp::next_portfolio(const HistoryView& history, const Weights&) {
    return uniform_portfolio(history.assets());
}

ExponentialGradient::ExponentialGradient(double eta) : eta_(eta) {
    if (!(eta > 0.0)) throw ConfigError("EG learning rate must be positive");
}

Weights ExponentialGradient::update(const Weights& b, const Eigen::VectorXd& x, double eta) {
    const double gross = b.dot(x);
    Weights next = b.array() * (eta * x.array() / gross).exp();
    return next / next.sum();
}

Weights ExponentialGradient::next_portfolio(const HistoryView& history, const Weights&) {
    if (history.empty() || last_.size() == 0) {
        last_ = uniform_portfolio(history.assets());
    } else {
        last_ = update(last_, history.latest(), eta_);
    }
    return last_;
}

Olmar::Olmar(double epsilon, std::size_t window) : epsilon_(epsilon), window_(window) {
    if (!(epsilon > 0.0)) throw ConfigError("OLMAR epsilon must be positive");
    if (window < 1) throw ConfigError("OLMAR window must be at least 1");
}

Weights Olmar::update(const Weights& b, const Eigen::VectorXd& x_tilde, double epsilon) {
    const Eigen::VectorXd direction = x_tilde.array() - x_tilde.mean();
    const double norm2 = direction.squaredNorm();
    if (norm2 == 0.0) return b;
    const double step = std::max(0.0, (epsilon - b.dot(x_tilde)) / norm2);
    if (step == 0.0) return b;
    return project_to_simplex(b + step * direction);
}

Weights Olmar::next_portfolio(const HistoryView& history, const Weights&) {
    if (history.empty() || last_.size() == 0) {
        last_ = uniform_portfolio(history.assets());
        return last_;
    }
    const std::size_t t = history.periods();
    const Eigen::VectorXd x_tilde = mar_predictor(history.source(), t, std::min(window_, t));
    last_ = update(last_, x_tilde, epsilon_);
    return last_;
}

}  // namespace relp
