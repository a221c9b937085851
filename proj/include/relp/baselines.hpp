#pragma once

#include "relp/strategy.hpp"

#include <cstddef>

namespace relp {

/// Buy and hold: equal weights at entry, then never trades.
class Ubah final : public Strategy {
public:
    std::string name() const override { return "ubah"; }
    Weights next_portfolio(const HistoryView& history, const Weights& b_hat) override;
    void reset() override {}
    StrategyPtr clone() const override { return std::make_unique<Ubah>(*this); }
};

/// Rebalances to equal weights every period.
class Ucrp final : public Strategy {
public:
    std::string name() const override { return "ucrp"; }
    Weights next_portfolio(const HistoryView& history, const Weights& b_hat) override;
    void reset() override {}
    StrategyPtr clone() const override { return std::make_unique<Ucrp>(*this); }
};

/// Exponentiated gradient: b_{t+1,i} proportional to b_{t,i} exp(eta x_{t,i} / b_t^T x_t).
class ExponentialGradient final : public Strategy {
public:
    explicit ExponentialGradient(double eta = 0.05);

    std::string name() const override { return "eg"; }
    Weights next_portfolio(const HistoryView& history, const Weights& b_hat) override;
    void reset() override { last_.resize(0); }
    StrategyPtr clone() const override { return std::make_unique<ExponentialGradient>(*this); }

    double eta() const { return eta_; }

    /// One multiplicative update.
    static Weights update(const Weights& b, const Eigen::VectorXd& x, double eta);

private:
    double eta_;
    Weights last_;
};

/// On-line moving average reversion with a passive-aggressive step toward the
/// moving-average prediction, projected back onto the simplex.
class Olmar final : public Strategy {
public:
    explicit Olmar(double epsilon = 10.0, std::size_t window = 5);

    std::string name() const override { return "olmar"; }
    Weights next_portfolio(const HistoryView& history, const Weights& b_hat) override;
    void reset() override { last_.resize(0); }
    StrategyPtr clone() const override { return std::make_unique<Olmar>(*this); }

    double epsilon() const { return epsilon_; }
    std::size_t window() const { return window_; }

    /// One update given the current portfolio and the prediction x_tilde.
    static Weights update(const Weights& b, const Eigen::VectorXd& x_tilde, double epsilon);

private:
    double epsilon_;
    std::size_t window_;
    Weights last_;
};

}  // namespace relp
