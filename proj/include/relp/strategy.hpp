#pragma once

#include "relp/market_data.hpp"
#include "relp/portfolio.hpp"
#include "relp/transaction_cost.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

namespace relp {

/// Read-only view of the periods observed so far (rows 1..periods()).
class HistoryView {
public:
    HistoryView(const RelativesMatrix& source, std::size_t periods);

    std::size_t periods() const { return periods_; }
    std::size_t assets() const { return source_->assets(); }
    bool empty() const { return periods_ == 0; }

    /// Relatives of observed period t (1-based, t <= periods()).
    Eigen::VectorXd period(std::size_t t) const;
    Eigen::VectorXd latest() const { return period(periods_); }

    /// The underlying matrix. Callers must only read rows 1..periods().
    const RelativesMatrix& source() const { return *source_; }

private:
    const RelativesMatrix* source_;
    std::size_t periods_;
};

/// A portfolio selection rule.
///
/// next_portfolio is called once per period in order t = 1, 2, ... with the
/// relatives of periods 1..t-1 and the end-of-period holdings b_hat_{t-1}
/// (the zero vector at t = 1). The returned weights must lie on the simplex.
/// Implementations may keep state between calls; reset() restores the state
/// before the first call.
class Strategy {
public:
    virtual ~Strategy() = default;

    virtual std::string name() const = 0;
    virtual Weights next_portfolio(const HistoryView& history, const Weights& b_hat) = 0;
    virtual void reset() = 0;
    virtual std::unique_ptr<Strategy> clone() const = 0;
};

using StrategyPtr = std::unique_ptr<Strategy>;

/// One period of the investment loop.
struct PeriodRecord {
    std::size_t t = 0;
    Weights b;            // portfolio chosen for period t
    double w = 1.0;       // net proportion paid to move from b_hat_{t-1} to b
    double gross = 1.0;   // b^T x_t
    double wealth = 1.0;  // S_t
    Weights b_hat;        // holdings at the end of period t
};

/// Holdings, wealth and period index of one investor.
class BacktestState {
public:
    explicit BacktestState(std::size_t assets);

    const Weights& b_hat() const { return b_hat_; }
    double wealth() const { return wealth_; }
    std::size_t period() const { return t_; }

    /// Rebalances to b (paying transaction costs), observes x and returns the
    /// record for the new period. Throws ContractError when b is off the simplex.
    PeriodRecord step(const Weights& b, const Eigen::VectorXd& x, const CostSpec& cost);

private:
    Weights b_hat_;
    double wealth_ = 1.0;
    std::size_t t_ = 0;
};

struct BacktestResult {
    std::string strategy;
    double gamma = 0.0;
    std::vector<double> wealth;  // S_1..S_n (S_0 = 1 implied)
    std::vector<PeriodRecord> log;
};

/// Runs the strategy over every period of the matrix. The strategy is reset first.
BacktestResult run_backtest(const RelativesMatrix& relatives, Strategy& strategy, const CostSpec& cost);

/// Trade log as CSV: t, w, S, then one column per asset holding b_t.
std::string format_trade_log(const BacktestResult& result, const std::vector<std::string>& asset_names);
void write_trade_log(const BacktestResult& result, const std::vector<std::string>& asset_names,
                     const std::filesystem::path& path);

}  // namespace relp
