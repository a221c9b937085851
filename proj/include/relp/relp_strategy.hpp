#pragma once

#include "relp/conic_solver.hpp"
#include "relp/strategy.hpp"

#include <cstddef>

namespace relp {

struct RelpParams {
    double kappa = 1.0;
    double lambda = 0.0;
    double gamma = 0.0;
    std::size_t window = 5;  // moving-average predictor window

    /// Throws ConfigError on negative kappa/lambda, gamma outside [0, 1) or window 0.
    void validate() const;

    /// lambda = 10 gamma.
    static RelpParams with_default_lambda(double kappa, double gamma);
};

/// Why a period's portfolio was produced.
enum class RelpDecision { entry, warmup_hold, condition_hold, solver_hold, solved };

/// Counts of decisions made since the last reset.
struct RelpCounters {
    std::size_t entry = 0;
    std::size_t warmup_hold = 0;
    std::size_t condition_hold = 0;
    std::size_t solver_hold = 0;
    std::size_t solved = 0;

    void add(RelpDecision decision);
};

/// The robust portfolio for period history.periods() + 1 given holdings b_hat.
///
/// Uniform weights at the first period. The holdings are kept while fewer than
/// m + 1 periods (or fewer than `window` periods) have been observed, when the
/// shape factor cannot be formed, when the robust problem's condition fails and
/// when the solver fails.
Weights relp_portfolio(const HistoryView& history, const Weights& b_hat, const RelpParams& params,
                       RelpDecision* decision = nullptr, const ConeSolverOptions& options = {});

/// RELP with fixed kappa and lambda.
class RelpFixed final : public Strategy {
public:
    explicit RelpFixed(RelpParams params, ConeSolverOptions options = {});

    std::string name() const override { return "relp-fixed"; }
    Weights next_portfolio(const HistoryView& history, const Weights& b_hat) override;
    void reset() override { counters_ = {}; }
    StrategyPtr clone() const override { return std::make_unique<RelpFixed>(*this); }

    const RelpParams& params() const { return params_; }
    const RelpCounters& counters() const { return counters_; }

private:
    RelpParams params_;
    ConeSolverOptions options_;
    RelpCounters counters_;
};

}  // namespace relp
