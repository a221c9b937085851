#include "relp/relp_strategy.hpp"

#include "relp/errors.hpp"
#include "relp/predictors.hpp"

#include <spdlog/spdlog.h>

namespace relp {

void RelpParams::validate() const {
    if (!(kappa >= 0.0)) throw ConfigError("kappa must be nonnegative");
    if (!(lambda >= 0.0)) throw ConfigError("lambda must be nonnegative");
    CostSpec{gamma}.validate();
    if (window < 1) throw ConfigError("predictor window must be at least 1");
}

RelpParams RelpParams::with_default_lambda(double kappa, double gamma) {
    RelpParams p;
    p.kappa = kappa;
    p.gamma = gamma;
    p.lambda = 10.0 * gamma;
    return p;
}

void RelpCounters::add(RelpDecision decision) {
    switch (decision) {
        case RelpDecision::entry: ++entry; break;
        case RelpDecision::warmup_hold: ++warmup_hold; break;
        case RelpDecision::condition_hold: ++condition_hold; break;
        case RelpDecision::solver_hold: ++solver_hold; break;
        case RelpDecision::solved: ++solved; break;
    }
}

Weights relp_portfolio(const HistoryView& history, const Weights& b_hat, const RelpParams& params,
                       RelpDecision* decision, const ConeSolverOptions& options) {
    auto decide = [&](RelpDecision d) {
        if (decision) *decision = d;
    };
    const std::size_t m = history.assets();
    const std::size_t observed = history.periods();
    if (observed == 0) {
        decide(RelpDecision::entry);
        return uniform_portfolio(m);
    }
    if (observed < m + 1 || observed < params.window) {
        decide(RelpDecision::warmup_hold);
        return b_hat;
    }
    RelpProblem problem;
    problem.shape = shape_factor(history.source(), observed);
    if (!problem.shape) {
        decide(RelpDecision::warmup_hold);
        return b_hat;
    }
    problem.x_tilde = mar_predictor(history.source(), observed, params.window);
    problem.b_hat = b_hat;
    problem.kappa = params.kappa;
    problem.lambda = params.lambda;
    problem.gamma = params.gamma;
    if (!check_condition(problem)) {
        decide(RelpDecision::condition_hold);
        return b_hat;
    }
    try {
        const RelpSolution sol = solve_relp_socp(problem, options);
        if (sol.status == RelpStatus::fallback_hold) {
            decide(RelpDecision::solver_hold);
            return b_hat;
        }
        decide(RelpDecision::solved);
        return sol.b_portfolio;
    } catch (const SolverError& e) {
        spdlog::warn("period {}: RELP solve failed (kappa={}, lambda={}): {}; holding", observed + 1,
                     params.kappa, params.lambda, e.what());
        decide(RelpDecision::solver_hold);
        return b_hat;
    }
}

RelpFixed::RelpFixed(RelpParams params, ConeSolverOptions options)
    : params_(params), options_(options) {
    params_.validate();
}

Weights RelpFixed::next_portfolio(const HistoryView& history, const Weights& b_hat) {
    RelpDecision decision{};
    Weights b = relp_portfolio(history, b_hat, params_, &decision, options_);
    counters_.add(decision);
    return b;
}

}  // namespace relp
