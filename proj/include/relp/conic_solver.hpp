#pragma once

#include "relp/cone_program.hpp"
#include "relp/predictors.hpp"

#include <Eigen/Dense>

#include <optional>

namespace relp {

/// One period's transaction-cost-aware robust portfolio problem:
///
///     maximize    x_tilde^T b - lambda ||b_hat - b||_1 - kappa ||U b||_2
///     subject to  1^T b + gamma ||b_hat - b||_1 <= 1,   b >= 0
///
/// over the cost-adjusted portfolio b. Without a shape factor (or with
/// kappa = 0) the cone term vanishes and the problem is a linear program.
struct RelpProblem {
    Eigen::VectorXd x_tilde;
    Eigen::VectorXd b_hat;
    double lambda = 0.0;
    double kappa = 0.0;
    double gamma = 0.0;
    std::optional<ShapeFactor> shape;

    /// sigma of the shape factor, or 0 when absent.
    double sigma() const { return shape ? shape->sigma : 0.0; }

    /// Throws ConfigError on mismatched dimensions or out-of-range parameters.
    void validate() const;
};

enum class RelpStatus { optimal, fallback_hold };

struct RelpSolution {
    Eigen::VectorXd b_raw;        // cost-adjusted portfolio, 1^T b_raw = w
    double w = 1.0;               // net proportion
    Eigen::VectorXd b_portfolio;  // b_raw / w, on the simplex
    double objective = 0.0;       // objective at the returned b_raw
    double solver_objective = 0.0;  // interior-point objective before rounding
    RelpStatus status = RelpStatus::optimal;
    int iterations = 0;
};

/// Entries of the solver output below this value are set to zero before the
/// portfolio is normalized.
inline constexpr double kRoundingThreshold = 1e-5;

/// max_i x_tilde_i > kappa * sigma + lambda. When false the robust problem's
/// solution cannot be mapped back to a portfolio and the caller should hold.
bool check_condition(const RelpProblem& problem);

/// Solves the linear program in split form (b, u, v >= 0 with
/// u >= b_hat - b, v >= b - b_hat). Requires kappa = 0 or no shape factor.
RelpSolution solve_relp_lp(const RelpProblem& problem, const ConeSolverOptions& options = {});

/// Solves the second-order cone program in epigraph form
/// (b >= 0, t >= |b - b_hat|, ||U b||_2 <= s). Throws ConditionError when
/// check_condition fails and SolverError when the interior-point method does.
RelpSolution solve_relp_socp(const RelpProblem& problem, const ConeSolverOptions& options = {});

/// Objective of the cost-adjusted form at b_raw.
double relp_objective(const RelpProblem& problem, const Eigen::VectorXd& b_raw);

/// Objective of the original (w, b) form: w b^T x - lambda ||b_hat - w b||_1 - kappa ||U w b||_2.
double relp_original_objective(const RelpProblem& problem, double w, const Eigen::VectorXd& b);

/// Builders for the two formulations (exposed for tests).
ConeProgram build_split_lp(const RelpProblem& problem);
ConeProgram build_epigraph_program(const RelpProblem& problem);

}  // namespace relp
