#include "relp/conic_solver.hpp"

#include "relp/errors.hpp"
#include "relp/transaction_cost.hpp"

#include <cmath>
#include <string>

namespace relp {

namespace {

// Implied bound on the trade variables: |b_i - b_hat_i| <= 1 on the feasible set.
// It keeps the optimal face bounded when lambda = gamma = 0.
constexpr double kTradeBound = 2.0;

RelpSolution finalize(const RelpProblem& p, const ConeSolution& cone) {
    const Eigen::Index m = p.x_tilde.size();
    RelpSolution out;
    out.iterations = cone.iterations;
    out.solver_objective = -cone.primal_objective;

    Eigen::VectorXd b = cone.x.head(m).cwiseMax(0.0);
    for (Eigen::Index i = 0; i < m; ++i) {
        if (b(i) < kRoundingThreshold) b(i) = 0.0;
    }
    const double total = b.sum();
    const CostSpec cost{p.gamma};
    if (!(total > 0.0)) {
        out.status = RelpStatus::fallback_hold;
        out.b_portfolio = p.b_hat;
        out.w = 1.0;
        out.b_raw = p.b_hat;
        out.objective = relp_objective(p, out.b_raw);
        return out;
    }
    out.b_portfolio = b / total;
    // The budget constraint is tight at the optimum; recomputing w from the
    // balance equation keeps it tight after rounding.
    out.w = net_proportion(p.b_hat, out.b_portfolio, cost);
    out.b_raw = out.w * out.b_portfolio;
    out.objective = relp_objective(p, out.b_raw);
    return out;
}

}  // namespace

void RelpProblem::validate() const {
    const Eigen::Index m = x_tilde.size();
    if (m < 1 || b_hat.size() != m) throw ConfigError("RELP problem: x_tilde and b_hat sizes differ");
    if (!(lambda >= 0.0)) throw ConfigError("RELP problem: lambda must be nonnegative");
    if (!(kappa >= 0.0)) throw ConfigError("RELP problem: kappa must be nonnegative");
    CostSpec{gamma}.validate();
    if (shape && (shape->U.rows() != m || shape->U.cols() != m)) {
        throw ConfigError("RELP problem: shape factor has wrong dimension");
    }
}

bool check_condition(const RelpProblem& problem) {
    return problem.x_tilde.maxCoeff() > problem.kappa * problem.sigma() + problem.lambda;
}

double relp_objective(const RelpProblem& p, const Eigen::VectorXd& b_raw) {
    double value = p.x_tilde.dot(b_raw) - p.lambda * (p.b_hat - b_raw).lpNorm<1>();
    if (p.shape && p.kappa > 0.0) value -= p.kappa * (p.shape->U * b_raw).norm();
    return value;
}

double relp_original_objective(const RelpProblem& p, double w, const Eigen::VectorXd& b) {
    return relp_objective(p, w * b);
}

ConeProgram build_split_lp(const RelpProblem& p) {
    const int m = static_cast<int>(p.x_tilde.size());
    const int u0 = m;
    const int v0 = 2 * m;
    ConeProgram prog;
    prog.n = 3 * m;
    prog.c.resize(prog.n);
    prog.c.head(m) = -p.x_tilde;
    prog.c.segment(u0, m).setConstant(p.lambda);
    prog.c.segment(v0, m).setConstant(p.lambda);
    for (int i = 0; i < m; ++i) {
        prog.add_linear({{i, -1.0}}, 0.0);
        prog.add_linear({{u0 + i, -1.0}}, 0.0);
        prog.add_linear({{v0 + i, -1.0}}, 0.0);
        prog.add_linear({{u0 + i, 1.0}}, kTradeBound);
        prog.add_linear({{v0 + i, 1.0}}, kTradeBound);
        prog.add_linear({{i, -1.0}, {u0 + i, -1.0}}, -p.b_hat(i));  // u >= b_hat - b
        prog.add_linear({{i, 1.0}, {v0 + i, -1.0}}, p.b_hat(i));    // v >= b - b_hat
    }
    std::vector<std::pair<int, double>> budget;
    budget.reserve(static_cast<std::size_t>(3 * m));
    for (int i = 0; i < m; ++i) budget.emplace_back(i, 1.0);
    for (int i = 0; i < 2 * m; ++i) budget.emplace_back(m + i, p.gamma);
    prog.add_linear(std::move(budget), 1.0);
    return prog;
}

ConeProgram build_epigraph_program(const RelpProblem& p) {
    const int m = static_cast<int>(p.x_tilde.size());
    const bool cone = p.shape && p.kappa > 0.0;
    const int t0 = m;
    const int s_col = 2 * m;
    ConeProgram prog;
    prog.n = cone ? 2 * m + 1 : 2 * m;
    prog.c.resize(prog.n);
    prog.c.head(m) = -p.x_tilde;
    prog.c.segment(t0, m).setConstant(p.lambda);
    if (cone) prog.c(s_col) = p.kappa;
    for (int i = 0; i < m; ++i) {
        prog.add_linear({{i, -1.0}}, 0.0);
        prog.add_linear({{i, 1.0}, {t0 + i, -1.0}}, p.b_hat(i));    // t >= b - b_hat
        prog.add_linear({{i, -1.0}, {t0 + i, -1.0}}, -p.b_hat(i));  // t >= b_hat - b
        prog.add_linear({{t0 + i, 1.0}}, kTradeBound);
    }
    std::vector<std::pair<int, double>> budget;
    budget.reserve(static_cast<std::size_t>(2 * m));
    for (int i = 0; i < m; ++i) budget.emplace_back(i, 1.0);
    for (int i = 0; i < m; ++i) budget.emplace_back(t0 + i, p.gamma);
    prog.add_linear(std::move(budget), 1.0);
    if (cone) {
        ConeProgram::SocBlock block;
        block.G = Eigen::MatrixXd::Zero(m + 1, prog.n);
        block.G(0, s_col) = -1.0;
        block.G.block(1, 0, m, m) = -p.shape->U;
        block.h = Eigen::VectorXd::Zero(m + 1);
        prog.soc = std::move(block);
    }
    return prog;
}

RelpSolution solve_relp_lp(const RelpProblem& problem, const ConeSolverOptions& options) {
    problem.validate();
    if (problem.shape && problem.kappa > 0.0) {
        throw ConfigError("solve_relp_lp: kappa > 0 with a shape factor needs the cone solver");
    }
    return finalize(problem, solve_cone_program(build_split_lp(problem), options));
}

RelpSolution solve_relp_socp(const RelpProblem& problem, const ConeSolverOptions& options) {
    problem.validate();
    if (!check_condition(problem)) {
        throw ConditionError("max predicted relative does not exceed kappa*sigma + lambda");
    }
    return finalize(problem, solve_cone_program(build_epigraph_program(problem), options));
}

}  // namespace relp
