#pragma once

#include <Eigen/Dense>

#include <optional>
#include <utility>
#include <vector>

namespace relp {

/// A small conic program in inequality form
///
///     minimize    c^T x
///     subject to  G x + s = h,   s in K = R_+^l x Q^q
///
/// where the first l rows of G are linear inequalities (stored sparsely; most
/// rows here touch one to three variables) and the optional trailing block is a
/// single second-order cone { (s0, s1) : ||s1||_2 <= s0 }.
struct ConeProgram {
    struct SparseRow {
        std::vector<std::pair<int, double>> entries;  // (column, coefficient)
    };

    int n = 0;
    Eigen::VectorXd c;
    std::vector<SparseRow> linear_rows;
    Eigen::VectorXd linear_h;

    struct SocBlock {
        Eigen::MatrixXd G;  // q x n
        Eigen::VectorXd h;  // q
    };
    std::optional<SocBlock> soc;

    /// Appends sum_j coef_j x_j <= rhs.
    void add_linear(std::vector<std::pair<int, double>> entries, double rhs);
};

struct ConeSolverOptions {
    double feasibility_tol = 1e-9;
    double gap_tol = 1e-9;
    int max_iterations = 200;
    double step_fraction = 0.99;
};

struct ConeSolution {
    Eigen::VectorXd x;
    Eigen::VectorXd s;
    Eigen::VectorXd z;
    double primal_objective = 0.0;
    double dual_objective = 0.0;
    double primal_residual = 0.0;  // ||G x + s - h|| / max(1, ||h||)
    double dual_residual = 0.0;    // ||G^T z + c|| / max(1, ||c||)
    double gap = 0.0;              // s^T z
    int iterations = 0;
};

/// Infeasible-start primal-dual path-following method with Nesterov-Todd
/// scaling and Mehrotra predictor-corrector steps. Dense normal equations
/// G^T W^-2 G are factorized once per iteration. Throws SolverError when the
/// tolerances are not met within max_iterations or the iteration breaks down.
///
/// Requires G to have full column rank.
ConeSolution solve_cone_program(const ConeProgram& program, const ConeSolverOptions& options = {});

}  // namespace relp
