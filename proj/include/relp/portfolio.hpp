#pragma once

#include <Eigen/Dense>

#include <cstddef>

namespace relp {

/// Portfolio weights: nonnegative, summing to one.
using Weights = Eigen::VectorXd;

inline constexpr double kSimplexTol = 1e-9;

Weights uniform_portfolio(std::size_t m);

/// True when every entry is >= -tol and the entries sum to 1 within tol.
bool on_simplex(const Eigen::VectorXd& b, double tol = kSimplexTol);

/// Euclidean projection onto the probability simplex (sort-and-threshold).
Weights project_to_simplex(const Eigen::VectorXd& v);

}  // namespace relp
