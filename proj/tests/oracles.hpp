#pragma once

// Independent reference computations used by the unit and acceptance tests.
// Nothing here calls into the library's solvers.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace oracle {

/// Exact root of w + g ||bh - w b||_1 = 1 by walking the breakpoints bh_i / b_i
/// of the piecewise-linear left-hand side.
inline double net_proportion(const Eigen::VectorXd& bh, const Eigen::VectorXd& b, double g) {
    auto f = [&](double w) { return w + g * (bh - w * b).cwiseAbs().sum() - 1.0; };
    std::vector<double> pts = {0.0, 1.0};
    for (Eigen::Index i = 0; i < b.size(); ++i) {
        if (b(i) > 0.0) {
            const double r = bh(i) / b(i);
            if (r > 0.0 && r < 1.0) pts.push_back(r);
        }
    }
    std::sort(pts.begin(), pts.end());
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
        const double a = pts[k], c = pts[k + 1];
        const double fa = f(a), fc = f(c);
        if (fa <= 0.0 && fc >= 0.0) {
            if (fc == fa) return a;
            return a - fa * (c - a) / (fc - fa);
        }
    }
    return 1.0;
}

struct Instance {
    Eigen::VectorXd x;   // predicted relatives
    Eigen::VectorXd bh;  // current holdings
    Eigen::MatrixXd U;   // shape factor (may be empty)
    double lambda = 0.0;
    double kappa = 0.0;
    double gamma = 0.0;
};

/// Objective of the cost-adjusted problem at a raw portfolio.
inline double objective(const Instance& p, const Eigen::VectorXd& braw) {
    double v = p.x.dot(braw) - p.lambda * (p.bh - braw).cwiseAbs().sum();
    if (p.U.size() > 0 && p.kappa > 0.0) v -= p.kappa * (p.U * braw).norm();
    return v;
}

/// Best objective along the ray s b, s in [0, w(b)] (the feasible part of the
/// ray). The objective is concave and piecewise linear in s, so its maximum
/// sits at an endpoint or at a breakpoint bh_i / b_i.
inline double best_on_ray(const Instance& p, const Eigen::VectorXd& b, double* s_best = nullptr) {
    const double w = net_proportion(p.bh, b, p.gamma);
    std::vector<double> cand = {0.0, w};
    for (Eigen::Index i = 0; i < b.size(); ++i) {
        if (b(i) > 0.0) {
            const double r = p.bh(i) / b(i);
            if (r > 0.0 && r < w) cand.push_back(r);
        }
    }
    double best = -1e300;
    for (double s : cand) {
        const double v = objective(p, s * b);
        if (v > best) {
            best = v;
            if (s_best) *s_best = s;
        }
    }
    return best;
}

struct GridResult {
    double value = -1e300;
    Eigen::VectorXd b;  // direction on the simplex
    double s = 0.0;     // scale, raw portfolio = s b
};

/// Visits simplex points of the given step inside the box [lo, hi] per coordinate (m = 2 or 3).
template <typename F>
void simplex_grid(int m, double step, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi, F&& visit) {
    const int n0 = static_cast<int>(std::floor(lo(0) / step)), n1 = static_cast<int>(std::ceil(hi(0) / step));
    for (int i = std::max(0, n0); i <= n1; ++i) {
        const double a = i * step;
        if (a > 1.0 + 1e-12) break;
        if (m == 2) {
            Eigen::VectorXd b(2);
            b << a, 1.0 - a;
            if (b(1) >= -1e-12) visit(b.cwiseMax(0.0));
            continue;
        }
        const int k0 = static_cast<int>(std::floor(lo(1) / step)), k1 = static_cast<int>(std::ceil(hi(1) / step));
        for (int j = std::max(0, k0); j <= k1; ++j) {
            const double c = j * step;
            if (a + c > 1.0 + 1e-12) break;
            Eigen::VectorXd b(3);
            b << a, c, std::max(0.0, 1.0 - a - c);
            visit(b);
        }
    }
}

/// Brute force over the feasible set: simplex directions on a 0.01 grid plus
/// the holdings direction, then two rounds of local refinement (0.001 and
/// 0.0001) around the incumbent, each direction scanned exactly along its ray.
inline GridResult brute_force(const Instance& p) {
    const int m = static_cast<int>(p.x.size());
    GridResult best;
    auto consider = [&](const Eigen::VectorXd& b) {
        double s = 0.0;
        const double v = best_on_ray(p, b, &s);
        if (v > best.value) {
            best.value = v;
            best.b = b;
            best.s = s;
        }
    };
    simplex_grid(m, 0.01, Eigen::VectorXd::Zero(m), Eigen::VectorXd::Ones(m), consider);
    consider(p.bh);
    for (double step : {0.001, 0.0001}) {
        const Eigen::VectorXd centre = best.b;
        const double radius = 20.0 * step;
        simplex_grid(m, step, centre.array() - radius, centre.array() + radius, consider);
    }
    return best;
}

/// Literal grid over raw portfolios (step 0.01) keeping only points that satisfy
/// 1^T b + g ||bh - b||_1 <= 1. A lower bound on the optimum.
inline double raw_grid_lower_bound(const Instance& p, double step = 0.01) {
    const int m = static_cast<int>(p.x.size());
    const int n = static_cast<int>(std::lround(1.0 / step));
    double best = -1e300;
    Eigen::VectorXd b(m);
    auto eval = [&]() {
        if (b.sum() + p.gamma * (p.bh - b).cwiseAbs().sum() <= 1.0) best = std::max(best, objective(p, b));
    };
    for (int i = 0; i <= n; ++i) {
        b(0) = i * step;
        for (int j = 0; j <= n - i; ++j) {
            b(1) = j * step;
            if (m == 2) {
                eval();
                continue;
            }
            for (int k = 0; k <= n - i - j; ++k) {
                b(2) = k * step;
                eval();
            }
        }
    }
    return best;
}

/// Uniform draw on the simplex.
inline Eigen::VectorXd random_simplex(int m, std::mt19937_64& rng) {
    std::exponential_distribution<double> e(1.0);
    Eigen::VectorXd v(m);
    for (int i = 0; i < m; ++i) v(i) = e(rng);
    return v / v.sum();
}

/// Step-by-step wealth of a constant-rebalanced portfolio with proportional costs.
inline std::vector<double> crp_wealth(const std::vector<Eigen::VectorXd>& xs, const Eigen::VectorXd& target, double g) {
    std::vector<double> S;
    Eigen::VectorXd held = Eigen::VectorXd::Zero(target.size());
    double wealth = 1.0;
    for (const auto& x : xs) {
        const double w = net_proportion(held, target, g);
        const double gross = target.dot(x);
        wealth *= w * gross;
        S.push_back(wealth);
        held = target.cwiseProduct(x) / gross;
    }
    return S;
}

}  // namespace oracle
