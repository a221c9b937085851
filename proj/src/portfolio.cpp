#include "relp/portfolio.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace relp {

Weights uniform_portfolio(std::size_t m) {
    return Weights::Constant(static_cast<Eigen::Index>(m), 1.0 / static_cast<double>(m));
}

bool on_simplex(const Eigen::VectorXd& b, double tol) {
    if (b.size() == 0 || !b.allFinite()) return false;
    return b.minCoeff() >= -tol && std::abs(b.sum() - 1.0) <= tol;
}

Weights project_to_simplex(const Eigen::VectorXd& v) {
    std::vector<double> sorted(v.data(), v.data() + v.size());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double cumulative = 0.0;
    double theta = 0.0;
    for (std::size_t k = 0; k < sorted.size(); ++k) {
        cumulative += sorted[k];
        const double candidate = (cumulative - 1.0) / static_cast<double>(k + 1);
        if (sorted[k] - candidate > 0.0) theta = candidate;
    }
    Weights out = (v.array() - theta).cwiseMax(0.0);
    const double total = out.sum();
    if (total > 0.0 && std::abs(total - 1.0) > 1e-12) out /= total;
    return out;
}

}  // namespace relp
