#include "relp/predictors.hpp"

#include "relp/errors.hpp"

#include <algorithm>
#include <string>

namespace relp {

Eigen::VectorXd mar_predictor(const RelativesMatrix& relatives, std::size_t t, std::size_t window) {
    if (window < 1 || window > t || t > relatives.periods()) {
        throw HistoryError("moving-average predictor needs 1 <= W <= t <= n (W=" + std::to_string(window) +
                           ", t=" + std::to_string(t) + ")");
    }
    const auto m = static_cast<Eigen::Index>(relatives.assets());
    const auto& x = relatives.values();
    Eigen::VectorXd sum = Eigen::VectorXd::Ones(m);
    Eigen::VectorXd inv_cum = Eigen::VectorXd::Ones(m);
    for (std::size_t k = 0; k + 1 < window; ++k) {
        const auto row = static_cast<Eigen::Index>(t - 1 - k);
        inv_cum.array() /= x.row(row).transpose().array();
        sum += inv_cum;
    }
    return sum / static_cast<double>(window);
}

Eigen::MatrixXd sample_covariance(const Eigen::Ref<const RelativesTable>& samples) {
    const Eigen::Index n = samples.rows();
    // Shift by the first observation before centering (exact zeros for constant columns).
    const Eigen::MatrixXd shifted = samples.rowwise() - samples.row(0);
    const Eigen::RowVectorXd mean = shifted.colwise().mean();
    const Eigen::MatrixXd centered = shifted.rowwise() - mean;
    Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(n - 1);
    // Symmetric by construction; copy the upper triangle to remove rounding asymmetry.
    cov.triangularView<Eigen::StrictlyLower>() = cov.transpose().triangularView<Eigen::StrictlyLower>();
    return cov;
}

std::optional<ShapeFactor> factorize_shape(const Eigen::MatrixXd& covariance) {
    const Eigen::Index m = covariance.rows();
    auto attempt = [](const Eigen::MatrixXd& sigma) -> std::optional<ShapeFactor> {
        Eigen::LLT<Eigen::MatrixXd> llt(sigma);
        if (llt.info() != Eigen::Success) return std::nullopt;
        ShapeFactor f;
        f.U = llt.matrixU();
        if ((f.U.diagonal().array() <= 0.0).any() || !f.U.allFinite()) return std::nullopt;
        f.covariance = sigma;
        f.sigma = f.U.norm();
        return f;
    };
    if (auto f = attempt(covariance)) return f;
    const double eps = 1e-8 * std::max(1.0, covariance.trace() / static_cast<double>(m));
    Eigen::MatrixXd repaired = covariance;
    repaired.diagonal().array() += eps;
    auto f = attempt(repaired);
    if (f) f->regularized = true;
    return f;
}

std::optional<ShapeFactor> shape_factor(const RelativesMatrix& relatives, std::size_t t) {
    const std::size_t m = relatives.assets();
    if (t > relatives.periods() || t < m + 1) return std::nullopt;
    const auto first = static_cast<Eigen::Index>(t - (m + 1));
    const auto samples = relatives.values().middleRows(first, static_cast<Eigen::Index>(m + 1));
    return factorize_shape(sample_covariance(samples));
}

}  // namespace relp
