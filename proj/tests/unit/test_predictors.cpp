#include "relp/errors.hpp"
#include "relp/predictors.hpp"

#include <doctest.h>

#include <random>

using namespace relp;

namespace {
RelativesMatrix from_rows(const std::vector<std::vector<double>>& rows) {
    RelativesTable t(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j) t(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return RelativesMatrix(t);
}
}  // namespace

TEST_CASE("moving-average predictor") {
    SUBCASE("window one predicts no change") {
        const RelativesMatrix m = from_rows({{1.1, 0.9}, {1.3, 0.7}});
        CHECK(mar_predictor(m, 2, 1).isApprox(Eigen::VectorXd::Ones(2)));
    }
    SUBCASE("constant prices") {
        const RelativesMatrix m = from_rows({{1, 1}, {1, 1}, {1, 1}});
        CHECK(mar_predictor(m, 3, 3) == Eigen::VectorXd::Ones(2));
    }
    SUBCASE("prices 1, 2, 4 with window 3") {
        // Second column is filler; the first follows prices 1 -> 2 -> 4.
        const RelativesMatrix m = from_rows({{2.0, 1.0}, {2.0, 1.0}});
        // Relatives for periods 1 and 2 give prices 1, 2, 4; window 3 needs the
        // two relatives plus the current price.
        const Eigen::VectorXd x = mar_predictor(m, 2, 2);
        CHECK(x(0) == doctest::Approx((2.0 + 4.0) / 2.0 / 4.0));
        const RelativesMatrix m3 = from_rows({{1.5, 1.0}, {2.0, 1.0}, {2.0, 1.0}});
        CHECK(mar_predictor(m3, 3, 3)(0) == doctest::Approx(7.0 / 12.0).epsilon(1e-14));
    }
    SUBCASE("insufficient history") {
        const RelativesMatrix m = from_rows({{1.0, 1.0}, {1.0, 1.0}});
        CHECK_THROWS_AS(mar_predictor(m, 2, 3), HistoryError);
        CHECK_THROWS_AS(mar_predictor(m, 3, 1), HistoryError);
        CHECK_THROWS_AS(mar_predictor(m, 1, 0), HistoryError);
    }
}

TEST_CASE("shape factor") {
    SUBCASE("too little history") {
        const RelativesMatrix m = from_rows({{1.0, 1.1}, {0.9, 1.0}});
        CHECK_FALSE(shape_factor(m, 2).has_value());
    }
    SUBCASE("identical rows take the regularized path") {
        const RelativesMatrix m = from_rows({{1.01, 0.99}, {1.01, 0.99}, {1.01, 0.99}});
        const auto s = shape_factor(m, 3);
        REQUIRE(s.has_value());
        CHECK(s->regularized);
        CHECK(s->U.isApprox(std::sqrt(1e-8) * Eigen::MatrixXd::Identity(2, 2)));
    }
    SUBCASE("diagonal covariance 0.04, 0.09") {
        // Three samples with per-column variances 0.04 and 0.09 and zero covariance.
        const double a = std::sqrt(0.04), b = std::sqrt(0.09) * 2.0 / std::sqrt(3.0);
        // Deviations (1, 0, -1) and (1/2, -1, 1/2): unit sample variances, zero covariance.
        const RelativesMatrix m = from_rows({{1.0 + a, 1.0 + 0.5 * b}, {1.0, 1.0 - b}, {1.0 - a, 1.0 + 0.5 * b}});
        const auto s = shape_factor(m, 3);
        REQUIRE(s.has_value());
        CHECK(s->covariance(0, 0) == doctest::Approx(0.04).epsilon(1e-12));
        CHECK(s->covariance(1, 1) == doctest::Approx(0.09).epsilon(1e-12));
        CHECK(std::abs(s->covariance(0, 1)) < 1e-14);
        CHECK(s->sigma == doctest::Approx(std::sqrt(0.13)).epsilon(1e-12));
        CHECK(s->sigma == doctest::Approx(s->U.norm()).epsilon(1e-14));
    }
}

TEST_CASE("sample covariance is unbiased and symmetric") {
    RelativesTable x(4, 2);
    x << 1, 2, 2, 4, 3, 5, 4, 9;
    const Eigen::MatrixXd c = sample_covariance(x);
    // column means 2.5 and 5
    CHECK(c(0, 0) == doctest::Approx(5.0 / 3.0));
    CHECK(c(1, 1) == doctest::Approx((9.0 + 1.0 + 0.0 + 16.0) / 3.0));
    CHECK(c(0, 1) == doctest::Approx((1.5 * 3 + 0.5 * 1 + 0.5 * 0 + 1.5 * 4) / 3.0));
    CHECK(c(0, 1) == c(1, 0));
}

TEST_CASE("Cholesky reconstruction and Lipschitz bound") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n01(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const int m = 2 + trial % 6;
        RelativesTable samples(m + 1, m);
        for (int i = 0; i <= m; ++i)
            for (int j = 0; j < m; ++j) samples(i, j) = 1.0 + 0.02 * n01(rng);
        const Eigen::MatrixXd cov = sample_covariance(samples);
        const auto s = factorize_shape(cov);
        REQUIRE(s.has_value());
        const double scale = 1.0 + s->covariance.cwiseAbs().rowwise().sum().maxCoeff();
        CHECK((s->U.transpose() * s->U - s->covariance).cwiseAbs().rowwise().sum().maxCoeff() <= 1e-10 * scale);
        CHECK(s->U.isUpperTriangular());
        CHECK(s->U.diagonal().minCoeff() > 0.0);
        for (int k = 0; k < 5; ++k) {
            const Eigen::VectorXd b1 = Eigen::VectorXd::Random(m), b2 = Eigen::VectorXd::Random(m);
            CHECK(std::abs((s->U * b1).norm() - (s->U * b2).norm()) <= s->sigma * (b1 - b2).norm() + 1e-12);
            CHECK((s->U * b1).norm() == doctest::Approx(std::sqrt(b1.dot(s->covariance * b1))).epsilon(1e-10));
        }
    }
}
