#include "relp/adaptive.hpp"
#include "relp/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace relp;

namespace {

RelativesMatrix random_market(int n, int m, std::uint64_t seed, double vol = 0.02) {
    std::mt19937_64 rng(seed);
    std::lognormal_distribution<double> d(0.0, vol);
    RelativesTable t(n, m);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) t(i, j) = d(rng);
    return RelativesMatrix(t);
}

Eigen::VectorXd vec(std::initializer_list<double> v) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out(i++) = x;
    return out;
}

// Independent check of the tracking rule for a two-expert pool.
bool should_switch(const std::vector<double>& own, const std::vector<double>& other, std::size_t t, std::size_t W,
                   double delta, double z) {
    double m1 = 0, m2 = 0;
    for (std::size_t i = t - W; i < t; ++i) {
        m1 += own[i];
        m2 += other[i];
    }
    m1 /= W;
    m2 /= W;
    double ss = 0;
    for (std::size_t i = t - W; i < t; ++i) ss += (own[i] - m1) * (own[i] - m1);
    return m2 > m1 + std::max(delta, z * std::sqrt(ss / (W - 1)));
}

}  // namespace

TEST_CASE("log-spaced grids include both ends") {
    const auto g = log_space(0.1, 10.0, 31);
    CHECK(g.size() == 31);
    CHECK(g.front() == 0.1);
    CHECK(g.back() == 10.0);
    CHECK(g[15] == doctest::Approx(1.0).epsilon(1e-14));
    for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] / g[i - 1] == doctest::Approx(std::pow(100.0, 1.0 / 30)));
    CHECK(log_space(0.01, 100.0, 41)[20] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(log_space(2.0, 2.0, 1) == std::vector<double>{2.0});
    CHECK_THROWS_AS(log_space(0.0, 1.0, 3), ConfigError);
}

TEST_CASE("selection of the best") {
    SbConfig cfg;
    SUBCASE("single expert never switches") {
        CHECK(sb_step({{1, 2, 3, 4, 5, 6}}, 0, cfg) == 0);
    }
    SUBCASE("constant tracked wealth, challenger 1.01") {
        CHECK(sb_step({{1, 1, 1, 1, 1}, {1.01, 1.01, 1.01, 1.01, 1.01}}, 0, cfg) == 1);
    }
    SUBCASE("indifference zone blocks a small lead") {
        cfg.delta = 0.2;
        CHECK(sb_step({{1, 1, 1, 1, 1}, {1.1, 1.1, 1.1, 1.1, 1.1}}, 0, cfg) == 0);
        CHECK(sb_step({{1, 1, 1, 1, 1}, {1.3, 1.3, 1.3, 1.3, 1.3}}, 0, cfg) == 1);
    }
    SUBCASE("too few points") {
        CHECK(sb_step({{1, 1, 1, 1}, {2, 2, 2, 2}}, 0, cfg) == 0);
    }
    SUBCASE("largest qualifying mean wins, then lowest index") {
        const std::vector<std::vector<double>> w = {{1, 1, 1, 1, 1}, {1.2, 1.2, 1.2, 1.2, 1.2},
                                                    {1.5, 1.5, 1.5, 1.5, 1.5}, {1.5, 1.5, 1.5, 1.5, 1.5}};
        CHECK(sb_step(w, 0, cfg) == 2);
    }
    SUBCASE("identical histories never switch") {
        const std::vector<double> s = {1.0, 1.1, 0.9, 1.2, 1.05, 1.3};
        CHECK(sb_step({s, s, s}, 1, cfg) == 1);
    }
    SUBCASE("volatile tracked expert widens the band") {
        const std::vector<double> own = {1.0, 1.2, 0.8, 1.2, 0.8};  // mean 1, std 0.2
        CHECK(sb_step({own, {1.3, 1.3, 1.3, 1.3, 1.3}}, 0, cfg) == 0);
        CHECK(sb_step({own, {1.4, 1.4, 1.4, 1.4, 1.4}}, 0, cfg) == 1);
    }
    SUBCASE("invalid configuration") {
        cfg.window = 1;
        CHECK_THROWS_AS(cfg.validate(), ConfigError);
    }
}

TEST_CASE("switching happens exactly at the first qualifying period") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> n01;
    for (double delta : {0.0, 0.2}) {
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<double> a, b;
            double sa = 1.0, sb = 1.0;
            for (int t = 0; t < 60; ++t) {
                sa *= 1.0 + 0.01 * n01(rng);
                sb *= 1.0 + 0.01 * n01(rng) + 0.008;
                a.push_back(sa);
                b.push_back(sb);
            }
            SbConfig cfg;
            cfg.delta = delta;
            std::size_t expected = 0;
            for (std::size_t t = cfg.window; t <= a.size(); ++t) {
                if (should_switch(a, b, t, cfg.window, delta, cfg.z)) {
                    expected = t;
                    break;
                }
            }
            std::size_t observed = 0;
            for (std::size_t t = 1; t <= a.size(); ++t) {
                std::vector<std::vector<double>> w = {{a.begin(), a.begin() + t}, {b.begin(), b.begin() + t}};
                if (sb_step(w, 0, cfg) == 1) {
                    observed = t;
                    break;
                }
            }
            CHECK(observed == expected);
        }
    }
}

TEST_CASE("top-K geometric averaging") {
    CHECK(topk_step({1, 1, 1}, {0.1, 1, 10}, 3) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(topk_step({0.5, 2.0, 3.0}, {0.1, 1, 10}, 2) == doctest::Approx(std::sqrt(10.0)).epsilon(1e-14));
    CHECK(topk_step({0.5, 2.0, 3.0}, {0.1, 1, 10}, 1) == doctest::Approx(10.0).epsilon(1e-14));
    CHECK(topk_step({2.0, 2.0, 1.0}, {0.1, 1, 10}, 1) == doctest::Approx(0.1).epsilon(1e-14));
    CHECK_THROWS_AS(topk_step({1, 2}, {1, 2}, 3), ConfigError);
}

TEST_CASE("parameter schemes") {
    const std::vector<double> kappas = {1.0, 2.0, 4.0};
    CHECK(update_kappa(SchemeKind::half_best, {1.0, 1.1, 1.3}, kappas, 1.0) == 2.5);
    CHECK(update_kappa(SchemeKind::top1, {1.0, 1.1, 1.3}, kappas, 1.0) == 4.0);
    CHECK(update_kappa(SchemeKind::top3, {1.0, 1.1, 1.3}, kappas, 1.0) == doctest::Approx(2.0));
    CHECK(update_kappa(SchemeKind::top5, {1.0, 1.0, 1.0}, kappas, 1.7) == 1.7);
    CHECK_THROWS_AS(update_kappa(SchemeKind::all_mean, {1.0, 1.1, 1.3}, kappas, 1.0), ConfigError);
}

TEST_CASE("combining schemes") {
    const Weights e1 = vec({1, 0}), e2 = vec({0, 1}), mid = vec({0.3, 0.7});
    SUBCASE("identical experts") {
        for (auto kind : {SchemeKind::best, SchemeKind::top5_mean, SchemeKind::top5_weighted, SchemeKind::all_mean})
            CHECK(combine_portfolios(kind, {mid, mid, mid}, {1.0, 1.2, 0.9}).isApprox(mid, 1e-15));
    }
    SUBCASE("wealth-weighted top five") {
        const Weights b = combine_portfolios(SchemeKind::top5_weighted, {e1, e2, e2, e2, e2, e1}, {2, 1, 1, 1, 1, 0.5});
        CHECK(b(0) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
        CHECK(b(1) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    }
    SUBCASE("plain top five, best and all") {
        const std::vector<Weights> ps = {e1, e2, e2, e2, e2, e1};
        const std::vector<double> w = {2, 1, 1, 1, 1, 0.5};
        CHECK(combine_portfolios(SchemeKind::top5_mean, ps, w).isApprox(vec({0.2, 0.8})));
        CHECK(combine_portfolios(SchemeKind::best, ps, w) == e1);
        CHECK(combine_portfolios(SchemeKind::all_mean, ps, w).isApprox(vec({1.0 / 3.0, 2.0 / 3.0})));
    }
    CHECK_THROWS_AS(combine_portfolios(SchemeKind::sb, {e1}, {1.0}), ConfigError);
}

TEST_CASE("scheme names") {
    CHECK(parse_scheme("a") == SchemeKind::top5);
    CHECK(parse_scheme("d") == SchemeKind::half_best);
    CHECK(parse_scheme("e") == SchemeKind::sb);
    CHECK(parse_scheme("j") == SchemeKind::all_mean);
    CHECK(parse_scheme("v", true) == SchemeKind::top5_weighted);
    CHECK(parse_scheme("top5_weighted") == SchemeKind::top5_weighted);
    CHECK_THROWS_AS(parse_scheme("k"), ConfigError);
    CHECK_THROWS_AS(parse_scheme("vii", true), ConfigError);
    RelpParams base = RelpParams::with_default_lambda(1.0, 0.002);
    CHECK_THROWS_AS(lambda_scheme(SchemeKind::top5, {0.01, 0.02}, base), ConfigError);
}

TEST_CASE("degenerate adaptive grids reproduce the fixed strategy") {
    const RelativesMatrix data = random_market(60, 3, 31, 0.03);
    for (auto variant : {AdaptiveVariant::adap1, AdaptiveVariant::adap2}) {
        AdaptiveConfig cfg;
        cfg.kappa_grid = {0.5};
        cfg.lambda_multipliers = {10.0};
        cfg.gamma = 0.002;
        cfg.top_k = 1;
        auto adap = relp_adap(variant, cfg);
        RelpFixed fixed(RelpParams{0.5, 0.02, 0.002, 5});
        const BacktestResult a = run_backtest(data, *adap, CostSpec{0.002});
        const BacktestResult f = run_backtest(data, fixed, CostSpec{0.002});
        REQUIRE(a.log.size() == f.log.size());
        for (std::size_t t = 0; t < a.log.size(); ++t) {
            CHECK(a.log[t].b == f.log[t].b);
            CHECK(a.log[t].w == f.log[t].w);
        }
        CHECK(a.wealth == f.wealth);
        CHECK(fixed.counters().solved > 0);
    }
}

TEST_CASE("pool wealth equals standalone backtests") {
    const RelativesMatrix data = random_market(50, 3, 12, 0.03);
    const std::vector<double> kappas = {0.1, 1.0, 10.0};
    RelpParams base = RelpParams::with_default_lambda(1.0, 0.005);
    auto scheme = kappa_scheme(SchemeKind::sb, kappas, base);
    run_backtest(data, *scheme, CostSpec{0.005});
    for (std::size_t k = 0; k < kappas.size(); ++k) {
        RelpParams p = base;
        p.kappa = kappas[k];
        RelpFixed solo(p);
        const BacktestResult r = run_backtest(data, solo, CostSpec{0.005});
        const auto& pooled = scheme->pool().wealth()[k];
        REQUIRE(pooled.size() == r.wealth.size() - 1);
        for (std::size_t t = 0; t < pooled.size(); ++t) CHECK(pooled[t] == r.wealth[t]);
    }
}

TEST_CASE("emitted portfolio follows the tracked expert") {
    const RelativesMatrix data = random_market(80, 3, 77, 0.04);
    auto scheme = kappa_scheme(SchemeKind::sb, {0.1, 0.5, 2.0, 8.0}, RelpParams::with_default_lambda(1.0, 0.0));
    const BacktestResult r = run_backtest(data, *scheme, CostSpec{0.0});
    const auto& trace = scheme->trace();
    REQUIRE(trace.size() == r.log.size());
    // Replaying the tracked index against standalone experts reproduces the portfolios.
    std::vector<BacktestResult> solo;
    for (double k : {0.1, 0.5, 2.0, 8.0}) {
        RelpFixed f(RelpParams{k, 0.0, 0.0, 5});
        solo.push_back(run_backtest(data, f, CostSpec{0.0}));
    }
    for (std::size_t t = 0; t < r.log.size(); ++t) CHECK(r.log[t].b == solo[trace[t].tracked].log[t].b);
}

TEST_CASE("parallel and sequential pools agree bit for bit") {
    const RelativesMatrix data = random_market(40, 3, 5, 0.03);
    AdaptiveConfig cfg;
    cfg.kappa_grid = log_space(0.1, 10.0, 4);
    cfg.lambda_multipliers = log_space(1.0, 100.0, 3);
    cfg.gamma = 0.002;
    cfg.top_k = 2;
    for (auto variant : {AdaptiveVariant::adap1, AdaptiveVariant::adap2}) {
        cfg.parallel = true;
        auto par = relp_adap(variant, cfg);
        cfg.parallel = false;
        auto seq = relp_adap(variant, cfg);
        const auto a = run_backtest(data, *par, CostSpec{0.002});
        const auto b = run_backtest(data, *seq, CostSpec{0.002});
        CHECK(a.wealth == b.wealth);
        auto copy = par->clone();
        CHECK(run_backtest(data, *copy, CostSpec{0.002}).wealth == a.wealth);
    }
}

TEST_CASE("top-K kappa stays inside the grid") {
    const RelativesMatrix data = random_market(60, 3, 99, 0.04);
    auto scheme = kappa_scheme(SchemeKind::top3, log_space(0.1, 10.0, 7), RelpParams::with_default_lambda(1.0, 0.002));
    run_backtest(data, *scheme, CostSpec{0.002});
    for (const auto& row : scheme->trace()) {
        CHECK(row.kappa >= 0.1 - 1e-12);
        CHECK(row.kappa <= 10.0 + 1e-12);
    }
    const std::string csv = format_scheme_trace(scheme->trace());
    CHECK(csv.rfind("t,tracked_lambda,current_kappa,switch_flag\n", 0) == 0);
}
