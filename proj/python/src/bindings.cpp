#include "relp/adaptive.hpp"
#include "relp/cli.hpp"
#include "relp/conic_solver.hpp"
#include "relp/metrics.hpp"
#include "relp/transaction_cost.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace relp;

namespace {

RelativesMatrix to_relatives(const Eigen::Ref<const Eigen::MatrixXd>& x) {
    return RelativesMatrix(RelativesTable(x));
}

py::dict run_one(const Eigen::Ref<const Eigen::MatrixXd>& relatives, const std::string& strategy, double gamma,
                 const std::string& config_json) {
    cli::RunConfig config;
    if (!config_json.empty()) cli::apply_json(config, nlohmann::json::parse(config_json));
    config.gammas = {gamma};
    const RelativesMatrix data = to_relatives(relatives);
    std::vector<cli::RunOutput> runs;
    {
        py::gil_scoped_release release;
        runs = cli::run_all(data, {strategy}, config);
    }
    const cli::RunOutput& run = runs.front();
    const auto n = static_cast<Eigen::Index>(run.result.log.size());
    Eigen::MatrixXd weights(n, static_cast<Eigen::Index>(data.assets()));
    Eigen::VectorXd w(n), wealth(n);
    for (Eigen::Index t = 0; t < n; ++t) {
        weights.row(t) = run.result.log[static_cast<std::size_t>(t)].b.transpose();
        w(t) = run.result.log[static_cast<std::size_t>(t)].w;
        wealth(t) = run.result.wealth[static_cast<std::size_t>(t)];
    }
    py::dict metrics;
    for (const auto& col : metric_columns()) metrics[col.name] = metric_value(run.report, col.name);
    py::dict out;
    out["strategy"] = run.result.strategy;
    out["gamma"] = gamma;
    out["wealth"] = wealth;
    out["weights"] = weights;
    out["net_proportion"] = w;
    out["metrics"] = metrics;
    return out;
}

py::dict solve(const Eigen::VectorXd& x_tilde, const Eigen::VectorXd& b_hat, double lambda, double kappa, double gamma,
               std::optional<Eigen::MatrixXd> covariance) {
    RelpProblem p;
    p.x_tilde = x_tilde;
    p.b_hat = b_hat;
    p.lambda = lambda;
    p.kappa = kappa;
    p.gamma = gamma;
    if (covariance) {
        p.shape = factorize_shape(*covariance);
        if (!p.shape) throw ConfigError("covariance could not be factorized");
    }
    const RelpSolution s = (p.shape && p.kappa > 0.0) ? solve_relp_socp(p) : solve_relp_lp(p);
    py::dict out;
    out["b_raw"] = s.b_raw;
    out["w"] = s.w;
    out["portfolio"] = s.b_portfolio;
    out["objective"] = s.objective;
    out["iterations"] = s.iterations;
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Transaction-cost-aware robust online portfolio selection";

    py::register_exception<Error>(m, "RelpError", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
    py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);

    m.def("known_strategies", &cli::known_strategies);
    m.def("backtest", &run_one, py::arg("relatives"), py::arg("strategy"), py::arg("gamma") = 0.0,
          py::arg("config_json") = std::string(),
          "Runs one strategy on an (n, m) array of price relatives. config_json holds CLI config keys.");
    m.def(
        "net_proportion",
        [](const Eigen::VectorXd& b_hat, const Eigen::VectorXd& b, double gamma) {
            return net_proportion(b_hat, b, CostSpec{gamma});
        },
        py::arg("b_hat"), py::arg("b"), py::arg("gamma"));
    m.def("solve_relp", &solve, py::arg("x_tilde"), py::arg("b_hat"), py::arg("lam"), py::arg("kappa"),
          py::arg("gamma"), py::arg("covariance") = py::none());
    m.def("log_space", &log_space, py::arg("lo"), py::arg("hi"), py::arg("count"));
    m.def(
        "max_drawdown", [](std::vector<double> s) { return max_drawdown(WealthSeries{std::move(s)}); },
        py::arg("wealth"));
    m.def(
        "sharpe_daily",
        [](std::vector<double> s, double rf, double ppy) { return sharpe_daily(WealthSeries{std::move(s), ppy}, rf); },
        py::arg("wealth"), py::arg("rf_annual") = 0.04, py::arg("periods_per_year") = 252.0);
    m.def("relative_ranking", &relative_ranking, py::arg("stats"), py::arg("higher_is_better") = true);
}
