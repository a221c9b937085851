#include "relp/cli.hpp"

#include "relp/baselines.hpp"
#include "relp/errors.hpp"

#include <CLI11.hpp>
#include <spdlog/spdlog.h>
#include <tbb/global_control.h>
#include <tbb/parallel_for.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>
#include <type_traits>

namespace relp::cli {

namespace fs = std::filesystem;

namespace {

template <typename T>
struct is_vector : std::false_type {};
template <typename T>
struct is_vector<std::vector<T>> : std::true_type {};

template <typename T>
struct is_optional : std::false_type {};
template <typename T>
struct is_optional<std::optional<T>> : std::true_type {};

// Every configurable field: JSON key, command-line flag, help text, accessor.
template <typename F>
void for_each_field(F&& f) {
    f("data", "--data", "price-relatives (or prices) CSV file", [](RunConfig& c) -> auto& { return c.data; });
    f("format", "--format", "csv_relatives or csv_prices", [](RunConfig& c) -> auto& { return c.format; });
    f("strategy", "--strategy", "strategy name(s), comma separated", [](RunConfig& c) -> auto& { return c.strategies; });
    f("gamma", "--gamma", "transaction cost rate(s), comma separated", [](RunConfig& c) -> auto& { return c.gammas; });
    f("output", "--output", "output directory", [](RunConfig& c) -> auto& { return c.output; });
    f("seed", "--seed", "seed recorded with the outputs", [](RunConfig& c) -> auto& { return c.seed; });
    f("parallel", "--parallel", "run experts and runs in parallel (true/false)",
      [](RunConfig& c) -> auto& { return c.parallel; });
    f("kappa", "--kappa", "uncertainty radius of relp-fixed", [](RunConfig& c) -> auto& { return c.kappa; });
    f("lambda_multiplier", "--lambda-multiplier", "lambda = multiplier * gamma",
      [](RunConfig& c) -> auto& { return c.lambda_multiplier; });
    f("lambda", "--lambda", "absolute lambda (overrides the multiplier)", [](RunConfig& c) -> auto& { return c.lambda; });
    f("window", "--window", "moving-average predictor window", [](RunConfig& c) -> auto& { return c.window; });
    f("eg_eta", "--eg-eta", "EG learning rate", [](RunConfig& c) -> auto& { return c.eg_eta; });
    f("olmar_epsilon", "--olmar-epsilon", "OLMAR reversion threshold", [](RunConfig& c) -> auto& { return c.olmar_epsilon; });
    f("olmar_window", "--olmar-window", "OLMAR window", [](RunConfig& c) -> auto& { return c.olmar_window; });
    f("kappa_min", "--kappa-min", "adaptive kappa grid lower end", [](RunConfig& c) -> auto& { return c.kappa_grid.lo; });
    f("kappa_max", "--kappa-max", "adaptive kappa grid upper end", [](RunConfig& c) -> auto& { return c.kappa_grid.hi; });
    f("kappa_count", "--kappa-count", "adaptive kappa grid size", [](RunConfig& c) -> auto& { return c.kappa_grid.count; });
    f("lambda_min", "--lambda-min", "adaptive lambda multiplier lower end",
      [](RunConfig& c) -> auto& { return c.lambda_grid.lo; });
    f("lambda_max", "--lambda-max", "adaptive lambda multiplier upper end",
      [](RunConfig& c) -> auto& { return c.lambda_grid.hi; });
    f("lambda_count", "--lambda-count", "adaptive lambda grid size", [](RunConfig& c) -> auto& { return c.lambda_grid.count; });
    f("sb_window", "--sb-window", "tracking window", [](RunConfig& c) -> auto& { return c.sb_window; });
    f("sb_delta", "--sb-delta", "indifference zone", [](RunConfig& c) -> auto& { return c.sb_delta; });
    f("sb_z", "--sb-z", "bandwidth multiplier", [](RunConfig& c) -> auto& { return c.sb_z; });
    f("top_k", "--top-k", "K of the top-K kappa update", [](RunConfig& c) -> auto& { return c.top_k; });
    f("sweep_kappa_min", "--sweep-kappa-min", "sweep kappa lower end", [](RunConfig& c) -> auto& { return c.sweep_kappa.lo; });
    f("sweep_kappa_max", "--sweep-kappa-max", "sweep kappa upper end", [](RunConfig& c) -> auto& { return c.sweep_kappa.hi; });
    f("sweep_kappa_count", "--sweep-kappa-count", "sweep kappa grid size",
      [](RunConfig& c) -> auto& { return c.sweep_kappa.count; });
    f("sweep_lambda_min", "--sweep-lambda-min", "sweep lambda multiplier lower end",
      [](RunConfig& c) -> auto& { return c.sweep_lambda.lo; });
    f("sweep_lambda_max", "--sweep-lambda-max", "sweep lambda multiplier upper end",
      [](RunConfig& c) -> auto& { return c.sweep_lambda.hi; });
    f("sweep_lambda_count", "--sweep-lambda-count", "sweep lambda grid size",
      [](RunConfig& c) -> auto& { return c.sweep_lambda.count; });
    f("periods_per_year", "--periods-per-year", "annualization constant",
      [](RunConfig& c) -> auto& { return c.periods_per_year; });
    f("rf_annual", "--rf-annual", "annual risk-free rate", [](RunConfig& c) -> auto& { return c.rf_annual; });
}

template <typename T>
void read_json_value(const nlohmann::json& value, T& target, const std::string& key) {
    try {
        if constexpr (is_optional<T>::value) {
            if (value.is_null()) {
                target.reset();
            } else {
                target = value.get<typename T::value_type>();
            }
        } else if constexpr (is_vector<T>::value) {
            if (value.is_array()) {
                target = value.get<T>();
            } else {
                target = T{value.get<typename T::value_type>()};
            }
        } else {
            target = value.get<T>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config key '" + key + "': " + e.what());
    }
}

std::vector<std::string> dedupe(const std::vector<std::string>& names) {
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& n : names) {
        if (seen.insert(n).second) {
            out.push_back(n);
        } else {
            spdlog::warn("strategy '{}' listed more than once; running it once", n);
        }
    }
    return out;
}

RelativesMatrix load_data(const RunConfig& config) {
    if (config.data.empty()) throw ConfigError("no dataset given (--data)");
    return load_relatives(config.data, parse_csv_format(config.format));
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << text;
}

nlohmann::json run_json(const RunOutput& run, const RunConfig& config, const RelativesMatrix& data) {
    nlohmann::json j = to_json(run.report);
    j["periods"] = data.periods();
    j["assets"] = data.assets();
    j["dataset"] = config.data;
    j["seed"] = config.seed;
    return j;
}

void write_run(const RunOutput& run, const RunConfig& config, const RelativesMatrix& data) {
    const fs::path dir(config.output);
    const std::string stem = run_stem(run.result.strategy, run.result.gamma);
    write_trade_log(run.result, data.asset_names(), dir / (stem + ".csv"));
    write_text(dir / (stem + ".json"), run_json(run, config, data).dump(2) + "\n");
    if (!run.trace.empty()) write_scheme_trace(run.trace, dir / (stem + "_trace.csv"));
}

template <typename F>
void for_each_task(std::size_t n, bool parallel, F&& f) {
    if (parallel && n > 1) {
        tbb::parallel_for(std::size_t{0}, n, [&](std::size_t i) { f(i); });
    } else {
        for (std::size_t i = 0; i < n; ++i) f(i);
    }
}

void print_summary(const std::vector<RunOutput>& runs) {
    for (const auto& run : runs) {
        std::cout << run_stem(run.result.strategy, run.result.gamma)
                  << "  CW=" << format_metric(run.report.cumulative_wealth)
                  << "  Sharpe=" << format_metric(run.report.sharpe_daily)
                  << "  MDD=" << format_metric(run.report.max_drawdown)
                  << "  AT=" << format_metric(run.report.average_turnover) << '\n';
    }
}

}  // namespace

void RunConfig::validate() const {
    parse_csv_format(format);
    if (gammas.empty()) throw ConfigError("at least one gamma is required");
    for (double g : gammas) CostSpec{g}.validate();
    if (!(kappa >= 0.0)) throw ConfigError("kappa must be nonnegative");
    if (!(lambda_multiplier >= 0.0)) throw ConfigError("lambda multiplier must be nonnegative");
    if (lambda && !(*lambda >= 0.0)) throw ConfigError("lambda must be nonnegative");
    if (window < 1 || olmar_window < 1) throw ConfigError("windows must be at least 1");
    if (!(eg_eta > 0.0) || !(olmar_epsilon > 0.0)) throw ConfigError("EG eta and OLMAR epsilon must be positive");
    for (const GridSpec* g : {&kappa_grid, &lambda_grid, &sweep_kappa, &sweep_lambda}) g->values();
    SbConfig{sb_window, sb_delta, sb_z}.validate();
    if (top_k < 1 || top_k > kappa_grid.count) throw ConfigError("top-K must lie in [1, kappa grid size]");
    if (!(periods_per_year > 0.0)) throw ConfigError("periods per year must be positive");
    if (output.empty()) throw ConfigError("output directory is empty");
}

void apply_json(RunConfig& config, const nlohmann::json& doc) {
    if (!doc.is_object()) throw ConfigError("config file must hold a JSON object");
    std::set<std::string> known;
    for_each_field([&](const char* key, const char*, const char*, auto get) {
        known.insert(key);
        if (doc.contains(key)) read_json_value(doc.at(key), get(config), key);
    });
    for (const auto& [key, value] : doc.items()) {
        if (!known.count(key)) throw ConfigError("unknown config key '" + key + "'");
    }
}

nlohmann::json to_json(const RunConfig& config) {
    nlohmann::json j;
    RunConfig copy = config;
    for_each_field([&](const char* key, const char*, const char*, auto get) {
        const auto& value = get(copy);
        using T = std::decay_t<decltype(value)>;
        if constexpr (is_optional<T>::value) {
            j[key] = value ? nlohmann::json(*value) : nlohmann::json(nullptr);
        } else {
            j[key] = value;
        }
    });
    return j;
}

UnknownStrategy::UnknownStrategy(const std::string& name)
    : ConfigError([&] {
          std::string msg = "unknown strategy '" + name + "'; known strategies:";
          for (const auto& k : known_strategies()) msg += " " + k;
          return msg;
      }()) {}

std::vector<std::string> known_strategies() {
    std::vector<std::string> names = {"ubah", "ucrp", "eg", "olmar", "relp-fixed", "relp-adap-1", "relp-adap-2"};
    for (char c = 'a'; c <= 'j'; ++c) names.push_back(std::string("relp-kappa-") + c);
    for (const char* r : {"i", "ii", "iii", "iv", "v", "vi"}) names.push_back(std::string("relp-lambda-") + r);
    return names;
}

StrategyPtr make_strategy(const std::string& name, const RunConfig& config, double gamma) {
    RelpParams base;
    base.kappa = config.kappa;
    base.gamma = gamma;
    base.lambda = config.lambda ? *config.lambda : config.lambda_multiplier * gamma;
    base.window = config.window;
    const SbConfig sb{config.sb_window, config.sb_delta, config.sb_z};

    if (name == "ubah") return std::make_unique<Ubah>();
    if (name == "ucrp") return std::make_unique<Ucrp>();
    if (name == "eg") return std::make_unique<ExponentialGradient>(config.eg_eta);
    if (name == "olmar") return std::make_unique<Olmar>(config.olmar_epsilon, config.olmar_window);
    if (name == "relp-fixed") return std::make_unique<RelpFixed>(base);
    if (name == "relp-adap-1" || name == "relp-adap-2") {
        AdaptiveConfig ac;
        ac.kappa_grid = config.kappa_grid.values();
        ac.lambda_multipliers = config.lambda_grid.values();
        ac.gamma = gamma;
        ac.window = config.window;
        ac.sb = sb;
        ac.top_k = config.top_k;
        ac.parallel = config.parallel;
        return relp_adap(name == "relp-adap-1" ? AdaptiveVariant::adap1 : AdaptiveVariant::adap2, ac);
    }
    const std::string kappa_prefix = "relp-kappa-";
    const std::string lambda_prefix = "relp-lambda-";
    const auto known = known_strategies();
    if (std::find(known.begin(), known.end(), name) == known.end()) throw UnknownStrategy(name);
    if (name.rfind(kappa_prefix, 0) == 0) {
        auto s = kappa_scheme(parse_scheme(name.substr(kappa_prefix.size())), config.kappa_grid.values(), base, sb,
                              config.parallel);
        return s;
    }
    std::vector<double> lambdas;
    for (double mult : config.lambda_grid.values()) lambdas.push_back(mult * gamma);
    return lambda_scheme(parse_scheme(name.substr(lambda_prefix.size()), true), lambdas, base, sb, config.parallel);
}

std::string run_stem(const std::string& strategy, double gamma) { return strategy + "_g" + format_double(gamma); }

std::vector<RunOutput> run_all(const RelativesMatrix& data, const std::vector<std::string>& strategies,
                               const RunConfig& config) {
    for (const auto& name : strategies) make_strategy(name, config, config.gammas.front());

    const MetricOptions mopt{config.periods_per_year, config.rf_annual};
    const std::size_t ng = config.gammas.size();
    std::vector<WealthSeries> market(ng);
    for_each_task(ng, config.parallel, [&](std::size_t g) {
        Ubah ubah;
        market[g] = WealthSeries{run_backtest(data, ubah, CostSpec{config.gammas[g]}).wealth, config.periods_per_year};
    });

    const std::size_t ns = strategies.size();
    std::vector<RunOutput> out(ng * ns);
    for_each_task(out.size(), config.parallel, [&](std::size_t k) {
        const std::size_t g = k / ns;
        const double gamma = config.gammas[g];
        StrategyPtr strategy = make_strategy(strategies[k % ns], config, gamma);
        RunOutput& run = out[k];
        run.result = run_backtest(data, *strategy, CostSpec{gamma});
        run.result.strategy = strategies[k % ns];
        run.report = compute_report(run.result, market[g], mopt);
        if (const auto* scheme = dynamic_cast<const SchemeStrategy*>(strategy.get())) run.trace = scheme->trace();
    });
    return out;
}

int cmd_backtest(const RunConfig& config) {
    config.validate();
    if (config.strategies.empty()) throw ConfigError("no strategy given (--strategy)");
    const RelativesMatrix data = load_data(config);
    const std::vector<std::string> names = dedupe(config.strategies);
    const std::vector<RunOutput> runs = run_all(data, names, config);
    fs::create_directories(config.output);
    for (const auto& run : runs) write_run(run, config, data);
    print_summary(runs);
    return 0;
}

int cmd_compare(const RunConfig& config) {
    config.validate();
    if (config.strategies.empty()) throw ConfigError("compare needs at least one strategy (--strategy)");
    const RelativesMatrix data = load_data(config);
    const std::vector<std::string> names = dedupe(config.strategies);
    const std::vector<RunOutput> runs = run_all(data, names, config);
    fs::create_directories(config.output);
    const fs::path dir(config.output);
    for (const auto& run : runs) write_run(run, config, data);

    std::ostringstream combined;
    combined << metric_csv_header() << '\n';
    for (const auto& run : runs) combined << metric_csv_row(run.report) << '\n';
    write_text(dir / "compare_metrics.csv", combined.str());

    // One ranking table per metric: strategies as rows, gammas as columns.
    const std::size_t ns = names.size();
    for (const auto& col : metric_columns()) {
        std::vector<std::vector<double>> ranks;
        for (std::size_t g = 0; g < config.gammas.size(); ++g) {
            std::vector<double> stats;
            for (std::size_t s = 0; s < ns; ++s) stats.push_back(metric_value(runs[g * ns + s].report, col.name));
            ranks.push_back(relative_ranking(stats, col.higher_is_better));
        }
        std::ostringstream os;
        os << "strategy";
        for (double g : config.gammas) os << ",g" << format_double(g);
        os << '\n';
        for (std::size_t s = 0; s < ns; ++s) {
            os << names[s];
            for (const auto& r : ranks) os << ',' << format_metric(r[s]);
            os << '\n';
        }
        write_text(dir / (std::string("ranking_") + col.name + ".csv"), os.str());
    }
    print_summary(runs);
    return 0;
}

int cmd_sweep(const RunConfig& config) {
    config.validate();
    const RelativesMatrix data = load_data(config);
    const std::vector<double> kappas = config.sweep_kappa.values();
    const std::vector<double> mults = config.sweep_lambda.values();
    struct Cell {
        double gamma, kappa, mult, lambda;
        double cw = 0, sharpe = 0, mdd = 0, calmar = 0;
    };
    std::vector<Cell> cells;
    for (double g : config.gammas) {
        for (double k : kappas) {
            for (double m : mults) cells.push_back({g, k, m, m * g});
        }
    }
    const double ppy = config.periods_per_year;
    for_each_task(cells.size(), config.parallel, [&](std::size_t i) {
        Cell& c = cells[i];
        RelpParams p;
        p.kappa = c.kappa;
        p.lambda = c.lambda;
        p.gamma = c.gamma;
        p.window = config.window;
        RelpFixed strategy(p);
        const BacktestResult r = run_backtest(data, strategy, CostSpec{c.gamma});
        const WealthSeries ws{r.wealth, ppy};
        c.cw = cumulative_wealth(ws);
        c.sharpe = sharpe_daily(ws, config.rf_annual);
        c.mdd = max_drawdown(ws);
        c.calmar = calmar(ws);
    });
    std::ostringstream os;
    os << "gamma,kappa,lambda_multiplier,lambda,lambda_zero,cumulative_wealth,sharpe_daily,max_drawdown,calmar\n";
    for (const auto& c : cells) {
        os << format_double(c.gamma) << ',' << format_double(c.kappa) << ',' << format_double(c.mult) << ','
           << format_double(c.lambda) << ',' << (c.lambda == 0.0 ? 1 : 0) << ',' << format_metric(c.cw) << ','
           << format_metric(c.sharpe) << ',' << format_metric(c.mdd) << ',' << format_metric(c.calmar) << '\n';
    }
    fs::create_directories(config.output);
    write_text(fs::path(config.output) / "sweep.csv", os.str());
    std::cout << "sweep: " << cells.size() << " cells written to " << (fs::path(config.output) / "sweep.csv").string()
              << '\n';
    return 0;
}

int run(int argc, const char* const* argv) {
    CLI::App app{"Transaction-cost-aware robust online portfolio selection"};
    app.require_subcommand(1);
    app.fallthrough();

    RunConfig from_cli;
    std::vector<std::function<void(RunConfig&)>> overrides;
    std::string config_path;
    app.add_option("--config", config_path, "JSON config file (command-line flags take precedence)");
    for_each_field([&](const char* key, const char* flag, const char* help, auto get) {
        auto& target = get(from_cli);
        using T = std::decay_t<decltype(target)>;
        CLI::Option* opt = app.add_option(flag, target, help);
        if constexpr (is_vector<T>::value) opt->delimiter(',');
        (void)key;
        overrides.push_back([opt, get, &from_cli](RunConfig& c) {
            if (opt->count() > 0) get(c) = get(from_cli);
        });
    });
    app.add_subcommand("backtest", "run each strategy at each gamma and write trade logs and metrics");
    app.add_subcommand("compare", "run several strategies and write combined metrics and rankings");
    app.add_subcommand("sweep", "run relp-fixed over a kappa x lambda grid");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        RunConfig config;
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw ConfigError("cannot read config file " + config_path);
            nlohmann::json doc;
            try {
                in >> doc;
            } catch (const nlohmann::json::exception& e) {
                throw ConfigError("config file " + config_path + ": " + e.what());
            }
            apply_json(config, doc);
        }
        for (auto& apply : overrides) apply(config);

        std::unique_ptr<tbb::global_control> limit;
        if (const char* env = std::getenv("RELP_THREADS")) {
            const long threads = std::strtol(env, nullptr, 10);
            if (threads > 0) {
                limit = std::make_unique<tbb::global_control>(tbb::global_control::max_allowed_parallelism,
                                                              static_cast<std::size_t>(threads));
            }
        }

        const std::string verb = app.get_subcommands().front()->get_name();
        if (verb == "backtest") return cmd_backtest(config);
        if (verb == "compare") return cmd_compare(config);
        return cmd_sweep(config);
    } catch (const UnknownStrategy& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace relp::cli
