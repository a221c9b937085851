#pragma once

#include "relp/adaptive.hpp"
#include "relp/errors.hpp"
#include "relp/market_data.hpp"
#include "relp/metrics.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace relp::cli {

/// Inclusive log-spaced grid.
struct GridSpec {
    double lo = 0.1;
    double hi = 10.0;
    std::size_t count = 31;

    std::vector<double> values() const { return log_space(lo, hi, count); }
};

struct RunConfig {
    std::string data;
    std::string format = "csv_relatives";
    std::vector<std::string> strategies;
    std::vector<double> gammas = {0.0, 0.002, 0.005};
    std::string output = "relp_out";
    std::uint64_t seed = 0;
    bool parallel = true;

    // relp-fixed and the single-axis schemes
    double kappa = 1.0;
    double lambda_multiplier = 10.0;    // lambda = multiplier * gamma
    std::optional<double> lambda;       // absolute lambda, overrides the multiplier
    std::size_t window = 5;

    double eg_eta = 0.05;
    double olmar_epsilon = 10.0;
    std::size_t olmar_window = 5;

    // adaptive strategies
    GridSpec kappa_grid{0.1, 10.0, 31};
    GridSpec lambda_grid{1.0, 100.0, 31};
    std::size_t sb_window = 5;
    double sb_delta = 0.0;
    double sb_z = 1.96;
    std::size_t top_k = 5;

    // sweep
    GridSpec sweep_kappa{0.1, 10.0, 21};
    GridSpec sweep_lambda{0.01, 100.0, 41};

    double periods_per_year = 252.0;
    double rf_annual = 0.04;

    /// Throws ConfigError on out-of-range values.
    void validate() const;
};

/// Overwrites the fields present in `doc`. Unknown keys raise ConfigError.
void apply_json(RunConfig& config, const nlohmann::json& doc);
nlohmann::json to_json(const RunConfig& config);

/// Raised for a strategy name that is not in known_strategies().
class UnknownStrategy : public ConfigError {
public:
    explicit UnknownStrategy(const std::string& name);
};

std::vector<std::string> known_strategies();

/// Builds a named strategy for cost rate gamma.
StrategyPtr make_strategy(const std::string& name, const RunConfig& config, double gamma);

/// "<strategy>_g<gamma>".
std::string run_stem(const std::string& strategy, double gamma);

struct RunOutput {
    BacktestResult result;
    MetricReport report;
    std::vector<SchemeTraceRow> trace;
};

/// Runs every (strategy, gamma) pair; results are ordered by gamma, then by
/// strategy in the given order, whatever the execution schedule.
std::vector<RunOutput> run_all(const RelativesMatrix& data, const std::vector<std::string>& strategies,
                               const RunConfig& config);

/// Verbs. Each returns a process exit code and writes into config.output.
int cmd_backtest(const RunConfig& config);
int cmd_compare(const RunConfig& config);
int cmd_sweep(const RunConfig& config);

/// Full command line: `relp <backtest|compare|sweep> [options]`.
/// Exit codes: 0 success, 1 bad input or failed run, 2 unknown strategy.
int run(int argc, const char* const* argv);

}  // namespace relp::cli
