#pragma once

#include "relp/strategy.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

namespace relp {

/// Cumulative wealth S_1..S_n with S_0 = 1 implied.
struct WealthSeries {
    std::vector<double> S;
    double periods_per_year = 252.0;

    /// Throws DataError when empty or when an entry is not positive.
    void validate() const;
};

/// Statistics that are undefined for a series (zero variance, zero drawdown)
/// are reported as NaN.
bool is_undefined(double value);

/// r_t = S_t / S_{t-1} - 1 for t = 1..n.
std::vector<double> period_returns(const WealthSeries& ws);

double cumulative_wealth(const WealthSeries& ws);

/// Largest (peak - S_t) / peak over the series including S_0.
double max_drawdown(const WealthSeries& ws);

/// mean(r - rf) / std(r - rf) with the n-1 std; NaN when the std is zero or n < 2.
double sharpe_ratio(const std::vector<double>& returns, double rf_per_period);
double sharpe_daily(const WealthSeries& ws, double rf_annual = 0.04);

/// (S_n^(periods_per_year / n) - 1) / max_drawdown; NaN when the drawdown is zero.
double calmar(const WealthSeries& ws);

/// mean(r) - mean(r_market).
double mer(const WealthSeries& ws, const WealthSeries& market);

/// mean(d) / std(d) with d = r - r_market; NaN when the std is zero.
double information_ratio(const WealthSeries& ws, const WealthSeries& market);
double information_ratio(const std::vector<double>& differences);

/// Linear-interpolation quantile (R type 7) of the values.
double quantile_type7(std::vector<double> values, double p);

/// 95th percentile of the per-period losses -r_t.
double var95(const WealthSeries& ws);

/// (1 / 2n) sum_t ||b_hat_{t-1} - w_{t-1} b_t||_1 with b_hat_0 = 0.
double average_turnover(const std::vector<PeriodRecord>& log);

/// (stat - worst) / (best - worst) per entry; 1 for every entry when best equals
/// worst. NaN entries stay NaN and are ignored when finding best and worst.
std::vector<double> relative_ranking(const std::vector<double>& stats, bool higher_is_better = true);

struct MetricReport {
    std::string strategy;
    double gamma = 0.0;
    double cumulative_wealth = 1.0;
    double mer = 0.0;
    double sharpe_daily = 0.0;
    double calmar = 0.0;
    double information_ratio = 0.0;
    double max_drawdown = 0.0;
    double var95 = 0.0;
    double average_turnover = 0.0;
};

struct MetricOptions {
    double periods_per_year = 252.0;
    double rf_annual = 0.04;
};

/// All statistics of a run. `market` is the benchmark used for MER and IR.
MetricReport compute_report(const BacktestResult& result, const WealthSeries& market, const MetricOptions& options = {});

/// Metric names in report order, and whether larger values are better.
struct MetricInfo {
    const char* name;
    bool higher_is_better;
};
const std::vector<MetricInfo>& metric_columns();

/// Value of a named metric (one of metric_columns()).
double metric_value(const MetricReport& report, const std::string& name);

/// JSON object; undefined values become null.
nlohmann::json to_json(const MetricReport& report);

/// CSV header/row: strategy, gamma, then metric_columns(); undefined values become NA.
std::string metric_csv_header();
std::string metric_csv_row(const MetricReport& report);

/// Shortest round-trip text, or NA for NaN.
std::string format_metric(double value);

}  // namespace relp
