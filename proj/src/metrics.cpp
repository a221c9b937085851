#include "relp/metrics.hpp"

#include "relp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace relp {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

double sample_std(const std::vector<double>& v, double mu) {
    double ss = 0.0;
    for (double x : v) ss += (x - mu) * (x - mu);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double mean_over_std(const std::vector<double>& v) {
    if (v.size() < 2) return kNaN;
    const double mu = mean(v);
    const double sd = sample_std(v, mu);
    if (!(sd > 0.0)) return kNaN;
    return mu / sd;
}

std::vector<double> return_differences(const WealthSeries& ws, const WealthSeries& market) {
    const std::vector<double> r = period_returns(ws);
    const std::vector<double> rm = period_returns(market);
    if (r.size() != rm.size()) throw ConfigError("strategy and market series have different lengths");
    std::vector<double> d(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) d[i] = r[i] - rm[i];
    return d;
}

}  // namespace

void WealthSeries::validate() const {
    if (S.empty()) throw DataError("wealth series is empty");
    for (std::size_t i = 0; i < S.size(); ++i) {
        if (!(S[i] > 0.0) || !std::isfinite(S[i])) throw DataError("wealth must be positive", i);
    }
    if (!(periods_per_year > 0.0)) throw ConfigError("periods_per_year must be positive");
}

bool is_undefined(double value) { return std::isnan(value); }

std::vector<double> period_returns(const WealthSeries& ws) {
    ws.validate();
    std::vector<double> r(ws.S.size());
    double prev = 1.0;
    for (std::size_t i = 0; i < ws.S.size(); ++i) {
        r[i] = ws.S[i] / prev - 1.0;
        prev = ws.S[i];
    }
    return r;
}

double cumulative_wealth(const WealthSeries& ws) {
    ws.validate();
    return ws.S.back();
}

double max_drawdown(const WealthSeries& ws) {
    ws.validate();
    double peak = 1.0;
    double worst = 0.0;
    for (double s : ws.S) {
        peak = std::max(peak, s);
        worst = std::max(worst, (peak - s) / peak);
    }
    return worst;
}

double sharpe_ratio(const std::vector<double>& returns, double rf_per_period) {
    std::vector<double> excess(returns.size());
    for (std::size_t i = 0; i < returns.size(); ++i) excess[i] = returns[i] - rf_per_period;
    return mean_over_std(excess);
}

double sharpe_daily(const WealthSeries& ws, double rf_annual) {
    return sharpe_ratio(period_returns(ws), rf_annual / ws.periods_per_year);
}

double calmar(const WealthSeries& ws) {
    const double mdd = max_drawdown(ws);
    if (!(mdd > 0.0)) return kNaN;
    const double years = static_cast<double>(ws.S.size()) / ws.periods_per_year;
    const double annual = std::pow(ws.S.back(), 1.0 / years) - 1.0;
    return annual / mdd;
}

double mer(const WealthSeries& ws, const WealthSeries& market) {
    const std::vector<double> d = return_differences(ws, market);
    return mean(d);
}

double information_ratio(const std::vector<double>& differences) { return mean_over_std(differences); }

double information_ratio(const WealthSeries& ws, const WealthSeries& market) {
    return information_ratio(return_differences(ws, market));
}

double quantile_type7(std::vector<double> values, double p) {
    if (values.empty()) throw ConfigError("quantile of an empty sample");
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("quantile level must lie in [0, 1]");
    std::sort(values.begin(), values.end());
    const double h = (static_cast<double>(values.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

double var95(const WealthSeries& ws) {
    std::vector<double> losses = period_returns(ws);
    for (double& v : losses) v = -v;
    return quantile_type7(std::move(losses), 0.95);
}

double average_turnover(const std::vector<PeriodRecord>& log) {
    if (log.empty()) return 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < log.size(); ++i) {
        const Weights& b = log[i].b;
        if (i == 0) {
            total += (log[i].w * b).lpNorm<1>();
        } else {
            total += (log[i - 1].b_hat - log[i].w * b).lpNorm<1>();
        }
    }
    return total / (2.0 * static_cast<double>(log.size()));
}

std::vector<double> relative_ranking(const std::vector<double>& stats, bool higher_is_better) {
    double best = kNaN;
    double worst = kNaN;
    for (double s : stats) {
        if (std::isnan(s)) continue;
        if (std::isnan(best)) {
            best = worst = s;
            continue;
        }
        if (higher_is_better) {
            best = std::max(best, s);
            worst = std::min(worst, s);
        } else {
            best = std::min(best, s);
            worst = std::max(worst, s);
        }
    }
    std::vector<double> out(stats.size(), kNaN);
    for (std::size_t i = 0; i < stats.size(); ++i) {
        if (std::isnan(stats[i])) continue;
        out[i] = best == worst ? 1.0 : (stats[i] - worst) / (best - worst);
    }
    return out;
}

MetricReport compute_report(const BacktestResult& result, const WealthSeries& market, const MetricOptions& options) {
    WealthSeries ws{result.wealth, options.periods_per_year};
    MetricReport r;
    r.strategy = result.strategy;
    r.gamma = result.gamma;
    r.cumulative_wealth = cumulative_wealth(ws);
    r.mer = mer(ws, market);
    r.sharpe_daily = sharpe_daily(ws, options.rf_annual);
    r.calmar = calmar(ws);
    r.information_ratio = information_ratio(ws, market);
    r.max_drawdown = max_drawdown(ws);
    r.var95 = var95(ws);
    r.average_turnover = average_turnover(result.log);
    return r;
}

const std::vector<MetricInfo>& metric_columns() {
    static const std::vector<MetricInfo> columns = {
        {"cumulative_wealth", true}, {"mer", true},           {"sharpe_daily", true},
        {"calmar", true},            {"information_ratio", true}, {"max_drawdown", false},
        {"var95", false},            {"average_turnover", false},
    };
    return columns;
}

double metric_value(const MetricReport& r, const std::string& name) {
    if (name == "cumulative_wealth") return r.cumulative_wealth;
    if (name == "mer") return r.mer;
    if (name == "sharpe_daily") return r.sharpe_daily;
    if (name == "calmar") return r.calmar;
    if (name == "information_ratio") return r.information_ratio;
    if (name == "max_drawdown") return r.max_drawdown;
    if (name == "var95") return r.var95;
    if (name == "average_turnover") return r.average_turnover;
    throw ConfigError("unknown metric '" + name + "'");
}

nlohmann::json to_json(const MetricReport& r) {
    nlohmann::json j;
    j["strategy"] = r.strategy;
    j["gamma"] = r.gamma;
    for (const auto& col : metric_columns()) {
        const double v = metric_value(r, col.name);
        j[col.name] = std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v);
    }
    return j;
}

std::string format_metric(double value) { return std::isnan(value) ? std::string("NA") : format_double(value); }

std::string metric_csv_header() {
    std::string out = "strategy,gamma";
    for (const auto& col : metric_columns()) {
        out += ',';
        out += col.name;
    }
    return out;
}

std::string metric_csv_row(const MetricReport& r) {
    std::ostringstream os;
    os << r.strategy << ',' << format_double(r.gamma);
    for (const auto& col : metric_columns()) os << ',' << format_metric(metric_value(r, col.name));
    return os.str();
}

}  // namespace relp
