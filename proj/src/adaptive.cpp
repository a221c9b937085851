#include "relp/adaptive.hpp"

#include "relp/errors.hpp"

#include <tbb/parallel_for.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

namespace relp {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct WindowStats {
    double mean = 0.0;
    double stddev = 0.0;
};

WindowStats window_stats(const std::vector<double>& series, std::size_t window) {
    const auto first = series.end() - static_cast<std::ptrdiff_t>(window);
    WindowStats out;
    out.mean = std::accumulate(first, series.end(), 0.0) / static_cast<double>(window);
    double ss = 0.0;
    for (auto it = first; it != series.end(); ++it) ss += (*it - out.mean) * (*it - out.mean);
    out.stddev = std::sqrt(ss / static_cast<double>(window - 1));
    return out;
}

double geometric_mean(const std::vector<double>& values) {
    double log_sum = 0.0;
    for (double v : values) log_sum += std::log(v);
    return std::exp(log_sum / static_cast<double>(values.size()));
}

bool all_equal(const std::vector<double>& values) {
    return std::adjacent_find(values.begin(), values.end(), std::not_equal_to<>()) == values.end();
}

std::string format_or_na(double v) { return std::isnan(v) ? std::string("NA") : format_double(v); }

}  // namespace

std::vector<double> log_space(double lo, double hi, std::size_t count) {
    if (!(lo > 0.0) || !(hi >= lo)) throw ConfigError("log_space needs 0 < lo <= hi");
    if (count == 0) throw ConfigError("log_space needs at least one value");
    std::vector<double> out(count);
    if (count == 1) {
        out[0] = lo;
        return out;
    }
    const double step = std::log(hi / lo) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i) out[i] = lo * std::exp(step * static_cast<double>(i));
    out.front() = lo;
    out.back() = hi;
    return out;
}

void SbConfig::validate() const {
    if (window < 2) throw ConfigError("SB window must be at least 2");
    if (!(delta >= 0.0)) throw ConfigError("SB indifference zone must be nonnegative");
    if (!(z >= 0.0)) throw ConfigError("SB bandwidth multiplier must be nonnegative");
}

std::size_t sb_step(const std::vector<std::vector<double>>& wealth, std::size_t tracked, const SbConfig& config) {
    if (tracked >= wealth.size()) throw IndexError("tracked expert index out of range");
    for (const auto& series : wealth) {
        if (series.size() < config.window) return tracked;
    }
    const WindowStats own = window_stats(wealth[tracked], config.window);
    const double limit = own.mean + std::max(config.delta, config.z * own.stddev);
    std::size_t best = tracked;
    double best_mean = limit;
    for (std::size_t l = 0; l < wealth.size(); ++l) {
        if (l == tracked) continue;
        const double mean = window_stats(wealth[l], config.window).mean;
        if (mean > best_mean) {
            best = l;
            best_mean = mean;
        }
    }
    return best;
}

double topk_step(const std::vector<double>& wealth, const std::vector<double>& params, std::size_t k) {
    if (wealth.size() != params.size() || wealth.empty()) throw ConfigError("topk_step: size mismatch");
    if (k < 1 || k > wealth.size()) throw ConfigError("topk_step: K must lie in [1, pool size]");
    std::vector<std::size_t> order(wealth.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return wealth[a] > wealth[b]; });
    std::vector<double> chosen;
    chosen.reserve(k);
    for (std::size_t i = 0; i < k; ++i) chosen.push_back(params[order[i]]);
    return geometric_mean(chosen);
}

namespace {

std::vector<std::size_t> by_wealth(const std::vector<double>& wealth) {
    std::vector<std::size_t> order(wealth.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return wealth[a] > wealth[b]; });
    return order;
}

}  // namespace

double update_kappa(SchemeKind kind, const std::vector<double>& wealth, const std::vector<double>& kappas,
                    double previous, std::size_t top_k) {
    if (wealth.size() != kappas.size() || wealth.empty()) throw ConfigError("update_kappa: size mismatch");
    // Identical wealth carries no information (every expert is still holding).
    if (all_equal(wealth)) return previous;
    switch (kind) {
        case SchemeKind::half_best:
            return 0.5 * kappas[by_wealth(wealth).front()] + 0.5 * previous;
        case SchemeKind::top5:
        case SchemeKind::top3:
        case SchemeKind::top1: {
            std::size_t k = kind == SchemeKind::top5 ? 5 : kind == SchemeKind::top3 ? 3 : 1;
            if (top_k > 0) k = top_k;
            return topk_step(wealth, kappas, std::min(k, wealth.size()));
        }
        default:
            throw ConfigError("scheme '" + to_string(kind) + "' does not update kappa");
    }
}

Weights combine_portfolios(SchemeKind kind, const std::vector<Weights>& portfolios, const std::vector<double>& wealth) {
    if (portfolios.empty() || portfolios.size() != wealth.size()) throw ConfigError("combine_portfolios: size mismatch");
    const std::vector<std::size_t> order = by_wealth(wealth);
    auto average = [&](std::size_t count, bool weighted) {
        Weights sum = Weights::Zero(portfolios.front().size());
        double total = 0.0;
        for (std::size_t i = 0; i < count; ++i) {
            const std::size_t l = order[i];
            const double weight = weighted ? wealth[l] : 1.0;
            sum += weight * portfolios[l];
            total += weight;
        }
        return Weights(sum / total);
    };
    const std::size_t top = std::min<std::size_t>(5, portfolios.size());
    switch (kind) {
        case SchemeKind::best: return portfolios[order.front()];
        case SchemeKind::top5_mean: return average(top, false);
        case SchemeKind::top5_weighted: return average(top, true);
        case SchemeKind::all_mean: {
            Weights sum = Weights::Zero(portfolios.front().size());
            for (const auto& b : portfolios) sum += b;
            return sum / static_cast<double>(portfolios.size());
        }
        default:
            throw ConfigError("scheme '" + to_string(kind) + "' does not combine portfolios");
    }
}

// ---------------------------------------------------------------------------

ExpertPool::ExpertPool(std::vector<StrategyPtr> experts, CostSpec cost, bool parallel)
    : experts_(std::move(experts)), cost_(cost), parallel_(parallel) {
    if (experts_.empty()) throw ConfigError("expert pool is empty");
    cost_.validate();
    reset();
}

ExpertPool::ExpertPool(const ExpertPool& other)
    : states_(other.states_),
      pending_(other.pending_),
      wealth_(other.wealth_),
      cost_(other.cost_),
      parallel_(other.parallel_),
      observed_(other.observed_) {
    experts_.reserve(other.experts_.size());
    for (const auto& e : other.experts_) experts_.push_back(e->clone());
}

ExpertPool& ExpertPool::operator=(const ExpertPool& other) {
    if (this != &other) *this = ExpertPool(other);
    return *this;
}

template <typename F>
void ExpertPool::for_each_expert(F&& f) {
    const std::size_t n = experts_.size();
    if (parallel_ && n > 1) {
        tbb::parallel_for(std::size_t{0}, n, [&](std::size_t i) { f(i); });
    } else {
        for (std::size_t i = 0; i < n; ++i) f(i);
    }
}

void ExpertPool::reset() {
    for (auto& e : experts_) e->reset();
    states_.clear();
    pending_.assign(experts_.size(), Weights());
    wealth_.assign(experts_.size(), {});
    observed_ = 0;
}

void ExpertPool::ensure_states(std::size_t assets) {
    if (states_.empty()) states_.assign(experts_.size(), BacktestState(assets));
}

void ExpertPool::advance(const HistoryView& history) {
    if (history.empty()) return;
    ensure_states(history.assets());
    if (history.periods() != observed_ + 1) {
        throw ContractError("expert pool advanced out of order: expected period " + std::to_string(observed_ + 1) +
                            ", got " + std::to_string(history.periods()));
    }
    const Eigen::VectorXd x = history.latest();
    for_each_expert([&](std::size_t i) {
        states_[i].step(pending_[i], x, cost_);
        wealth_[i].push_back(states_[i].wealth());
    });
    ++observed_;
}

void ExpertPool::decide(const HistoryView& history) {
    ensure_states(history.assets());
    for_each_expert([&](std::size_t i) { pending_[i] = experts_[i]->next_portfolio(history, states_[i].b_hat()); });
}

std::vector<double> ExpertPool::current_wealth() const {
    std::vector<double> out(experts_.size(), 1.0);
    for (std::size_t i = 0; i < experts_.size(); ++i) {
        if (!wealth_[i].empty()) out[i] = wealth_[i].back();
    }
    return out;
}

// ---------------------------------------------------------------------------

SchemeKind parse_scheme(const std::string& name, bool lambda_axis) {
    if (lambda_axis) {
        if (name == "i") return SchemeKind::sb;
        if (name == "ii") return SchemeKind::sb_delta;
        if (name == "iii") return SchemeKind::best;
        if (name == "iv") return SchemeKind::top5_mean;
        if (name == "v") return SchemeKind::top5_weighted;
        if (name == "vi") return SchemeKind::all_mean;
    } else if (name.size() == 1 && name[0] >= 'a' && name[0] <= 'j') {
        return static_cast<SchemeKind>(name[0] - 'a');
    }
    for (int k = 0; k <= static_cast<int>(SchemeKind::all_mean); ++k) {
        if (name == to_string(static_cast<SchemeKind>(k))) return static_cast<SchemeKind>(k);
    }
    throw ConfigError("unknown scheme '" + name + "'");
}

std::string to_string(SchemeKind kind) {
    switch (kind) {
        case SchemeKind::top5: return "top5";
        case SchemeKind::top3: return "top3";
        case SchemeKind::top1: return "top1";
        case SchemeKind::half_best: return "half_best";
        case SchemeKind::sb: return "sb";
        case SchemeKind::sb_delta: return "sb_delta";
        case SchemeKind::best: return "best";
        case SchemeKind::top5_mean: return "top5_mean";
        case SchemeKind::top5_weighted: return "top5_weighted";
        case SchemeKind::all_mean: return "all_mean";
    }
    return "unknown";
}

bool updates_parameter(SchemeKind kind) {
    return kind == SchemeKind::top5 || kind == SchemeKind::top3 || kind == SchemeKind::top1 ||
           kind == SchemeKind::half_best;
}

SchemeStrategy::SchemeStrategy(Options options, ExpertPool pool) : options_(std::move(options)), pool_(std::move(pool)) {
    if (options_.tags.size() != pool_.size()) throw ConfigError("scheme needs one tag per expert");
    for (double tag : options_.tags) {
        if (!(tag > 0.0) && updates_parameter(options_.kind)) throw ConfigError("parameter schemes need positive tags");
    }
    if (updates_parameter(options_.kind)) {
        if (options_.axis != PoolAxis::kappa) throw ConfigError("parameter-update schemes apply to kappa pools only");
        if (!options_.base) throw ConfigError("parameter-update schemes need base RELP parameters");
        options_.base->validate();
        initial_param_ = geometric_mean(options_.tags);
    }
    sb_ = options_.sb;
    if (options_.kind == SchemeKind::sb) sb_.delta = 0.0;
    if (options_.kind == SchemeKind::sb_delta) sb_.delta = 0.2;
    sb_.validate();
    reset();
}

void SchemeStrategy::reset() {
    pool_.reset();
    tracked_ = 0;
    param_ = initial_param_;
    trace_.clear();
}

std::vector<std::size_t> SchemeStrategy::ranked() const { return by_wealth(pool_.current_wealth()); }

void SchemeStrategy::update_scheme(const HistoryView& history) {
    if (history.empty()) return;
    switch (options_.kind) {
        case SchemeKind::sb:
        case SchemeKind::sb_delta:
            tracked_ = sb_step(pool_.wealth(), tracked_, sb_);
            break;
        case SchemeKind::best:
            tracked_ = ranked().front();
            break;
        case SchemeKind::top5:
        case SchemeKind::top3:
        case SchemeKind::top1:
        case SchemeKind::half_best:
            param_ = update_kappa(options_.kind, pool_.current_wealth(), options_.tags, param_, options_.top_k);
            break;
        default:
            break;
    }
}

Weights SchemeStrategy::combine(const HistoryView& history, const Weights& b_hat) {
    switch (options_.kind) {
        case SchemeKind::sb:
        case SchemeKind::sb_delta:
            return pool_.portfolio(tracked_);
        case SchemeKind::top5:
        case SchemeKind::top3:
        case SchemeKind::top1:
        case SchemeKind::half_best: {
            RelpParams params = *options_.base;
            params.kappa = param_;
            return relp_portfolio(history, b_hat, params);
        }
        default: {
            std::vector<Weights> portfolios;
            portfolios.reserve(pool_.size());
            for (std::size_t l = 0; l < pool_.size(); ++l) portfolios.push_back(pool_.portfolio(l));
            return combine_portfolios(options_.kind, portfolios, pool_.current_wealth());
        }
    }
}

Weights SchemeStrategy::next_portfolio(const HistoryView& history, const Weights& b_hat) {
    const std::size_t before_tracked = tracked_;
    const double before_param = param_;
    pool_.advance(history);
    update_scheme(history);
    pool_.decide(history);
    Weights b = combine(history, b_hat);

    SchemeTraceRow row;
    row.t = history.periods() + 1;
    row.tracked = tracked_;
    row.lambda = current_lambda();
    row.kappa = current_kappa();
    row.switched = tracked_ != before_tracked || param_ != before_param;
    trace_.push_back(row);
    return b;
}

double SchemeStrategy::current_kappa() const {
    const bool tracking = options_.kind == SchemeKind::sb || options_.kind == SchemeKind::sb_delta ||
                          options_.kind == SchemeKind::best;
    if (updates_parameter(options_.kind)) return param_;
    if (!tracking) return kNaN;
    if (options_.axis == PoolAxis::kappa) return options_.tags[tracked_];
    return strategy_kappa(pool_.expert(tracked_));
}

double SchemeStrategy::current_lambda() const {
    if (options_.axis == PoolAxis::kappa) return options_.fixed_lambda;
    const bool tracking = options_.kind == SchemeKind::sb || options_.kind == SchemeKind::sb_delta ||
                          options_.kind == SchemeKind::best;
    return tracking ? options_.tags[tracked_] : kNaN;
}

double strategy_kappa(const Strategy& strategy) {
    if (const auto* fixed = dynamic_cast<const RelpFixed*>(&strategy)) return fixed->params().kappa;
    if (const auto* scheme = dynamic_cast<const SchemeStrategy*>(&strategy)) return scheme->current_kappa();
    return kNaN;
}

// ---------------------------------------------------------------------------

void AdaptiveConfig::validate() const {
    if (kappa_grid.empty() || lambda_multipliers.empty()) throw ConfigError("adaptive grids must be non-empty");
    for (double k : kappa_grid) {
        if (!(k > 0.0)) throw ConfigError("kappa grid values must be positive");
    }
    for (double l : lambda_multipliers) {
        if (!(l >= 0.0)) throw ConfigError("lambda multipliers must be nonnegative");
    }
    CostSpec{gamma}.validate();
    if (window < 1) throw ConfigError("predictor window must be at least 1");
    if (top_k < 1 || top_k > kappa_grid.size()) throw ConfigError("top-K must lie in [1, kappa grid size]");
    sb.validate();
}

namespace {

ExpertPool relp_pool(const std::vector<double>& kappas, const std::vector<double>& lambdas, const RelpParams& base,
                     bool parallel) {
    std::vector<StrategyPtr> experts;
    for (double lambda : lambdas) {
        for (double kappa : kappas) {
            RelpParams p = base;
            p.kappa = kappa;
            p.lambda = lambda;
            experts.push_back(std::make_unique<RelpFixed>(p));
        }
    }
    return ExpertPool(std::move(experts), CostSpec{base.gamma}, parallel);
}

}  // namespace

std::unique_ptr<SchemeStrategy> kappa_scheme(SchemeKind kind, const std::vector<double>& kappa_grid,
                                             const RelpParams& base, const SbConfig& sb, bool parallel) {
    base.validate();
    SchemeStrategy::Options opt;
    opt.kind = kind;
    opt.axis = PoolAxis::kappa;
    opt.tags = kappa_grid;
    opt.base = base;
    opt.fixed_lambda = base.lambda;
    opt.sb = sb;
    opt.name = "relp-kappa-" + to_string(kind);
    return std::make_unique<SchemeStrategy>(std::move(opt), relp_pool(kappa_grid, {base.lambda}, base, parallel));
}

std::unique_ptr<SchemeStrategy> lambda_scheme(SchemeKind kind, const std::vector<double>& lambda_grid,
                                              const RelpParams& base, const SbConfig& sb, bool parallel) {
    base.validate();
    SchemeStrategy::Options opt;
    opt.kind = kind;
    opt.axis = PoolAxis::lambda;
    opt.tags = lambda_grid;
    opt.sb = sb;
    opt.name = "relp-lambda-" + to_string(kind);
    return std::make_unique<SchemeStrategy>(std::move(opt), relp_pool({base.kappa}, lambda_grid, base, parallel));
}

std::unique_ptr<SchemeStrategy> relp_adap(AdaptiveVariant variant, const AdaptiveConfig& config) {
    config.validate();
    std::vector<double> lambdas;
    lambdas.reserve(config.lambda_multipliers.size());
    for (double mult : config.lambda_multipliers) lambdas.push_back(mult * config.gamma);

    std::vector<StrategyPtr> experts;
    for (double lambda : lambdas) {
        RelpParams base;
        base.lambda = lambda;
        base.gamma = config.gamma;
        base.window = config.window;
        SchemeStrategy::Options inner;
        inner.axis = PoolAxis::kappa;
        inner.tags = config.kappa_grid;
        inner.base = base;
        inner.fixed_lambda = lambda;
        inner.sb = config.sb;
        if (variant == AdaptiveVariant::adap1) {
            inner.kind = SchemeKind::sb;
            inner.name = "sb-kappa";
        } else {
            inner.kind = SchemeKind::top5;
            inner.top_k = config.top_k;
            inner.name = "topk-kappa";
        }
        experts.push_back(std::make_unique<SchemeStrategy>(
            std::move(inner), relp_pool(config.kappa_grid, {lambda}, base, config.parallel)));
    }
    SchemeStrategy::Options outer;
    outer.kind = SchemeKind::sb;
    outer.axis = PoolAxis::lambda;
    outer.tags = lambdas;
    outer.sb = config.sb;
    outer.name = variant == AdaptiveVariant::adap1 ? "relp-adap-1" : "relp-adap-2";
    return std::make_unique<SchemeStrategy>(std::move(outer),
                                            ExpertPool(std::move(experts), CostSpec{config.gamma}, config.parallel));
}

std::string format_scheme_trace(const std::vector<SchemeTraceRow>& trace) {
    std::ostringstream os;
    os << "t,tracked_lambda,current_kappa,switch_flag\n";
    for (const auto& row : trace) {
        os << row.t << ',' << format_or_na(row.lambda) << ',' << format_or_na(row.kappa) << ','
           << (row.switched ? 1 : 0) << '\n';
    }
    return os.str();
}

void write_scheme_trace(const std::vector<SchemeTraceRow>& trace, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << format_scheme_trace(trace);
}

}  // namespace relp
