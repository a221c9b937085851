#pragma once

#include "relp/relp_strategy.hpp"
#include "relp/strategy.hpp"

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace relp {

/// Geometric sequence of `count` values from lo to hi, both endpoints included.
std::vector<double> log_space(double lo, double hi, std::size_t count);

/// Selection-of-the-best tracking rule.
struct SbConfig {
    std::size_t window = 5;  // number of recent wealth values compared
    double delta = 0.0;      // indifference zone
    double z = 1.96;         // bandwidth multiplier on the tracked expert's std

    /// Throws ConfigError unless window >= 2, delta >= 0 and z >= 0.
    void validate() const;
};

/// One tracking update. `wealth[l]` holds S^l_1..S^l_t for expert l. When every
/// series has at least `window` values, the tracked expert's last-window mean
/// and sample std are compared against every other expert's last-window mean;
/// a challenger whose mean exceeds mean + max(delta, z * std) takes over (the
/// largest such mean wins, then the lowest index). Otherwise `tracked` is kept.
std::size_t sb_step(const std::vector<std::vector<double>>& wealth, std::size_t tracked, const SbConfig& config);

/// Geometric mean of the parameters of the k experts with the largest current
/// wealth (ties favour the lower index).
double topk_step(const std::vector<double>& wealth, const std::vector<double>& params, std::size_t k);

/// Strategies run side by side on the same data, each with its own holdings and wealth.
class ExpertPool {
public:
    /// Holdings are sized from the first history the pool sees.
    ExpertPool(std::vector<StrategyPtr> experts, CostSpec cost, bool parallel = true);
    ExpertPool(const ExpertPool& other);
    ExpertPool& operator=(const ExpertPool& other);
    ExpertPool(ExpertPool&&) noexcept = default;
    ExpertPool& operator=(ExpertPool&&) noexcept = default;

    std::size_t size() const { return experts_.size(); }
    std::size_t observed() const { return observed_; }

    /// Steps every expert through the newest period of `history` using the
    /// portfolios chosen by the previous decide(). No-op for an empty history.
    void advance(const HistoryView& history);

    /// Asks every expert for its portfolio for period history.periods() + 1.
    void decide(const HistoryView& history);

    void reset();

    const Strategy& expert(std::size_t i) const { return *experts_[i]; }
    const Weights& portfolio(std::size_t i) const { return pending_[i]; }
    const BacktestState& state(std::size_t i) const { return states_[i]; }
    /// S^l_1..S^l_t for every expert.
    const std::vector<std::vector<double>>& wealth() const { return wealth_; }
    std::vector<double> current_wealth() const;

private:
    template <typename F>
    void for_each_expert(F&& f);
    void ensure_states(std::size_t assets);

    std::vector<StrategyPtr> experts_;
    std::vector<BacktestState> states_;
    std::vector<Weights> pending_;
    std::vector<std::vector<double>> wealth_;
    CostSpec cost_;
    bool parallel_;
    std::size_t observed_ = 0;
};

/// How a pool's experts are combined.
///
///   top5/top3/top1   kappa <- geometric mean of the top-K experts' kappa
///   half_best        kappa <- (kappa of the best expert + previous kappa) / 2
///   sb / sb_delta    follow the tracked expert (indifference zone 0 / 0.2)
///   best             portfolio of the wealthiest expert
///   top5_mean        plain average of the five wealthiest experts' portfolios
///   top5_weighted    average weighted by wealth over the top five
///   all_mean         plain average over every expert
///
/// The first four update a parameter and solve once more with it, so they only
/// apply to pools over kappa.
enum class SchemeKind { top5, top3, top1, half_best, sb, sb_delta, best, top5_mean, top5_weighted, all_mean };

/// Accepts the letters a..j (kappa schemes), the roman numerals i..vi (lambda
/// schemes, mapped to sb, sb_delta, best, top5_mean, top5_weighted, all_mean)
/// and the enum names. Throws ConfigError otherwise.
SchemeKind parse_scheme(const std::string& name, bool lambda_axis = false);
std::string to_string(SchemeKind kind);
bool updates_parameter(SchemeKind kind);

/// New kappa under a parameter-update scheme (top5/top3/top1/half_best) given
/// the experts' current wealth; `previous` is kept while every wealth is equal.
/// A nonzero top_k replaces the K implied by the scheme.
double update_kappa(SchemeKind kind, const std::vector<double>& wealth, const std::vector<double>& kappas,
                    double previous, std::size_t top_k = 0);

/// Portfolio of a combining scheme (best, top5_mean, top5_weighted, all_mean).
/// Ranking by wealth breaks ties toward the lower index.
Weights combine_portfolios(SchemeKind kind, const std::vector<Weights>& portfolios, const std::vector<double>& wealth);

enum class PoolAxis { kappa, lambda };

struct SchemeTraceRow {
    std::size_t t = 0;
    std::size_t tracked = 0;
    double lambda = 0.0;  // NaN when not defined for the scheme
    double kappa = 0.0;   // NaN when not defined for the scheme
    bool switched = false;
};

/// A strategy that combines a pool of experts according to a scheme.
class SchemeStrategy final : public Strategy {
public:
    struct Options {
        SchemeKind kind = SchemeKind::sb;
        PoolAxis axis = PoolAxis::kappa;
        std::vector<double> tags;           // each expert's kappa (or lambda)
        std::optional<RelpParams> base;     // kappa axis: lambda, gamma, window of the extra solve
        double fixed_lambda = 0.0;          // kappa axis: reported lambda
        SbConfig sb;                        // delta is overridden by sb (0) and sb_delta (0.2)
        std::size_t top_k = 0;              // when nonzero, replaces the K of top5/top3/top1
        std::string name = "scheme";
    };

    SchemeStrategy(Options options, ExpertPool pool);

    std::string name() const override { return options_.name; }
    Weights next_portfolio(const HistoryView& history, const Weights& b_hat) override;
    void reset() override;
    StrategyPtr clone() const override { return std::make_unique<SchemeStrategy>(*this); }

    const ExpertPool& pool() const { return pool_; }
    const Options& options() const { return options_; }
    std::size_t tracked() const { return tracked_; }
    double current_kappa() const;
    double current_lambda() const;
    const std::vector<SchemeTraceRow>& trace() const { return trace_; }

private:
    void update_scheme(const HistoryView& history);
    Weights combine(const HistoryView& history, const Weights& b_hat);
    std::vector<std::size_t> ranked() const;

    Options options_;
    ExpertPool pool_;
    SbConfig sb_;
    std::size_t tracked_ = 0;
    double param_ = 0.0;
    double initial_param_ = 0.0;
    std::vector<SchemeTraceRow> trace_;
};

/// The kappa used by a strategy in its latest decision, or NaN when it has none.
double strategy_kappa(const Strategy& strategy);

enum class AdaptiveVariant { adap1, adap2 };

struct AdaptiveConfig {
    std::vector<double> kappa_grid = log_space(0.1, 10.0, 31);
    std::vector<double> lambda_multipliers = log_space(1.0, 100.0, 31);  // lambda = multiplier * gamma
    double gamma = 0.0;
    std::size_t window = 5;
    SbConfig sb;
    std::size_t top_k = 5;
    bool parallel = true;

    void validate() const;
};

/// Selection-of-the-best over lambda experts. Under adap1 each lambda expert
/// follows its own selection-of-the-best over kappa experts; under adap2 each
/// lambda expert sets kappa from the top-K kappa experts and solves with it.
std::unique_ptr<SchemeStrategy> relp_adap(AdaptiveVariant variant, const AdaptiveConfig& config);

/// Scheme over RELP experts that differ only in kappa (lambda fixed).
std::unique_ptr<SchemeStrategy> kappa_scheme(SchemeKind kind, const std::vector<double>& kappa_grid,
                                             const RelpParams& base, const SbConfig& sb = {}, bool parallel = true);

/// Scheme over RELP experts that differ only in lambda (kappa fixed).
std::unique_ptr<SchemeStrategy> lambda_scheme(SchemeKind kind, const std::vector<double>& lambda_grid,
                                              const RelpParams& base, const SbConfig& sb = {}, bool parallel = true);

/// Trace as CSV: t, tracked_lambda, current_kappa, switch_flag.
std::string format_scheme_trace(const std::vector<SchemeTraceRow>& trace);
void write_scheme_trace(const std::vector<SchemeTraceRow>& trace, const std::filesystem::path& path);

}  // namespace relp
