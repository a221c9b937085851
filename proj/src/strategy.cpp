#include "relp/strategy.hpp"

#include "relp/errors.hpp"

#include <fstream>
#include <sstream>

namespace relp {

HistoryView::HistoryView(const RelativesMatrix& source, std::size_t periods)
    : source_(&source), periods_(periods) {
    if (periods > source.periods()) throw IndexError("history longer than the relatives matrix");
}

Eigen::VectorXd HistoryView::period(std::size_t t) const {
    if (t < 1 || t > periods_) {
        throw IndexError("period " + std::to_string(t) + " is outside the observed history of " +
                         std::to_string(periods_));
    }
    return source_->period(t);
}

BacktestState::BacktestState(std::size_t assets) : b_hat_(Weights::Zero(static_cast<Eigen::Index>(assets))) {}

PeriodRecord BacktestState::step(const Weights& b, const Eigen::VectorXd& x, const CostSpec& cost) {
    if (b.size() != b_hat_.size() || !on_simplex(b)) {
        throw ContractError("strategy returned a portfolio off the simplex at period " + std::to_string(t_ + 1));
    }
    PeriodRecord rec;
    rec.t = ++t_;
    rec.b = b;
    rec.w = net_proportion(b_hat_, b, cost);
    rec.gross = b.dot(x);
    wealth_ *= rec.w * rec.gross;
    rec.wealth = wealth_;
    b_hat_ = b.cwiseProduct(x) / rec.gross;
    rec.b_hat = b_hat_;
    return rec;
}

BacktestResult run_backtest(const RelativesMatrix& relatives, Strategy& strategy, const CostSpec& cost) {
    cost.validate();
    strategy.reset();
    BacktestResult out;
    out.strategy = strategy.name();
    out.gamma = cost.gamma;
    const std::size_t n = relatives.periods();
    out.wealth.reserve(n);
    out.log.reserve(n);
    BacktestState state(relatives.assets());
    for (std::size_t t = 1; t <= n; ++t) {
        const HistoryView history(relatives, t - 1);
        const Weights b = strategy.next_portfolio(history, state.b_hat());
        out.log.push_back(state.step(b, relatives.period(t), cost));
        out.wealth.push_back(state.wealth());
    }
    return out;
}

std::string format_trade_log(const BacktestResult& result, const std::vector<std::string>& asset_names) {
    std::ostringstream os;
    os << "t,w,S";
    for (const auto& name : asset_names) os << ',' << name;
    os << '\n';
    for (const auto& rec : result.log) {
        os << rec.t << ',' << format_double(rec.w) << ',' << format_double(rec.wealth);
        for (Eigen::Index i = 0; i < rec.b.size(); ++i) os << ',' << format_double(rec.b(i));
        os << '\n';
    }
    return os.str();
}

void write_trade_log(const BacktestResult& result, const std::vector<std::string>& asset_names,
                     const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << format_trade_log(result, asset_names);
}

}  // namespace relp
