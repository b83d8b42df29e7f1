#include "flexgrid/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "flexgrid/errors.hpp"
#include "flexgrid/textio.hpp"

namespace flexgrid {

GridSession::GridSession(const LevelLadder& ladder, const Allocation& alloc)
    : ladder_(ladder), alloc_(alloc) {
    const int cells = ladder_.cell_count();
    holding_.assign(static_cast<std::size_t>(cells), false);
    for (int i = ladder_.anchor_index; i < cells; ++i)
        holding_[static_cast<std::size_t>(i)] = true;

    const double p0 = ladder_.anchor_price();
    quantity_ = alloc_.unit_volume * static_cast<double>(ladder_.upper_cells());
    cash_ = alloc_.cash;
    last_price_ = p0;

    trades_.push_back({0, Side::buy, p0, quantity_,
                       quantity_ * p0 * alloc_.fee_rate, cash_});
    record_equity(p0);
}

int GridSession::holding_cells() const {
    return static_cast<int>(std::count(holding_.begin(), holding_.end(), true));
}

void GridSession::record_equity(double price) {
    const double spot = quantity_ * price;
    equity_.push_back({price, cash_, spot, cash_ + spot});
}

int GridSession::step(double price) {
    if (settled_) throw std::logic_error("step after settlement");
    if (!(price > 0)) throw std::invalid_argument("step: price must be > 0");
    ++period_;
    int fills = 0;
    const auto& lines = ladder_.lines;
    const double fee = alloc_.fee_rate;
    const double uv = alloc_.unit_volume;

    if (price > last_price_) {
        // line index li rising through (last, price] fills the sell of cell
        // li-1; the bottom line has no cell beneath it
        auto it = std::upper_bound(lines.begin(), lines.end(), last_price_);
        for (; it != lines.end() && *it <= price; ++it) {
            const auto li = static_cast<std::size_t>(it - lines.begin());
            if (li == 0) continue;
            const std::size_t cell = li - 1;
            if (!holding_[cell]) continue;
            holding_[cell] = false;
            quantity_ -= uv;
            const double notional = uv * *it;
            cash_ += notional * (1.0 - fee);
            trades_.push_back({period_, Side::sell, *it, uv, notional * fee, cash_});
            ++fills;
        }
    } else if (price < last_price_) {
        // line index li falling through [price, last) fills the buy of cell
        // li; the top line has no cell above it
        auto it = std::lower_bound(lines.begin(), lines.end(), last_price_);
        while (it != lines.begin()) {
            --it;
            if (*it < price) break;
            const auto li = static_cast<std::size_t>(it - lines.begin());
            if (li + 1 == lines.size()) continue;
            const std::size_t cell = li;
            if (holding_[cell]) continue;
            holding_[cell] = true;
            quantity_ += uv;
            const double notional = uv * *it;
            cash_ -= notional * (1.0 + fee);
            trades_.push_back({period_, Side::buy, *it, uv, notional * fee, cash_});
            ++fills;
        }
    }

    last_price_ = price;
    record_equity(price);
    return fills;
}

void GridSession::settle() {
    if (settled_) throw std::logic_error("settle called twice");
    if (quantity_ > 0) {
        const double notional = quantity_ * last_price_;
        cash_ += notional * (1.0 - alloc_.fee_rate);
        trades_.push_back({period_, Side::sell, last_price_, quantity_,
                           notional * alloc_.fee_rate, cash_});
        quantity_ = 0.0;
        holding_.assign(holding_.size(), false);
    }
    settled_ = true;
    // the session ends by liquidation, so the final period's equity is the
    // settled value
    equity_.back() = {last_price_, cash_, 0.0, cash_};
}

double GridSession::settled_wealth() const {
    if (!settled_) throw std::logic_error("settled_wealth before settle");
    return cash_;
}

std::vector<double> BacktestReport::wealth_curve() const {
    std::vector<double> w;
    w.reserve(equity.size());
    for (const auto& s : equity) w.push_back(s.wealth);
    return w;
}

BacktestReport run_backtest(const PriceSeries& series, const GridSpec& spec,
                            double capital, double fee_rate) {
    if (series.size() < 2)
        throw std::invalid_argument("backtest: need at least two prices, got " +
                                    std::to_string(series.size()));
    const double first = series.first_price();
    if (std::abs(spec.anchor - first) > 1e-9 * first)
        throw InfeasibleError("backtest: grid anchor " + fmt_double(spec.anchor) +
                              " must equal the first close " + fmt_double(first));

    const LevelLadder ladder = build_ladder(spec);
    const Allocation alloc = initial_allocation(ladder, capital, fee_rate);
    GridSession session(ladder, alloc);
    for (std::size_t t = 1; t < series.size(); ++t)
        session.step(series.points[t].price);
    const double pre_settle_qty = session.quantity();
    session.settle();

    BacktestReport r;
    r.strategy = std::string(grid_kind_name(spec.kind));
    r.capital = capital;
    r.fee_rate = fee_rate;
    r.final_wealth = session.settled_wealth();
    r.trades = session.trades();
    r.trade_count = static_cast<int>(r.trades.size());
    r.equity = session.equity();
    r.metrics = compute_metrics(capital, r.wealth_curve());
    const double last = series.last_price();
    r.settlement = {last, pre_settle_qty, pre_settle_qty * last * (1.0 - fee_rate),
                    pre_settle_qty * last * fee_rate};
    r.ladder = ladder;
    r.unit_volume = alloc.unit_volume;
    return r;
}

BacktestReport run_baseline(const PriceSeries& series, BaselineKind kind,
                            double capital, double fee_rate) {
    if (series.size() < 2)
        throw std::invalid_argument("baseline: need at least two prices");
    if (!(capital > 0)) throw std::invalid_argument("baseline: capital must be > 0");
    if (fee_rate < 0 || fee_rate >= 1)
        throw std::invalid_argument("baseline: fee rate must be in [0, 1)");

    const double p0 = series.first_price();
    const double p_last = series.last_price();
    const int last_period = static_cast<int>(series.size()) - 1;

    BacktestReport r;
    r.capital = capital;
    r.fee_rate = fee_rate;
    r.equity.reserve(series.size());

    if (kind == BaselineKind::buy_hold) {
        r.strategy = "buy-and-hold";
        const double entry_cost = p0 * (1.0 + fee_rate);
        const double units = capital / entry_cost;
        const double cash0 = capital - units * entry_cost; // rounding dust only
        r.trades.push_back({0, Side::buy, p0, units, units * p0 * fee_rate, cash0});
        for (const auto& p : series.points)
            r.equity.push_back({p.price, cash0, units * p.price,
                                cash0 + units * p.price});
        const double proceeds = units * p_last * (1.0 - fee_rate);
        r.final_wealth = cash0 + proceeds;
        r.trades.push_back({last_period, Side::sell, p_last, units,
                            units * p_last * fee_rate, r.final_wealth});
        r.settlement = {p_last, units, proceeds, units * p_last * fee_rate};
    } else {
        r.strategy = "short-and-buy";
        const double units = capital / p0; // full-notional short
        const double cash = capital + units * p0 * (1.0 - fee_rate);
        r.trades.push_back({0, Side::sell, p0, units, units * p0 * fee_rate, cash});
        for (const auto& p : series.points)
            r.equity.push_back({p.price, cash, -units * p.price,
                                cash - units * p.price});
        const double cost = units * p_last * (1.0 + fee_rate);
        r.final_wealth = cash - cost;
        r.trades.push_back({last_period, Side::buy, p_last, units,
                            units * p_last * fee_rate, r.final_wealth});
        r.settlement = {p_last, units, -cost, units * p_last * fee_rate};
    }

    r.equity.back() = {p_last, r.final_wealth, 0.0, r.final_wealth};
    r.trade_count = static_cast<int>(r.trades.size());
    r.metrics = compute_metrics(capital, r.wealth_curve());
    return r;
}

} // namespace flexgrid
