#pragma once

#include <optional>
#include <string>
#include <vector>

#include "flexgrid/grid_model.hpp"
#include "flexgrid/market_data.hpp"
#include "flexgrid/metrics.hpp"

namespace flexgrid {

enum class Side { buy, sell };

struct TradeEvent {
    int period = 0;       // index into the driving price series
    Side side = Side::buy;
    double line = 0.0;    // execution price: a ladder line, or the anchor /
                          // settlement price for the opening and closing fills
    double quantity = 0.0;
    double fee = 0.0;
    double cash_after = 0.0;
};

struct EquitySample {
    double price = 0.0;
    double cash = 0.0;
    double spot = 0.0;   // market value of held units at this period's price
    double wealth = 0.0; // cash + spot
};

// One trading session on a fixed ladder. Construction performs the opening
// purchase: the cells above the anchor start holding `unit_volume` units each
// (bought at the anchor price, fee charged), the cells below start empty.
// Each holding cell has a sell resting at its upper line, each empty cell a
// buy resting at its lower line. step() processes one closing price: a rise
// fills the sells whose line lies in (previous, price], bottom up; a fall
// fills the buys whose line lies in [price, previous), top down. Fills credit
// quantity*line*(1-fee) and debit quantity*line*(1+fee). settle() liquidates
// the remaining units at the last seen price and finalizes the last equity
// sample with the settled value.
class GridSession {
public:
    GridSession(const LevelLadder& ladder, const Allocation& alloc);

    // returns the number of fills triggered by this price
    int step(double price);
    void settle();

    double cash() const { return cash_; }
    double quantity() const { return quantity_; }
    int holding_cells() const;
    bool settled() const { return settled_; }
    double settled_wealth() const;

    const LevelLadder& ladder() const { return ladder_; }
    const Allocation& allocation() const { return alloc_; }
    const std::vector<TradeEvent>& trades() const { return trades_; }
    const std::vector<EquitySample>& equity() const { return equity_; }

private:
    void record_equity(double price);

    LevelLadder ladder_;
    Allocation alloc_;
    std::vector<bool> holding_; // per cell
    double cash_ = 0.0;
    double quantity_ = 0.0;
    double last_price_ = 0.0;
    int period_ = 0;
    bool settled_ = false;
    std::vector<TradeEvent> trades_;
    std::vector<EquitySample> equity_;
};

struct SettlementInfo {
    double price = 0.0;
    double quantity = 0.0;
    double proceeds = 0.0;
    double fee = 0.0;
};

struct BacktestReport {
    std::string strategy;
    double capital = 0.0;
    double fee_rate = 0.0;
    double final_wealth = 0.0;
    int trade_count = 0;
    MetricsBlock metrics;
    SettlementInfo settlement;
    std::optional<LevelLadder> ladder; // empty for the reference strategies
    double unit_volume = 0.0;          // 0 for the reference strategies
    std::vector<TradeEvent> trades;
    std::vector<EquitySample> equity;  // one sample per input period

    std::vector<double> wealth_curve() const;
};

// Runs a full session over the series. The spec's anchor must equal the first
// close (1e-9 relative); series of fewer than two points are rejected.
BacktestReport run_backtest(const PriceSeries& series, const GridSpec& spec,
                            double capital, double fee_rate);

// Reference strategies. buy_hold goes all-in at the first close and liquidates
// at the last; short_buy opens a full-notional short at the first close and
// covers at the last, so at zero fee its return is the exact negation of
// buy_hold's.
enum class BaselineKind { buy_hold, short_buy };

BacktestReport run_baseline(const PriceSeries& series, BaselineKind kind,
                            double capital, double fee_rate);

} // namespace flexgrid
