#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "flexgrid/backtest.hpp"
#include "flexgrid/errors.hpp"
#include "flexgrid/rng.hpp"

using namespace flexgrid;

namespace {

PriceSeries series_of(std::vector<double> prices) {
    PriceSeries s;
    s.id = "test";
    for (std::size_t i = 0; i < prices.size(); ++i)
        s.points.push_back({static_cast<std::int64_t>(i), prices[i], 0.0});
    return s;
}

GridSpec ladder_70_130() {
    GridSpec s;
    s.kind = GridKind::equal_distance;
    s.upper = 130;
    s.lower = 70;
    s.n_upper = 3;
    s.n_lower = 3;
    s.anchor = 100;
    return s;
}

} // namespace

TEST_CASE("session opens with the upper cells held") {
    const auto ladder = build_ladder(ladder_70_130());
    const auto alloc = initial_allocation(ladder, 10000.0, 0.0);
    GridSession session(ladder, alloc);

    CHECK(session.holding_cells() == 3);
    CHECK(session.quantity() == doctest::Approx(3.0 * 10000.0 / 540.0));
    CHECK(session.cash() == doctest::Approx(10000.0 * 240.0 / 540.0));
    REQUIRE(session.trades().size() == 1);
    CHECK(session.trades()[0].side == Side::buy);
    CHECK(session.trades()[0].line == 100.0);
    REQUIRE(session.equity().size() == 1);
    CHECK(session.equity()[0].wealth == doctest::Approx(10000.0));
}

TEST_CASE("rising and falling prices fill resting orders") {
    const auto ladder = build_ladder(ladder_70_130());
    const auto alloc = initial_allocation(ladder, 10000.0, 0.0);
    const double uv = alloc.unit_volume;
    GridSession session(ladder, alloc);

    // 100 -> 115 crosses only line 110: one sell
    CHECK(session.step(115.0) == 1);
    CHECK(session.holding_cells() == 2);
    CHECK(session.cash() == doctest::Approx(10000.0 * 240.0 / 540.0 + uv * 110.0));
    CHECK(session.cash() == doctest::Approx(6481.481481).epsilon(1e-8));

    // 115 -> 95 crosses 110 (cell above still holding, no buy) and 100 (rebuy)
    CHECK(session.step(95.0) == 1);
    CHECK(session.holding_cells() == 3);
    CHECK(session.trades().back().side == Side::buy);
    CHECK(session.trades().back().line == 100.0);

    // 95 -> 100 reaches line 100 from below; the cell under it never held
    CHECK(session.step(100.0) == 0);

    session.settle();
    // one completed 100 -> 110 -> 100 trip nets uv * 10
    CHECK(session.settled_wealth() == doctest::Approx(10000.0 + uv * 10.0));
    CHECK(session.settled_wealth() == doctest::Approx(10185.185185).epsilon(1e-8));
}

TEST_CASE("a jump across several lines fills them all in order") {
    const auto ladder = build_ladder(ladder_70_130());
    const auto alloc = initial_allocation(ladder, 10000.0, 0.0);
    GridSession session(ladder, alloc);

    CHECK(session.step(130.0) == 3); // sells at 110, 120, 130
    CHECK(session.holding_cells() == 0);
    CHECK(session.quantity() == doctest::Approx(0.0));
    const auto& t = session.trades();
    REQUIRE(t.size() == 4);
    CHECK(t[1].line == 110.0);
    CHECK(t[2].line == 120.0);
    CHECK(t[3].line == 130.0);

    CHECK(session.step(135.0) == 0); // above the ladder: nothing left to sell
    session.settle();
    CHECK(session.settled_wealth() == doctest::Approx(10000.0 * 600.0 / 540.0));
}

TEST_CASE("a collapse fills every lower buy and stops at the bottom") {
    const auto ladder = build_ladder(ladder_70_130());
    const auto alloc = initial_allocation(ladder, 10000.0, 0.0);
    GridSession session(ladder, alloc);

    CHECK(session.step(65.0) == 3); // buys at 90, 80, 70
    CHECK(session.holding_cells() == 6);
    CHECK(session.cash() == doctest::Approx(0.0).scale(10000.0));
    CHECK(session.step(60.0) == 0); // below the ladder: no more orders
}

TEST_CASE("fees hit both sides of every fill") {
    const auto ladder = build_ladder(ladder_70_130());
    const double h = 0.01;
    const auto alloc = initial_allocation(ladder, 10000.0, h);
    const double uv = alloc.unit_volume;
    GridSession session(ladder, alloc);

    session.step(110.0); // sell credits (1-h)
    CHECK(session.cash() == doctest::Approx(alloc.cash + uv * 110.0 * (1.0 - h)));
    session.step(100.0); // buy debits (1+h)
    CHECK(session.cash() == doctest::Approx(alloc.cash + uv * 110.0 * (1.0 - h) -
                                            uv * 100.0 * (1.0 + h)));
    session.settle();
    const double expected = alloc.cash + uv * 110.0 * (1.0 - h) -
                            uv * 100.0 * (1.0 + h) + 3.0 * uv * 100.0 * (1.0 - h);
    CHECK(session.settled_wealth() == doctest::Approx(expected));
}

TEST_CASE("session guards its lifecycle") {
    const auto ladder = build_ladder(ladder_70_130());
    const auto alloc = initial_allocation(ladder, 10000.0, 0.0);
    GridSession session(ladder, alloc);
    CHECK_THROWS_AS(session.step(0.0), std::invalid_argument);
    session.settle();
    CHECK_THROWS_AS(session.step(105.0), std::logic_error);
    CHECK_THROWS_AS(session.settle(), std::logic_error);
}

TEST_CASE("run_backtest composes the full flow") {
    const auto r = run_backtest(series_of({100, 115, 95, 100}), ladder_70_130(),
                                10000.0, 0.0);
    const double uv = 10000.0 / 540.0;
    CHECK(r.final_wealth == doctest::Approx(10000.0 + uv * 10.0));
    CHECK(r.metrics.roi_pct ==
          doctest::Approx((r.final_wealth - 10000.0) / 10000.0 * 100.0));
    CHECK(r.metrics.wealth == r.final_wealth);
    CHECK(r.equity.size() == 4);
    CHECK(r.trade_count == 4); // open, sell, buy, settle
    CHECK(r.unit_volume == doctest::Approx(uv));
    REQUIRE(r.ladder.has_value());
    CHECK(r.ladder->lines.size() == 7);
    CHECK(r.settlement.price == 100.0);
    CHECK(r.settlement.quantity == doctest::Approx(3.0 * uv));
    // wealth and roi agree the way the published tables pair them
    CHECK(r.final_wealth == doctest::Approx(10000.0 * (1.0 + r.metrics.roi_pct / 100.0)));
}

TEST_CASE("a flat series at zero fee conserves capital to the bit") {
    const auto r = run_backtest(series_of({100, 100, 100}), ladder_70_130(),
                                10000.0, 0.0);
    CHECK(r.final_wealth == 10000.0);
    CHECK(r.metrics.roi_pct == 0.0);
    CHECK(r.trade_count == 2); // opening buy and settlement only
    for (const auto& e : r.equity) CHECK(e.wealth == doctest::Approx(10000.0));
}

TEST_CASE("returning to the entry price restores the opening book") {
    Rng rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        const auto ladder = build_ladder(ladder_70_130());
        const auto alloc = initial_allocation(ladder, 10000.0, 0.0);
        GridSession session(ladder, alloc);
        double p = 100.0;
        for (int i = 0; i < 40; ++i) {
            p = std::clamp(p * (1.0 + rng.uniform(-0.08, 0.08)), 60.0, 140.0);
            session.step(p);
        }
        session.step(100.0);
        CHECK(session.holding_cells() == 3);
        CHECK(session.quantity() == doctest::Approx(3.0 * alloc.unit_volume));
        session.settle();
        // every completed round trip added profit; none can lose at zero fee
        CHECK(session.settled_wealth() >= 10000.0 - 1e-6);
    }
}

TEST_CASE("run_backtest validates series and anchor") {
    CHECK_THROWS_AS(run_backtest(series_of({100}), ladder_70_130(), 10000.0, 0.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(run_backtest(series_of({101, 102}), ladder_70_130(), 10000.0, 0.0),
                    InfeasibleError);
}

TEST_CASE("buy-and-hold and its mirror") {
    SUBCASE("zero fee: exact opposite returns") {
        const auto up = series_of({100, 110});
        const auto bh = run_baseline(up, BaselineKind::buy_hold, 10000.0, 0.0);
        const auto sb = run_baseline(up, BaselineKind::short_buy, 10000.0, 0.0);
        CHECK(bh.final_wealth == doctest::Approx(11000.0));
        CHECK(bh.metrics.roi_pct == doctest::Approx(10.0));
        CHECK(sb.final_wealth == doctest::Approx(9000.0));
        CHECK(sb.metrics.roi_pct == doctest::Approx(-bh.metrics.roi_pct));
        CHECK(bh.trade_count == 2);
        CHECK(sb.trade_count == 2);
        CHECK(bh.equity.size() == up.size());
    }

    SUBCASE("fees on entry and exit") {
        const auto up = series_of({100, 110});
        const auto bh = run_baseline(up, BaselineKind::buy_hold, 10000.0, 0.01);
        const double units = 10000.0 / (100.0 * 1.01);
        CHECK(bh.final_wealth == doctest::Approx(units * 110.0 * 0.99));
    }

    SUBCASE("flat series at zero fee returns exactly the capital") {
        const auto flat = series_of({100, 100, 100});
        const auto bh = run_baseline(flat, BaselineKind::buy_hold, 10000.0, 0.0);
        const auto sb = run_baseline(flat, BaselineKind::short_buy, 10000.0, 0.0);
        CHECK(bh.final_wealth == doctest::Approx(10000.0));
        CHECK(sb.final_wealth == doctest::Approx(10000.0));
        CHECK(bh.metrics.roi_pct == doctest::Approx(0.0));
        CHECK(sb.metrics.roi_pct == doctest::Approx(0.0));
    }

    SUBCASE("validation") {
        CHECK_THROWS_AS(run_baseline(series_of({100}), BaselineKind::buy_hold, 1.0, 0.0),
                        std::invalid_argument);
        CHECK_THROWS_AS(
            run_baseline(series_of({100, 101}), BaselineKind::buy_hold, 0.0, 0.0),
            std::invalid_argument);
        CHECK_THROWS_AS(
            run_baseline(series_of({100, 101}), BaselineKind::buy_hold, 1.0, 1.0),
            std::invalid_argument);
    }
}
