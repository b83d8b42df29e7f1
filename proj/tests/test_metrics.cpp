#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "flexgrid/metrics.hpp"
#include "flexgrid/rng.hpp"

using namespace flexgrid;

TEST_CASE("roi in percent of capital") {
    CHECK(roi(10000.0, 13169.2) == doctest::Approx(31.692));
    CHECK(roi(10000.0, 8705.0) == doctest::Approx(-12.95));
    CHECK(roi(10000.0, 10000.0) == 0.0);
}

TEST_CASE("max drawdown finds the worst peak-to-trough") {
    const std::vector<double> a = {100, 120, 90, 130};
    CHECK(max_drawdown(a) == doctest::Approx(25.0)); // 120 -> 90
    const std::vector<double> b = {100, 50};
    CHECK(max_drawdown(b) == doctest::Approx(50.0));
    const std::vector<double> up = {1, 2, 3};
    CHECK(max_drawdown(up) == 0.0);
    const std::vector<double> one = {100};
    CHECK(max_drawdown(one) == 0.0);
}

TEST_CASE("max drawdown equals the quadratic brute force") {
    Rng rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> curve;
        double w = 100.0;
        for (int i = 0; i < 60; ++i) {
            w *= 1.0 + rng.uniform(-0.05, 0.05);
            curve.push_back(w);
        }
        double worst = 0.0;
        for (std::size_t i = 0; i < curve.size(); ++i)
            for (std::size_t j = i + 1; j < curve.size(); ++j)
                worst = std::max(worst, (curve[i] - curve[j]) / curve[i] * 100.0);
        CHECK(max_drawdown(curve) == doctest::Approx(worst).epsilon(1e-12));
    }
}

TEST_CASE("volatility is the population sigma of simple returns") {
    const std::vector<double> e = {100, 110, 99};
    // returns +10% then -10%: mean 0, sigma 0.10
    CHECK(volatility(e) == doctest::Approx(0.10));
    const std::vector<double> flat = {100, 100, 100};
    CHECK(volatility(flat) == 0.0);
    const std::vector<double> single = {100};
    CHECK_THROWS_AS(volatility(single), std::invalid_argument);
}

TEST_CASE("sharpe is undefined exactly when returns never vary") {
    const std::vector<double> e = {100, 110, 99};
    REQUIRE(sharpe(e).has_value());
    CHECK(*sharpe(e) == doctest::Approx(0.0));

    const std::vector<double> flat = {100, 100};
    CHECK_FALSE(sharpe(flat).has_value());
    const std::vector<double> single = {100};
    CHECK_FALSE(sharpe(single).has_value());

    const std::vector<double> steady = {100, 110, 121};
    CHECK_FALSE(sharpe(steady).has_value()); // constant +10% has zero sigma

    const std::vector<double> up = {100, 105, 115};
    REQUIRE(sharpe(up).has_value());
    CHECK(*sharpe(up) > 0.0);
}

TEST_CASE("mse averages squared errors") {
    const std::vector<double> a = {1, 2}, p = {2, 4};
    CHECK(mse(a, p) == doctest::Approx(2.5));
    CHECK(mse(a, a) == 0.0);
    CHECK_THROWS_AS(mse(a, std::vector<double>{1}), std::invalid_argument);
    const std::vector<double> empty;
    CHECK_THROWS_AS(mse(empty, empty), std::invalid_argument);
}

TEST_CASE("r_squared against the mean baseline") {
    const std::vector<double> a = {1, 2, 3}, p = {1, 2, 4};
    CHECK(r_squared(a, p) == doctest::Approx(0.5));
    CHECK(r_squared(a, a) == 1.0);
    // predicting the mean everywhere scores zero
    const std::vector<double> mean_pred = {2, 2, 2};
    CHECK(r_squared(a, mean_pred) == doctest::Approx(0.0));
    const std::vector<double> flat = {5, 5, 5};
    CHECK_THROWS_AS(r_squared(flat, p), std::invalid_argument);
}

TEST_CASE("compute_metrics fills a consistent block") {
    const std::vector<double> curve = {10000, 10100, 9900, 10200};
    const auto m = compute_metrics(10000.0, curve);
    CHECK(m.wealth == 10200.0);
    CHECK(m.roi_pct == doctest::Approx(2.0));
    CHECK(m.mdd_pct == doctest::Approx((10100.0 - 9900.0) / 10100.0 * 100.0));
    CHECK(m.volatility > 0.0);
    CHECK(m.sharpe.has_value());
    // wealth and roi stay consistent: wealth == capital * (1 + roi/100)
    CHECK(m.wealth == doctest::Approx(10000.0 * (1.0 + m.roi_pct / 100.0)));
}
