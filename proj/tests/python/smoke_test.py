"""Smoke checks for the python module: a few known values per area, not a
re-run of the C++ suites."""

import math
import os
import sys
import tempfile

import flexgrid as fg


def check_ladder():
    spec = fg.GridSpec("equal-distance", 130.0, 70.0, 3, 3, 100.0)
    ladder = fg.build_ladder(spec)
    assert ladder.spacing == 10.0
    assert ladder.cell_count() == 6
    assert ladder.anchor_price() == 100.0
    assert [round(v, 9) for v in ladder.lines] == [70, 80, 90, 100, 110, 120, 130]

    ratio = fg.build_ladder(fg.GridSpec("equal-ratio", 121.0, 100.0 / 1.21, 2, 2, 100.0))
    assert math.isclose(ratio.ratio, 1.1, rel_tol=1e-12)
    assert math.isclose(ratio.lines[3], 110.0, rel_tol=1e-9)

    try:
        fg.build_ladder(fg.GridSpec("equal-distance", 130.0, 70.0, 3, 3, 93.0))
    except fg.InfeasibleError:
        pass
    else:
        raise AssertionError("off-line anchor must be rejected")


def check_backtest():
    flat = fg.generate_synthetic("trend", 12, 100.0, 0.0, 0.0, seed=1)
    spec = fg.GridSpec("equal-distance", 130.0, 70.0, 3, 3, 100.0)
    report = fg.run_backtest(flat, spec, 10000.0, 0.0)
    assert report.final_wealth == 10000.0
    assert report.metrics.roi_pct == 0.0
    assert report.trade_count == 2

    series = fg.generate_synthetic("sinusoid", 80, 100.0, 0.002, 0.06, seed=3)
    first = series.prices()[0]
    spec = fg.anchored_spec("equal-distance", first * 1.3, first * 0.7, 3, 3, first)
    report = fg.run_backtest(series, spec, 10000.0, 0.001)
    assert math.isclose(
        report.final_wealth, 10000.0 * (1.0 + report.metrics.roi_pct / 100.0), rel_tol=1e-9
    )
    assert report.trade_count >= 2
    assert len(report.wealth_curve()) == len(series)

    bh = fg.run_baseline(series, "buy-and-hold", 10000.0, 0.0)
    sb = fg.run_baseline(series, "short-buy", 10000.0, 0.0)
    assert math.isclose(bh.metrics.roi_pct, -sb.metrics.roi_pct, abs_tol=1e-9)


def check_metrics():
    assert math.isclose(fg.roi(10000.0, 13169.2), 31.692, abs_tol=1e-9)
    assert fg.max_drawdown([100.0, 120.0, 90.0, 130.0]) == 25.0
    assert fg.sharpe([100.0, 100.0, 100.0]) is None
    assert math.isclose(fg.mse([1.0, 2.0], [2.0, 4.0]), 2.5, rel_tol=1e-15)


def check_optimizer():
    window = fg.generate_synthetic("mean-reverting", 40, 100.0, 0.02, 0.1, seed=9)
    cfg = fg.SsoConfig()
    cfg.runs = 1
    cfg.generations = 2
    cfg.population = 8
    cfg.seed = 5
    bounds = fg.profile_by_number(1)
    first = fg.optimize(window, "flexible", 10000.0, 0.0, bounds, cfg)
    second = fg.optimize(window, "flexible", 10000.0, 0.0, bounds, cfg)
    assert first.best.x == second.best.x
    assert first.best.fitness == second.best.fitness
    assert first.best.feasible
    assert len(first.trace) == 3
    assert first.evaluations > 0
    gbest = [t.gbest_fitness for t in first.trace]
    assert gbest == sorted(gbest)


def check_network():
    model = fg.init_network([8, 8, 4], "sigmoid", seed=1)
    assert model.parameter_count() == 8 * 8 + 8 + 8 * 4 + 4
    out = fg.forward(model, [0.1] * 8)
    assert len(out) == 4

    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "model.gfnn")
        fg.save_model(model, path)
        loaded = fg.load_model(path)
        assert fg.forward(loaded, [0.1] * 8) == out

    x = [[i / 16.0, (15 - i) / 16.0] for i in range(16)]
    y = [[row[0] + 0.5 * row[1]] for row in x]
    net = fg.init_network([2, 8, 1], "sigmoid", seed=2)
    log = fg.train_network(net, x, y, epochs=60, batch=4, lr=3e-3, seed=3)
    assert len(log["train_mse"]) == 60
    assert log["train_mse"][-1] < log["train_mse"][0]


def check_features():
    series = fg.generate_synthetic("random-walk", 30, 100.0, 0.01, 0.0, seed=4)
    feats = fg.extract_features(series)
    arr = feats.as_array()
    assert len(arr) == 8
    assert feats.high >= feats.low
    assert math.isclose(feats.price_change, series.prices()[0] - series.prices()[-1],
                        rel_tol=1e-12)


def main():
    check_ladder()
    check_backtest()
    check_metrics()
    check_optimizer()
    check_network()
    check_features()
    print("python smoke checks passed")


if __name__ == "__main__":
    sys.exit(main())
