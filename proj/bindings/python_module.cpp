#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "flexgrid/backtest.hpp"
#include "flexgrid/commands.hpp"
#include "flexgrid/errors.hpp"
#include "flexgrid/features.hpp"
#include "flexgrid/fnn.hpp"
#include "flexgrid/grid_model.hpp"
#include "flexgrid/market_data.hpp"
#include "flexgrid/metrics.hpp"
#include "flexgrid/sso.hpp"

namespace py = pybind11;
using namespace flexgrid;

namespace {

Matrix to_matrix(const std::vector<std::vector<double>>& rows, const char* what) {
    if (rows.empty()) return {};
    const auto cols = rows.front().size();
    Matrix m(static_cast<int>(rows.size()), static_cast<int>(cols));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != cols)
            throw std::invalid_argument(std::string(what) + ": ragged rows");
        std::copy(rows[r].begin(), rows[r].end(), m.row(static_cast<int>(r)));
    }
    return m;
}

std::vector<std::vector<double>> from_matrix(const Matrix& m) {
    std::vector<std::vector<double>> out(static_cast<std::size_t>(m.rows));
    for (int r = 0; r < m.rows; ++r)
        out[static_cast<std::size_t>(r)].assign(m.row(r), m.row(r) + m.cols);
    return out;
}

} // namespace

PYBIND11_MODULE(_flexgrid, mod) {
    mod.doc() = "grid trading toolkit: ladders, backtests, swarm search and the "
                "parameter network";

    py::register_exception<ParseError>(mod, "ParseError");
    py::register_exception<InfeasibleError>(mod, "InfeasibleError");

    py::class_<PricePoint>(mod, "PricePoint")
        .def_readonly("timestamp", &PricePoint::timestamp)
        .def_readonly("price", &PricePoint::price)
        .def_readonly("quantity", &PricePoint::quantity);

    py::class_<PriceSeries>(mod, "PriceSeries")
        .def_readonly("id", &PriceSeries::id)
        .def_readonly("points", &PriceSeries::points)
        .def("__len__", &PriceSeries::size)
        .def("prices", [](const PriceSeries& s) {
            std::vector<double> p;
            p.reserve(s.size());
            for (const auto& pt : s.points) p.push_back(pt.price);
            return p;
        });

    mod.def(
        "generate_synthetic",
        [](const std::string& kind, std::size_t length, double start, double volatility,
           double drift, std::uint64_t seed) {
            SynthSpec spec;
            spec.kind = synth_kind_from_name(kind);
            spec.length = length;
            spec.start = start;
            spec.volatility = volatility;
            spec.drift = drift;
            spec.seed = seed;
            return generate_synthetic(spec);
        },
        py::arg("kind"), py::arg("length"), py::arg("start") = 100.0,
        py::arg("volatility") = 0.0, py::arg("drift") = 0.0, py::arg("seed") = 0);
    mod.def("load_csv_series",
            [](const std::string& path) { return load_csv_series(path); }, py::arg("path"));
    mod.def("series_to_csv", &series_to_csv, py::arg("series"));
    mod.def("slice_window", &slice_window, py::arg("series"), py::arg("start"),
            py::arg("length"));

    py::class_<GridSpec>(mod, "GridSpec")
        .def(py::init([](const std::string& kind, double upper, double lower, int n_upper,
                         int n_lower, double anchor, bool geometric_upper) {
                 GridSpec s;
                 s.kind = grid_kind_from_name(kind);
                 s.upper = upper;
                 s.lower = lower;
                 s.n_upper = n_upper;
                 s.n_lower = n_lower;
                 s.anchor = anchor;
                 s.geometric_upper = geometric_upper;
                 return s;
             }),
             py::arg("kind"), py::arg("upper"), py::arg("lower"), py::arg("n_upper"),
             py::arg("n_lower"), py::arg("anchor"), py::arg("geometric_upper") = false)
        .def_property_readonly(
            "kind", [](const GridSpec& s) { return std::string(grid_kind_name(s.kind)); })
        .def_readwrite("upper", &GridSpec::upper)
        .def_readwrite("lower", &GridSpec::lower)
        .def_readwrite("n_upper", &GridSpec::n_upper)
        .def_readwrite("n_lower", &GridSpec::n_lower)
        .def_readwrite("anchor", &GridSpec::anchor)
        .def_readwrite("geometric_upper", &GridSpec::geometric_upper);

    py::class_<LevelLadder>(mod, "LevelLadder")
        .def_property_readonly(
            "kind", [](const LevelLadder& l) { return std::string(grid_kind_name(l.kind)); })
        .def_readonly("lines", &LevelLadder::lines)
        .def_readonly("anchor_index", &LevelLadder::anchor_index)
        .def_readonly("spacing", &LevelLadder::spacing)
        .def_readonly("ratio", &LevelLadder::ratio)
        .def_readonly("ratio_lower", &LevelLadder::ratio_lower)
        .def_readonly("decay_upper", &LevelLadder::decay_upper)
        .def("anchor_price", &LevelLadder::anchor_price)
        .def("cell_count", &LevelLadder::cell_count);

    mod.def("build_ladder", &build_ladder, py::arg("spec"));
    mod.def("anchored_spec",
            [](const std::string& kind, double upper, double lower, int n_upper,
               int n_lower, double anchor, bool geometric_upper) {
                return cmd::anchored_spec(grid_kind_from_name(kind), upper, lower, n_upper,
                                          n_lower, anchor, geometric_upper);
            },
            py::arg("kind"), py::arg("upper"), py::arg("lower"), py::arg("n_upper"),
            py::arg("n_lower"), py::arg("anchor"), py::arg("geometric_upper") = false);

    py::class_<Allocation>(mod, "Allocation")
        .def_readonly("unit_volume", &Allocation::unit_volume)
        .def_readonly("spot_value", &Allocation::spot_value)
        .def_readonly("cash", &Allocation::cash)
        .def_readonly("capital", &Allocation::capital)
        .def_readonly("fee_rate", &Allocation::fee_rate);
    mod.def("initial_allocation", &initial_allocation, py::arg("ladder"), py::arg("capital"),
            py::arg("fee_rate"));
    mod.def("validate_spacing",
            [](const LevelLadder& l, double fee) {
                const auto c = validate_spacing(l, fee);
                return py::make_tuple(c.ok, c.violating_line);
            },
            py::arg("ladder"), py::arg("fee_rate"));

    py::class_<MetricsBlock>(mod, "MetricsBlock")
        .def_readonly("wealth", &MetricsBlock::wealth)
        .def_readonly("roi_pct", &MetricsBlock::roi_pct)
        .def_readonly("mdd_pct", &MetricsBlock::mdd_pct)
        .def_readonly("volatility", &MetricsBlock::volatility)
        .def_readonly("sharpe", &MetricsBlock::sharpe);
    mod.def("roi", &roi, py::arg("capital"), py::arg("final_wealth"));
    mod.def("max_drawdown",
            [](const std::vector<double>& e) { return max_drawdown(e); }, py::arg("equity"));
    mod.def("volatility",
            [](const std::vector<double>& e) { return volatility(e); }, py::arg("equity"));
    mod.def("sharpe", [](const std::vector<double>& e) { return sharpe(e); }, py::arg("equity"));
    mod.def("mse",
            [](const std::vector<double>& a, const std::vector<double>& p) { return mse(a, p); },
            py::arg("actual"), py::arg("predicted"));
    mod.def("r_squared",
            [](const std::vector<double>& a, const std::vector<double>& p) {
                return r_squared(a, p);
            },
            py::arg("actual"), py::arg("predicted"));

    py::class_<TradeEvent>(mod, "TradeEvent")
        .def_readonly("period", &TradeEvent::period)
        .def_property_readonly(
            "side", [](const TradeEvent& t) { return t.side == Side::buy ? "buy" : "sell"; })
        .def_readonly("line", &TradeEvent::line)
        .def_readonly("quantity", &TradeEvent::quantity)
        .def_readonly("fee", &TradeEvent::fee)
        .def_readonly("cash_after", &TradeEvent::cash_after);

    py::class_<BacktestReport>(mod, "BacktestReport")
        .def_readonly("strategy", &BacktestReport::strategy)
        .def_readonly("capital", &BacktestReport::capital)
        .def_readonly("fee_rate", &BacktestReport::fee_rate)
        .def_readonly("final_wealth", &BacktestReport::final_wealth)
        .def_readonly("trade_count", &BacktestReport::trade_count)
        .def_readonly("metrics", &BacktestReport::metrics)
        .def_readonly("trades", &BacktestReport::trades)
        .def("wealth_curve", &BacktestReport::wealth_curve);

    mod.def("run_backtest", &run_backtest, py::arg("series"), py::arg("spec"),
            py::arg("capital"), py::arg("fee_rate"));
    mod.def("run_baseline",
            [](const PriceSeries& series, const std::string& kind, double capital, double fee) {
                BaselineKind k;
                if (kind == "buy-and-hold") k = BaselineKind::buy_hold;
                else if (kind == "short-buy") k = BaselineKind::short_buy;
                else throw std::invalid_argument("unknown baseline: " + kind);
                return run_baseline(series, k, capital, fee);
            },
            py::arg("series"), py::arg("kind"), py::arg("capital"), py::arg("fee_rate"));

    py::class_<sso::BoundsProfile>(mod, "BoundsProfile")
        .def_readwrite("upper_lo", &sso::BoundsProfile::upper_lo)
        .def_readwrite("upper_hi", &sso::BoundsProfile::upper_hi)
        .def_readwrite("lower_lo", &sso::BoundsProfile::lower_lo)
        .def_readwrite("lower_hi", &sso::BoundsProfile::lower_hi)
        .def_readwrite("count_lo", &sso::BoundsProfile::count_lo)
        .def_readwrite("count_hi", &sso::BoundsProfile::count_hi);
    mod.def("profile_by_number", &sso::profile_by_number, py::arg("number"));

    py::class_<sso::SsoConfig>(mod, "SsoConfig")
        .def(py::init<>())
        .def_readwrite("c_g", &sso::SsoConfig::c_g)
        .def_readwrite("c_p", &sso::SsoConfig::c_p)
        .def_readwrite("c_w", &sso::SsoConfig::c_w)
        .def_readwrite("runs", &sso::SsoConfig::runs)
        .def_readwrite("generations", &sso::SsoConfig::generations)
        .def_readwrite("population", &sso::SsoConfig::population)
        .def_readwrite("seed", &sso::SsoConfig::seed)
        .def_readwrite("repair_attempts", &sso::SsoConfig::repair_attempts);

    py::class_<sso::Candidate>(mod, "Candidate")
        .def_readonly("x", &sso::Candidate::x)
        .def_readonly("fitness", &sso::Candidate::fitness)
        .def_readonly("feasible", &sso::Candidate::feasible);
    py::class_<sso::TracePoint>(mod, "TracePoint")
        .def_readonly("run", &sso::TracePoint::run)
        .def_readonly("generation", &sso::TracePoint::generation)
        .def_readonly("gbest_fitness", &sso::TracePoint::gbest_fitness)
        .def_readonly("x", &sso::TracePoint::x);
    py::class_<sso::Result>(mod, "SsoResult")
        .def_readonly("best", &sso::Result::best)
        .def_readonly("run_best", &sso::Result::run_best)
        .def_readonly("trace", &sso::Result::trace)
        .def_readonly("evaluations", &sso::Result::evaluations);

    mod.def(
        "optimize",
        [](const PriceSeries& window, const std::string& kind, double capital, double fee,
           const sso::BoundsProfile& bounds, const sso::SsoConfig& cfg) {
            sso::Problem p;
            p.window = window;
            p.kind = grid_kind_from_name(kind);
            p.capital = capital;
            p.fee_rate = fee;
            p.bounds = bounds;
            return sso::optimize(p, cfg);
        },
        py::arg("window"), py::arg("kind"), py::arg("capital"), py::arg("fee_rate"),
        py::arg("bounds"), py::arg("config"));

    py::class_<MarketFeatures>(mod, "MarketFeatures")
        .def_readonly("high", &MarketFeatures::high)
        .def_readonly("low", &MarketFeatures::low)
        .def_readonly("mean_price", &MarketFeatures::mean_price)
        .def_readonly("mean_quantity", &MarketFeatures::mean_quantity)
        .def_readonly("price_change", &MarketFeatures::price_change)
        .def_readonly("quantity_change", &MarketFeatures::quantity_change)
        .def_readonly("price_sigma", &MarketFeatures::price_sigma)
        .def_readonly("quantity_sigma", &MarketFeatures::quantity_sigma)
        .def("as_array", &MarketFeatures::as_array);
    mod.def("extract_features", &extract_features, py::arg("window"));

    py::class_<fnn::Model>(mod, "Model")
        .def_property_readonly("sizes", [](const fnn::Model& m) { return m.arch.sizes; })
        .def_property_readonly(
            "activation",
            [](const fnn::Model& m) { return std::string(fnn::activation_name(m.arch.hidden)); })
        .def("parameter_count", &fnn::Model::parameter_count);

    mod.def(
        "init_network",
        [](const std::vector<int>& sizes, const std::string& activation, std::uint64_t seed) {
            fnn::Arch arch;
            arch.sizes = sizes;
            arch.hidden = fnn::activation_from_name(activation);
            return fnn::init_network(arch, seed);
        },
        py::arg("sizes"), py::arg("activation") = "sigmoid", py::arg("seed") = 0);
    mod.def("forward",
            [](const fnn::Model& m, const std::vector<double>& x) { return fnn::forward(m, x); },
            py::arg("model"), py::arg("x"));
    mod.def(
        "train_network",
        [](fnn::Model& m, const std::vector<std::vector<double>>& x,
           const std::vector<std::vector<double>>& y,
           const std::vector<std::vector<double>>& x_val,
           const std::vector<std::vector<double>>& y_val, int epochs, int batch, double lr,
           std::uint64_t seed) {
            fnn::TrainConfig cfg;
            cfg.epochs = epochs;
            cfg.batch = batch;
            cfg.lr = lr;
            cfg.seed = seed;
            const auto log = fnn::train(m, to_matrix(x, "x"), to_matrix(y, "y"),
                                        to_matrix(x_val, "x_val"), to_matrix(y_val, "y_val"), cfg);
            py::dict out;
            out["train_mse"] = log.train_mse;
            out["val_mse"] = log.val_mse;
            return out;
        },
        py::arg("model"), py::arg("x"), py::arg("y"),
        py::arg("x_val") = std::vector<std::vector<double>>{},
        py::arg("y_val") = std::vector<std::vector<double>>{}, py::arg("epochs") = 300,
        py::arg("batch") = 40, py::arg("lr") = 1e-3, py::arg("seed") = 0);
    mod.def("forward_batch",
            [](const fnn::Model& m, const std::vector<std::vector<double>>& x) {
                return from_matrix(fnn::forward_batch(m, to_matrix(x, "x")));
            },
            py::arg("model"), py::arg("x"));
    mod.def("save_model", &fnn::save_model, py::arg("model"), py::arg("path"));
    mod.def("load_model", &fnn::load_model, py::arg("path"));
}
