#include "flexgrid/commands.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <utility>

#include <nlohmann/json.hpp>

#include "flexgrid/errors.hpp"
#include "flexgrid/features.hpp"
#include "flexgrid/fnn.hpp"
#include "flexgrid/grid_model.hpp"
#include "flexgrid/rng.hpp"
#include "flexgrid/sso.hpp"
#include "flexgrid/textio.hpp"

namespace flexgrid::cmd {

using nlohmann::json;

namespace {

namespace fs = std::filesystem;

std::string timestamp_utc() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string join_path(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ParseError("cannot create output directory " + dir + ": " + ec.message());
}

// ---- effective-config echo --------------------------------------------------

using KvList = std::vector<std::pair<std::string, std::string>>;

void put(KvList& kv, std::string key, std::string value) {
    kv.emplace_back(std::move(key), std::move(value));
}
void put(KvList& kv, std::string key, const char* value) { put(kv, std::move(key), std::string(value)); }
void put(KvList& kv, std::string key, double value) { put(kv, std::move(key), fmt_double(value)); }
void put(KvList& kv, std::string key, bool value) { put(kv, std::move(key), value ? "true" : "false"); }
template <typename T>
    requires std::integral<T>
void put(KvList& kv, std::string key, T value) {
    put(kv, std::move(key), std::to_string(value));
}

std::string join_list(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& s : items) {
        if (!out.empty()) out += ",";
        out += s;
    }
    return out;
}

std::string join_ints(const std::vector<int>& items) {
    std::string out;
    for (int v : items) {
        if (!out.empty()) out += ",";
        out += std::to_string(v);
    }
    return out;
}

void put_sso(KvList& kv, const SsoArgs& a) {
    put(kv, "sso.c_g", a.c_g);
    put(kv, "sso.c_p", a.c_p);
    put(kv, "sso.c_w", a.c_w);
    put(kv, "sso.runs", a.runs);
    put(kv, "sso.generations", a.generations);
    put(kv, "sso.population", a.population);
    put(kv, "sso.repair_attempts", a.repair_attempts);
    put(kv, "sso.seed", a.seed);
}

void put_net(KvList& kv, const NetArgs& a) {
    put(kv, "net.hidden", join_ints(a.hidden));
    put(kv, "net.activation", a.activation);
    put(kv, "net.epochs", a.epochs);
    put(kv, "net.batch", a.batch);
    put(kv, "net.lr", a.lr);
    put(kv, "net.train_fraction", a.train_fraction);
    put(kv, "net.normalize_targets", a.normalize_targets);
    put(kv, "net.seed", a.seed);
}

// sorted key = value lines; deliberately timestamp-free so identical settings
// produce identical bytes
void write_effective_config(const std::string& dir, const std::string& command, KvList kv) {
    put(kv, "command", command);
    std::sort(kv.begin(), kv.end());
    std::string out;
    for (const auto& [k, v] : kv) {
        out += k;
        out += " = ";
        out += v;
        out += "\n";
    }
    write_file(join_path(dir, "effective-config.txt"), out);
}

// ---- shared pieces ----------------------------------------------------------

sso::SsoConfig to_sso_config(const SsoArgs& a) {
    sso::SsoConfig cfg;
    cfg.c_g = a.c_g;
    cfg.c_p = a.c_p;
    cfg.c_w = a.c_w;
    cfg.runs = a.runs;
    cfg.generations = a.generations;
    cfg.population = a.population;
    cfg.repair_attempts = a.repair_attempts;
    cfg.seed = a.seed;
    return cfg;
}

json metrics_json(const MetricsBlock& m) {
    json j;
    j["wealth"] = m.wealth;
    j["roi_pct"] = m.roi_pct;
    j["mdd_pct"] = m.mdd_pct;
    j["volatility"] = m.volatility;
    if (m.sharpe) j["sharpe"] = *m.sharpe;
    else j["sharpe"] = nullptr;
    return j;
}

MetricsBlock metrics_from_json(const json& j, const std::string& ctx) {
    MetricsBlock m;
    m.wealth = j.at("wealth").get<double>();
    m.roi_pct = j.at("roi_pct").get<double>();
    m.mdd_pct = j.at("mdd_pct").get<double>();
    m.volatility = j.at("volatility").get<double>();
    if (!j.at("sharpe").is_null()) m.sharpe = j.at("sharpe").get<double>();
    else m.sharpe = std::nullopt;
    (void)ctx;
    return m;
}

json ladder_json(const LevelLadder& l) {
    json j;
    j["kind"] = std::string(grid_kind_name(l.kind));
    j["lines"] = l.lines;
    j["anchor_index"] = l.anchor_index;
    switch (l.kind) {
        case GridKind::equal_distance: j["spacing"] = l.spacing; break;
        case GridKind::equal_ratio: j["ratio"] = l.ratio; break;
        case GridKind::flexible:
            j["ratio_lower"] = l.ratio_lower;
            j["decay_upper"] = l.decay_upper;
            break;
    }
    return j;
}

json spec_json(const GridSpec& s) {
    json j;
    j["kind"] = std::string(grid_kind_name(s.kind));
    j["upper"] = s.upper;
    j["lower"] = s.lower;
    j["n_upper"] = s.n_upper;
    j["n_lower"] = s.n_lower;
    j["anchor"] = s.anchor;
    j["geometric_upper"] = s.geometric_upper;
    return j;
}

json report_json(const BacktestReport& r, const std::string& series_id, std::size_t periods) {
    json j;
    j["strategy"] = r.strategy;
    j["capital"] = r.capital;
    j["fee_rate"] = r.fee_rate;
    j["final_wealth"] = r.final_wealth;
    j["trade_count"] = r.trade_count;
    j["metrics"] = metrics_json(r.metrics);
    j["settlement"] = {{"price", r.settlement.price},
                       {"quantity", r.settlement.quantity},
                       {"proceeds", r.settlement.proceeds},
                       {"fee", r.settlement.fee}};
    j["unit_volume"] = r.unit_volume;
    if (r.ladder) j["ladder"] = ladder_json(*r.ladder);
    else j["ladder"] = nullptr;
    j["series"] = {{"id", series_id}, {"periods", periods}};
    j["generated_at"] = timestamp_utc();
    return j;
}

void write_json(const std::string& path, const json& j) {
    write_file(path, j.dump(2) + "\n");
}

json parse_json_file(const std::string& path) {
    const std::string text = read_file(path);
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ParseError(path + ": not valid JSON");
    return j;
}

std::string strategy_slug(const std::string& name) {
    std::string s = name;
    for (char& c : s)
        if (c == ' ' || c == '_') c = '-';
    return s;
}

constexpr const char* kGridStrategies[] = {"flexible", "equal-distance", "equal-ratio"};
constexpr const char* kAllStrategies[] = {"flexible", "equal-distance", "equal-ratio",
                                          "buy-and-hold", "short-buy"};

bool is_grid_strategy(const std::string& name) {
    return std::find(std::begin(kGridStrategies), std::end(kGridStrategies), name) !=
           std::end(kGridStrategies);
}

void write_report_files(const std::string& dir, const BacktestReport& r,
                        const std::string& series_id, std::size_t periods) {
    const std::string slug = strategy_slug(r.strategy);
    write_json(join_path(dir, "backtest-" + slug + ".json"), report_json(r, series_id, periods));
    write_file(join_path(dir, "equity-" + slug + ".csv"), equity_csv(r));
    write_file(join_path(dir, "trades-" + slug + ".csv"), trades_csv(r));
}

// ---- dataset / model sidecars -----------------------------------------------

json sso_json(const sso::SsoConfig& c) {
    json j;
    j["c_g"] = c.c_g;
    j["c_p"] = c.c_p;
    j["c_w"] = c.c_w;
    j["runs"] = c.runs;
    j["generations"] = c.generations;
    j["population"] = c.population;
    j["repair_attempts"] = c.repair_attempts;
    j["seed"] = c.seed;
    return j;
}

json dataset_sidecar(const Dataset& ds, int profile) {
    json j;
    j["source"] = ds.source_id;
    j["window"] = ds.config.window;
    j["stride"] = ds.config.stride;
    j["shifted_labels"] = ds.config.shifted_labels;
    j["grid_kind"] = std::string(grid_kind_name(ds.config.kind));
    j["capital"] = ds.config.capital;
    j["fee_rate"] = ds.config.fee_rate;
    j["bounds_profile"] = profile;
    j["samples"] = ds.samples.size();
    j["skipped"] = ds.skipped;
    j["sso"] = sso_json(ds.config.sso);
    j["warnings"] = ds.warnings;
    j["generated_at"] = timestamp_utc();
    return j;
}

json stats_json(const NormStats& st) {
    json j;
    auto cols = [](const ColumnStats* p, std::size_t n) {
        json arr = json::array();
        for (std::size_t i = 0; i < n; ++i)
            arr.push_back({{"mean", p[i].mean}, {"scale", p[i].scale}});
        return arr;
    };
    j["features"] = cols(st.features.data(), st.features.size());
    j["targets"] = cols(st.targets.data(), st.targets.size());
    j["normalized_targets"] = st.normalized_targets;
    return j;
}

NormStats stats_from_json(const json& j) {
    NormStats st;
    const auto& f = j.at("features");
    const auto& t = j.at("targets");
    if (f.size() != st.features.size() || t.size() != st.targets.size())
        throw ParseError("model sidecar: bad normalization block");
    for (std::size_t i = 0; i < st.features.size(); ++i)
        st.features[i] = {f[i].at("mean").get<double>(), f[i].at("scale").get<double>()};
    for (std::size_t i = 0; i < st.targets.size(); ++i)
        st.targets[i] = {t[i].at("mean").get<double>(), t[i].at("scale").get<double>()};
    st.normalized_targets = j.at("normalized_targets").get<bool>();
    return st;
}

std::string sidecar_path_for(const std::string& path) {
    return (fs::path(path).replace_extension(".json")).string();
}

// ---- training ---------------------------------------------------------------

struct TrainedBundle {
    fnn::Model model;
    NormStats stats;
    fnn::TrainLog log;
    std::array<double, 4> val_mse{};                 // raw target space
    std::array<std::optional<double>, 4> val_r2{};   // nullopt for constant actuals
    int train_samples = 0;
    int val_samples = 0;
};

constexpr std::array<const char*, 4> kTargetNames = {"gul", "gll", "nu", "nl"};

TrainedBundle train_network(const Dataset& train_ds, const Dataset& val_ds,
                            const NetArgs& net) {
    TrainedBundle b;
    b.stats = fit_normalization(train_ds, net.normalize_targets);
    b.train_samples = static_cast<int>(train_ds.samples.size());
    b.val_samples = static_cast<int>(val_ds.samples.size());

    const Matrix x_train = apply_feature_norm(feature_matrix(train_ds), b.stats);
    const Matrix y_train = apply_target_norm(target_matrix(train_ds), b.stats);
    const Matrix x_val = apply_feature_norm(feature_matrix(val_ds), b.stats);
    const Matrix y_val = apply_target_norm(target_matrix(val_ds), b.stats);

    fnn::Arch arch;
    arch.sizes.push_back(8);
    for (int h : net.hidden) arch.sizes.push_back(h);
    arch.sizes.push_back(4);
    arch.hidden = fnn::activation_from_name(net.activation);

    b.model = fnn::init_network(arch, derive_seed(net.seed, 1));
    fnn::TrainConfig cfg;
    cfg.epochs = net.epochs;
    cfg.batch = net.batch;
    cfg.lr = net.lr;
    cfg.seed = derive_seed(net.seed, 2);
    b.log = fnn::train(b.model, x_train, y_train, x_val, y_val, cfg);

    // per-output quality in raw target units (prices and counts)
    const Matrix raw_targets = target_matrix(val_ds);
    const Matrix scaled_pred = fnn::forward_batch(b.model, x_val);
    Matrix raw_pred(scaled_pred.rows, scaled_pred.cols);
    for (int r = 0; r < scaled_pred.rows; ++r) {
        const double* in = scaled_pred.row(r);
        const auto out = denormalize_targets({in[0], in[1], in[2], in[3]}, b.stats);
        std::copy(out.begin(), out.end(), raw_pred.row(r));
    }
    for (int c = 0; c < 4; ++c) {
        std::vector<double> actual, pred;
        actual.reserve(static_cast<std::size_t>(raw_targets.rows));
        pred.reserve(static_cast<std::size_t>(raw_targets.rows));
        for (int r = 0; r < raw_targets.rows; ++r) {
            actual.push_back(raw_targets.at(r, c));
            pred.push_back(raw_pred.at(r, c));
        }
        b.val_mse[static_cast<std::size_t>(c)] = mse(actual, pred);
        try {
            b.val_r2[static_cast<std::size_t>(c)] = r_squared(actual, pred);
        } catch (const std::invalid_argument&) {
            b.val_r2[static_cast<std::size_t>(c)] = std::nullopt;
        }
    }
    return b;
}

json model_sidecar(const TrainedBundle& b, const NetArgs& net, int profile,
                   const std::string& grid_kind, double capital, double fee_rate) {
    json j;
    j["arch"] = b.model.arch.sizes;
    j["activation"] = std::string(fnn::activation_name(b.model.arch.hidden));
    j["bounds_profile"] = profile;
    j["grid_kind"] = grid_kind;
    j["capital"] = capital;
    j["fee_rate"] = fee_rate;
    j["normalization"] = stats_json(b.stats);
    j["train"] = {{"epochs", net.epochs},
                  {"batch", net.batch},
                  {"lr", net.lr},
                  {"seed", net.seed},
                  {"train_fraction", net.train_fraction},
                  {"train_samples", b.train_samples},
                  {"val_samples", b.val_samples}};
    json val;
    for (std::size_t c = 0; c < 4; ++c) {
        json one;
        one["mse"] = b.val_mse[c];
        if (b.val_r2[c]) one["r2"] = *b.val_r2[c];
        else one["r2"] = nullptr;
        val[kTargetNames[c]] = one;
    }
    j["validation"] = val;
    if (!b.log.val_mse.empty()) j["final_val_mse"] = b.log.val_mse.back();
    j["generated_at"] = timestamp_utc();
    return j;
}

std::string loss_csv(const fnn::TrainLog& log) {
    std::string out = "epoch,train_mse,val_mse\n";
    for (std::size_t e = 0; e < log.train_mse.size(); ++e) {
        out += std::to_string(e + 1);
        out += ",";
        out += fmt_double(log.train_mse[e]);
        out += ",";
        if (e < log.val_mse.size()) out += fmt_double(log.val_mse[e]);
        out += "\n";
    }
    return out;
}

void print_validation(const TrainedBundle& b) {
    std::string m = "validation mse:", r = "validation r2: ";
    for (std::size_t c = 0; c < 4; ++c) {
        m += " " + std::string(kTargetNames[c]) + "=" + fmt_fixed(b.val_mse[c], 6);
        r += " " + std::string(kTargetNames[c]) + "=" +
             (b.val_r2[c] ? fmt_fixed(*b.val_r2[c], 4) : std::string("n/a"));
    }
    std::cout << m << "\n" << r << "\n";
}

} // namespace

// ---- shared rendering ---------------------------------------------------------

GridSpec anchored_spec(GridKind kind, double upper, double lower, int n_upper,
                       int n_lower, double anchor, bool geometric_upper) {
    GridSpec s;
    s.kind = kind;
    s.upper = upper;
    s.lower = lower;
    s.n_upper = n_upper;
    s.n_lower = n_lower;
    s.anchor = anchor;
    s.geometric_upper = geometric_upper;
    if (n_upper >= 1 && n_lower >= 1 && lower > 0 && lower < anchor) {
        if (kind == GridKind::equal_distance) {
            const double step = (anchor - lower) / n_lower;
            s.upper = anchor + step * n_upper;
        } else if (kind == GridKind::equal_ratio) {
            const double ratio = std::pow(anchor / lower, 1.0 / n_lower);
            s.upper = anchor * std::pow(ratio, n_upper);
        }
    }
    return s;
}

std::string equity_csv(const BacktestReport& r) {
    std::string out = "period,price,cash,spot,wealth\n";
    for (std::size_t i = 0; i < r.equity.size(); ++i) {
        const auto& e = r.equity[i];
        out += std::to_string(i);
        out += ",";
        out += fmt_double(e.price);
        out += ",";
        out += fmt_double(e.cash);
        out += ",";
        out += fmt_double(e.spot);
        out += ",";
        out += fmt_double(e.wealth);
        out += "\n";
    }
    return out;
}

std::string trades_csv(const BacktestReport& r) {
    std::string out = "period,side,line,quantity,fee,cash_after\n";
    for (const auto& t : r.trades) {
        out += std::to_string(t.period);
        out += ",";
        out += t.side == Side::buy ? "buy" : "sell";
        out += ",";
        out += fmt_double(t.line);
        out += ",";
        out += fmt_double(t.quantity);
        out += ",";
        out += fmt_double(t.fee);
        out += ",";
        out += fmt_double(t.cash_after);
        out += "\n";
    }
    return out;
}

std::string comparison_csv(std::span<const StrategyRow> rows) {
    std::string out = "strategy,wealth,roi_pct,mdd_pct,volatility,sharpe\n";
    for (const auto& r : rows) {
        out += r.name;
        out += ",";
        out += fmt_double(r.metrics.wealth);
        out += ",";
        out += fmt_double(r.metrics.roi_pct);
        out += ",";
        out += fmt_double(r.metrics.mdd_pct);
        out += ",";
        out += fmt_double(r.metrics.volatility);
        out += ",";
        if (r.metrics.sharpe) out += fmt_double(*r.metrics.sharpe);
        out += "\n";
    }
    return out;
}

std::string comparison_text(std::span<const StrategyRow> rows) {
    std::size_t name_w = std::string("strategy").size();
    for (const auto& r : rows) name_w = std::max(name_w, r.name.size());

    auto pad = [](std::string s, std::size_t w) {
        if (s.size() < w) s.append(w - s.size(), ' ');
        return s;
    };
    std::string out = pad("strategy", name_w + 2) + pad("wealth", 14) +
                      pad("roi_pct", 12) + pad("mdd_pct", 12) +
                      pad("volatility", 12) + "sharpe\n";
    for (const auto& r : rows) {
        out += pad(r.name, name_w + 2);
        out += pad(fmt_fixed(r.metrics.wealth, 2), 14);
        out += pad(fmt_fixed(r.metrics.roi_pct, 3), 12);
        out += pad(fmt_fixed(r.metrics.mdd_pct, 3), 12);
        out += pad(fmt_fixed(r.metrics.volatility, 6), 12);
        out += r.metrics.sharpe ? fmt_fixed(*r.metrics.sharpe, 4) : "n/a";
        out += "\n";
    }
    return out;
}

// ---- commands -----------------------------------------------------------------

void run_synth(const SynthArgs& a) {
    SynthSpec spec;
    spec.kind = synth_kind_from_name(a.kind);
    spec.length = a.length;
    spec.start = a.start;
    spec.volatility = a.volatility;
    spec.drift = a.drift;
    spec.seed = a.seed;
    const PriceSeries series = generate_synthetic(spec);

    ensure_dir(a.out_dir);
    const std::string path = join_path(a.out_dir, "series.csv");
    write_file(path, series_to_csv(series));

    KvList kv;
    put(kv, "kind", a.kind);
    put(kv, "length", a.length);
    put(kv, "start", a.start);
    put(kv, "volatility", a.volatility);
    put(kv, "drift", a.drift);
    put(kv, "seed", a.seed);
    put(kv, "out_dir", a.out_dir);
    write_effective_config(a.out_dir, "synth", std::move(kv));

    std::cout << "wrote " << series.size() << " periods (" << series.id << ") to "
              << path << "\n";
}

void run_backtest_cmd(const BacktestArgs& a) {
    std::vector<std::string> warnings;
    const PriceSeries series = load_csv_series(a.input, &warnings);
    const std::vector<std::string> strategies =
        a.strategies.empty()
            ? std::vector<std::string>(std::begin(kAllStrategies), std::end(kAllStrategies))
            : a.strategies;
    for (const auto& s : strategies)
        if (std::find(std::begin(kAllStrategies), std::end(kAllStrategies), s) ==
            std::end(kAllStrategies))
            throw std::invalid_argument("unknown strategy: " + s);
    if (series.size() < 2)
        throw std::invalid_argument("series " + a.input + " is too short to backtest");

    const double anchor = series.first_price();
    const double upper = a.upper > 0 ? a.upper : a.upper_mult * anchor;
    const double lower = a.lower > 0 ? a.lower : a.lower_mult * anchor;

    std::vector<BacktestReport> reports;
    for (const auto& name : strategies) {
        if (is_grid_strategy(name)) {
            const GridSpec spec = anchored_spec(grid_kind_from_name(name), upper, lower,
                                                a.n_upper, a.n_lower, anchor,
                                                a.geometric_upper);
            const auto spacing = validate_spacing(build_ladder(spec), a.fee_rate);
            if (!spacing.ok)
                throw InfeasibleError(
                    "strategy " + name + ": the gap above line " +
                    std::to_string(spacing.violating_line) +
                    " cannot clear the fee; widen the bounds, use fewer cells or lower "
                    "the fee");
            BacktestReport r = flexgrid::run_backtest(series, spec, a.capital, a.fee_rate);
            r.strategy = name;
            reports.push_back(std::move(r));
        } else {
            const BaselineKind kind =
                name == "buy-and-hold" ? BaselineKind::buy_hold : BaselineKind::short_buy;
            BacktestReport r = run_baseline(series, kind, a.capital, a.fee_rate);
            r.strategy = name;
            reports.push_back(std::move(r));
        }
    }

    ensure_dir(a.out_dir);
    std::vector<StrategyRow> rows;
    for (const auto& r : reports) {
        write_report_files(a.out_dir, r, series.id, series.size());
        rows.push_back({r.strategy, r.metrics});
    }
    write_file(join_path(a.out_dir, "comparison.csv"), comparison_csv(rows));
    const std::string table = comparison_text(rows);
    write_file(join_path(a.out_dir, "comparison.txt"), table);

    KvList kv;
    put(kv, "input", a.input);
    put(kv, "strategies", join_list(strategies));
    put(kv, "upper", upper);
    put(kv, "lower", lower);
    put(kv, "n_upper", a.n_upper);
    put(kv, "n_lower", a.n_lower);
    put(kv, "geometric_upper", a.geometric_upper);
    put(kv, "capital", a.capital);
    put(kv, "fee_rate", a.fee_rate);
    put(kv, "anchor", anchor);
    put(kv, "out_dir", a.out_dir);
    write_effective_config(a.out_dir, "backtest", std::move(kv));

    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    std::cout << table;
}

void run_optimize(const OptimizeArgs& a) {
    const PriceSeries full = load_csv_series(a.input);
    const std::size_t length =
        a.window_length > 0 ? a.window_length : full.size() - a.window_start;

    sso::Problem problem;
    problem.window = slice_window(full, a.window_start, length);
    problem.kind = grid_kind_from_name(a.kind);
    problem.capital = a.capital;
    problem.fee_rate = a.fee_rate;
    problem.bounds = sso::profile_by_number(a.profile);
    const sso::SsoConfig cfg = to_sso_config(a.sso);

    const sso::Result res = sso::optimize(problem, cfg);

    // replay the winner; its backtest must reproduce the recorded fitness
    auto x = res.best.x;
    const GridSpec spec = sso::materialize(problem, x);
    const BacktestReport replay =
        flexgrid::run_backtest(problem.window, spec, a.capital, a.fee_rate);

    ensure_dir(a.out_dir);
    json j;
    j["x"] = res.best.x;
    j["fitness"] = res.best.fitness;
    j["spec"] = spec_json(spec);
    j["verification_wealth"] = replay.final_wealth;
    j["verification_roi_pct"] = replay.metrics.roi_pct;
    j["verification_matches"] = replay.final_wealth == res.best.fitness;
    j["evaluations"] = res.evaluations;
    j["window"] = {{"start", a.window_start}, {"length", length}, {"anchor", problem.anchor()}};
    j["generated_at"] = timestamp_utc();
    write_json(join_path(a.out_dir, "best.json"), j);

    std::string trace = "run,generation,gbest_fitness,x1,x2,x3,x4\n";
    for (const auto& t : res.trace) {
        trace += std::to_string(t.run);
        trace += ",";
        trace += std::to_string(t.generation);
        trace += ",";
        trace += fmt_double(t.gbest_fitness);
        for (double v : t.x) {
            trace += ",";
            trace += fmt_double(v);
        }
        trace += "\n";
    }
    write_file(join_path(a.out_dir, "trace.csv"), trace);

    KvList kv;
    put(kv, "input", a.input);
    put(kv, "window_start", a.window_start);
    put(kv, "window_length", length);
    put(kv, "kind", a.kind);
    put(kv, "profile", a.profile);
    put(kv, "capital", a.capital);
    put(kv, "fee_rate", a.fee_rate);
    put_sso(kv, a.sso);
    put(kv, "out_dir", a.out_dir);
    write_effective_config(a.out_dir, "optimize", std::move(kv));

    std::cout << "best: upper=" << fmt_fixed(spec.upper, 4)
              << " lower=" << fmt_fixed(spec.lower, 4) << " n_upper=" << spec.n_upper
              << " n_lower=" << spec.n_lower << "\n"
              << "fitness=" << fmt_double(res.best.fitness)
              << " verification_roi=" << fmt_fixed(replay.metrics.roi_pct, 4) << "%"
              << " (replay " << (replay.final_wealth == res.best.fitness ? "matches" : "DIFFERS")
              << ")\n";
}

namespace {

DatasetBuildConfig dataset_config(std::size_t window, std::size_t stride,
                                  bool shifted, GridKind kind, double capital,
                                  double fee_rate, int profile, const SsoArgs& sso_args) {
    DatasetBuildConfig cfg;
    cfg.window = window;
    cfg.stride = stride;
    cfg.shifted_labels = shifted;
    cfg.kind = kind;
    cfg.capital = capital;
    cfg.fee_rate = fee_rate;
    cfg.bounds = sso::profile_by_number(profile);
    cfg.sso = to_sso_config(sso_args);
    return cfg;
}

} // namespace

void run_dataset(const DatasetArgs& a) {
    const PriceSeries series = load_csv_series(a.input);
    const DatasetBuildConfig cfg =
        dataset_config(a.window, a.stride, a.shifted_labels, grid_kind_from_name(a.kind),
                       a.capital, a.fee_rate, a.profile, a.sso);
    const Dataset ds = build_dataset(series, cfg);

    ensure_dir(a.out_dir);
    write_file(join_path(a.out_dir, "dataset.csv"), dataset_to_csv(ds));
    write_json(join_path(a.out_dir, "dataset.json"), dataset_sidecar(ds, a.profile));

    KvList kv;
    put(kv, "input", a.input);
    put(kv, "window", a.window);
    put(kv, "stride", a.stride);
    put(kv, "shifted_labels", a.shifted_labels);
    put(kv, "kind", a.kind);
    put(kv, "profile", a.profile);
    put(kv, "capital", a.capital);
    put(kv, "fee_rate", a.fee_rate);
    put_sso(kv, a.sso);
    put(kv, "out_dir", a.out_dir);
    write_effective_config(a.out_dir, "dataset", std::move(kv));

    for (const auto& w : ds.warnings) std::cerr << "warning: " << w << "\n";
    std::cout << "built " << ds.samples.size() << " samples (skipped " << ds.skipped
              << ") from " << series.id << "\n";
}

void run_train(const TrainArgs& a) {
    const Dataset ds = dataset_from_csv(read_file(a.dataset));

    int profile = a.profile;
    std::string grid_kind = "flexible";
    double capital = 10000.0, fee_rate = 0.0;
    const std::string sidecar = sidecar_path_for(a.dataset);
    if (fs::exists(sidecar)) {
        const json j = parse_json_file(sidecar);
        if (profile == 0) profile = j.value("bounds_profile", 1);
        grid_kind = j.value("grid_kind", grid_kind);
        capital = j.value("capital", capital);
        fee_rate = j.value("fee_rate", fee_rate);
    }
    if (profile == 0) profile = 1;
    sso::profile_by_number(profile); // reject unknown numbers before training

    auto [train_ds, val_ds] = split_dataset(ds, a.net.train_fraction);
    const TrainedBundle b = train_network(train_ds, val_ds, a.net);

    ensure_dir(a.out_dir);
    fnn::save_model(b.model, join_path(a.out_dir, "model.gfnn"));
    write_json(join_path(a.out_dir, "model.json"),
               model_sidecar(b, a.net, profile, grid_kind, capital, fee_rate));
    write_file(join_path(a.out_dir, "loss.csv"), loss_csv(b.log));

    KvList kv;
    put(kv, "dataset", a.dataset);
    put(kv, "profile", profile);
    put_net(kv, a.net);
    put(kv, "out_dir", a.out_dir);
    write_effective_config(a.out_dir, "train", std::move(kv));

    for (const auto& w : b.stats.warnings) std::cerr << "warning: " << w << "\n";
    std::cout << "trained on " << b.train_samples << " samples, validated on "
              << b.val_samples << "\n";
    print_validation(b);
}

void run_predict(const PredictArgs& a) {
    const fnn::Model model = fnn::load_model(a.model);
    const std::string sidecar = sidecar_path_for(a.model);
    if (!fs::exists(sidecar))
        throw ParseError(sidecar + " not found; training writes it next to the weights");
    const json meta = parse_json_file(sidecar);
    const NormStats stats = stats_from_json(meta.at("normalization"));
    const int profile = meta.value("bounds_profile", 1);
    const double fee_rate = a.fee_rate >= 0 ? a.fee_rate : meta.value("fee_rate", 0.0);

    const PriceSeries series = load_csv_series(a.input);
    if (series.size() < a.window)
        throw std::invalid_argument("series has " + std::to_string(series.size()) +
                                    " periods, need " + std::to_string(a.window) +
                                    " for the feature window");
    const std::size_t start = series.size() - a.window;
    const PriceSeries window = slice_window(series, start, a.window);
    const MarketFeatures features = extract_features(window);
    const double anchor = series.last_price();

    const fnn::PredictedGrid pred = fnn::predict_grid_params(
        model, features, stats, sso::profile_by_number(profile), anchor, fee_rate);

    ensure_dir(a.out_dir);
    json j;
    j["spec"] = spec_json(pred.spec);
    j["clamped_upper"] = pred.clamped_upper;
    j["clamped_lower"] = pred.clamped_lower;
    j["adjusted_counts"] = pred.adjusted_counts;
    j["anchor"] = anchor;
    j["fee_rate"] = fee_rate;
    j["window_start"] = start;
    const auto f = features.as_array();
    j["features"] = f;
    j["generated_at"] = timestamp_utc();
    write_json(join_path(a.out_dir, "grid.json"), j);

    KvList kv;
    put(kv, "model", a.model);
    put(kv, "input", a.input);
    put(kv, "window", a.window);
    put(kv, "fee_rate", fee_rate);
    put(kv, "profile", profile);
    put(kv, "out_dir", a.out_dir);
    write_effective_config(a.out_dir, "predict", std::move(kv));

    std::cout << "predicted: upper=" << fmt_fixed(pred.spec.upper, 4)
              << " lower=" << fmt_fixed(pred.spec.lower, 4)
              << " n_upper=" << pred.spec.n_upper << " n_lower=" << pred.spec.n_lower
              << (pred.clamped_upper || pred.clamped_lower ? " (bounds clamped)" : "")
              << (pred.adjusted_counts ? " (counts adjusted)" : "") << "\n";
}

void run_pipeline(const PipelineArgs& a) {
    PriceSeries series;
    if (!a.input.empty()) {
        series = load_csv_series(a.input);
    } else {
        SynthSpec spec;
        spec.kind = synth_kind_from_name(a.synth.kind);
        spec.length = a.synth.length;
        spec.start = a.synth.start;
        spec.volatility = a.synth.volatility;
        spec.drift = a.synth.drift;
        spec.seed = a.synth.seed;
        series = generate_synthetic(spec);
    }

    if (a.validation_periods < 2)
        throw std::invalid_argument("validation span must cover at least two periods");
    if (series.size() < a.validation_periods + 2 * a.window)
        throw std::invalid_argument(
            "series too short: need at least validation span + two windows, got " +
            std::to_string(series.size()));
    const std::size_t boundary = series.size() - a.validation_periods;

    // label every window position, then split so no training label window
    // crosses into the validation span
    const DatasetBuildConfig cfg =
        dataset_config(a.window, a.stride, a.shifted_labels, GridKind::flexible,
                       a.capital, a.fee_rate, a.profile, a.sso);
    const Dataset ds = build_dataset(series, cfg);
    const std::size_t label_span = a.shifted_labels ? 2 * a.window : a.window;
    std::size_t split_idx = ds.samples.size();
    for (std::size_t i = 0; i < ds.samples.size(); ++i) {
        if (ds.samples[i].window_start + label_span > boundary) {
            split_idx = i;
            break;
        }
    }
    if (split_idx == 0)
        throw std::invalid_argument("no training samples before the validation span");
    if (split_idx == ds.samples.size())
        throw std::invalid_argument("no validation samples; series tail too short");
    auto [train_ds, val_ds] = split_dataset_at(ds, split_idx);

    const TrainedBundle b = train_network(train_ds, val_ds, a.net);
    const sso::BoundsProfile bounds = sso::profile_by_number(a.profile);

    // walk the validation span: re-predict from the trailing window every
    // `window` periods, trade each segment in a fresh session, carry wealth
    struct Segment {
        std::size_t start = 0, length = 0;
        fnn::PredictedGrid grid;
        double start_wealth = 0, end_wealth = 0;
        int trades = 0;
    };
    std::vector<std::size_t> seg_starts;
    for (std::size_t s = boundary; s < series.size(); s += a.window) seg_starts.push_back(s);
    // a one-period tail cannot be traded alone; the previous segment absorbs it
    if (seg_starts.size() > 1 && series.size() - seg_starts.back() < 2)
        seg_starts.pop_back();

    std::vector<Segment> segments;
    std::vector<EquitySample> fg_equity;
    std::vector<TradeEvent> fg_trades;
    double carry = a.capital;
    SettlementInfo last_settlement;
    for (std::size_t i = 0; i < seg_starts.size(); ++i) {
        Segment seg;
        seg.start = seg_starts[i];
        seg.length = (i + 1 < seg_starts.size() ? seg_starts[i + 1] : series.size()) - seg.start;

        const PriceSeries feat_window = slice_window(series, seg.start - a.window, a.window);
        const MarketFeatures features = extract_features(feat_window);
        const double anchor = series.points[seg.start].price;
        seg.grid = fnn::predict_grid_params(b.model, features, b.stats, bounds, anchor,
                                            a.fee_rate);
        const PriceSeries traded = slice_window(series, seg.start, seg.length);
        const BacktestReport r = flexgrid::run_backtest(traded, seg.grid.spec, carry, a.fee_rate);
        seg.start_wealth = carry;
        seg.end_wealth = r.final_wealth;
        seg.trades = r.trade_count;
        carry = r.final_wealth;
        fg_equity.insert(fg_equity.end(), r.equity.begin(), r.equity.end());
        for (TradeEvent t : r.trades) {
            t.period += static_cast<int>(seg.start - boundary);
            fg_trades.push_back(t);
        }
        last_settlement = r.settlement;
        segments.push_back(std::move(seg));
    }

    BacktestReport fg;
    fg.strategy = "fg-fnn";
    fg.capital = a.capital;
    fg.fee_rate = a.fee_rate;
    fg.final_wealth = carry;
    fg.trades = std::move(fg_trades);
    fg.trade_count = static_cast<int>(fg.trades.size());
    fg.equity = std::move(fg_equity);
    fg.settlement = last_settlement;
    fg.metrics = compute_metrics(a.capital, fg.wealth_curve());

    // fixed-parameter strategies over the same validation span
    const PriceSeries val_series = slice_window(series, boundary, a.validation_periods);
    const double anchor = val_series.first_price();
    const double upper = bounds.upper_hi * anchor;
    const double lower = bounds.lower_lo * anchor;
    std::vector<BacktestReport> reports;
    reports.push_back(std::move(fg));
    for (const auto* name : kGridStrategies) {
        const GridSpec spec = anchored_spec(grid_kind_from_name(name), upper, lower,
                                            a.n_upper, a.n_lower, anchor);
        BacktestReport r = flexgrid::run_backtest(val_series, spec, a.capital, a.fee_rate);
        r.strategy = name;
        reports.push_back(std::move(r));
    }
    {
        BacktestReport r = run_baseline(val_series, BaselineKind::buy_hold, a.capital, a.fee_rate);
        r.strategy = "buy-and-hold";
        reports.push_back(std::move(r));
    }

    ensure_dir(a.out_dir);
    if (a.input.empty()) write_file(join_path(a.out_dir, "series.csv"), series_to_csv(series));
    write_file(join_path(a.out_dir, "dataset.csv"), dataset_to_csv(ds));
    write_json(join_path(a.out_dir, "dataset.json"), dataset_sidecar(ds, a.profile));
    fnn::save_model(b.model, join_path(a.out_dir, "model.gfnn"));
    write_json(join_path(a.out_dir, "model.json"),
               model_sidecar(b, a.net, a.profile, "flexible", a.capital, a.fee_rate));
    write_file(join_path(a.out_dir, "loss.csv"), loss_csv(b.log));

    std::string seg_csv =
        "segment,start,length,anchor,upper,lower,n_upper,n_lower,start_wealth,"
        "end_wealth,trades,clamped_upper,clamped_lower,adjusted_counts\n";
    for (std::size_t i = 0; i < segments.size(); ++i) {
        const auto& s = segments[i];
        seg_csv += std::to_string(i);
        seg_csv += "," + std::to_string(s.start);
        seg_csv += "," + std::to_string(s.length);
        seg_csv += "," + fmt_double(s.grid.spec.anchor);
        seg_csv += "," + fmt_double(s.grid.spec.upper);
        seg_csv += "," + fmt_double(s.grid.spec.lower);
        seg_csv += "," + std::to_string(s.grid.spec.n_upper);
        seg_csv += "," + std::to_string(s.grid.spec.n_lower);
        seg_csv += "," + fmt_double(s.start_wealth);
        seg_csv += "," + fmt_double(s.end_wealth);
        seg_csv += "," + std::to_string(s.trades);
        seg_csv += std::string(",") + (s.grid.clamped_upper ? "1" : "0");
        seg_csv += std::string(",") + (s.grid.clamped_lower ? "1" : "0");
        seg_csv += std::string(",") + (s.grid.adjusted_counts ? "1" : "0");
        seg_csv += "\n";
    }
    write_file(join_path(a.out_dir, "segments.csv"), seg_csv);

    std::vector<StrategyRow> rows;
    for (const auto& r : reports) {
        write_report_files(a.out_dir, r, series.id, val_series.size());
        rows.push_back({r.strategy, r.metrics});
    }
    write_file(join_path(a.out_dir, "comparison.csv"), comparison_csv(rows));
    const std::string table = comparison_text(rows);
    write_file(join_path(a.out_dir, "comparison.txt"), table);

    KvList kv;
    put(kv, "input", a.input.empty() ? "(synthetic)" : a.input);
    if (a.input.empty()) {
        put(kv, "synth.kind", a.synth.kind);
        put(kv, "synth.length", a.synth.length);
        put(kv, "synth.start", a.synth.start);
        put(kv, "synth.volatility", a.synth.volatility);
        put(kv, "synth.drift", a.synth.drift);
        put(kv, "synth.seed", a.synth.seed);
    }
    put(kv, "window", a.window);
    put(kv, "stride", a.stride);
    put(kv, "shifted_labels", a.shifted_labels);
    put(kv, "profile", a.profile);
    put(kv, "capital", a.capital);
    put(kv, "fee_rate", a.fee_rate);
    put(kv, "validation_periods", a.validation_periods);
    put(kv, "n_upper", a.n_upper);
    put(kv, "n_lower", a.n_lower);
    put_sso(kv, a.sso);
    put_net(kv, a.net);
    put(kv, "out_dir", a.out_dir);
    write_effective_config(a.out_dir, "pipeline", std::move(kv));

    std::cout << "dataset: " << ds.samples.size() << " samples (skipped " << ds.skipped
              << "), " << train_ds.samples.size() << " train / " << val_ds.samples.size()
              << " validation\n";
    print_validation(b);
    std::cout << "validation trading, " << segments.size() << " segments:\n" << table;
}

void run_report(const ReportArgs& a) {
    if (a.inputs.empty()) throw std::invalid_argument("report: no input files given");
    std::vector<StrategyRow> rows;
    for (const auto& path : a.inputs) {
        const json j = parse_json_file(path);
        StrategyRow row;
        try {
            row.name = j.at("strategy").get<std::string>();
            row.metrics = metrics_from_json(j.at("metrics"), path);
        } catch (const json::exception& e) {
            throw ParseError(path + ": not a backtest report (" + e.what() + ")");
        }
        rows.push_back(std::move(row));
    }

    ensure_dir(a.out_dir);
    write_file(join_path(a.out_dir, "comparison.csv"), comparison_csv(rows));
    const std::string table = comparison_text(rows);
    write_file(join_path(a.out_dir, "comparison.txt"), table);

    KvList kv;
    put(kv, "inputs", join_list(a.inputs));
    put(kv, "out_dir", a.out_dir);
    write_effective_config(a.out_dir, "report", std::move(kv));

    std::cout << table;
}

} // namespace flexgrid::cmd
