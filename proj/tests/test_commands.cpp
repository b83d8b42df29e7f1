#include "doctest.h"

#include <algorithm>
#include <array>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nlohmann/json.hpp"

#include "flexgrid/commands.hpp"
#include "flexgrid/errors.hpp"
#include "flexgrid/features.hpp"
#include "flexgrid/fnn.hpp"
#include "flexgrid/sso.hpp"
#include "flexgrid/textio.hpp"

using namespace flexgrid;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// the commands narrate to stdout/stderr; keep the test log readable
struct Quiet {
    std::streambuf* out;
    std::streambuf* err;
    std::ostringstream sink;
    Quiet() : out(std::cout.rdbuf(sink.rdbuf())), err(std::cerr.rdbuf(sink.rdbuf())) {}
    ~Quiet() {
        std::cout.rdbuf(out);
        std::cerr.rdbuf(err);
    }
};

fs::path fresh_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / "flexgrid_cmd_tests" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string flat_series_csv(int periods) {
    std::string csv = "date,close,volume\n";
    for (int i = 0; i < periods; ++i)
        csv += std::to_string(i) + ",100,50\n";
    return csv;
}

std::string walk_csv(std::size_t length, std::uint64_t seed) {
    SynthSpec spec;
    spec.kind = SynthKind::random_walk;
    spec.length = length;
    spec.start = 100.0;
    spec.volatility = 0.015;
    spec.seed = seed;
    return series_to_csv(generate_synthetic(spec));
}

cmd::SsoArgs tiny_sso() {
    cmd::SsoArgs s;
    s.runs = 1;
    s.generations = 2;
    s.population = 6;
    s.seed = 5;
    return s;
}

cmd::NetArgs tiny_net() {
    cmd::NetArgs n;
    n.hidden = {8};
    n.epochs = 3;
    n.batch = 4;
    n.seed = 2;
    return n;
}

json read_json(const fs::path& p) { return json::parse(read_file(p.string())); }

} // namespace

TEST_CASE("anchored_spec mirrors the optimizer's materialization") {
    PriceSeries w;
    w.id = "t";
    w.points = {{0, 100.0, 0.0}, {1, 101.0, 0.0}};

    SUBCASE("equal distance") {
        sso::Problem p;
        p.window = w;
        p.kind = GridKind::equal_distance;
        std::array<double, 4> x{127.0, 73.0, 11.0, 9.0};
        const GridSpec from_sso = sso::materialize(p, x);
        const GridSpec from_cmd =
            cmd::anchored_spec(GridKind::equal_distance, 127.0, 73.0, 11, 9, 100.0);
        CHECK(from_cmd.upper == from_sso.upper);
        CHECK(from_cmd.lower == from_sso.lower);
        CHECK_NOTHROW(build_ladder(from_cmd));
    }
    SUBCASE("equal ratio") {
        sso::Problem p;
        p.window = w;
        p.kind = GridKind::equal_ratio;
        std::array<double, 4> x{127.0, 73.0, 11.0, 9.0};
        const GridSpec from_sso = sso::materialize(p, x);
        const GridSpec from_cmd =
            cmd::anchored_spec(GridKind::equal_ratio, 127.0, 73.0, 11, 9, 100.0);
        CHECK(from_cmd.upper == from_sso.upper);
        CHECK_NOTHROW(build_ladder(from_cmd));
    }
    SUBCASE("flexible passes through") {
        const GridSpec s =
            cmd::anchored_spec(GridKind::flexible, 127.0, 73.0, 11, 9, 100.0, true);
        CHECK(s.upper == 127.0);
        CHECK(s.lower == 73.0);
        CHECK(s.geometric_upper);
    }
}

TEST_CASE("comparison tables render wealth, roi, mdd, volatility and sharpe") {
    std::vector<cmd::StrategyRow> rows(2);
    rows[0].name = "flexible";
    rows[0].metrics = {10500.5, 5.005, 2.5, 0.01, 0.5};
    rows[1].name = "buy-and-hold";
    rows[1].metrics = {10000.0, 0.0, 0.0, 0.0, std::nullopt};

    const std::string csv = cmd::comparison_csv(rows);
    CHECK(csv == "strategy,wealth,roi_pct,mdd_pct,volatility,sharpe\n"
                 "flexible,10500.5,5.005,2.5,0.01,0.5\n"
                 "buy-and-hold,10000,0,0,0,\n");

    const std::string txt = cmd::comparison_text(rows);
    CHECK(txt.find("strategy") == 0);
    CHECK(txt.find("n/a") != std::string::npos);
    CHECK(txt.find("10500.50") != std::string::npos);
}

TEST_CASE("equity and trade CSV layouts") {
    PriceSeries s;
    s.id = "t";
    for (int i = 0; i < 3; ++i) s.points.push_back({i, 100.0, 0.0});
    GridSpec spec;
    spec.kind = GridKind::equal_distance;
    spec.upper = 130;
    spec.lower = 70;
    spec.n_upper = 3;
    spec.n_lower = 3;
    spec.anchor = 100;
    const auto r = run_backtest(s, spec, 10000.0, 0.0);

    const std::string eq = cmd::equity_csv(r);
    CHECK(eq.starts_with("period,price,cash,spot,wealth\n"));
    CHECK(std::count(eq.begin(), eq.end(), '\n') == 4); // header + 3 periods

    const std::string tr = cmd::trades_csv(r);
    CHECK(tr.starts_with("period,side,line,quantity,fee,cash_after\n"));
    CHECK(tr.find("buy") != std::string::npos);
    CHECK(tr.find("sell") != std::string::npos);
}

TEST_CASE("synth writes a reproducible series and a stable config echo") {
    Quiet q;
    const fs::path dir = fresh_dir("synth");
    cmd::SynthArgs a;
    a.kind = "trend";
    a.length = 10;
    a.volatility = 0.0;
    a.drift = 0.01;
    a.out_dir = dir.string();

    cmd::run_synth(a);
    const std::string first_series = read_file((dir / "series.csv").string());
    const std::string first_config = read_file((dir / "effective-config.txt").string());

    cmd::run_synth(a); // rerun into the same directory
    CHECK(read_file((dir / "series.csv").string()) == first_series);
    CHECK(read_file((dir / "effective-config.txt").string()) == first_config);

    CHECK(first_config.find("command = synth\n") != std::string::npos);
    CHECK(first_config.find("seed = 1\n") != std::string::npos);

    // keys are echoed in sorted order, one per line
    std::istringstream lines(first_config);
    std::string line, prev_key;
    while (std::getline(lines, line)) {
        const auto sep = line.find(" = ");
        REQUIRE(sep != std::string::npos);
        const std::string key = line.substr(0, sep);
        CHECK(prev_key < key);
        prev_key = key;
    }

    const auto series = load_csv_series((dir / "series.csv").string());
    CHECK(series.size() == 10);
    CHECK(series.points[1].price == doctest::Approx(101.0));
}

TEST_CASE("backtest command compares strategies over one series") {
    Quiet q;
    const fs::path dir = fresh_dir("backtest");
    const fs::path input = dir / "input.csv";
    write_file(input.string(), flat_series_csv(13));

    cmd::BacktestArgs a;
    a.input = input.string();
    a.out_dir = (dir / "out").string();
    cmd::run_backtest_cmd(a);

    for (const char* name : {"flexible", "equal-distance", "equal-ratio",
                             "buy-and-hold", "short-buy"}) {
        CAPTURE(name);
        CHECK(fs::exists(dir / "out" / ("backtest-" + std::string(name) + ".json")));
        CHECK(fs::exists(dir / "out" / ("equity-" + std::string(name) + ".csv")));
        CHECK(fs::exists(dir / "out" / ("trades-" + std::string(name) + ".csv")));
    }
    CHECK(fs::exists(dir / "out" / "comparison.csv"));
    CHECK(fs::exists(dir / "out" / "comparison.txt"));

    const json flex = read_json(dir / "out" / "backtest-flexible.json");
    CHECK(flex.at("strategy") == "flexible");
    CHECK(flex.at("capital") == 10000.0);
    CHECK(flex.at("final_wealth").get<double>() == doctest::Approx(10000.0));
    CHECK(flex.at("metrics").at("roi_pct").get<double>() ==
          doctest::Approx(0.0).epsilon(1e-9));
    CHECK(flex.at("trade_count") == 2); // opening buy and settlement, nothing else
    CHECK(flex.at("ladder").is_object());
    CHECK(flex.at("series").at("periods") == 13);
    CHECK(flex.at("generated_at").is_string());

    const json hold = read_json(dir / "out" / "backtest-buy-and-hold.json");
    CHECK(hold.at("ladder").is_null());
    CHECK(hold.at("final_wealth").get<double>() == doctest::Approx(10000.0));

    const std::string comparison =
        read_file((dir / "out" / "comparison.csv").string());
    CHECK(std::count(comparison.begin(), comparison.end(), '\n') == 6);

    const std::string config =
        read_file((dir / "out" / "effective-config.txt").string());
    CHECK(config.find("command = backtest\n") != std::string::npos);
    CHECK(config.find("generated") == std::string::npos);
}

TEST_CASE("a failed backtest run leaves no partial outputs") {
    Quiet q;
    const fs::path dir = fresh_dir("backtest-err");

    SUBCASE("missing input file") {
        cmd::BacktestArgs a;
        a.input = (dir / "nope.csv").string();
        a.out_dir = (dir / "out").string();
        CHECK_THROWS_AS(cmd::run_backtest_cmd(a), ParseError);
        CHECK_FALSE(fs::exists(dir / "out"));
    }
    SUBCASE("unknown strategy") {
        const fs::path input = dir / "input.csv";
        write_file(input.string(), flat_series_csv(5));
        cmd::BacktestArgs a;
        a.input = input.string();
        a.strategies = {"martingale"};
        a.out_dir = (dir / "out").string();
        CHECK_THROWS_AS(cmd::run_backtest_cmd(a), std::invalid_argument);
        CHECK_FALSE(fs::exists(dir / "out"));
    }
    SUBCASE("infeasible fee propagates the dedicated error") {
        const fs::path input = dir / "input.csv";
        write_file(input.string(), walk_csv(12, 3));
        cmd::BacktestArgs a;
        a.input = input.string();
        a.strategies = {"flexible"};
        a.fee_rate = 0.40;
        a.out_dir = (dir / "out").string();
        CHECK_THROWS_AS(cmd::run_backtest_cmd(a), InfeasibleError);
        CHECK_FALSE(fs::exists(dir / "out"));
    }
}

TEST_CASE("optimize verifies its winner by replaying it") {
    Quiet q;
    const fs::path dir = fresh_dir("optimize");
    const fs::path input = dir / "input.csv";
    write_file(input.string(), walk_csv(40, 7));

    cmd::OptimizeArgs a;
    a.input = input.string();
    a.sso = tiny_sso();
    a.out_dir = (dir / "out").string();
    cmd::run_optimize(a);

    const json best = read_json(dir / "out" / "best.json");
    CHECK(best.at("verification_matches") == true);
    CHECK(best.at("fitness").get<double>() ==
          best.at("verification_wealth").get<double>());
    CHECK(best.at("evaluations").get<int>() > 0);
    CHECK(best.at("window").at("length") == 40);
    const json spec = best.at("spec");
    const double anchor = best.at("window").at("anchor").get<double>();
    CHECK(spec.at("upper").get<double>() > anchor * 1.05);
    CHECK(spec.at("upper").get<double>() < anchor * 1.30);
    CHECK(spec.at("lower").get<double>() > anchor * 0.70);
    CHECK(spec.at("lower").get<double>() < anchor * 0.95);

    const std::string trace = read_file((dir / "out" / "trace.csv").string());
    CHECK(trace.starts_with("run,generation,gbest_fitness,x1,x2,x3,x4\n"));
    CHECK(std::count(trace.begin(), trace.end(), '\n') == 1 + 1 * (2 + 1));
}

TEST_CASE("dataset, train and predict chain through their sidecars") {
    Quiet q;
    const fs::path dir = fresh_dir("chain");
    const fs::path input = dir / "input.csv";
    write_file(input.string(), walk_csv(60, 9));

    cmd::DatasetArgs d;
    d.input = input.string();
    d.window = 30;
    d.stride = 5;
    d.sso = tiny_sso();
    d.out_dir = (dir / "ds").string();
    cmd::run_dataset(d);

    const json meta = read_json(dir / "ds" / "dataset.json");
    CHECK(meta.at("samples") == 7); // floor((60-30)/5)+1
    CHECK(meta.at("skipped") == 0);
    CHECK(meta.at("bounds_profile") == 1);
    CHECK(meta.at("grid_kind") == "flexible");
    CHECK(meta.at("sso").at("population") == 6);
    const Dataset ds =
        dataset_from_csv(read_file((dir / "ds" / "dataset.csv").string()));
    CHECK(ds.samples.size() == 7);

    cmd::TrainArgs t;
    t.dataset = (dir / "ds" / "dataset.csv").string();
    t.net = tiny_net();
    t.out_dir = (dir / "model").string();
    cmd::run_train(t);

    const json model_meta = read_json(dir / "model" / "model.json");
    CHECK(model_meta.at("arch") == json::array({8, 8, 4}));
    CHECK(model_meta.at("activation") == "sigmoid");
    CHECK(model_meta.at("bounds_profile") == 1); // inherited from the dataset sidecar
    CHECK(model_meta.at("normalization").at("features").size() == 8);
    CHECK(model_meta.at("normalization").at("targets").size() == 4);
    CHECK(model_meta.at("train").at("train_samples") == 6);
    CHECK(model_meta.at("train").at("val_samples") == 1);
    CHECK(model_meta.at("validation").contains("gul"));
    CHECK(model_meta.contains("final_val_mse"));

    const auto model = fnn::load_model((dir / "model" / "model.gfnn").string());
    CHECK(model.arch.sizes == std::vector<int>{8, 8, 4});

    const std::string loss = read_file((dir / "model" / "loss.csv").string());
    CHECK(loss.starts_with("epoch,train_mse,val_mse\n"));
    CHECK(std::count(loss.begin(), loss.end(), '\n') == 1 + 3);

    cmd::PredictArgs p;
    p.model = (dir / "model" / "model.gfnn").string();
    p.input = input.string();
    p.window = 30;
    p.out_dir = (dir / "grid").string();
    cmd::run_predict(p);

    const json grid = read_json(dir / "grid" / "grid.json");
    const auto series = load_csv_series(input.string());
    const double anchor = series.last_price();
    CHECK(grid.at("anchor").get<double>() == anchor);
    CHECK(grid.at("fee_rate") == 0.0); // taken from the model sidecar
    CHECK(grid.at("spec").at("kind") == "flexible");
    CHECK(grid.at("spec").at("upper").get<double>() > anchor * 1.05);
    CHECK(grid.at("spec").at("upper").get<double>() < anchor * 1.30);
    CHECK(grid.at("spec").at("lower").get<double>() > anchor * 0.70);
    CHECK(grid.at("spec").at("lower").get<double>() < anchor * 0.95);
    CHECK(grid.at("spec").at("n_upper").get<int>() >= 10);
    CHECK(grid.at("spec").at("n_upper").get<int>() <= 50);
    CHECK(grid.at("features").size() == 8);

    SUBCASE("predict requires the model sidecar") {
        const fs::path lonely = dir / "lonely.gfnn";
        fs::copy_file(dir / "model" / "model.gfnn", lonely,
                      fs::copy_options::overwrite_existing);
        cmd::PredictArgs bad = p;
        bad.model = lonely.string();
        bad.out_dir = (dir / "grid2").string();
        CHECK_THROWS_AS(cmd::run_predict(bad), ParseError);
        CHECK_FALSE(fs::exists(dir / "grid2"));
    }
}

TEST_CASE("report rebuilds a comparison from saved backtests") {
    Quiet q;
    const fs::path dir = fresh_dir("report");
    const fs::path input = dir / "input.csv";
    write_file(input.string(), walk_csv(20, 21));

    cmd::BacktestArgs a;
    a.input = input.string();
    a.strategies = {"flexible", "buy-and-hold"};
    a.out_dir = (dir / "bt").string();
    cmd::run_backtest_cmd(a);

    cmd::ReportArgs r;
    r.inputs = {(dir / "bt" / "backtest-buy-and-hold.json").string(),
                (dir / "bt" / "backtest-flexible.json").string()};
    r.out_dir = (dir / "rep").string();
    cmd::run_report(r);

    const std::string rebuilt = read_file((dir / "rep" / "comparison.csv").string());
    const std::string original = read_file((dir / "bt" / "comparison.csv").string());
    // same rows, order follows the input listing
    std::istringstream in(rebuilt);
    std::string header, row1, row2;
    std::getline(in, header);
    std::getline(in, row1);
    std::getline(in, row2);
    CHECK(header == "strategy,wealth,roi_pct,mdd_pct,volatility,sharpe");
    CHECK(row1.starts_with("buy-and-hold,"));
    CHECK(row2.starts_with("flexible,"));
    CHECK(original.find(row1 + "\n") != std::string::npos);
    CHECK(original.find(row2 + "\n") != std::string::npos);

    SUBCASE("a non-report input is rejected") {
        cmd::ReportArgs bad;
        bad.inputs = {(dir / "bt" / "effective-config.txt").string()};
        bad.out_dir = (dir / "rep2").string();
        CHECK_THROWS_AS(cmd::run_report(bad), ParseError);
        CHECK_FALSE(fs::exists(dir / "rep2"));
    }
    SUBCASE("no inputs") {
        cmd::ReportArgs bad;
        bad.out_dir = (dir / "rep3").string();
        CHECK_THROWS_AS(cmd::run_report(bad), std::invalid_argument);
    }
}

TEST_CASE("the pipeline walks the validation span segment by segment") {
    Quiet q;
    const fs::path dir = fresh_dir("pipeline");

    cmd::PipelineArgs a;
    a.synth.kind = "mean-reverting";
    a.synth.length = 160;
    a.synth.volatility = 0.01;
    a.synth.drift = 0.05;
    a.synth.seed = 31;
    a.window = 20;
    a.stride = 10;
    a.validation_periods = 40;
    a.fee_rate = 0.001;
    a.sso = tiny_sso();
    a.net = tiny_net();
    a.out_dir = (dir / "out").string();
    cmd::run_pipeline(a);

    for (const char* f :
         {"series.csv", "dataset.csv", "dataset.json", "model.gfnn", "model.json",
          "loss.csv", "segments.csv", "comparison.csv", "comparison.txt",
          "effective-config.txt", "backtest-fg-fnn.json", "backtest-flexible.json",
          "backtest-equal-distance.json", "backtest-equal-ratio.json",
          "backtest-buy-and-hold.json", "equity-fg-fnn.csv", "trades-fg-fnn.csv"}) {
        CAPTURE(f);
        CHECK(fs::exists(dir / "out" / f));
    }

    const std::string segments = read_file((dir / "out" / "segments.csv").string());
    std::istringstream seg_in(segments);
    std::string header, row0, row1, extra;
    std::getline(seg_in, header);
    CHECK(header ==
          "segment,start,length,anchor,upper,lower,n_upper,n_lower,start_wealth,"
          "end_wealth,trades,clamped_upper,clamped_lower,adjusted_counts");
    REQUIRE(std::getline(seg_in, row0));
    REQUIRE(std::getline(seg_in, row1));
    CHECK_FALSE(std::getline(seg_in, extra));
    CHECK(row0.starts_with("0,120,20,"));
    CHECK(row1.starts_with("1,140,20,"));

    const json fg = read_json(dir / "out" / "backtest-fg-fnn.json");
    CHECK(fg.at("strategy") == "fg-fnn");
    CHECK(fg.at("capital") == 10000.0);
    CHECK(fg.at("series").at("periods") == 40);
    const double wealth = fg.at("final_wealth").get<double>();
    const double roi = fg.at("metrics").at("roi_pct").get<double>();
    CHECK(wealth == doctest::Approx(10000.0 * (1.0 + roi / 100.0)));

    // wealth chains across segments: segment 0 ends where segment 1 starts
    std::vector<std::string> f0, f1;
    {
        std::istringstream r0(row0), r1(row1);
        std::string cell;
        while (std::getline(r0, cell, ',')) f0.push_back(cell);
        while (std::getline(r1, cell, ',')) f1.push_back(cell);
    }
    REQUIRE(f0.size() == 14);
    CHECK(f0[9] == f1[8]);
    CHECK(parse_double(f1[9], "segments") == doctest::Approx(wealth));

    const std::string comparison =
        read_file((dir / "out" / "comparison.csv").string());
    CHECK(std::count(comparison.begin(), comparison.end(), '\n') == 6);
    CHECK(comparison.find("fg-fnn,") != std::string::npos);
    CHECK(comparison.find("equal-ratio,") != std::string::npos);

    const json meta = read_json(dir / "out" / "dataset.json");
    CHECK(meta.at("samples") == 15); // floor((160-20)/10)+1

    SUBCASE("a series too short for the span is rejected before any writes") {
        cmd::PipelineArgs bad = a;
        bad.synth.length = 70; // needs 40 + 2*20
        bad.out_dir = (dir / "out2").string();
        CHECK_THROWS_AS(cmd::run_pipeline(bad), std::invalid_argument);
        CHECK_FALSE(fs::exists(dir / "out2"));
    }
}
