#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "flexgrid/backtest.hpp"
#include "flexgrid/market_data.hpp"

namespace flexgrid::cmd {

// Every command writes its artifacts into `out_dir` (created on demand),
// along with an `effective-config.txt` echo of the settings that produced
// them. Inputs are loaded and validated before anything is written, so a bad
// run leaves no partial outputs. Errors surface as exceptions; the CLI maps
// ParseError / std::invalid_argument to exit 1 and InfeasibleError to exit 2.

struct SynthArgs {
    std::string kind = "random-walk";
    std::size_t length = 252;
    double start = 100.0;
    double volatility = 0.01;
    double drift = 0.0;
    std::uint64_t seed = 1;
    std::string out_dir = "out";
};

// optimizer knobs shared by optimize, dataset and pipeline
struct SsoArgs {
    double c_g = 0.5;
    double c_p = 0.6;
    double c_w = 0.7;
    int runs = 10;
    int generations = 20;
    int population = 100;
    int repair_attempts = 50;
    std::uint64_t seed = 1;
};

// network and training knobs shared by train and pipeline
struct NetArgs {
    std::vector<int> hidden = {64, 64, 64};
    std::string activation = "sigmoid";
    int epochs = 300;
    int batch = 40;
    double lr = 1e-3;
    double train_fraction = 0.9;
    bool normalize_targets = true;
    std::uint64_t seed = 1;
};

struct BacktestArgs {
    std::string input;
    // any of: flexible, equal-distance, equal-ratio, buy-and-hold, short-buy
    std::vector<std::string> strategies;
    double upper_mult = 1.3; // bounds as multiples of the first close...
    double lower_mult = 0.7;
    double upper = 0.0;      // ...or absolute prices when nonzero
    double lower = 0.0;
    int n_upper = 15;
    int n_lower = 15;
    bool geometric_upper = false;
    double capital = 10000.0;
    double fee_rate = 0.0;
    std::string out_dir = "out";
};

struct OptimizeArgs {
    std::string input;
    std::size_t window_start = 0;
    std::size_t window_length = 0; // 0 = through the end of the series
    std::string kind = "flexible";
    int profile = 1;
    double capital = 10000.0;
    double fee_rate = 0.0;
    SsoArgs sso;
    std::string out_dir = "out";
};

struct DatasetArgs {
    std::string input;
    std::size_t window = 30;
    std::size_t stride = 5;
    bool shifted_labels = false;
    std::string kind = "flexible";
    int profile = 1;
    double capital = 10000.0;
    double fee_rate = 0.0;
    SsoArgs sso;
    std::string out_dir = "out";
};

struct TrainArgs {
    std::string dataset;  // samples CSV; a sibling .json sidecar is honored
    NetArgs net;
    int profile = 0;      // 0 = take the bounds profile from the sidecar
    std::string out_dir = "out";
};

struct PredictArgs {
    std::string model;    // weight file; expects its .json sidecar alongside
    std::string input;    // price CSV; features come from the trailing window
    std::size_t window = 30;
    double fee_rate = -1; // < 0 = use the fee recorded with the model
    std::string out_dir = "out";
};

struct PipelineArgs {
    std::string input;    // price CSV; empty = generate synthetic data
    SynthArgs synth;      // used only when input is empty
    std::size_t window = 30;
    std::size_t stride = 5;
    bool shifted_labels = false;
    int profile = 1;
    double capital = 10000.0;
    double fee_rate = 0.001;
    std::size_t validation_periods = 252;
    SsoArgs sso;
    NetArgs net;
    int n_upper = 15; // ladder shape for the fixed-grid comparison strategies
    int n_lower = 15;
    std::string out_dir = "out";
};

struct ReportArgs {
    std::vector<std::string> inputs; // backtest report JSON files
    std::string out_dir = "out";
};

void run_synth(const SynthArgs& a);
void run_backtest_cmd(const BacktestArgs& a);
void run_optimize(const OptimizeArgs& a);
void run_dataset(const DatasetArgs& a);
void run_train(const TrainArgs& a);
void run_predict(const PredictArgs& a);
void run_pipeline(const PipelineArgs& a);
void run_report(const ReportArgs& a);

// one comparison row per strategy; shared by backtest, pipeline and report
struct StrategyRow {
    std::string name;
    MetricsBlock metrics;
};

std::string comparison_csv(std::span<const StrategyRow> rows);
std::string comparison_text(std::span<const StrategyRow> rows);

// Keeps the entry price on a grid line for every kind: flexible specs pass
// through, while the uniform kinds rebuild the upper bound from the lower
// half's implied spacing (step for equal-distance, ratio for equal-ratio),
// mirroring what the optimizer does when it materializes a candidate.
GridSpec anchored_spec(GridKind kind, double upper, double lower, int n_upper,
                       int n_lower, double anchor, bool geometric_upper = false);

std::string equity_csv(const BacktestReport& report);
std::string trades_csv(const BacktestReport& report);

} // namespace flexgrid::cmd
