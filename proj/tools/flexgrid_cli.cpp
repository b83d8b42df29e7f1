#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "flexgrid/commands.hpp"
#include "flexgrid/errors.hpp"

namespace {

using namespace flexgrid;

void add_sso_options(CLI::App* sub, cmd::SsoArgs& a) {
    sub->add_option("--cg", a.c_g, "global-best copy threshold");
    sub->add_option("--cp", a.c_p, "personal-best copy threshold");
    sub->add_option("--cw", a.c_w, "keep-current threshold");
    sub->add_option("--runs", a.runs, "independent optimizer restarts");
    sub->add_option("--generations", a.generations, "generations per run");
    sub->add_option("--population", a.population, "solutions per generation");
    sub->add_option("--repair-attempts", a.repair_attempts,
                    "resampling attempts before a candidate counts as infeasible");
    sub->add_option("--seed", a.seed, "optimizer seed");
}

void add_net_options(CLI::App* sub, cmd::NetArgs& a) {
    sub->add_option("--hidden", a.hidden, "hidden layer widths");
    sub->add_option("--activation", a.activation, "hidden activation: sigmoid, relu, linear");
    sub->add_option("--epochs", a.epochs, "training epochs");
    sub->add_option("--batch", a.batch, "minibatch size");
    sub->add_option("--lr", a.lr, "adam learning rate");
    sub->add_option("--train-fraction", a.train_fraction,
                    "chronological share of samples used for training");
    sub->add_flag("--raw-targets", [&a](std::int64_t) { a.normalize_targets = false; },
                  "train on raw target values instead of z-scores");
    sub->add_option("--net-seed", a.seed, "weight init and shuffle seed");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"grid trading research toolkit: flexible ladders, swarm-optimized "
                 "parameters, and a neural network that proposes them"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "flexgrid 0.1.0");
    app.set_config("--config", "", "read options from a key = value file");

    cmd::SynthArgs synth_args;
    auto* synth = app.add_subcommand("synth", "generate a reproducible synthetic price series");
    synth->add_option("--kind", synth_args.kind,
                      "random-walk, mean-reverting, trend or sinusoid");
    synth->add_option("--length", synth_args.length, "number of periods");
    synth->add_option("--start", synth_args.start, "starting price");
    synth->add_option("--volatility", synth_args.volatility, "per-period noise scale");
    synth->add_option("--drift", synth_args.drift,
                      "per-period drift (reversion speed / amplitude by kind)");
    synth->add_option("--seed", synth_args.seed, "generator seed");
    synth->add_option("--out-dir", synth_args.out_dir, "output directory");

    cmd::BacktestArgs bt_args;
    auto* bt = app.add_subcommand("backtest", "run strategies over a price series");
    bt->add_option("--input", bt_args.input, "price series CSV")->required();
    bt->add_option("--strategy", bt_args.strategies,
                   "flexible, equal-distance, equal-ratio, buy-and-hold, short-buy "
                   "(repeatable; default all)");
    bt->add_option("--upper-mult", bt_args.upper_mult, "upper bound as a multiple of the first close");
    bt->add_option("--lower-mult", bt_args.lower_mult, "lower bound as a multiple of the first close");
    bt->add_option("--upper", bt_args.upper, "absolute upper bound (overrides --upper-mult)");
    bt->add_option("--lower", bt_args.lower, "absolute lower bound (overrides --lower-mult)");
    bt->add_option("--n-upper", bt_args.n_upper, "cells above the entry price");
    bt->add_option("--n-lower", bt_args.n_lower, "cells below the entry price");
    bt->add_flag("--geometric-upper", bt_args.geometric_upper,
                 "flexible kind: pure geometric upper half");
    bt->add_option("--capital", bt_args.capital, "starting capital");
    bt->add_option("--fee", bt_args.fee_rate, "proportional fee per trade");
    bt->add_option("--out-dir", bt_args.out_dir, "output directory");

    cmd::OptimizeArgs opt_args;
    auto* opt = app.add_subcommand("optimize", "search grid parameters over a window");
    opt->add_option("--input", opt_args.input, "price series CSV")->required();
    opt->add_option("--window-start", opt_args.window_start, "first period of the window");
    opt->add_option("--window-length", opt_args.window_length,
                    "window length (0 = through the end)");
    opt->add_option("--kind", opt_args.kind, "grid kind to optimize");
    opt->add_option("--profile", opt_args.profile, "bounds profile: 1 = standard, 2 = wide");
    opt->add_option("--capital", opt_args.capital, "starting capital");
    opt->add_option("--fee", opt_args.fee_rate, "proportional fee per trade");
    add_sso_options(opt, opt_args.sso);
    opt->add_option("--out-dir", opt_args.out_dir, "output directory");

    cmd::DatasetArgs ds_args;
    auto* ds = app.add_subcommand("dataset", "label sliding windows with optimized parameters");
    ds->add_option("--input", ds_args.input, "price series CSV")->required();
    ds->add_option("--window", ds_args.window, "feature window length");
    ds->add_option("--stride", ds_args.stride, "window step");
    ds->add_flag("--shifted-labels", ds_args.shifted_labels,
                 "optimize the window after the feature window instead of the window itself");
    ds->add_option("--kind", ds_args.kind, "grid kind to optimize");
    ds->add_option("--profile", ds_args.profile, "bounds profile: 1 = standard, 2 = wide");
    ds->add_option("--capital", ds_args.capital, "starting capital");
    ds->add_option("--fee", ds_args.fee_rate, "proportional fee per trade");
    add_sso_options(ds, ds_args.sso);
    ds->add_option("--out-dir", ds_args.out_dir, "output directory");

    cmd::TrainArgs tr_args;
    auto* tr = app.add_subcommand("train", "fit the network on a labeled dataset");
    tr->add_option("--dataset", tr_args.dataset, "dataset CSV from the dataset command")
        ->required();
    add_net_options(tr, tr_args.net);
    tr->add_option("--profile", tr_args.profile,
                   "bounds profile recorded for prediction (0 = from the dataset sidecar)");
    tr->add_option("--out-dir", tr_args.out_dir, "output directory");

    cmd::PredictArgs pr_args;
    auto* pr = app.add_subcommand("predict", "propose grid parameters for the latest window");
    pr->add_option("--model", pr_args.model, "weight file from the train command")->required();
    pr->add_option("--input", pr_args.input, "price series CSV")->required();
    pr->add_option("--window", pr_args.window, "feature window length");
    pr->add_option("--fee", pr_args.fee_rate,
                   "fee for the spacing check (default: the fee recorded with the model)");
    pr->add_option("--out-dir", pr_args.out_dir, "output directory");

    cmd::PipelineArgs pl_args;
    auto* pl = app.add_subcommand(
        "pipeline", "dataset, train, predict and trade the validation span end to end");
    pl->add_option("--input", pl_args.input, "price series CSV (omit to synthesize)");
    pl->add_option("--synth-kind", pl_args.synth.kind, "synthetic kind when no input is given");
    pl->add_option("--synth-length", pl_args.synth.length, "synthetic series length");
    pl->add_option("--synth-start", pl_args.synth.start, "synthetic starting price");
    pl->add_option("--synth-volatility", pl_args.synth.volatility, "synthetic noise scale");
    pl->add_option("--synth-drift", pl_args.synth.drift, "synthetic drift");
    pl->add_option("--synth-seed", pl_args.synth.seed, "synthetic generator seed");
    pl->add_option("--window", pl_args.window, "feature window length");
    pl->add_option("--stride", pl_args.stride, "window step");
    pl->add_flag("--shifted-labels", pl_args.shifted_labels,
                 "optimize the window after the feature window instead of the window itself");
    pl->add_option("--profile", pl_args.profile, "bounds profile: 1 = standard, 2 = wide");
    pl->add_option("--capital", pl_args.capital, "starting capital");
    pl->add_option("--fee", pl_args.fee_rate, "proportional fee per trade");
    pl->add_option("--validation-periods", pl_args.validation_periods,
                   "periods held out for validation trading");
    pl->add_option("--n-upper", pl_args.n_upper, "cells above entry for the fixed comparators");
    pl->add_option("--n-lower", pl_args.n_lower, "cells below entry for the fixed comparators");
    add_sso_options(pl, pl_args.sso);
    add_net_options(pl, pl_args.net);
    pl->add_option("--out-dir", pl_args.out_dir, "output directory");

    cmd::ReportArgs rp_args;
    auto* rp = app.add_subcommand("report", "render a comparison table from report files");
    rp->add_option("--input", rp_args.inputs, "backtest report JSON files")->required();
    rp->add_option("--out-dir", rp_args.out_dir, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*synth) cmd::run_synth(synth_args);
        else if (*bt) cmd::run_backtest_cmd(bt_args);
        else if (*opt) cmd::run_optimize(opt_args);
        else if (*ds) cmd::run_dataset(ds_args);
        else if (*tr) cmd::run_train(tr_args);
        else if (*pr) cmd::run_predict(pr_args);
        else if (*pl) cmd::run_pipeline(pl_args);
        else if (*rp) cmd::run_report(rp_args);
        return 0;
    } catch (const InfeasibleError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
