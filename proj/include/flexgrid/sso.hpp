#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "flexgrid/backtest.hpp"
#include "flexgrid/grid_model.hpp"
#include "flexgrid/market_data.hpp"
#include "flexgrid/rng.hpp"

namespace flexgrid::sso {

// Search box for the four grid parameters, expressed as multiples of the
// anchor price for the two bounds plus an inclusive integer range for the
// cell counts.
struct BoundsProfile {
    double upper_lo = 1.05, upper_hi = 1.30; // G_ul / P0
    double lower_lo = 0.70, lower_hi = 0.95; // G_ll / P0
    int count_lo = 10, count_hi = 50;        // n_upper and n_lower

    static BoundsProfile standard() { return {}; }
    static BoundsProfile wide() { return {1.05, 1.50, 0.50, 0.95, 10, 50}; }
};

BoundsProfile profile_by_number(int number); // 1 = standard, 2 = wide

struct SsoConfig {
    // branch thresholds: a uniform draw below c_g copies the global best,
    // below c_p the personal best, below c_w keeps the current value, and
    // otherwise the variable is redrawn uniformly in its bounds
    double c_g = 0.5;
    double c_p = 0.6;
    double c_w = 0.7;
    int runs = 10;
    int generations = 20;
    int population = 100;
    std::uint64_t seed = 0;
    int repair_attempts = 50;
    // optional per-variable discretization: 0 keeps a variable continuous,
    // L >= 2 snaps it to L evenly spaced levels across the (closed) box.
    // Variable order: upper bound, lower bound, n_upper, n_lower.
    std::array<int, 4> levels = {0, 0, 0, 0};
};

// A fitness evaluation backtests the candidate ladder over this window and
// scores it by settled final wealth.
struct Problem {
    PriceSeries window;
    GridKind kind = GridKind::flexible;
    double capital = 10000.0;
    double fee_rate = 0.0;
    BoundsProfile bounds;

    double anchor() const { return window.first_price(); }
};

struct Candidate {
    std::array<double, 4> x{}; // G_ul, G_ll, n_upper, n_lower
    double fitness = 0.0;
    bool feasible = false;
};

struct TracePoint {
    int run = 0;
    int generation = 0; // 0 is the initial population
    double gbest_fitness = 0.0;
    std::array<double, 4> x{};
};

struct Result {
    Candidate best;
    std::vector<Candidate> run_best;  // one per run
    std::vector<TracePoint> trace;    // (generations+1) rows per run
    std::uint64_t evaluations = 0;
};

// Pure branch rule, exposed for direct testing.
double update_variable(double rho, double fresh, double current, double pbest,
                       double gbest, const SsoConfig& cfg);

// Candidate -> concrete grid parameters. Counts are rounded to integers. For
// the two uniform kinds the upper bound is re-derived from the lower half so
// the anchor lands exactly on a line (x[0] is overwritten accordingly);
// flexible candidates pass through unchanged.
GridSpec materialize(const Problem& problem, std::array<double, 4>& x);

// Enforces box membership and the minimum-gap rule on the candidate's ladder,
// resampling the offending side's variables (every tenth attempt, all four)
// up to `attempts` times. Returns false when no feasible ladder was found.
bool repair(const Problem& problem, std::array<double, 4>& x, Rng& rng,
            const SsoConfig& cfg);

// Settled wealth of the candidate over the problem window.
double evaluate_fitness(const Problem& problem, std::array<double, 4> x);

std::vector<Candidate> init_population(const Problem& problem,
                                       const SsoConfig& cfg, int run);

// Full search: `runs` independent restarts, synchronous generational updates,
// best-of-runs result. Deterministic for a fixed seed: every solution draws
// from its own (run, generation, index) substream, so results do not depend
// on evaluation order. Throws InfeasibleError when no run produced a feasible
// candidate.
Result optimize(const Problem& problem, const SsoConfig& cfg);

// The value of the j-th discretization level (see SsoConfig::levels).
double level_value(const Problem& problem, const SsoConfig& cfg, int var, int index);

} // namespace flexgrid::sso
