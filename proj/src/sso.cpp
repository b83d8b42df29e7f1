#include "flexgrid/sso.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "flexgrid/errors.hpp"

namespace flexgrid::sso {

BoundsProfile profile_by_number(int number) {
    if (number == 1) return BoundsProfile::standard();
    if (number == 2) return BoundsProfile::wide();
    throw std::invalid_argument("sso: unknown bounds profile " + std::to_string(number) +
                                " (expected 1 or 2)");
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void validate(const Problem& p, const SsoConfig& cfg) {
    if (p.window.size() < 2)
        throw std::invalid_argument("sso: fitness window needs at least two prices");
    if (!(p.capital > 0)) throw std::invalid_argument("sso: capital must be > 0");
    if (p.fee_rate < 0 || p.fee_rate >= 1)
        throw std::invalid_argument("sso: fee rate must be in [0, 1)");
    const auto& b = p.bounds;
    if (!(1.0 < b.upper_lo && b.upper_lo < b.upper_hi))
        throw std::invalid_argument("sso: upper-bound multiples must satisfy 1 < lo < hi");
    if (!(0.0 < b.lower_lo && b.lower_lo < b.lower_hi && b.lower_hi < 1.0))
        throw std::invalid_argument("sso: lower-bound multiples must satisfy 0 < lo < hi < 1");
    if (b.count_lo < 1 || b.count_lo > b.count_hi)
        throw std::invalid_argument("sso: count bounds must satisfy 1 <= lo <= hi");
    if (!(0.0 < cfg.c_g && cfg.c_g < cfg.c_p && cfg.c_p < cfg.c_w && cfg.c_w < 1.0))
        throw std::invalid_argument("sso: thresholds must satisfy 0 < c_g < c_p < c_w < 1");
    if (cfg.runs < 1 || cfg.generations < 1 || cfg.population < 1)
        throw std::invalid_argument("sso: runs, generations and population must be >= 1");
    if (cfg.repair_attempts < 0)
        throw std::invalid_argument("sso: repair attempts must be >= 0");
    for (int l : cfg.levels)
        if (l != 0 && l < 2)
            throw std::invalid_argument("sso: discretization needs >= 2 levels");
}

struct Box {
    std::array<double, 4> lo{}, hi{};
    std::array<bool, 4> integer{};
};

Box make_box(const Problem& p) {
    const double p0 = p.anchor();
    Box b;
    b.lo = {p.bounds.upper_lo * p0, p.bounds.lower_lo * p0,
            static_cast<double>(p.bounds.count_lo),
            static_cast<double>(p.bounds.count_lo)};
    b.hi = {p.bounds.upper_hi * p0, p.bounds.lower_hi * p0,
            static_cast<double>(p.bounds.count_hi),
            static_cast<double>(p.bounds.count_hi)};
    b.integer = {false, false, true, true};
    return b;
}

double draw_var(const Box& box, const SsoConfig& cfg, const Problem& p, int var,
                Rng& rng) {
    if (cfg.levels[static_cast<std::size_t>(var)] > 0) {
        const int idx = static_cast<int>(
            rng.uniform_int(0, cfg.levels[static_cast<std::size_t>(var)] - 1));
        return level_value(p, cfg, var, idx);
    }
    const auto v = static_cast<std::size_t>(var);
    if (box.integer[v])
        return static_cast<double>(rng.uniform_int(
            static_cast<std::int64_t>(box.lo[v]), static_cast<std::int64_t>(box.hi[v])));
    return rng.uniform_open(box.lo[v], box.hi[v]);
}

bool in_box(const Box& box, const SsoConfig& cfg, int var, double v) {
    const auto i = static_cast<std::size_t>(var);
    if (cfg.levels[i] > 0 || box.integer[i]) // lattice and counts include the ends
        return v >= box.lo[i] && v <= box.hi[i];
    return v > box.lo[i] && v < box.hi[i];
}

Candidate best_of(const std::vector<Candidate>& pop) {
    const Candidate* best = &pop.front();
    for (const auto& c : pop)
        if (c.fitness > best->fitness) best = &c;
    return *best;
}

} // namespace

double level_value(const Problem& p, const SsoConfig& cfg, int var, int index) {
    const Box box = make_box(p);
    const auto v = static_cast<std::size_t>(var);
    const int n = cfg.levels[v];
    if (n < 2) throw std::invalid_argument("level_value: variable is not discretized");
    if (index < 0 || index >= n) throw std::invalid_argument("level_value: index out of range");
    return box.lo[v] + (box.hi[v] - box.lo[v]) * index / (n - 1);
}

double update_variable(double rho, double fresh, double current, double pbest,
                       double gbest, const SsoConfig& cfg) {
    if (rho < cfg.c_g) return gbest;
    if (rho < cfg.c_p) return pbest;
    if (rho < cfg.c_w) return current;
    return fresh;
}

GridSpec materialize(const Problem& p, std::array<double, 4>& x) {
    GridSpec s;
    s.kind = p.kind;
    s.anchor = p.anchor();
    s.n_upper = static_cast<int>(std::llround(x[2]));
    s.n_lower = static_cast<int>(std::llround(x[3]));
    x[2] = s.n_upper;
    x[3] = s.n_lower;
    s.lower = x[1];
    switch (p.kind) {
        case GridKind::equal_distance: {
            // keep the anchor on a line: spacing follows from the lower half,
            // the upper bound snaps onto the implied lattice
            const double step = (s.anchor - s.lower) / s.n_lower;
            s.upper = s.anchor + step * s.n_upper;
            x[0] = s.upper;
            break;
        }
        case GridKind::equal_ratio: {
            const double ratio = std::pow(s.anchor / s.lower, 1.0 / s.n_lower);
            s.upper = s.anchor * std::pow(ratio, s.n_upper);
            x[0] = s.upper;
            break;
        }
        case GridKind::flexible:
            s.upper = x[0];
            break;
    }
    return s;
}

bool repair(const Problem& p, std::array<double, 4>& x, Rng& rng,
            const SsoConfig& cfg) {
    const Box box = make_box(p);
    for (int attempt = 0;; ++attempt) {
        bool bad_upper = false;
        bool bad_lower = false;

        std::array<double, 4> trial = x;
        const GridSpec spec = materialize(p, trial);
        if (!in_box(box, cfg, 0, spec.upper)) {
            bad_upper = true; // snapped upper bound left the box
        } else {
            const auto check = validate_spacing(build_ladder(spec), p.fee_rate);
            if (!check.ok) {
                if (check.violating_line < spec.n_lower) bad_lower = true;
                else bad_upper = true;
            }
        }
        if (!bad_upper && !bad_lower) {
            x = trial;
            return true;
        }
        if (attempt >= cfg.repair_attempts) return false;

        // resample the side that broke; periodically shake all four variables
        // in case the sides constrain each other
        const bool all = (attempt + 1) % 10 == 0;
        if (bad_upper || all) {
            x[0] = draw_var(box, cfg, p, 0, rng);
            x[2] = draw_var(box, cfg, p, 2, rng);
        }
        if (bad_lower || all) {
            x[1] = draw_var(box, cfg, p, 1, rng);
            x[3] = draw_var(box, cfg, p, 3, rng);
        }
    }
}

double evaluate_fitness(const Problem& p, std::array<double, 4> x) {
    const GridSpec spec = materialize(p, x);
    return run_backtest(p.window, spec, p.capital, p.fee_rate).final_wealth;
}

std::vector<Candidate> init_population(const Problem& p, const SsoConfig& cfg,
                                       int run) {
    const Box box = make_box(p);
    std::vector<Candidate> pop;
    pop.reserve(static_cast<std::size_t>(cfg.population));
    for (int s = 0; s < cfg.population; ++s) {
        Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(run), 0,
                            static_cast<std::uint64_t>(s)));
        Candidate c;
        for (int j = 0; j < 4; ++j)
            c.x[static_cast<std::size_t>(j)] = draw_var(box, cfg, p, j, rng);
        c.feasible = repair(p, c.x, rng, cfg);
        c.fitness = c.feasible ? evaluate_fitness(p, c.x) : kNegInf;
        pop.push_back(c);
    }
    return pop;
}

Result optimize(const Problem& p, const SsoConfig& cfg) {
    validate(p, cfg);
    const Box box = make_box(p);
    Result res;

    for (int run = 0; run < cfg.runs; ++run) {
        auto pbest = init_population(p, cfg, run);
        for (const auto& c : pbest)
            if (c.feasible) ++res.evaluations;

        std::vector<std::array<double, 4>> current;
        current.reserve(pbest.size());
        for (const auto& c : pbest) current.push_back(c.x);

        Candidate gbest = best_of(pbest);
        res.trace.push_back({run, 0, gbest.fitness, gbest.x});

        for (int gen = 1; gen <= cfg.generations; ++gen) {
            for (int s = 0; s < cfg.population; ++s) {
                const auto si = static_cast<std::size_t>(s);
                Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(run),
                                    static_cast<std::uint64_t>(gen),
                                    static_cast<std::uint64_t>(s)));
                std::array<double, 4> x = current[si];
                for (int j = 0; j < 4; ++j) {
                    const auto ji = static_cast<std::size_t>(j);
                    const double rho = rng.next_double();
                    if (rho < cfg.c_g) x[ji] = gbest.x[ji];
                    else if (rho < cfg.c_p) x[ji] = pbest[si].x[ji];
                    else if (rho < cfg.c_w) { /* keep */ }
                    else x[ji] = draw_var(box, cfg, p, j, rng);
                }
                const bool feasible = repair(p, x, rng, cfg);
                double fitness = kNegInf;
                if (feasible) {
                    fitness = evaluate_fitness(p, x);
                    ++res.evaluations;
                }
                current[si] = x;
                if (fitness > pbest[si].fitness) pbest[si] = {x, fitness, feasible};
            }
            // synchronous refresh: the new gbest only steers the next generation
            gbest = best_of(pbest);
            res.trace.push_back({run, gen, gbest.fitness, gbest.x});
        }
        res.run_best.push_back(gbest);
    }

    res.best = res.run_best.front();
    for (const auto& c : res.run_best)
        if (c.fitness > res.best.fitness) res.best = c;
    if (!res.best.feasible)
        throw InfeasibleError(
            "sso: no feasible grid in the search box; the fee's minimum spacing "
            "rules out every sampled ladder");
    return res;
}

} // namespace flexgrid::sso
