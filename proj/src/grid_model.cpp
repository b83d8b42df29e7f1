#include "flexgrid/grid_model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "flexgrid/errors.hpp"
#include "flexgrid/textio.hpp"

namespace flexgrid {

GridKind grid_kind_from_name(std::string_view name) {
    if (name == "equal-distance") return GridKind::equal_distance;
    if (name == "equal-ratio") return GridKind::equal_ratio;
    if (name == "flexible") return GridKind::flexible;
    throw ParseError("unknown grid kind: '" + std::string(name) +
                     "' (expected equal-distance, equal-ratio, flexible)");
}

std::string_view grid_kind_name(GridKind kind) {
    switch (kind) {
        case GridKind::equal_distance: return "equal-distance";
        case GridKind::equal_ratio: return "equal-ratio";
        case GridKind::flexible: return "flexible";
    }
    return "?";
}

namespace {

constexpr double kAnchorTol = 1e-6; // relative tolerance for anchor-on-line

void check_spec(const GridSpec& s) {
    if (!(s.lower > 0))
        throw InfeasibleError("grid: lower bound must be > 0, got " + fmt_double(s.lower));
    if (!(s.lower < s.anchor && s.anchor < s.upper))
        throw InfeasibleError("grid: need lower < anchor < upper, got " +
                              fmt_double(s.lower) + " / " + fmt_double(s.anchor) +
                              " / " + fmt_double(s.upper));
    if (s.n_upper < 1 || s.n_lower < 1)
        throw InfeasibleError("grid: need at least one cell on each side of the anchor");
}

void require_anchored(double line, double anchor, const char* kind) {
    if (std::abs(line - anchor) > kAnchorTol * anchor)
        throw InfeasibleError(std::string("grid: anchor ") + fmt_double(anchor) +
                              " does not land on a " + kind + " grid line (nearest " +
                              fmt_double(line) + "); adjust bounds or cell counts");
}

} // namespace

LevelLadder build_ladder(const GridSpec& spec) {
    check_spec(spec);
    const int n = spec.n_upper + spec.n_lower;
    const int k = spec.n_lower;

    LevelLadder ladder;
    ladder.kind = spec.kind;
    ladder.anchor_index = k;
    ladder.lines.resize(static_cast<std::size_t>(n) + 1);

    switch (spec.kind) {
        case GridKind::equal_distance: {
            const double step = (spec.upper - spec.lower) / n;
            ladder.spacing = step;
            for (int i = 0; i <= n; ++i)
                ladder.lines[static_cast<std::size_t>(i)] = spec.lower + step * i;
            ladder.lines.back() = spec.upper;
            require_anchored(ladder.lines[static_cast<std::size_t>(k)], spec.anchor,
                             "uniform-step");
            // the entry price must sit on a line; store it exactly, like the bounds
            ladder.lines[static_cast<std::size_t>(k)] = spec.anchor;
            break;
        }
        case GridKind::equal_ratio: {
            const double ratio = std::pow(spec.upper / spec.lower, 1.0 / n);
            ladder.ratio = ratio;
            for (int i = 0; i <= n; ++i)
                ladder.lines[static_cast<std::size_t>(i)] =
                    spec.lower * std::pow(ratio, i);
            ladder.lines.front() = spec.lower;
            ladder.lines.back() = spec.upper;
            require_anchored(ladder.lines[static_cast<std::size_t>(k)], spec.anchor,
                             "geometric");
            ladder.lines[static_cast<std::size_t>(k)] = spec.anchor;
            break;
        }
        case GridKind::flexible: {
            // Lower half: geometric descent from the anchor reaches the lower
            // bound exactly after n_lower steps.
            const double r_lo = std::pow(spec.anchor / spec.lower, 1.0 / spec.n_lower);
            ladder.ratio_lower = r_lo;
            ladder.lines[static_cast<std::size_t>(k)] = spec.anchor;
            for (int j = 1; j <= spec.n_lower; ++j)
                ladder.lines[static_cast<std::size_t>(k - j)] =
                    spec.anchor / std::pow(r_lo, j);
            ladder.lines.front() = spec.lower;

            // Upper half: gaps shrink geometrically with factor decay < 1, the
            // first gap scaled so the n_upper gaps sum to exactly upper-anchor.
            // The ladder therefore thins out near the anchor and packs tight
            // under the upper bound, mirroring the lower half's shape.
            const double decay = std::pow(spec.anchor / spec.upper, 1.0 / spec.n_upper);
            ladder.decay_upper = decay;
            if (spec.geometric_upper) {
                for (int m = 1; m <= spec.n_upper; ++m)
                    ladder.lines[static_cast<std::size_t>(k + m)] =
                        spec.anchor * std::pow(1.0 / decay, m);
            } else {
                const double span = spec.upper - spec.anchor;
                const double first_gap =
                    span * (1.0 - decay) / (1.0 - std::pow(decay, spec.n_upper));
                double level = spec.anchor;
                double gap = first_gap;
                for (int m = 1; m <= spec.n_upper; ++m) {
                    level += gap;
                    ladder.lines[static_cast<std::size_t>(k + m)] = level;
                    gap *= decay;
                }
            }
            ladder.lines.back() = spec.upper;
            break;
        }
    }
    return ladder;
}

Allocation initial_allocation(const LevelLadder& ladder, double capital,
                              double fee_rate) {
    if (!(capital > 0))
        throw std::invalid_argument("allocation: capital must be > 0");
    if (fee_rate < 0 || fee_rate >= 1)
        throw std::invalid_argument("allocation: fee rate must be in [0, 1)");

    const double p0 = ladder.anchor_price();
    const int n_upper = ladder.upper_cells();
    double lower_sum = 0;
    for (int i = 0; i < ladder.anchor_index; ++i)
        lower_sum += ladder.lines[static_cast<std::size_t>(i)];

    Allocation a;
    a.capital = capital;
    a.fee_rate = fee_rate;
    a.unit_volume = capital / ((1.0 + fee_rate) * (n_upper * p0 + lower_sum));
    // keep (G_v * n_upper) * p0 association: the settlement path multiplies
    // the held quantity by price, and the two must cancel bit-for-bit on a
    // flat series at zero fee
    a.spot_value = (a.unit_volume * n_upper) * p0;
    a.cash = capital - a.spot_value * (1.0 + fee_rate);
    return a;
}

SpacingCheck validate_spacing(const LevelLadder& ladder, double fee_rate) {
    if (fee_rate < 0 || fee_rate >= 1)
        throw std::invalid_argument("spacing: fee rate must be in [0, 1)");
    for (std::size_t i = 0; i + 1 < ladder.lines.size(); ++i) {
        const double gap = ladder.lines[i + 1] - ladder.lines[i];
        if (!(gap > fee_rate * ladder.lines[i + 1]))
            return {false, static_cast<int>(i)};
    }
    return {true, -1};
}

} // namespace flexgrid
