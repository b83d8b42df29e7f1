#pragma once

#include <string_view>
#include <vector>

namespace flexgrid {

enum class GridKind { equal_distance, equal_ratio, flexible };

GridKind grid_kind_from_name(std::string_view name);
std::string_view grid_kind_name(GridKind kind);

// Parameters of a price ladder between `lower` and `upper`, anchored at
// `anchor` (the entry price, which must sit on a grid line). `n_upper` cells
// lie above the anchor, `n_lower` below.
struct GridSpec {
    GridKind kind = GridKind::flexible;
    double upper = 0.0;
    double lower = 0.0;
    int n_upper = 0;
    int n_lower = 0;
    double anchor = 0.0;
    // flexible only: build the upper half as a pure geometric progression from
    // the anchor instead of the default decreasing-gap fill
    bool geometric_upper = false;
};

// A materialized ladder of n+1 ascending lines. The cell between lines[i] and
// lines[i+1] is cell i. Construction by kind:
//   equal_distance  lines step by (upper-lower)/n
//   equal_ratio     lines grow geometrically by (upper/lower)^(1/n)
//   flexible        lower half falls geometrically from the anchor by
//                   ratio_lower = (anchor/lower)^(1/n_lower); upper half gaps
//                   shrink toward `upper` by decay_upper = (anchor/upper)^(1/n_upper),
//                   scaled so they sum to exactly upper - anchor. Gaps widen
//                   toward the anchor and tighten toward both bounds.
// For the two uniform kinds the anchor must land on a line within 1e-6
// relative, otherwise construction fails rather than silently snapping.
struct LevelLadder {
    GridKind kind = GridKind::flexible;
    std::vector<double> lines;
    int anchor_index = 0;
    double spacing = 0.0;      // equal_distance step
    double ratio = 0.0;        // equal_ratio multiplier
    double ratio_lower = 0.0;  // flexible lower-half ratio, > 1
    double decay_upper = 0.0;  // flexible upper-half gap decay, in (0, 1)

    int cell_count() const { return static_cast<int>(lines.size()) - 1; }
    int upper_cells() const { return cell_count() - anchor_index; }
    int lower_cells() const { return anchor_index; }
    double anchor_price() const { return lines[static_cast<std::size_t>(anchor_index)]; }
};

LevelLadder build_ladder(const GridSpec& spec);

// Capital split for a session on `ladder` with total capital F0 and a
// proportional fee. unit_volume is sized so the anchor purchase of the
// n_upper cells plus every lower-line buy, fees included, exactly exhausts F0:
//   unit_volume = F0 / ((1+fee) * (n_upper*P0 + sum of lower lines))
// spot_value = unit_volume*n_upper*P0 is bought at the anchor; cash holds the
// rest, which covers all lower buys with their fees to the last unit.
// At fee = 0, spot_value + cash == capital.
struct Allocation {
    double unit_volume = 0.0; // units traded per cell fill (G_v)
    double spot_value = 0.0;  // S0
    double cash = 0.0;        // C0
    double capital = 0.0;     // F0
    double fee_rate = 0.0;    // h
};

Allocation initial_allocation(const LevelLadder& ladder, double capital,
                              double fee_rate);

// Checks every adjacent pair against the minimum-gap rule
// g[i+1] - g[i] > fee_rate * g[i+1], which keeps one grid hop ahead of the
// fee on the sell side. Returns the first offending pair, if any.
struct SpacingCheck {
    bool ok = true;
    int violating_line = -1; // i of the bad (g[i], g[i+1]) pair
};

SpacingCheck validate_spacing(const LevelLadder& ladder, double fee_rate);

} // namespace flexgrid
