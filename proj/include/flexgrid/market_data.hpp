#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace flexgrid {

struct PricePoint {
    // days since 1970-01-01 for dated rows, otherwise a plain period index
    std::int64_t timestamp = 0;
    double price = 0.0;
    // traded volume; stays 0 when the source had no volume column
    double quantity = 0.0;
};

struct PriceSeries {
    std::string id;
    std::vector<PricePoint> points;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
    double first_price() const { return points.front().price; }
    double last_price() const { return points.back().price; }
};

enum class SynthKind { random_walk, mean_reverting, trend, sinusoid };

// Seeded synthetic price processes. All four keep prices strictly positive:
//   random_walk     P[t+1] = P[t] * max(1 + drift + volatility*z, 0.01)
//   trend           P[t]   = start * (1+drift)^t * max(1 + volatility*z, 0.01)
//   mean_reverting  log-space pull toward log(start):
//                   x[t+1] = x[t] + drift*(log(start) - x[t]) + volatility*z
//   sinusoid        P[t]   = start * (1 + drift*sin(2*pi*t/64))
//                          * max(1 + volatility*z, 0.01)
// z is a standard normal draw; `drift` doubles as reversion speed for
// mean_reverting and as amplitude (|drift| < 1) for sinusoid, whose cycle
// length is fixed at 64 periods. Volume is synthesized as a positive noisy
// level so volume features have something to chew on.
struct SynthSpec {
    SynthKind kind = SynthKind::random_walk;
    std::size_t length = 0;
    double start = 100.0;
    double volatility = 0.0;
    double drift = 0.0;
    std::uint64_t seed = 0;
};

SynthKind synth_kind_from_name(std::string_view name);
std::string_view synth_kind_name(SynthKind kind);

PriceSeries generate_synthetic(const SynthSpec& spec);

// CSV with a header line naming at least `date` and `close`; `volume` is
// optional and other columns are ignored. Dates are ISO (YYYY-MM-DD) or plain
// integer period indices, strictly increasing. Parse failures name the
// offending line. Non-fatal oddities (such as a missing volume column) are
// appended to `warnings` when given.
PriceSeries parse_csv_series(std::string_view text, std::string_view id = "csv",
                             std::vector<std::string>* warnings = nullptr);
PriceSeries load_csv_series(const std::string& path,
                            std::vector<std::string>* warnings = nullptr);

std::string series_to_csv(const PriceSeries& series);

// contiguous sub-series [start, start+length), bounds-checked
PriceSeries slice_window(const PriceSeries& series, std::size_t start,
                         std::size_t length);

} // namespace flexgrid
