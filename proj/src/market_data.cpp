#include "flexgrid/market_data.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "flexgrid/errors.hpp"
#include "flexgrid/rng.hpp"
#include "flexgrid/textio.hpp"

namespace flexgrid {

SynthKind synth_kind_from_name(std::string_view name) {
    if (name == "random-walk") return SynthKind::random_walk;
    if (name == "mean-reverting") return SynthKind::mean_reverting;
    if (name == "trend") return SynthKind::trend;
    if (name == "sinusoid") return SynthKind::sinusoid;
    throw ParseError("unknown synthetic kind: '" + std::string(name) +
                     "' (expected random-walk, mean-reverting, trend, sinusoid)");
}

std::string_view synth_kind_name(SynthKind kind) {
    switch (kind) {
        case SynthKind::random_walk: return "random-walk";
        case SynthKind::mean_reverting: return "mean-reverting";
        case SynthKind::trend: return "trend";
        case SynthKind::sinusoid: return "sinusoid";
    }
    return "?";
}

namespace {
constexpr double kFactorFloor = 0.01;   // keeps multiplicative shocks positive
constexpr double kSinusoidCycle = 64.0; // periods per full sine cycle
} // namespace

PriceSeries generate_synthetic(const SynthSpec& spec) {
    if (spec.length == 0) throw std::invalid_argument("synthetic: length must be >= 1");
    if (!(spec.start > 0)) throw std::invalid_argument("synthetic: start price must be > 0");
    if (spec.volatility < 0) throw std::invalid_argument("synthetic: volatility must be >= 0");
    if (spec.kind == SynthKind::sinusoid && std::abs(spec.drift) >= 1.0)
        throw std::invalid_argument("synthetic: sinusoid amplitude |drift| must be < 1");
    if (spec.kind == SynthKind::mean_reverting && spec.drift < 0)
        throw std::invalid_argument("synthetic: reversion speed must be >= 0");

    Rng rng(spec.seed);
    PriceSeries out;
    std::ostringstream id;
    id << "synth-" << synth_kind_name(spec.kind) << "-" << spec.seed;
    out.id = id.str();
    out.points.reserve(spec.length);

    double level = spec.start;            // random_walk state
    double logx = std::log(spec.start);   // mean_reverting state
    const double log_mean = logx;

    for (std::size_t t = 0; t < spec.length; ++t) {
        const double z = rng.normal();
        double price = spec.start;
        switch (spec.kind) {
            case SynthKind::random_walk:
                if (t > 0)
                    level *= std::max(1.0 + spec.drift + spec.volatility * z, kFactorFloor);
                price = level;
                break;
            case SynthKind::trend:
                price = spec.start * std::pow(1.0 + spec.drift, static_cast<double>(t)) *
                        std::max(1.0 + spec.volatility * z, kFactorFloor);
                break;
            case SynthKind::mean_reverting:
                if (t > 0)
                    logx += spec.drift * (log_mean - logx) + spec.volatility * z;
                price = std::exp(logx);
                break;
            case SynthKind::sinusoid:
                price = spec.start *
                        (1.0 + spec.drift *
                                   std::sin(2.0 * std::numbers::pi *
                                            static_cast<double>(t) / kSinusoidCycle)) *
                        std::max(1.0 + spec.volatility * z, kFactorFloor);
                break;
        }
        // volume: noisy positive level, independent of the price path
        const double volume = 1e6 * std::max(0.1, 1.0 + 0.3 * rng.normal());
        out.points.push_back({static_cast<std::int64_t>(t), price, volume});
    }
    return out;
}

namespace {

// days since 1970-01-01; accepts ISO dates and bare integers
std::int64_t parse_timestamp(std::string_view text, const std::string& context) {
    if (text.size() == 10 && text[4] == '-' && text[7] == '-') {
        const int y = static_cast<int>(parse_int(text.substr(0, 4), context));
        const unsigned m = static_cast<unsigned>(parse_int(text.substr(5, 2), context));
        const unsigned d = static_cast<unsigned>(parse_int(text.substr(8, 2), context));
        const std::chrono::year_month_day ymd{std::chrono::year{y},
                                              std::chrono::month{m},
                                              std::chrono::day{d}};
        if (!ymd.ok())
            throw ParseError(context + ": invalid calendar date '" + std::string(text) + "'");
        return std::chrono::sys_days(ymd).time_since_epoch().count();
    }
    return parse_int(text, context);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

} // namespace

PriceSeries parse_csv_series(std::string_view text, std::string_view id,
                             std::vector<std::string>* warnings) {
    PriceSeries out;
    out.id = std::string(id);

    std::size_t pos = 0;
    int line_no = 0;
    int date_col = -1, close_col = -1, volume_col = -1;
    std::size_t min_cols = 0;

    while (pos <= text.size()) {
        const std::size_t nl = text.find('\n', pos);
        std::string_view line = text.substr(
            pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (line.empty() || line == "\r") continue;

        const auto fields = split_csv_line(line);
        const std::string context = "line " + std::to_string(line_no);

        if (date_col < 0) { // header row
            for (std::size_t i = 0; i < fields.size(); ++i) {
                const std::string name = lower(fields[i]);
                if (name == "date") date_col = static_cast<int>(i);
                else if (name == "close") close_col = static_cast<int>(i);
                else if (name == "volume") volume_col = static_cast<int>(i);
            }
            if (date_col < 0 || close_col < 0)
                throw ParseError(context + ": header must name 'date' and 'close' columns");
            min_cols = static_cast<std::size_t>(std::max(
                           std::max(date_col, close_col), volume_col)) + 1;
            if (volume_col < 0 && warnings)
                warnings->push_back("no volume column; quantities set to 0");
            continue;
        }

        if (fields.size() < min_cols)
            throw ParseError(context + ": expected at least " +
                             std::to_string(min_cols) + " fields, got " +
                             std::to_string(fields.size()));

        PricePoint p;
        p.timestamp = parse_timestamp(fields[static_cast<std::size_t>(date_col)], context);
        p.price = parse_double(fields[static_cast<std::size_t>(close_col)], context);
        if (!(p.price > 0))
            throw ParseError(context + ": close must be > 0, got " + fmt_double(p.price));
        if (volume_col >= 0) {
            p.quantity = parse_double(fields[static_cast<std::size_t>(volume_col)], context);
            if (p.quantity < 0)
                throw ParseError(context + ": volume must be >= 0");
        }
        if (!out.points.empty() && p.timestamp <= out.points.back().timestamp)
            throw ParseError(context + ": timestamps must strictly increase");
        out.points.push_back(p);
    }

    if (date_col < 0) throw ParseError("empty input: no header row");
    if (out.points.empty()) throw ParseError("no data rows after the header");
    return out;
}

PriceSeries load_csv_series(const std::string& path,
                            std::vector<std::string>* warnings) {
    const std::string text = read_file(path);
    // use the file name as the series id
    const std::size_t slash = path.find_last_of('/');
    return parse_csv_series(text,
                            slash == std::string::npos ? path : path.substr(slash + 1),
                            warnings);
}

std::string series_to_csv(const PriceSeries& series) {
    std::string out = "date,close,volume\n";
    for (const auto& p : series.points) {
        out += std::to_string(p.timestamp);
        out += ',';
        out += fmt_double(p.price);
        out += ',';
        out += fmt_double(p.quantity);
        out += '\n';
    }
    return out;
}

PriceSeries slice_window(const PriceSeries& series, std::size_t start,
                         std::size_t length) {
    if (length == 0) throw std::invalid_argument("slice_window: length must be >= 1");
    if (start > series.size() || length > series.size() - start)
        throw std::invalid_argument(
            "slice_window: [" + std::to_string(start) + ", " +
            std::to_string(start + length) + ") outside series of length " +
            std::to_string(series.size()));
    PriceSeries out;
    out.id = series.id + ":" + std::to_string(start) + "+" + std::to_string(length);
    out.points.assign(series.points.begin() + static_cast<std::ptrdiff_t>(start),
                      series.points.begin() + static_cast<std::ptrdiff_t>(start + length));
    return out;
}

} // namespace flexgrid
