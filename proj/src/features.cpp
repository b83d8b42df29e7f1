#include "flexgrid/features.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "flexgrid/errors.hpp"
#include "flexgrid/textio.hpp"

namespace flexgrid {

MarketFeatures extract_features(const PriceSeries& window) {
    const std::size_t n = window.size();
    if (n < 2)
        throw std::invalid_argument("features: window needs at least two points");

    MarketFeatures f;
    f.high = window.points.front().price;
    f.low = f.high;
    double psum = 0, qsum = 0;
    for (const auto& p : window.points) {
        f.high = std::max(f.high, p.price);
        f.low = std::min(f.low, p.price);
        psum += p.price;
        qsum += p.quantity;
    }
    f.mean_price = psum / static_cast<double>(n);
    f.mean_quantity = qsum / static_cast<double>(n);
    f.price_change = window.points.front().price - window.points.back().price;
    f.quantity_change = window.points.front().quantity - window.points.back().quantity;

    double pss = 0, qss = 0;
    for (const auto& p : window.points) {
        pss += (p.price - f.mean_price) * (p.price - f.mean_price);
        qss += (p.quantity - f.mean_quantity) * (p.quantity - f.mean_quantity);
    }
    f.price_sigma = std::sqrt(pss / static_cast<double>(n));
    f.quantity_sigma = std::sqrt(qss / static_cast<double>(n));
    return f;
}

Dataset build_dataset(const PriceSeries& series, const DatasetBuildConfig& cfg) {
    if (cfg.window < 2)
        throw std::invalid_argument("dataset: window must be >= 2");
    if (cfg.stride < 1)
        throw std::invalid_argument("dataset: stride must be >= 1");
    const std::size_t span = cfg.shifted_labels ? 2 * cfg.window : cfg.window;
    if (series.size() < span)
        throw std::invalid_argument(
            "dataset: series of length " + std::to_string(series.size()) +
            " is shorter than the required span " + std::to_string(span));

    Dataset ds;
    ds.config = cfg;
    ds.source_id = series.id;

    for (std::size_t start = 0; start + span <= series.size(); start += cfg.stride) {
        const PriceSeries feat_win = slice_window(series, start, cfg.window);
        const PriceSeries label_win =
            cfg.shifted_labels ? slice_window(series, start + cfg.window, cfg.window)
                               : feat_win;

        sso::Problem problem;
        problem.window = label_win;
        problem.kind = cfg.kind;
        problem.capital = cfg.capital;
        problem.fee_rate = cfg.fee_rate;
        problem.bounds = cfg.bounds;

        sso::SsoConfig sso_cfg = cfg.sso;
        sso_cfg.seed = derive_seed(cfg.sso.seed, start, 0xDA7AULL);

        try {
            const sso::Result result = sso::optimize(problem, sso_cfg);
            LabeledSample s;
            s.window_start = start;
            s.features = extract_features(feat_win);
            s.label = result.best.x;
            s.anchor = label_win.first_price();
            s.fitness = result.best.fitness;
            ds.samples.push_back(s);
        } catch (const std::exception& e) {
            ++ds.skipped;
            ds.warnings.push_back("window at " + std::to_string(start) +
                                  " skipped: " + e.what());
        }
    }
    return ds;
}

namespace {

std::pair<Dataset, Dataset> split_common(const Dataset& ds, std::size_t idx) {
    if (idx == 0 || idx >= ds.samples.size())
        throw std::invalid_argument(
            "split: boundary " + std::to_string(idx) + " would leave an empty side (" +
            std::to_string(ds.samples.size()) + " samples)");
    Dataset train, val;
    train.config = ds.config;
    val.config = ds.config;
    train.source_id = ds.source_id;
    val.source_id = ds.source_id;
    train.samples.assign(ds.samples.begin(),
                         ds.samples.begin() + static_cast<std::ptrdiff_t>(idx));
    val.samples.assign(ds.samples.begin() + static_cast<std::ptrdiff_t>(idx),
                       ds.samples.end());
    return {std::move(train), std::move(val)};
}

} // namespace

std::pair<Dataset, Dataset> split_dataset(const Dataset& ds, double train_fraction) {
    if (!(train_fraction > 0 && train_fraction < 1))
        throw std::invalid_argument("split: fraction must be in (0, 1)");
    return split_common(
        ds, static_cast<std::size_t>(std::floor(
                static_cast<double>(ds.samples.size()) * train_fraction)));
}

std::pair<Dataset, Dataset> split_dataset_at(const Dataset& ds, std::size_t index) {
    return split_common(ds, index);
}

namespace {

ColumnStats column_stats(const Matrix& m, int col, const char* what, int index,
                         std::vector<std::string>& warnings) {
    double mean = 0;
    for (int r = 0; r < m.rows; ++r) mean += m.at(r, col);
    mean /= m.rows;
    double ss = 0;
    for (int r = 0; r < m.rows; ++r)
        ss += (m.at(r, col) - mean) * (m.at(r, col) - mean);
    double scale = std::sqrt(ss / m.rows);
    if (scale == 0.0) {
        warnings.push_back(std::string(what) + " column " + std::to_string(index + 1) +
                           " has zero variance; scale clamped to 1");
        scale = 1.0;
    }
    return {mean, scale};
}

} // namespace

NormStats fit_normalization(const Dataset& train, bool normalize_targets) {
    if (train.samples.empty())
        throw std::invalid_argument("normalization: empty training set");
    NormStats st;
    st.normalized_targets = normalize_targets;
    const Matrix f = feature_matrix(train);
    for (int c = 0; c < 8; ++c)
        st.features[static_cast<std::size_t>(c)] =
            column_stats(f, c, "feature", c, st.warnings);
    if (normalize_targets) {
        const Matrix t = target_matrix(train);
        for (int c = 0; c < 4; ++c)
            st.targets[static_cast<std::size_t>(c)] =
                column_stats(t, c, "target", c, st.warnings);
    }
    return st;
}

Matrix feature_matrix(const Dataset& ds) {
    Matrix m(static_cast<int>(ds.samples.size()), 8);
    for (int r = 0; r < m.rows; ++r) {
        const auto row = ds.samples[static_cast<std::size_t>(r)].features.as_array();
        std::copy(row.begin(), row.end(), m.row(r));
    }
    return m;
}

Matrix target_matrix(const Dataset& ds) {
    Matrix m(static_cast<int>(ds.samples.size()), 4);
    for (int r = 0; r < m.rows; ++r) {
        const auto& l = ds.samples[static_cast<std::size_t>(r)].label;
        std::copy(l.begin(), l.end(), m.row(r));
    }
    return m;
}

namespace {

Matrix apply_norm(const Matrix& raw, const ColumnStats* stats, int n) {
    if (raw.cols != n)
        throw std::invalid_argument("normalize: expected " + std::to_string(n) +
                                    " columns, got " + std::to_string(raw.cols));
    Matrix out(raw.rows, raw.cols);
    for (int r = 0; r < raw.rows; ++r)
        for (int c = 0; c < raw.cols; ++c)
            out.at(r, c) = (raw.at(r, c) - stats[c].mean) / stats[c].scale;
    return out;
}

} // namespace

Matrix apply_feature_norm(const Matrix& raw, const NormStats& stats) {
    return apply_norm(raw, stats.features.data(), 8);
}

Matrix apply_target_norm(const Matrix& raw, const NormStats& stats) {
    if (!stats.normalized_targets) return raw;
    return apply_norm(raw, stats.targets.data(), 4);
}

std::array<double, 8> normalize_features(const std::array<double, 8>& raw,
                                         const NormStats& stats) {
    std::array<double, 8> out{};
    for (std::size_t c = 0; c < 8; ++c)
        out[c] = (raw[c] - stats.features[c].mean) / stats.features[c].scale;
    return out;
}

std::array<double, 4> denormalize_targets(const std::array<double, 4>& scaled,
                                          const NormStats& stats) {
    if (!stats.normalized_targets) return scaled;
    std::array<double, 4> out{};
    for (std::size_t c = 0; c < 4; ++c)
        out[c] = scaled[c] * stats.targets[c].scale + stats.targets[c].mean;
    return out;
}

std::string dataset_to_csv(const Dataset& ds) {
    std::string out =
        "window_start,f1,f2,f3,f4,f5,f6,f7,f8,gul,gll,nu,nl,p0,fitness\n";
    for (const auto& s : ds.samples) {
        out += std::to_string(s.window_start);
        for (double f : s.features.as_array()) {
            out += ',';
            out += fmt_double(f);
        }
        for (double l : s.label) {
            out += ',';
            out += fmt_double(l);
        }
        out += ',';
        out += fmt_double(s.anchor);
        out += ',';
        out += fmt_double(s.fitness);
        out += '\n';
    }
    return out;
}

Dataset dataset_from_csv(std::string_view text) {
    Dataset ds;
    std::size_t pos = 0;
    int line_no = 0;
    bool saw_header = false;
    while (pos <= text.size()) {
        const std::size_t nl = text.find('\n', pos);
        std::string_view line = text.substr(
            pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (line.empty() || line == "\r") continue;
        if (!saw_header) {
            if (!line.starts_with("window_start,"))
                throw ParseError("dataset line 1: unexpected header");
            saw_header = true;
            continue;
        }
        const auto fields = split_csv_line(line);
        const std::string ctx = "dataset line " + std::to_string(line_no);
        if (fields.size() != 15)
            throw ParseError(ctx + ": expected 15 fields, got " +
                             std::to_string(fields.size()));
        LabeledSample s;
        s.window_start = static_cast<std::size_t>(parse_int(fields[0], ctx));
        std::array<double, 8> f{};
        for (std::size_t i = 0; i < 8; ++i) f[i] = parse_double(fields[1 + i], ctx);
        s.features = {f[0], f[1], f[2], f[3], f[4], f[5], f[6], f[7]};
        for (std::size_t i = 0; i < 4; ++i)
            s.label[i] = parse_double(fields[9 + i], ctx);
        s.anchor = parse_double(fields[13], ctx);
        s.fitness = parse_double(fields[14], ctx);
        ds.samples.push_back(s);
    }
    if (!saw_header) throw ParseError("dataset: empty input");
    return ds;
}

} // namespace flexgrid
