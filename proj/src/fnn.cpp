#include "flexgrid/fnn.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <numeric>
#include <stdexcept>

#include "flexgrid/errors.hpp"
#include "flexgrid/rng.hpp"
#include "flexgrid/textio.hpp"

namespace flexgrid::fnn {

Activation activation_from_name(std::string_view name) {
    if (name == "linear") return Activation::linear;
    if (name == "sigmoid") return Activation::sigmoid;
    if (name == "relu") return Activation::relu;
    throw ParseError("unknown activation: '" + std::string(name) +
                     "' (expected linear, sigmoid, relu)");
}

std::string_view activation_name(Activation a) {
    switch (a) {
        case Activation::linear: return "linear";
        case Activation::sigmoid: return "sigmoid";
        case Activation::relu: return "relu";
    }
    return "?";
}

namespace {

void check_arch(const Arch& arch) {
    if (arch.sizes.size() < 2)
        throw std::invalid_argument("fnn: need an input and an output layer");
    for (int s : arch.sizes)
        if (s < 1) throw std::invalid_argument("fnn: layer sizes must be >= 1");
}

double activate(Activation a, double z) {
    switch (a) {
        case Activation::linear: return z;
        case Activation::sigmoid: return 1.0 / (1.0 + std::exp(-z));
        case Activation::relu: return z > 0 ? z : 0.0;
    }
    return z;
}

// derivative expressed through the activation value; for relu the kink at 0
// resolves to 0, matching max(0,z)
double activate_grad(Activation a, double value) {
    switch (a) {
        case Activation::linear: return 1.0;
        case Activation::sigmoid: return value * (1.0 - value);
        case Activation::relu: return value > 0 ? 1.0 : 0.0;
    }
    return 1.0;
}

Activation layer_activation(const Model& m, std::size_t layer) {
    return layer + 1 == m.layer_count() ? Activation::linear : m.arch.hidden;
}

} // namespace

std::size_t Model::parameter_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < w.size(); ++l)
        n += w[l].a.size() + b[l].size();
    return n;
}

Model init_network(const Arch& arch, std::uint64_t seed) {
    check_arch(arch);
    Model m;
    m.arch = arch;
    Rng rng(seed);
    const std::size_t layers = arch.sizes.size() - 1;
    for (std::size_t l = 0; l < layers; ++l) {
        const int fan_in = arch.sizes[l];
        const int fan_out = arch.sizes[l + 1];
        const double s = 1.0 / std::sqrt(static_cast<double>(fan_in));
        Matrix w(fan_out, fan_in);
        for (double& v : w.a) v = rng.uniform(-s, s);
        m.w.push_back(std::move(w));
        m.b.emplace_back(static_cast<std::size_t>(fan_out), 0.0);
        m.mw.emplace_back(fan_out, fan_in);
        m.vw.emplace_back(fan_out, fan_in);
        m.mb.emplace_back(static_cast<std::size_t>(fan_out), 0.0);
        m.vb.emplace_back(static_cast<std::size_t>(fan_out), 0.0);
    }
    return m;
}

Matrix forward_batch(const Model& m, const Matrix& x, ForwardTrace* trace) {
    if (x.cols != m.input_size())
        throw std::invalid_argument("fnn: input has " + std::to_string(x.cols) +
                                    " columns, the network expects " +
                                    std::to_string(m.input_size()));
    if (trace) {
        trace->activations.clear();
        trace->activations.push_back(x);
    }
    Matrix cur = x;
    for (std::size_t l = 0; l < m.layer_count(); ++l) {
        const Matrix& w = m.w[l];
        const auto& b = m.b[l];
        const Activation act = layer_activation(m, l);
        Matrix next(cur.rows, w.rows);
        for (int r = 0; r < cur.rows; ++r) {
            const double* in = cur.row(r);
            double* out = next.row(r);
            for (int j = 0; j < w.rows; ++j) {
                const double* wrow = w.row(j);
                double z = b[static_cast<std::size_t>(j)];
                for (int i = 0; i < w.cols; ++i) z += wrow[i] * in[i];
                out[j] = activate(act, z);
            }
        }
        cur = std::move(next);
        if (trace) trace->activations.push_back(cur);
    }
    return cur;
}

std::vector<double> forward(const Model& m, std::span<const double> x) {
    Matrix in(1, static_cast<int>(x.size()));
    std::copy(x.begin(), x.end(), in.a.begin());
    const Matrix out = forward_batch(m, in);
    return out.a;
}

double batch_mse(const Matrix& predicted, const Matrix& actual) {
    if (predicted.rows != actual.rows || predicted.cols != actual.cols)
        throw std::invalid_argument("fnn: prediction/target shape mismatch");
    if (predicted.rows == 0) throw std::invalid_argument("fnn: empty batch");
    double ss = 0;
    for (std::size_t i = 0; i < predicted.a.size(); ++i) {
        const double d = predicted.a[i] - actual.a[i];
        ss += d * d;
    }
    return ss / static_cast<double>(predicted.a.size());
}

Gradients backward(const Model& m, const ForwardTrace& trace, const Matrix& y) {
    if (trace.activations.size() != m.layer_count() + 1)
        throw std::invalid_argument("fnn: trace does not match the network");
    const Matrix& out = trace.activations.back();
    if (out.rows != y.rows || out.cols != y.cols)
        throw std::invalid_argument("fnn: target shape mismatch");

    Gradients g;
    g.w.resize(m.layer_count());
    g.b.resize(m.layer_count());

    // d(batch mse)/d(output): every entry weighs 1/(batch*outputs)
    const double norm = 2.0 / static_cast<double>(y.a.size());
    Matrix delta(out.rows, out.cols);
    for (std::size_t i = 0; i < out.a.size(); ++i)
        delta.a[i] = norm * (out.a[i] - y.a[i]);

    for (std::size_t l = m.layer_count(); l-- > 0;) {
        const Matrix& a_in = trace.activations[l];
        const Matrix& w = m.w[l];
        Matrix gw(w.rows, w.cols);
        std::vector<double> gb(static_cast<std::size_t>(w.rows), 0.0);
        for (int n = 0; n < delta.rows; ++n) {
            const double* drow = delta.row(n);
            const double* arow = a_in.row(n);
            for (int j = 0; j < w.rows; ++j) {
                const double d = drow[j];
                if (d == 0.0) continue;
                gb[static_cast<std::size_t>(j)] += d;
                double* grow = gw.row(j);
                for (int i = 0; i < w.cols; ++i) grow[i] += d * arow[i];
            }
        }
        g.w[l] = std::move(gw);
        g.b[l] = std::move(gb);

        if (l > 0) {
            const Activation act = layer_activation(m, l - 1);
            Matrix prev(delta.rows, w.cols);
            for (int n = 0; n < delta.rows; ++n) {
                const double* drow = delta.row(n);
                const double* arow = a_in.row(n);
                double* prow = prev.row(n);
                for (int i = 0; i < w.cols; ++i) {
                    double s = 0;
                    for (int j = 0; j < w.rows; ++j) s += drow[j] * w.at(j, i);
                    prow[i] = s * activate_grad(act, arow[i]);
                }
            }
            delta = std::move(prev);
        }
    }
    return g;
}

void adam_update(Model& m, const Gradients& g, const TrainConfig& cfg) {
    if (g.w.size() != m.layer_count())
        throw std::invalid_argument("fnn: gradient does not match the network");
    m.adam_step += 1;
    const double t = static_cast<double>(m.adam_step);
    const double bc1 = 1.0 - std::pow(cfg.beta1, t);
    const double bc2 = 1.0 - std::pow(cfg.beta2, t);
    for (std::size_t l = 0; l < m.layer_count(); ++l) {
        auto update = [&](double& w, double& mom, double& vel, double grad) {
            mom = cfg.beta1 * mom + (1.0 - cfg.beta1) * grad;
            vel = cfg.beta2 * vel + (1.0 - cfg.beta2) * grad * grad;
            w -= cfg.lr * (mom / bc1) / (std::sqrt(vel / bc2) + cfg.eps);
        };
        for (std::size_t i = 0; i < m.w[l].a.size(); ++i)
            update(m.w[l].a[i], m.mw[l].a[i], m.vw[l].a[i], g.w[l].a[i]);
        for (std::size_t i = 0; i < m.b[l].size(); ++i)
            update(m.b[l][i], m.mb[l][i], m.vb[l][i], g.b[l][i]);
    }
}

namespace {

Matrix gather_rows(const Matrix& src, const std::vector<int>& idx, int begin, int count) {
    Matrix out(count, src.cols);
    for (int r = 0; r < count; ++r)
        std::memcpy(out.row(r), src.row(idx[static_cast<std::size_t>(begin + r)]),
                    sizeof(double) * static_cast<std::size_t>(src.cols));
    return out;
}

} // namespace

TrainLog train(Model& m, const Matrix& x_train, const Matrix& y_train,
               const Matrix& x_val, const Matrix& y_val, const TrainConfig& cfg) {
    if (x_train.rows != y_train.rows)
        throw std::invalid_argument("fnn: training inputs and targets disagree on rows");
    if (x_train.rows == 0) throw std::invalid_argument("fnn: empty training set");
    if (y_train.cols != m.output_size())
        throw std::invalid_argument("fnn: target width does not match the network");
    if (cfg.epochs < 1 || cfg.batch < 1)
        throw std::invalid_argument("fnn: epochs and batch size must be >= 1");
    if (!(cfg.lr > 0)) throw std::invalid_argument("fnn: learning rate must be > 0");
    if (x_val.rows != y_val.rows)
        throw std::invalid_argument("fnn: validation inputs and targets disagree on rows");

    const int n = x_train.rows;
    std::vector<int> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    Rng shuffle_rng(cfg.seed);

    TrainLog log;
    log.train_mse.reserve(static_cast<std::size_t>(cfg.epochs));
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (int i = n - 1; i > 0; --i) { // Fisher-Yates on this epoch's order
            const auto j = static_cast<std::size_t>(shuffle_rng.uniform_int(0, i));
            std::swap(idx[static_cast<std::size_t>(i)], idx[j]);
        }
        double sse_weighted = 0;
        for (int off = 0; off < n; off += cfg.batch) {
            const int bs = std::min(cfg.batch, n - off);
            const Matrix xb = gather_rows(x_train, idx, off, bs);
            const Matrix yb = gather_rows(y_train, idx, off, bs);
            ForwardTrace trace;
            const Matrix out = forward_batch(m, xb, &trace);
            sse_weighted += batch_mse(out, yb) * bs;
            adam_update(m, backward(m, trace, yb), cfg);
        }
        log.train_mse.push_back(sse_weighted / n);
        if (x_val.rows > 0)
            log.val_mse.push_back(batch_mse(forward_batch(m, x_val), y_val));
    }
    return log;
}

// ---- weight file -----------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'G', 'F', 'N', 'N'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i)
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i)
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

struct Reader {
    const unsigned char* p;
    std::size_t size;
    std::size_t pos = 0;

    void need(std::size_t n) const {
        if (pos + n > size) throw ParseError("model file truncated");
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[pos + static_cast<std::size_t>(i)]) << (8 * i);
        pos += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[pos + static_cast<std::size_t>(i)]) << (8 * i);
        pos += 8;
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
};

} // namespace

void save_model(const Model& m, const std::string& path) {
    std::string out;
    out.append(kMagic, 4);
    put_u32(out, kVersion);
    const auto layers = static_cast<std::uint32_t>(m.layer_count());
    put_u32(out, layers);
    for (int s : m.arch.sizes) put_u32(out, static_cast<std::uint32_t>(s));
    for (std::size_t l = 0; l < m.layer_count(); ++l)
        put_u32(out, static_cast<std::uint32_t>(layer_activation(m, l)));
    put_u64(out, m.adam_step);

    auto put_block = [&out](const Matrix& w, const std::vector<double>& b) {
        for (double v : w.a) put_f64(out, v);
        for (double v : b) put_f64(out, v);
    };
    for (std::size_t l = 0; l < m.layer_count(); ++l) put_block(m.w[l], m.b[l]);
    for (std::size_t l = 0; l < m.layer_count(); ++l) put_block(m.mw[l], m.mb[l]);
    for (std::size_t l = 0; l < m.layer_count(); ++l) put_block(m.vw[l], m.vb[l]);

    put_u32(out, crc32({reinterpret_cast<const unsigned char*>(out.data()), out.size()}));
    write_file(path, out);
}

Model load_model(const std::string& path) {
    const std::string blob = read_file(path);
    if (blob.size() < 12) throw ParseError(path + ": model file truncated");
    const auto* bytes = reinterpret_cast<const unsigned char*>(blob.data());

    Reader r{bytes, blob.size() - 4};
    const std::uint32_t stored_crc =
        static_cast<std::uint32_t>(bytes[blob.size() - 4]) |
        static_cast<std::uint32_t>(bytes[blob.size() - 3]) << 8 |
        static_cast<std::uint32_t>(bytes[blob.size() - 2]) << 16 |
        static_cast<std::uint32_t>(bytes[blob.size() - 1]) << 24;
    if (crc32({bytes, blob.size() - 4}) != stored_crc)
        throw ParseError(path + ": model file checksum mismatch");

    r.need(4);
    if (std::memcmp(r.p, kMagic, 4) != 0)
        throw ParseError(path + ": not a model file (bad magic)");
    r.pos += 4;
    const std::uint32_t version = r.u32();
    if (version != kVersion)
        throw ParseError(path + ": unsupported model format version " +
                         std::to_string(version));
    const std::uint32_t layers = r.u32();
    if (layers < 1 || layers > 64)
        throw ParseError(path + ": implausible layer count");

    Arch arch;
    arch.sizes.resize(layers + 1);
    for (auto& s : arch.sizes) {
        const std::uint32_t v = r.u32();
        if (v < 1 || v > 1000000) throw ParseError(path + ": implausible layer size");
        s = static_cast<int>(v);
    }
    std::vector<std::uint32_t> acts(layers);
    for (auto& a : acts) {
        a = r.u32();
        if (a > 2) throw ParseError(path + ": unknown activation id");
    }
    if (acts.back() != static_cast<std::uint32_t>(Activation::linear))
        throw ParseError(path + ": output layer must be linear");
    for (std::size_t l = 0; l + 1 < acts.size(); ++l)
        if (acts[l] != acts[0])
            throw ParseError(path + ": mixed hidden activations are not supported");
    arch.hidden = layers > 1 ? static_cast<Activation>(acts[0]) : Activation::sigmoid;

    Model m = init_network(arch, 0);
    m.adam_step = r.u64();

    auto read_block = [&r](Matrix& w, std::vector<double>& b) {
        for (double& v : w.a) v = r.f64();
        for (double& v : b) v = r.f64();
    };
    for (std::size_t l = 0; l < m.layer_count(); ++l) read_block(m.w[l], m.b[l]);
    for (std::size_t l = 0; l < m.layer_count(); ++l) read_block(m.mw[l], m.mb[l]);
    for (std::size_t l = 0; l < m.layer_count(); ++l) read_block(m.vw[l], m.vb[l]);
    if (r.pos != r.size) throw ParseError(path + ": model file has trailing bytes");
    return m;
}

PredictedGrid predict_grid_params(const Model& m, const MarketFeatures& features,
                                  const NormStats& stats,
                                  const sso::BoundsProfile& bounds, double anchor,
                                  double fee_rate) {
    if (m.input_size() != 8 || m.output_size() != 4)
        throw std::invalid_argument(
            "fnn: architecture mismatch, grid prediction needs 8 inputs and 4 "
            "outputs but the model has " + std::to_string(m.input_size()) + "/" +
            std::to_string(m.output_size()));
    if (!(anchor > 0)) throw std::invalid_argument("fnn: anchor price must be > 0");

    const auto x = normalize_features(features.as_array(), stats);
    const std::vector<double> raw = forward(m, x);
    const auto y = denormalize_targets({raw[0], raw[1], raw[2], raw[3]}, stats);

    PredictedGrid out;
    // clamp strictly inside the box so the profile's open bounds stay honored
    auto clamp_interior = [](double v, double lo, double hi, bool& flagged) {
        const double margin = 1e-6 * (hi - lo);
        const double c = std::clamp(v, lo + margin, hi - margin);
        if (c != v) flagged = true;
        return c;
    };
    GridSpec spec;
    spec.kind = GridKind::flexible;
    spec.anchor = anchor;
    spec.upper = clamp_interior(y[0], bounds.upper_lo * anchor,
                                bounds.upper_hi * anchor, out.clamped_upper);
    spec.lower = clamp_interior(y[1], bounds.lower_lo * anchor,
                                bounds.lower_hi * anchor, out.clamped_lower);

    auto clamp_count = [&](double v) {
        const int c = static_cast<int>(std::llround(v));
        const int clamped = std::clamp(c, bounds.count_lo, bounds.count_hi);
        if (clamped != c) out.adjusted_counts = true;
        return clamped;
    };
    spec.n_upper = clamp_count(y[2]);
    spec.n_lower = clamp_count(y[3]);

    // fewer cells mean wider gaps; walk counts down until the gap rule holds
    while (true) {
        const auto check = validate_spacing(build_ladder(spec), fee_rate);
        if (check.ok) break;
        const bool lower_side = check.violating_line < spec.n_lower;
        int& count = lower_side ? spec.n_lower : spec.n_upper;
        if (count <= bounds.count_lo)
            throw InfeasibleError(
                "fnn: predicted grid cannot honor the minimum spacing at fee " +
                fmt_double(fee_rate) + " within the count bounds");
        --count;
        out.adjusted_counts = true;
    }

    out.spec = spec;
    return out;
}

} // namespace flexgrid::fnn
