#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "flexgrid/features.hpp"
#include "flexgrid/grid_model.hpp"
#include "flexgrid/matrix.hpp"

namespace flexgrid::fnn {

enum class Activation : std::uint32_t { linear = 0, sigmoid = 1, relu = 2 };

Activation activation_from_name(std::string_view name);
std::string_view activation_name(Activation a);

struct Arch {
    std::vector<int> sizes; // e.g. {8, 500, 500, 500, 4}
    Activation hidden = Activation::sigmoid;
    // the output layer is always linear: targets are price-scale values
};

// Fully connected regression network trained with adam on mean squared error.
// Weights are 64-bit doubles throughout; given a fixed init and training seed
// the whole trajectory is bit-reproducible.
struct Model {
    Arch arch;
    std::vector<Matrix> w;              // w[l] has shape sizes[l+1] x sizes[l]
    std::vector<std::vector<double>> b;
    std::vector<Matrix> mw, vw;         // adam moments
    std::vector<std::vector<double>> mb, vb;
    std::uint64_t adam_step = 0;

    int input_size() const { return arch.sizes.front(); }
    int output_size() const { return arch.sizes.back(); }
    std::size_t layer_count() const { return w.size(); }
    std::size_t parameter_count() const;
};

// weights ~ U(-1,1)/sqrt(fan_in), biases zero
Model init_network(const Arch& arch, std::uint64_t seed);

struct ForwardTrace {
    std::vector<Matrix> activations; // activations[0] is the input batch
};

Matrix forward_batch(const Model& m, const Matrix& x, ForwardTrace* trace = nullptr);
std::vector<double> forward(const Model& m, std::span<const double> x);

// mean over every batch entry and output coordinate
double batch_mse(const Matrix& predicted, const Matrix& actual);

struct Gradients {
    std::vector<Matrix> w;
    std::vector<std::vector<double>> b;
};

// gradient of batch_mse(forward(x), y) with respect to every weight and bias
Gradients backward(const Model& m, const ForwardTrace& trace, const Matrix& y);

struct TrainConfig {
    int epochs = 300;
    int batch = 40;
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::uint64_t seed = 0;
};

void adam_update(Model& m, const Gradients& g, const TrainConfig& cfg);

struct TrainLog {
    std::vector<double> train_mse; // running mean over each epoch's minibatches
    std::vector<double> val_mse;   // full validation pass after each epoch
};

// Minibatch loop with a seeded Fisher-Yates shuffle per epoch. Pass an empty
// validation matrix to skip the validation column.
TrainLog train(Model& m, const Matrix& x_train, const Matrix& y_train,
               const Matrix& x_val, const Matrix& y_val, const TrainConfig& cfg);

// Binary weight file: "GFNN" magic, format version, layer sizes, per-layer
// activation ids, adam step count, then row-major weight/bias doubles, adam
// moments, and a trailing CRC-32. Everything little-endian.
void save_model(const Model& m, const std::string& path);
Model load_model(const std::string& path);

struct PredictedGrid {
    GridSpec spec;
    bool clamped_upper = false;   // raw output left the bounds box
    bool clamped_lower = false;
    bool adjusted_counts = false; // counts clamped or reduced for min spacing
};

// Net output -> usable grid parameters: denormalize, clamp the bounds into the
// profile box (strictly inside), round the counts, then shrink counts if the
// minimum-gap rule needs it. Throws InfeasibleError when no count within the
// box satisfies the gap rule at this fee.
PredictedGrid predict_grid_params(const Model& m, const MarketFeatures& features,
                                  const NormStats& stats,
                                  const sso::BoundsProfile& bounds, double anchor,
                                  double fee_rate);

} // namespace flexgrid::fnn
