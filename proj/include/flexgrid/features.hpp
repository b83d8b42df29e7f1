#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "flexgrid/market_data.hpp"
#include "flexgrid/matrix.hpp"
#include "flexgrid/sso.hpp"

namespace flexgrid {

// Eight summary values of one price window. Change features are
// first-minus-last, so a window that rises ends with a negative price_change.
// Sigmas are population standard deviations.
struct MarketFeatures {
    double high = 0.0;
    double low = 0.0;
    double mean_price = 0.0;
    double mean_quantity = 0.0;
    double price_change = 0.0;
    double quantity_change = 0.0;
    double price_sigma = 0.0;
    double quantity_sigma = 0.0;

    std::array<double, 8> as_array() const {
        return {high,         low,             mean_price,  mean_quantity,
                price_change, quantity_change, price_sigma, quantity_sigma};
    }
};

MarketFeatures extract_features(const PriceSeries& window);

struct LabeledSample {
    std::size_t window_start = 0;       // offset of the feature window
    MarketFeatures features;
    std::array<double, 4> label{};      // optimizer's G_ul, G_ll, n_upper, n_lower
    double anchor = 0.0;                // first close of the label window
    double fitness = 0.0;               // settled wealth the label achieved
};

struct DatasetBuildConfig {
    std::size_t window = 30;
    std::size_t stride = 5;
    // false: labels are optimized on the feature window itself; true: on the
    // window immediately after it, so features never see the label's prices
    bool shifted_labels = false;
    GridKind kind = GridKind::flexible;
    double capital = 10000.0;
    double fee_rate = 0.0;
    sso::BoundsProfile bounds;
    sso::SsoConfig sso;
};

struct Dataset {
    std::vector<LabeledSample> samples;
    DatasetBuildConfig config;
    std::string source_id;
    std::size_t skipped = 0;              // windows whose optimization failed
    std::vector<std::string> warnings;
};

// Slides a window over the series (step = stride) and labels each position
// with the optimizer's best grid parameters. Window count follows
// floor((len - W) / stride) + 1, or with shifted labels
// floor((len - 2W) / stride) + 1. Each window gets its own seed derived from
// the configured one. Windows that fail to optimize are skipped and recorded.
Dataset build_dataset(const PriceSeries& series, const DatasetBuildConfig& cfg);

// chronological split; throws when either side would be empty
std::pair<Dataset, Dataset> split_dataset(const Dataset& ds, double train_fraction);
std::pair<Dataset, Dataset> split_dataset_at(const Dataset& ds, std::size_t index);

// Per-column z-score parameters fitted on training data only. Zero-variance
// columns get scale 1 (recorded in warnings) so normalization stays invertible.
struct ColumnStats {
    double mean = 0.0;
    double scale = 1.0;
};

struct NormStats {
    std::array<ColumnStats, 8> features{};
    std::array<ColumnStats, 4> targets{};
    bool normalized_targets = true; // false: targets pass through raw
    std::vector<std::string> warnings;
};

NormStats fit_normalization(const Dataset& train, bool normalize_targets);

Matrix feature_matrix(const Dataset& ds); // N x 8, raw
Matrix target_matrix(const Dataset& ds);  // N x 4, raw

Matrix apply_feature_norm(const Matrix& raw, const NormStats& stats);
Matrix apply_target_norm(const Matrix& raw, const NormStats& stats);

std::array<double, 8> normalize_features(const std::array<double, 8>& raw,
                                         const NormStats& stats);
std::array<double, 4> denormalize_targets(const std::array<double, 4>& scaled,
                                          const NormStats& stats);

// CSV round-trip of the samples (header:
// window_start,f1..f8,gul,gll,nu,nl,p0,fitness). Doubles are written in
// shortest round-trip form, so reading back reproduces them exactly.
std::string dataset_to_csv(const Dataset& ds);
Dataset dataset_from_csv(std::string_view text);

} // namespace flexgrid
