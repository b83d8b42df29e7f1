#include "flexgrid/metrics.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace flexgrid {

double roi(double capital, double final_wealth) {
    if (!(capital > 0)) throw std::invalid_argument("roi: capital must be > 0");
    return (final_wealth - capital) / capital * 100.0;
}

double max_drawdown(std::span<const double> equity) {
    if (equity.empty()) throw std::invalid_argument("max_drawdown: empty curve");
    double peak = 0.0;
    double worst = 0.0;
    for (double v : equity) {
        if (!(v > 0))
            throw std::invalid_argument("max_drawdown: equity values must be > 0");
        if (v > peak) peak = v;
        const double dd = (peak - v) / peak;
        if (dd > worst) worst = dd;
    }
    return worst * 100.0;
}

namespace {

std::vector<double> simple_returns(std::span<const double> equity) {
    std::vector<double> r;
    r.reserve(equity.size() - 1);
    for (std::size_t i = 1; i < equity.size(); ++i) {
        if (!(equity[i - 1] > 0))
            throw std::invalid_argument("returns: equity values must be > 0");
        r.push_back(equity[i] / equity[i - 1] - 1.0);
    }
    return r;
}

// population mean and sigma in one pass
struct MeanSigma {
    double mean, sigma;
};

MeanSigma mean_sigma(const std::vector<double>& xs) {
    double mean = 0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double ss = 0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / static_cast<double>(xs.size()))};
}

} // namespace

double volatility(std::span<const double> equity) {
    if (equity.size() < 2)
        throw std::invalid_argument("volatility: need at least two equity points");
    return mean_sigma(simple_returns(equity)).sigma;
}

std::optional<double> sharpe(std::span<const double> equity) {
    if (equity.size() < 2) return std::nullopt;
    const auto ms = mean_sigma(simple_returns(equity));
    if (ms.sigma == 0.0) return std::nullopt;
    return ms.mean / ms.sigma;
}

double mse(std::span<const double> actual, std::span<const double> predicted) {
    if (actual.empty()) throw std::invalid_argument("mse: empty input");
    if (actual.size() != predicted.size())
        throw std::invalid_argument("mse: length mismatch");
    double ss = 0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        const double d = actual[i] - predicted[i];
        ss += d * d;
    }
    return ss / static_cast<double>(actual.size());
}

double r_squared(std::span<const double> actual, std::span<const double> predicted) {
    if (actual.size() != predicted.size())
        throw std::invalid_argument("r_squared: length mismatch");
    if (actual.size() < 2)
        throw std::invalid_argument("r_squared: need at least two points");
    double mean = 0;
    for (double a : actual) mean += a;
    mean /= static_cast<double>(actual.size());
    double ss_res = 0, ss_tot = 0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        ss_res += (actual[i] - predicted[i]) * (actual[i] - predicted[i]);
        ss_tot += (actual[i] - mean) * (actual[i] - mean);
    }
    if (ss_tot == 0.0)
        throw std::invalid_argument("r_squared: actuals are constant, R^2 undefined");
    return 1.0 - ss_res / ss_tot;
}

MetricsBlock compute_metrics(double capital, std::span<const double> equity) {
    if (equity.empty()) throw std::invalid_argument("metrics: empty equity curve");
    MetricsBlock m;
    m.wealth = equity.back();
    m.roi_pct = roi(capital, m.wealth);
    m.mdd_pct = max_drawdown(equity);
    m.volatility = equity.size() >= 2 ? volatility(equity) : 0.0;
    m.sharpe = sharpe(equity);
    return m;
}

} // namespace flexgrid
