#pragma once

#include <optional>
#include <span>

namespace flexgrid {

// percent return on capital
double roi(double capital, double final_wealth);

// worst peak-to-trough loss of the equity curve, in percent of the peak
double max_drawdown(std::span<const double> equity);

// population standard deviation of per-period simple returns
double volatility(std::span<const double> equity);

// mean per-period return over its standard deviation; no annualization and no
// risk-free leg. Undefined (nullopt) when the return deviation is zero, e.g.
// on a flat curve; undefined is a value here, not an error.
std::optional<double> sharpe(std::span<const double> equity);

double mse(std::span<const double> actual, std::span<const double> predicted);

// coefficient of determination, 1 - SSres/SStot; errors when the actuals are
// all identical (zero total sum of squares)
double r_squared(std::span<const double> actual, std::span<const double> predicted);

struct MetricsBlock {
    double wealth = 0.0;
    double roi_pct = 0.0;
    double mdd_pct = 0.0;
    double volatility = 0.0;
    std::optional<double> sharpe;
};

MetricsBlock compute_metrics(double capital, std::span<const double> equity);

} // namespace flexgrid
