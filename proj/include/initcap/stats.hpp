#pragma once

#include <span>
#include <vector>

namespace initcap {

struct PowerLawFit {
  double exponent;
  double intercept;  ///< log-space intercept: log y ≈ intercept + exponent log x
  double r_squared;
};

/// Ordinary least squares of log y on log x. Needs >= 3 points, all positive.
/// A constant y gives exponent 0 and r² = 1.
PowerLawFit fit_power_law(std::span<const double> xs, std::span<const double> ys);

/// Spearman rank correlation (average ranks for ties).
double spearman(std::span<const double> xs, std::span<const double> ys);

double mean(std::span<const double> v);
double median(std::vector<double> v);

}  // namespace initcap
