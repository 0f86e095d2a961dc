#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace dnls {

/// value ~ constant * <t>^exponent, fitted by least squares in log-log.
struct FitResult {
  std::string quantity;
  double exponent = 0.0;
  double constant = 0.0;
  double r_squared = 0.0;
  std::pair<double, double> t_range{0.0, 0.0};
  std::size_t points = 0;
};

/// Ordinary least squares of log(value) on log(<t>) over the samples with
/// t >= t_min. Needs at least 10 such samples; every value must be positive.
FitResult fit_power_law(std::span<const std::pair<double, double>> series, double t_min,
                        std::string quantity = {});

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Plain least-squares line through (x, y).
LineFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace dnls
