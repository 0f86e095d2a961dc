#include "dnls/power_fit.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dnls/errors.hpp"
#include "dnls/vector_field.hpp"

namespace dnls {

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw ArgumentError("fit_line: need two or more paired samples");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw ArgumentError("fit_line: abscissae are all equal");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    sse += r * r;
  }
  f.r_squared = syy > 0.0 ? std::clamp(1.0 - sse / syy, 0.0, 1.0) : 1.0;
  return f;
}

FitResult fit_power_law(std::span<const std::pair<double, double>> series, double t_min, std::string quantity) {
  std::vector<double> lx, ly;
  double lo = 0.0, hi = 0.0;
  for (const auto& [t, v] : series) {
    if (t < t_min) continue;
    if (!(v > 0.0) || !std::isfinite(v)) {
      std::ostringstream os;
      os << "fit_power_law: nonpositive value " << v << " at t = " << t;
      throw ArgumentError(os.str());
    }
    if (lx.empty()) lo = hi = t;
    lo = std::min(lo, t);
    hi = std::max(hi, t);
    lx.push_back(std::log(japanese_bracket(t)));
    ly.push_back(std::log(v));
  }
  if (lx.size() < 10) {
    std::ostringstream os;
    os << "fit_power_law: " << lx.size() << " samples with t >= " << t_min << " (need 10)";
    throw ArgumentError(os.str());
  }
  const LineFit line = fit_line(lx, ly);
  FitResult r;
  r.quantity = std::move(quantity);
  r.exponent = line.slope;
  r.constant = std::exp(line.intercept);
  r.r_squared = line.r_squared;
  r.t_range = {lo, hi};
  r.points = lx.size();
  return r;
}

}  // namespace dnls
