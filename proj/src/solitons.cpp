#include "dnls/solitons.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dnls/errors.hpp"

namespace dnls {

void SolitonParams::validate() const {
  if (!(theta > 0.0 && theta < kPi / 2.0)) {
    std::ostringstream os;
    os << "SolitonParams: theta = " << theta << " outside (0, pi/2)";
    throw ArgumentError(os.str());
  }
  if (!(scale > 0.0) || !std::isfinite(scale)) throw ArgumentError("SolitonParams: scale must be positive");
  if (!std::isfinite(shift) || !std::isfinite(phase)) throw ArgumentError("SolitonParams: non-finite shift/phase");
}

double SolitonParams::speed() const { return -2.0 * scale / std::tan(2.0 * theta); }

double SolitonParams::phase_rate() const {
  const double s = std::sin(2.0 * theta);
  return scale * scale / (s * s);
}

Complex soliton_profile(double x, double theta) {
  // cosh(x - i theta) = (e^{|x|}/2) c with
  // c = (1 + s^2) cos theta - i sgn(x) (1 - s^2) sin theta, s = e^{-|x|}.
  const double s = std::exp(-std::abs(x));
  const double sgn = x < 0.0 ? -1.0 : 1.0;
  const Complex c{(1.0 + s * s) * std::cos(theta), -sgn * (1.0 - s * s) * std::sin(theta)};
  const double mod = std::abs(c);
  const Complex unit = c / mod;
  const double amplitude = std::sqrt(2.0 * std::sin(2.0 * theta));
  // cosh^3 / |cosh|^4 = unit^3 / |cosh| = unit^3 * 2 s / mod.
  const double carrier = -x / std::tan(2.0 * theta);
  return amplitude * unit * unit * unit * (2.0 * s / mod) * std::polar(1.0, carrier);
}

Complex soliton_profile_trig(double x, double theta) {
  const double ct = std::cos(theta), st = std::sin(theta);
  const double ch = std::cosh(x), sh = std::sinh(x);
  const Complex num = std::pow(Complex{ct * ch, -st * sh}, 3);
  const double den = ct * ct * ch * ch + st * st * sh * sh;
  return std::sqrt(2.0 * std::sin(2.0 * theta)) * num / (den * den) * std::polar(1.0, -x / std::tan(2.0 * theta));
}

namespace {

ComplexField sample_soliton(const SolitonParams& p, const GridSpec& grid, double t) {
  p.validate();
  const double lam = p.scale;
  const double cot2 = 1.0 / std::tan(2.0 * p.theta);
  const double s2 = std::sin(2.0 * p.theta);
  const double tau = lam * lam * t;
  const Complex rot = std::polar(std::sqrt(lam), p.phase + tau / (s2 * s2));
  ComplexVector values(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double y = lam * (grid.x(j) - p.shift) + 2.0 * cot2 * tau;
    values[j] = rot * soliton_profile(y, p.theta);
  }
  return {grid, t, std::move(values)};
}

}  // namespace

ComplexField soliton_initial(const SolitonParams& params, const GridSpec& grid) {
  ComplexField f = sample_soliton(params, grid, 0.0);
  require_boundary_negligible(f, "soliton_initial");
  return f;
}

ComplexField soliton_exact(const SolitonParams& params, const GridSpec& grid, double t) {
  ComplexField f = sample_soliton(params, grid, t);
  require_boundary_negligible(f, "soliton_exact");
  return f;
}

GridSpec soliton_grid(const SolitonParams& p, double min_half_width) {
  p.validate();
  // |q0| ~ 2 cos(theta)-relative e^{-|x|} tails; 30 e-folds leave ~1e-13.
  const double half_width = std::max(min_half_width, std::abs(p.shift) + 32.0 / p.scale);
  // Analyticity strip of q0 has half-width pi/2 - theta; the spectrum decays
  // like e^{-(pi/2 - theta)|xi - carrier| / lambda}.
  const double strip = std::min(1.0, kPi / 2.0 - p.theta);
  const double carrier = p.scale * std::abs(1.0 / std::tan(2.0 * p.theta));
  const double xi_needed = carrier + 36.0 * p.scale / strip;
  // Resolve xi_needed inside the 2/3 dealiasing band.
  const double dx = kPi / (1.5 * xi_needed);
  const auto n = next_power_of_two(static_cast<std::size_t>(std::ceil(2.0 * half_width / dx)));
  return {half_width, std::max<std::size_t>(n, 64)};
}

LocalizationReport localization_product(const SolitonParams& params, const GridSpec& grid) {
  const ComplexField q = soliton_initial(params, grid);
  const ComplexField xq = multiply_by_x(q);
  LocalizationReport r;
  r.l2 = l2_norm(q);
  r.x_h1 = sobolev_norm(xq, 1.0);
  r.x_h1_seminorm = l2_norm(spectral_derivative(xq, 1));
  r.product = r.x_h1 * r.l2;
  r.homogeneous_product = r.x_h1_seminorm * r.l2;
  return r;
}

Peak track_peak(const ComplexField& field) {
  const GridSpec& g = field.grid();
  const std::size_t n = g.size();
  std::size_t jmax = 0;
  double best = -1.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double a = std::norm(field[j]);
    if (a > best) {
      best = a;
      jmax = j;
    }
  }
  const double fm = std::norm(field[(jmax + n - 1) % n]);
  const double f0 = best;
  const double fp = std::norm(field[(jmax + 1) % n]);
  const double denom = fm - 2.0 * f0 + fp;
  double offset = 0.0;
  if (denom < 0.0) offset = 0.5 * (fm - fp) / denom;
  Peak p;
  p.index = jmax;
  p.x = g.x(jmax) + offset * g.dx();
  p.height = f0 - 0.25 * (fm - fp) * offset;
  return p;
}

Complex evaluate_at(const ComplexField& field, double x) {
  const Spectrum s = fft(field);
  const GridSpec& g = field.grid();
  Complex acc{};
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double xi = g.xi(k);
    Complex c = s.values[k];
    if (g.is_nyquist(k)) {
      // Symmetric split of the Nyquist coefficient keeps the interpolant real
      // for real data.
      acc += c * std::cos(xi * x);
      continue;
    }
    acc += c * std::polar(1.0, xi * x);
  }
  return acc * g.dxi() / std::sqrt(2.0 * kPi);
}

double center_of_mass(const ComplexField& field) {
  double m = 0.0, mx = 0.0;
  const GridSpec& g = field.grid();
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double a = std::norm(field[j]);
    m += a;
    mx += a * g.x(j);
  }
  return m > 0.0 ? mx / m : 0.0;
}

}  // namespace dnls
