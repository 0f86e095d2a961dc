#include "dnls/spectral_grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>

#include "dnls/errors.hpp"

namespace dnls {

bool is_power_of_two(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_power_of_two(std::size_t n) noexcept {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

GridSpec::GridSpec(double half_width, std::size_t n_points)
    : half_width_(half_width), n_(n_points), dx_(2.0 * half_width / static_cast<double>(n_points)) {
  if (!(half_width > 0.0) || !std::isfinite(half_width)) {
    throw ArgumentError("GridSpec: half_width must be positive and finite");
  }
  if (n_points < 8 || !is_power_of_two(n_points)) {
    std::ostringstream os;
    os << "GridSpec: n_points must be a power of two >= 8 (got " << n_points << ")";
    throw ArgumentError(os.str());
  }
}

std::vector<double> GridSpec::coordinates() const {
  std::vector<double> xs(n_);
  for (std::size_t j = 0; j < n_; ++j) xs[j] = x(j);
  return xs;
}

std::vector<double> GridSpec::frequencies() const {
  std::vector<double> ks(n_);
  for (std::size_t k = 0; k < n_; ++k) ks[k] = xi(k);
  return ks;
}

bool all_finite(std::span<const Complex> values) {
  return std::all_of(values.begin(), values.end(), [](const Complex& z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
  });
}

ComplexField::ComplexField(GridSpec grid, double time, ComplexVector values)
    : grid_(grid), time_(time), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    std::ostringstream os;
    os << "ComplexField: " << values_.size() << " values for a grid of " << grid_.size() << " points";
    throw StructuralError(os.str());
  }
  if (!std::isfinite(time_)) throw ArgumentError("ComplexField: non-finite time");
  if (!all_finite(values_)) throw ArgumentError("ComplexField: non-finite values");
}

ComplexField ComplexField::zeros(const GridSpec& grid, double time) {
  return {grid, time, ComplexVector(grid.size(), Complex{})};
}

// --- FFT -------------------------------------------------------------------

struct Fft::Plans {
  // SIMD plans for SIMD-aligned buffers (every ComplexVector), generic ones otherwise.
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
  fftw_plan forward_unaligned = nullptr;
  fftw_plan backward_unaligned = nullptr;
  ~Plans() {
    for (fftw_plan p : {forward, backward, forward_unaligned, backward_unaligned})
      if (p) fftw_destroy_plan(p);
  }
  fftw_plan pick(bool fwd, fftw_complex* p) const {
    const bool aligned = fftw_alignment_of(reinterpret_cast<double*>(p)) == 0;
    if (fwd) return aligned ? forward : forward_unaligned;
    return aligned ? backward : backward_unaligned;
  }
};

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

std::shared_ptr<const Fft::Plans> acquire_plans(std::size_t n);

}  // namespace

Fft::Fft(std::size_t n) : n_(n), plans_(acquire_plans(n)) {}

namespace {

// FFTW_ESTIMATE keeps plan choice independent of timing, so repeated runs
// execute the same arithmetic.
std::shared_ptr<const Fft::Plans> acquire_plans(std::size_t n) {
  std::lock_guard<std::mutex> lock(planner_mutex());
  static std::map<std::size_t, std::shared_ptr<const Fft::Plans>> cache;
  if (auto it = cache.find(n); it != cache.end()) return it->second;
  auto plans = std::make_shared<Fft::Plans>();
  ComplexVector scratch(n);
  auto* p = reinterpret_cast<fftw_complex*>(scratch.data());
  const int len = static_cast<int>(n);
  plans->forward = fftw_plan_dft_1d(len, p, p, FFTW_FORWARD, FFTW_ESTIMATE);
  plans->backward = fftw_plan_dft_1d(len, p, p, FFTW_BACKWARD, FFTW_ESTIMATE);
  plans->forward_unaligned = fftw_plan_dft_1d(len, p, p, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  plans->backward_unaligned = fftw_plan_dft_1d(len, p, p, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (!plans->forward || !plans->backward || !plans->forward_unaligned || !plans->backward_unaligned)
    throw Error("FFTW planning failed");
  cache.emplace(n, plans);
  return plans;
}

}  // namespace

void Fft::forward(std::span<Complex> data) const {
  if (data.size() != n_) throw StructuralError("Fft::forward: length mismatch");
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plans_->pick(true, p), p, p);
}

void Fft::backward_unscaled(std::span<Complex> data) const {
  if (data.size() != n_) throw StructuralError("Fft::backward: length mismatch");
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plans_->pick(false, p), p, p);
}

void Fft::backward(std::span<Complex> data) const {
  backward_unscaled(data);
  const double inv = 1.0 / static_cast<double>(n_);
  for (auto& z : data) z *= inv;
}

namespace {

// (-1)^m for the signed mode of slot k.
double parity(const GridSpec& g, std::size_t k) { return (g.mode(k) % 2 == 0) ? 1.0 : -1.0; }

}  // namespace

Spectrum fft(const ComplexField& field) {
  const GridSpec& g = field.grid();
  ComplexVector data(field.values().begin(), field.values().end());
  Fft(g.size()).forward(data);
  const double scale = g.dx() / std::sqrt(2.0 * kPi);
  for (std::size_t k = 0; k < g.size(); ++k) data[k] *= scale * parity(g, k);
  return {g, std::move(data)};
}

ComplexField inverse_fft(const Spectrum& spectrum, double time) {
  const GridSpec& g = spectrum.grid;
  if (spectrum.values.size() != g.size()) throw StructuralError("inverse_fft: length mismatch");
  ComplexVector data = spectrum.values;
  const double scale = std::sqrt(2.0 * kPi) / g.dx();
  for (std::size_t k = 0; k < g.size(); ++k) data[k] *= scale * parity(g, k);
  Fft(g.size()).backward(data);
  return {g, time, std::move(data)};
}

ComplexField spectral_derivative(const ComplexField& field, int order) {
  if (order < 1 || order > 3) {
    throw ArgumentError("spectral_derivative: order must be 1, 2 or 3");
  }
  const GridSpec& g = field.grid();
  const bool odd = (order % 2) == 1;
  return apply_multiplier(field, [&](double xi, std::size_t k) {
    if (odd && g.is_nyquist(k)) return Complex{};
    Complex m{1.0, 0.0};
    for (int i = 0; i < order; ++i) m *= Complex{0.0, xi};
    return m;
  });
}

double l2_norm(const ComplexField& field) {
  double s = 0.0;
  for (const auto& z : field.values()) s += std::norm(z);
  return std::sqrt(s * field.grid().dx());
}

double l2_norm(const Spectrum& spectrum) {
  double s = 0.0;
  for (const auto& z : spectrum.values) s += std::norm(z);
  return std::sqrt(s * spectrum.grid.dxi());
}

double linf_norm(const ComplexField& field) {
  double m = 0.0;
  for (const auto& z : field.values()) m = std::max(m, std::abs(z));
  return m;
}

double sobolev_norm(const ComplexField& field, double k) {
  if (k == 0.0) return l2_norm(field);
  const Spectrum s = fft(field);
  const GridSpec& g = field.grid();
  double acc = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double xi = g.xi(i);
    acc += std::pow(1.0 + xi * xi, k) * std::norm(s.values[i]);
  }
  return std::sqrt(acc * g.dxi());
}

Norms norms(const ComplexField& field) {
  return {l2_norm(field), sobolev_norm(field, 1.0), linf_norm(field)};
}

double weighted_l2(const ComplexField& field, std::span<const double> weight) {
  if (weight.size() != field.size()) throw StructuralError("weighted_l2: weight length mismatch");
  double s = 0.0;
  for (std::size_t j = 0; j < field.size(); ++j) s += weight[j] * weight[j] * std::norm(field[j]);
  return std::sqrt(s * field.grid().dx());
}

ComplexField multiply_by_x(const ComplexField& field) {
  const GridSpec& g = field.grid();
  ComplexVector out(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) out[j] = g.x(j) * field[j];
  return field.with_values(std::move(out));
}

namespace {

double boundary_max(const ComplexField& field, bool x_weighted) {
  const GridSpec& g = field.grid();
  const std::size_t band = std::max<std::size_t>(2, g.size() / 64);
  double m = 0.0;
  auto visit = [&](std::size_t j) {
    const double w = x_weighted ? std::abs(g.x(j)) : 1.0;
    m = std::max(m, w * std::abs(field[j]));
  };
  for (std::size_t j = 0; j < band; ++j) {
    visit(j);
    visit(g.size() - 1 - j);
  }
  return m;
}

}  // namespace

double boundary_ratio(const ComplexField& field) {
  const double peak = linf_norm(field);
  return peak == 0.0 ? 0.0 : boundary_max(field, false) / peak;
}

double weighted_boundary_ratio(const ComplexField& field) {
  const GridSpec& g = field.grid();
  double peak = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) peak = std::max(peak, std::abs(g.x(j)) * std::abs(field[j]));
  return peak == 0.0 ? 0.0 : boundary_max(field, true) / peak;
}

bool boundary_negligible(const ComplexField& field, double tol) { return boundary_ratio(field) < tol; }

void require_boundary_negligible(const ComplexField& field, const char* what, double tol,
                                 bool x_weighted) {
  const double r = x_weighted ? weighted_boundary_ratio(field) : boundary_ratio(field);
  if (r >= tol) {
    std::ostringstream os;
    os << what << ": field not negligible at the boundary (ratio " << r << " >= " << tol
       << ", half_width " << field.grid().half_width() << ", t = " << field.time() << ")";
    throw DomainError(os.str());
  }
}

ComplexField refine(const ComplexField& field, std::size_t factor) {
  if (!is_power_of_two(factor)) throw ArgumentError("refine: factor must be a power of two");
  if (factor == 1) return field;
  const GridSpec& g = field.grid();
  const std::size_t n = g.size();
  const std::size_t nf = n * factor;
  ComplexVector coarse(field.values().begin(), field.values().end());
  Fft(n).forward(coarse);
  ComplexVector fine(nf, Complex{});
  const double f = static_cast<double>(factor);
  for (std::size_t k = 0; k < n / 2; ++k) fine[k] = f * coarse[k];
  for (std::size_t k = n / 2 + 1; k < n; ++k) fine[nf - (n - k)] = f * coarse[k];
  // Split the Nyquist coefficient symmetrically between +n/2 and -n/2.
  fine[n / 2] = 0.5 * f * coarse[n / 2];
  fine[nf - n / 2] = 0.5 * f * coarse[n / 2];
  Fft(nf).backward(fine);
  return {GridSpec(g.half_width(), nf), field.time(), std::move(fine)};
}

}  // namespace dnls
