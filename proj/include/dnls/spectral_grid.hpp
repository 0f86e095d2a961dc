#pragma once

// Uniform periodic grid on [-L, L), Fourier transforms with the unitary
// continuous-line normalization, spectral derivatives and the norms used
// throughout the lab.
//
// Transform convention:
//   u_hat(xi) = (2 pi)^{-1/2} \int e^{-i x xi} u(x) dx,
// discretized as u_hat_k = dx (2 pi)^{-1/2} sum_j u_j e^{-i xi_k x_j} with
// x_j = -L + j dx and xi_k = pi k / L. With this choice
//   sum_k |u_hat_k|^2 dxi == sum_j |u_j|^2 dx   (dxi = pi / L).

#include <complex>
#include <cstddef>
#include <memory>
#include <new>
#include <span>
#include <vector>

namespace dnls {

using Complex = std::complex<double>;

// 64-byte aligned storage so FFTW can use its SIMD codelets.
template <typename T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlign{64};
  AlignedAllocator() noexcept = default;
  template <typename U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}
  T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), kAlign)); }
  void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, kAlign); }
  template <typename U>
  bool operator==(const AlignedAllocator<U>&) const noexcept { return true; }
};

using ComplexVector = std::vector<Complex, AlignedAllocator<Complex>>;

inline constexpr double kPi = 3.14159265358979323846;

class GridSpec {
 public:
  GridSpec(double half_width, std::size_t n_points);

  double half_width() const noexcept { return half_width_; }
  std::size_t size() const noexcept { return n_; }
  double dx() const noexcept { return dx_; }
  /// Spacing of the physical frequency lattice, pi / L.
  double dxi() const noexcept { return kPi / half_width_; }

  double x(std::size_t j) const noexcept { return -half_width_ + static_cast<double>(j) * dx_; }
  /// Signed integer wavenumber of FFT slot k (0, 1, ..., n/2-1, -n/2, ..., -1).
  long mode(std::size_t k) const noexcept {
    return k < n_ / 2 ? static_cast<long>(k) : static_cast<long>(k) - static_cast<long>(n_);
  }
  double xi(std::size_t k) const noexcept { return static_cast<double>(mode(k)) * dxi(); }
  bool is_nyquist(std::size_t k) const noexcept { return k == n_ / 2; }
  /// Largest resolved |xi|, attained at the Nyquist slot.
  double xi_max() const noexcept { return static_cast<double>(n_ / 2) * dxi(); }

  std::vector<double> coordinates() const;
  std::vector<double> frequencies() const;

  bool operator==(const GridSpec& o) const noexcept {
    return n_ == o.n_ && half_width_ == o.half_width_;
  }

 private:
  double half_width_;
  std::size_t n_;
  double dx_;
};

/// Samples of u(t, .) on a grid. Values are fixed at construction; every
/// operation returns a new field.
class ComplexField {
 public:
  ComplexField(GridSpec grid, double time, ComplexVector values);
  static ComplexField zeros(const GridSpec& grid, double time = 0.0);

  const GridSpec& grid() const noexcept { return grid_; }
  double time() const noexcept { return time_; }
  std::span<const Complex> values() const noexcept { return values_; }
  const Complex& operator[](std::size_t j) const noexcept { return values_[j]; }
  std::size_t size() const noexcept { return values_.size(); }

  ComplexField with_values(ComplexVector values) const { return {grid_, time_, std::move(values)}; }
  ComplexField with_time(double t) const { return {grid_, t, values_}; }

 private:
  GridSpec grid_;
  double time_;
  ComplexVector values_;
};

/// Fourier coefficients in FFT slot order, normalized as described above.
struct Spectrum {
  GridSpec grid;
  ComplexVector values;
};

/// In-place complex DFT of a fixed length backed by a shared FFTW plan.
/// forward: X_k = sum_j x_j e^{-2 pi i jk/n}; backward includes the 1/n.
/// Planning is serialized internally; execution is thread-safe.
class Fft {
 public:
  explicit Fft(std::size_t n);
  std::size_t size() const noexcept { return n_; }
  void forward(std::span<Complex> data) const;
  void backward(std::span<Complex> data) const;
  /// Inverse transform without the 1/n factor.
  void backward_unscaled(std::span<Complex> data) const;

  struct Plans;

 private:
  std::size_t n_;
  std::shared_ptr<const Plans> plans_;
};

Spectrum fft(const ComplexField& field);
ComplexField inverse_fft(const Spectrum& spectrum, double time = 0.0);

/// d^order u / dx^order via Fourier multipliers (i xi)^order; the Nyquist
/// coefficient is dropped for odd orders. order must be 1, 2 or 3.
ComplexField spectral_derivative(const ComplexField& field, int order);

/// Multiplies every Fourier coefficient by the given symbol m(xi).
template <typename Symbol>
ComplexField apply_multiplier(const ComplexField& field, Symbol&& symbol) {
  const GridSpec& g = field.grid();
  ComplexVector data(field.values().begin(), field.values().end());
  Fft plan(g.size());
  plan.forward(data);
  for (std::size_t k = 0; k < g.size(); ++k) data[k] *= symbol(g.xi(k), k);
  plan.backward(data);
  return field.with_values(std::move(data));
}

struct Norms {
  double l2 = 0.0;
  double h1 = 0.0;
  double linf = 0.0;
};

Norms norms(const ComplexField& field);
double l2_norm(const ComplexField& field);
double linf_norm(const ComplexField& field);
/// (sum_k <xi_k>^{2k} |u_hat_k|^2 dxi)^{1/2}; k = 0 returns l2_norm itself.
double sobolev_norm(const ComplexField& field, double k);
/// (sum_j w_j^2 |u_j|^2 dx)^{1/2}.
double weighted_l2(const ComplexField& field, std::span<const double> weight);
/// Same for a spectrum, quadrature weight dxi.
double l2_norm(const Spectrum& spectrum);

/// Pointwise x * u on the centered coordinates.
ComplexField multiply_by_x(const ComplexField& field);

/// max |u_j| over the outer boundary band divided by ||u||_inf (0 for the
/// zero field). The band is n/64 points (at least 2) at each end.
double boundary_ratio(const ComplexField& field);
/// max |x_j u_j| over the boundary band divided by max_j |x_j u_j|. Scaling
/// by ||u||_inf instead would let |x| ~ half_width turn transform round-off
/// into a violation on large boxes.
double weighted_boundary_ratio(const ComplexField& field);

inline constexpr double kBoundaryTolerance = 1e-10;

bool boundary_negligible(const ComplexField& field, double tol = kBoundaryTolerance);
/// Throws DomainError naming `what` when the boundary guard fails.
void require_boundary_negligible(const ComplexField& field, const char* what,
                                 double tol = kBoundaryTolerance, bool x_weighted = false);

bool all_finite(std::span<const Complex> values);

/// Trigonometric interpolation onto a grid `factor` times finer (factor a
/// power of two). Exact for band-limited data.
ComplexField refine(const ComplexField& field, std::size_t factor);

bool is_power_of_two(std::size_t n) noexcept;
std::size_t next_power_of_two(std::size_t n) noexcept;

}  // namespace dnls
