#pragma once

// Time evolution of  i u_t + u_xx = -i (|u|^2 u)_x  on the periodic grid.
//
// In Fourier space the equation reads  u_hat_t = -i xi^2 u_hat + N(u_hat)
// with N = -(i xi) F(|u|^2 u). The stiff linear part is handled exactly by
// an exponential integrator (integrating-factor RK4 or ETDRK4).

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dnls/errors.hpp"
#include "dnls/spectral_grid.hpp"

namespace dnls {

enum class Integrator { IFRK4, ETDRK4 };

const char* to_string(Integrator kind);
Integrator integrator_from_string(const std::string& name);

struct SolverConfig {
  double dt = 1e-3;
  double t_end = 1.0;
  bool dealias = true;
  Integrator integrator = Integrator::IFRK4;
  /// Sorted, inside [0, t_end].
  std::vector<double> snapshot_times;
  /// false drops the nonlinearity (used for linear baselines).
  bool nonlinear = true;
  /// false keeps only the diagnostics records (observers still see fields).
  bool keep_snapshots = true;

  /// Throws ArgumentError on invalid settings; returns advisory warnings.
  std::vector<std::string> validate(const GridSpec& grid) const;
};

/// Uniformly spaced snapshot times spacing, 2*spacing, ..., t_end (plus 0 if
/// include_zero).
std::vector<double> uniform_snapshot_times(double t_end, double spacing, bool include_zero = true);

struct ConservedTriple {
  double mass = 0.0;
  double momentum = 0.0;
  double energy = 0.0;
};

/// M = int |u|^2, P = int Im(conj(u) u_x) + |u|^4/2,
/// E = int |u_x|^2 + (3/2)|u|^2 Im(conj(u) u_x) + |u|^6/2.
/// Signs are those conserved by i u_t + u_xx = -i (|u|^2 u)_x.
ConservedTriple conserved(const ComplexField& field);

/// Exact free Schrodinger flow  u_hat(t) = u_hat(t0) e^{-i xi^2 (t - t0)}.
ComplexField linear_propagate(const ComplexField& field, double t_target);

/// Extra vector-field columns appended to a diagnostics row.
struct VFColumns {
  double lu_l2 = 0.0;
  double lux_l2 = 0.0;
  double ks_ratio = 0.0;
};

struct DiagnosticsRecord {
  double time = 0.0;
  ConservedTriple conserved;
  double l2 = 0.0;
  double h1 = 0.0;
  double linf_u = 0.0;
  double linf_ux = 0.0;
  double boundary_ratio = 0.0;
  std::optional<VFColumns> vf;
};

DiagnosticsRecord diagnose(const ComplexField& field);

/// CSV with 17 significant digits: time, mass, momentum, energy, l2, h1,
/// linf_u, linf_ux [, lu_l2, lux_l2, ks_ratio].
void write_diagnostics_csv(std::ostream& os, std::span<const DiagnosticsRecord> rows);

// --- integrator ------------------------------------------------------------

/// Nonlinear part of a system  w_t = i w_xx + N(w)  in raw FFT coefficients.
/// Every component shares the linear operator.
class NonlinearTerm {
 public:
  virtual ~NonlinearTerm() = default;
  virtual std::size_t components() const = 0;
  virtual void evaluate(std::span<const ComplexVector> hat, std::span<ComplexVector> out) const = 0;
};

/// -(i xi) F(|u|^2 u), optionally with 2/3-rule dealiasing of input and
/// output.
class DnlsNonlinearity final : public NonlinearTerm {
 public:
  DnlsNonlinearity(const GridSpec& grid, bool dealias);
  std::size_t components() const override { return 1; }
  void evaluate(std::span<const ComplexVector> hat, std::span<ComplexVector> out) const override;

  /// out = -(i xi) mask F(|u|^2 u); u already in physical space.
  void cubic_flux(std::span<const Complex> u, ComplexVector& out) const;
  /// phys = F^{-1}(mask hat).
  void to_physical(std::span<const Complex> hat, ComplexVector& phys) const;
  const std::vector<double>& mask() const noexcept { return mask_; }
  const ComplexVector& derivative_symbol() const noexcept { return ik_; }
  const Fft& transform() const noexcept { return fft_; }

 private:
  GridSpec grid_;
  Fft fft_;
  std::vector<double> mask_;
  ComplexVector ik_;
  std::vector<double> scaled_mask_;  // mask / n, folds the inverse-transform scaling
  std::vector<double> flux_xi_;      // -mask * xi, so out = i * flux_xi * F(|u|^2 u)
};

/// Exponential integrator for systems sharing the linear symbol -i xi^2.
/// Coefficients are cached per step size.
class ExponentialIntegrator {
 public:
  ExponentialIntegrator(const GridSpec& grid, Integrator kind);

  void step(std::vector<ComplexVector>& hat, double h, const NonlinearTerm& rhs);
  Integrator kind() const noexcept { return kind_; }

 private:
  struct Coefficients;
  const Coefficients& coefficients(double h);

  GridSpec grid_;
  Integrator kind_;
  std::map<double, std::shared_ptr<Coefficients>> cache_;
  std::vector<ComplexVector> a_, b_, c_, d_, stage_;
};

/// Advances u by cfg.dt. Throws BlowUpError if the result is not finite.
ComplexField dnls_step(const ComplexField& field, const SolverConfig& cfg);

struct Snapshot {
  ComplexField field;
  DiagnosticsRecord record;
};

struct EvolveResult {
  std::vector<Snapshot> snapshots;
  std::vector<DiagnosticsRecord> records;
  std::vector<std::string> warnings;
};

/// Thrown by evolve on blow-up; carries the snapshots completed so far.
class EvolveError : public BlowUpError {
 public:
  EvolveError(const BlowUpError& cause, EvolveResult partial)
      : BlowUpError(cause.what(), cause.last_good_time()), partial_(std::move(partial)) {}
  const EvolveResult& partial() const noexcept { return partial_; }

 private:
  EvolveResult partial_;
};

using SnapshotObserver = std::function<void(const ComplexField&, const DiagnosticsRecord&)>;

/// Steps from field.time() to cfg.t_end, emitting snapshots exactly at
/// cfg.snapshot_times (the last sub-step before each one is shortened).
EvolveResult evolve(const ComplexField& field, const SolverConfig& cfg,
                    std::span<const SnapshotObserver> observers = {});

/// Step plan shared by evolve and the tandem z-evolution: the sequence of
/// step sizes taking t0 to each snapshot time.
std::vector<std::vector<double>> plan_steps(double t0, const SolverConfig& cfg);

}  // namespace dnls
