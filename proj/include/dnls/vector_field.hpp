#pragma once

// The vector field L = x + 2 i t d/dx, which commutes with i d/dt + d^2/dx^2.
//
// For a DNLS solution u, z = L u obeys the linear-in-z equation
//   (i d/dt + d^2/dx^2) z = -i [ (2|u|^2 z - u^2 conj(z))_x - |u|^2 u ],
// obtained from L (f_x) = (L f)_x - f and L(|u|^2 u) = 2|u|^2 Lu - u^2 conj(Lu).

#include <span>
#include <vector>

#include "dnls/dnls_solver.hpp"
#include "dnls/spectral_grid.hpp"

namespace dnls {

struct VFDiagnostics {
  double t = 0.0;
  double lu_l2 = 0.0;
  double lux_l2 = 0.0;
  double ks_ratio = 0.0;
  /// Running least-squares slope of log ||Lu|| against log <t>; NaN until
  /// enough points are available.
  double growth_exponent = 0.0;
};

/// x u + 2 i t u_x at the field's time. Requires |x u| to be negligible at
/// the boundary.
ComplexField apply_L(const ComplexField& field);

/// ||u||_inf^2 t / (||u||_2 ||Lu||_2); +inf when ||Lu|| vanishes.
double ks_inequality_ratio(const ComplexField& u, const ComplexField& lu);

/// Lu, L(u_x) and the Klainerman-Sobolev ratio at one time.
VFDiagnostics vector_field_diagnostics(const ComplexField& u);

/// Collects VFDiagnostics along a run and keeps the growth exponent current.
class VectorFieldTracker {
 public:
  explicit VectorFieldTracker(double fit_t_min = 5.0, std::size_t min_points = 10)
      : t_min_(fit_t_min), min_points_(min_points) {}
  const VFDiagnostics& add(const ComplexField& u);
  const std::vector<VFDiagnostics>& history() const noexcept { return history_; }

 private:
  double t_min_;
  std::size_t min_points_;
  std::vector<VFDiagnostics> history_;
};

/// (u, z) nonlinear terms for the tandem system; the u component is computed
/// exactly as DnlsNonlinearity does.
class TandemNonlinearity final : public NonlinearTerm {
 public:
  TandemNonlinearity(const GridSpec& grid, bool dealias) : u_term_(grid, dealias) {}
  std::size_t components() const override { return 2; }
  void evaluate(std::span<const ComplexVector> hat, std::span<ComplexVector> out) const override;

 private:
  DnlsNonlinearity u_term_;
};

struct TandemResult {
  std::vector<ComplexField> u;
  std::vector<ComplexField> z;
};

/// Evolves u and z = Lu side by side from z(t0) = L u0; snapshots at t0 and
/// at every cfg.snapshot_times entry after t0.
TandemResult evolve_tandem(const ComplexField& u0, const SolverConfig& cfg);

/// z trajectory for a u trajectory produced by `evolve` with the same cfg:
/// u_trajectory[0] is the datum, the rest sit at the snapshot times after it.
/// Throws StructuralError when the time grids or the u values disagree.
std::vector<ComplexField> evolve_linearized_z(std::span<const ComplexField> u_trajectory,
                                              const SolverConfig& cfg);

/// <t> = (1 + t^2)^{1/2}.
inline double japanese_bracket(double t) { return std::sqrt(1.0 + t * t); }

}  // namespace dnls
