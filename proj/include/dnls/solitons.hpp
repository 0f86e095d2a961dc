#pragma once

// Kaup-Newell soliton family of the DNLS equation. For theta in (0, pi/2)
//   q0(x) = sqrt(2 sin 2theta) cosh^3(x - i theta) / |cosh(x - i theta)|^4 e^{-i x cot 2theta},
//   q(t, x) = q0(x + 2 cot(2theta) t) e^{i t csc^2(2theta)},
// with the symmetry u -> sqrt(lambda) e^{i alpha} u(lambda^2 t, lambda (x - x0)).

#include "dnls/spectral_grid.hpp"

namespace dnls {

struct SolitonParams {
  double theta = kPi / 4.0;
  double scale = 1.0;   // lambda
  double shift = 0.0;   // x0
  double phase = 0.0;   // alpha

  /// Throws ArgumentError unless 0 < theta < pi/2 and scale > 0.
  void validate() const;
  double speed() const;       // dx/dt of the envelope peak
  double phase_rate() const;  // d arg u / dt at the peak
  double mass() const { return 8.0 * theta; }
};

/// q0(x, theta) from the complex-cosh form, evaluated with scaled
/// hyperbolic functions so that it stays finite for any x.
Complex soliton_profile(double x, double theta);
/// The same function from the trigonometric form (naive; |x| below ~150).
Complex soliton_profile_trig(double x, double theta);

ComplexField soliton_initial(const SolitonParams& params, const GridSpec& grid);
ComplexField soliton_exact(const SolitonParams& params, const GridSpec& grid, double t);

/// A grid on which the (scaled, shifted) soliton is resolved to round-off and
/// negligible at the boundary, with half_width at least `min_half_width`.
GridSpec soliton_grid(const SolitonParams& params, double min_half_width = 0.0);

struct LocalizationReport {
  double l2 = 0.0;               // ||q||_2
  double x_h1 = 0.0;             // ||x q||_{H^1}
  double x_h1_seminorm = 0.0;    // ||(x q)'||_2
  double product = 0.0;          // ||x q||_{H^1} ||q||_2
  double homogeneous_product = 0.0;  // ||(x q)'||_2 ||q||_2, invariant under scaling
};

LocalizationReport localization_product(const SolitonParams& params, const GridSpec& grid);

struct Peak {
  double x = 0.0;
  double height = 0.0;  // interpolated |u|^2
  std::size_t index = 0;
};

/// Maximum of |u|^2 refined by a parabola through the three samples around
/// the grid maximum (periodic neighbours).
Peak track_peak(const ComplexField& field);

/// Trigonometric interpolant of the field at an arbitrary x.
Complex evaluate_at(const ComplexField& field, double x);

/// Centre of mass of |u|^2.
double center_of_mass(const ComplexField& field);

}  // namespace dnls
