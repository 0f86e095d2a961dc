#pragma once

// The asymptotic equation  i gamma_t = (v/2) t^{-1} |gamma|^2 gamma - R(t, v)
// along each ray, and measurements of R from sampled profiles.

#include <span>
#include <vector>

#include "dnls/wave_packets.hpp"

namespace dnls {

struct AsymptoticState {
  double t0 = 1.0;
  Profile profile0;

  /// Throws ArgumentError unless t0 >= 1, profile0.t == t0 and values are finite.
  void validate() const;
};

/// R = 0 solution: gamma(t0) exp(-i (v/2) |gamma(t0)|^2 ln(t / t0)).
/// Throws ArgumentError for t < t0.
Profile exact_free_asymptotic(const AsymptoticState& state, double t);

/// Right-hand side of the R = 0 equation: gamma_t = -i (v/2) t^{-1} |gamma|^2 gamma.
Complex free_asymptotic_rhs(double v, double t, Complex gamma);

struct RemainderSample {
  double t = 0.0;
  double r_inf = 0.0;        // bulk sup |R|
  double vr_inf = 0.0;       // bulk sup |v R|
  double tail_r_inf = 0.0;   // sup |R| outside the bulk
  double cumulative = 0.0;   // trapezoidal integral of r_inf from the first sample
  ComplexVector r;    // R on the profile's v-grid
};

/// R(t_k, v) = (v/2) t^{-1} |gamma|^2 gamma - i gamma_t with gamma_t from
/// three-point (centered for uniform spacing) differences, at every interior
/// time. The bulk is |gamma(t_k, v)| > bulk_fraction * max_v |gamma(t_k, .)|.
/// Throws ArgumentError for fewer than three profiles, StructuralError for
/// mismatched v-grids or non-increasing times.
std::vector<RemainderSample> measure_remainder(std::span<const Profile> profiles, double bulk_fraction = 0.1);

/// max_v | |gamma(t_k, v)| - |gamma(t_0, v)| | for each profile (entry 0 is 0).
std::vector<double> modulus_drift(std::span<const Profile> profiles);

/// max over bulk v of |arg gamma(t, v) - arg gamma(t_0, v) + (v/2)|gamma(t_0, v)|^2 ln(t/t_0)|
/// (phase difference wrapped to (-pi, pi]) for each profile; bulk fixed at t_0.
std::vector<double> log_phase_residual(std::span<const Profile> profiles, double bulk_fraction = 0.1);

/// Measured norms entering the remainder bound at one time.
struct RemainderNorms {
  double t = 0.0;
  double linf_u = 0.0;
  double linf_ux = 0.0;
  double lu_l2 = 0.0;
};

/// t^{-5/4}|Lu| + |u|^3 + t^{-3/4}|u|^2|Lu| + |u||u_x|t^{-1/4}|Lu|
///   + t^{-3/4}|u||Lu|(t^{-3/4}|Lu| + t^{1/2}|u_x|).
double remainder_bound_rhs(const RemainderNorms& n);

/// CSV rows time, r_inf, vr_inf, cumulative_r_integral.
void write_remainder_csv(std::ostream& os, std::span<const RemainderSample> rows);

}  // namespace dnls
