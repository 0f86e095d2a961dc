#pragma once

// Wave packets Phi_v(t, x) = e^{i x^2 / 4t} chi((x - v t) / sqrt(t)) along
// rays x = v t, and the asymptotic profile gamma(t, v) = <u, Phi_v>.
//
// On the Fourier side,
//   Phi_v_hat(t, xi) = sqrt(t) e^{-i t xi^2} K1(sqrt(t) (xi - v/2)),
//   K1(s) = e^{i s^2} K(s),  K(s) = (2 pi)^{-1/2} int e^{-i s y} e^{i y^2/4} chi(y) dy,
// so a packet on the ray of velocity v carries frequency xi = v/2 under the
// e^{-i xi^2 t} evolution used here.

#include <map>
#include <string>
#include <vector>

#include "dnls/spectral_grid.hpp"

namespace dnls {

enum class PacketKind { CompactBump, Gaussian };

class PacketProfile {
 public:
  /// c exp(-1/(1 - y^2)) on (-1, 1), c fixed by quadrature.
  static PacketProfile compact_bump();
  /// c exp(-y^2 / 2), treated as supported on |y| <= 9.
  static PacketProfile gaussian();

  PacketKind kind() const noexcept { return kind_; }
  double support_radius() const noexcept { return radius_; }
  double normalization() const noexcept { return norm_; }

  double value(double y) const;
  double derivative(double y) const;
  double second_derivative(double y) const;
  double operator()(double y) const { return value(y); }

  /// K(s) above, by trapezoidal quadrature on the support.
  Complex chirped_transform(double s) const;
  /// K1(s) = e^{i s^2} K(s).
  Complex fourier_kernel(double s) const { return std::polar(1.0, s * s) * chirped_transform(s); }

 private:
  PacketProfile(PacketKind kind, double radius, std::size_t quadrature_points);

  PacketKind kind_;
  double radius_;
  double norm_ = 1.0;
  // Quadrature nodes y_m and weights h e^{i y_m^2/4} chi(y_m) / sqrt(2 pi).
  std::vector<double> nodes_;
  ComplexVector weights_;
};

enum class PacketComponent { Phi, Psi };

/// Phi_v (or Psi_v = e^{i phi} chi'(.)) sampled on the grid at time t >= 1.
/// Throws DomainError, naming the half-width needed, if the support leaves
/// the domain.
ComplexField packet(double v, double t, const GridSpec& grid, const PacketProfile& profile,
                    PacketComponent component = PacketComponent::Phi);

struct Profile {
  double t = 0.0;
  std::vector<double> v_grid;
  ComplexVector gamma;
  /// Requested velocities whose packets left the domain.
  std::vector<double> dropped;
};

struct ExtractionOptions {
  /// Physical quadrature uses at least this many samples per unit of the
  /// packet variable y (the field is trigonometrically refined as needed).
  double samples_per_unit = 64.0;
  std::size_t max_refined_points = std::size_t{1} << 22;
};

/// gamma(t, v) = sum_j u_j conj(Phi_v(x_j)) dx on a (refined) grid.
Profile extract_gamma(const ComplexField& u, const std::vector<double>& v_grid, const PacketProfile& profile,
                      const ExtractionOptions& options = {});

/// Same quantity from the spectrum: gamma = sum_k u_hat_k conj(Phi_v_hat(xi_k)) dxi.
/// Velocities on the lattice v = 2 m dxi share one kernel table.
Profile extract_gamma_fourier(const ComplexField& u, const std::vector<double>& v_grid, const PacketProfile& profile);

/// Velocity grid with spacing ~ spacing_hint snapped to a multiple of 2 dxi
/// (the Fourier lattice), covering |v| <= 2 xi_support where |u_hat| exceeds
/// rel_threshold of its maximum, and clipped so packets at time t fit.
std::vector<double> default_v_grid(const ComplexField& u, const PacketProfile& profile, double t,
                                   double spacing_hint, double rel_threshold = 1e-8);

/// Largest |v| whose packet at time t fits inside the grid.
double max_packet_velocity(const GridSpec& grid, const PacketProfile& profile, double t);

/// (sum |f_j|^2 dv)^{1/2} on a uniform velocity grid.
double l2_v_norm(const ComplexVector& values, double dv);

/// d gamma / dv by spectral differentiation on the (uniform) v-grid.
ComplexVector velocity_derivative(const Profile& profile);

/// LHS / RHS of the difference and profile bounds at one time:
///   spatial_linf    sup_v |u(vt) - t^{-1/2} e^{i phi} gamma|        / (t^{-3/4} ||Lu||)
///   spatial_l2      ||u(vt) - t^{-1/2} e^{i phi} gamma||_{L2_v}     / (t^{-1} ||Lu||)
///   spatial_ux_linf sup_v |u_x(vt) - (i/2) t^{-1/2} e^{i phi} v gamma| / (t^{-3/4}(||Lu|| + ||L u_x||))
///   fourier_linf    sup_xi |u_hat - c e^{-i t xi^2} gamma(2 xi)|      / (t^{-1/4} ||Lu||)
///   fourier_l2      ||u_hat - c e^{-i t xi^2} gamma(2 xi)||_{L2_xi}   / (t^{-1/2} ||Lu||)
/// with c = (2i)^{1/2}: gamma(t, 2 xi) is e^{i t xi^2} u_hat convolved with a
/// kernel of mass (2i)^{-1/2} (u_hat = e^{-i t xi^2} gives gamma = (2i)^{-1/2}).
/// plus gamma_linf, gamma_l2, dgamma_l2 and weighted_k0..2.
std::map<std::string, double> difference_bounds(const ComplexField& u, const ComplexField& lu,
                                                const ComplexField& lux, const Profile& gamma,
                                                const PacketProfile& profile);

/// CSV rows v, re_gamma, im_gamma, abs_gamma.
void write_profile_csv(std::ostream& os, const Profile& profile);

}  // namespace dnls
