#include "dnls/asymptotic_ode.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "dnls/errors.hpp"

namespace dnls {

void AsymptoticState::validate() const {
  if (!(t0 >= 1.0)) throw ArgumentError("AsymptoticState: t0 must be >= 1");
  if (std::abs(profile0.t - t0) > 1e-12 * t0) throw ArgumentError("AsymptoticState: profile time differs from t0");
  if (profile0.v_grid.size() != profile0.gamma.size()) throw ArgumentError("AsymptoticState: v/gamma size mismatch");
  if (!all_finite(profile0.gamma)) throw ArgumentError("AsymptoticState: non-finite profile");
}

Profile exact_free_asymptotic(const AsymptoticState& state, double t) {
  state.validate();
  if (t < state.t0) throw ArgumentError("exact_free_asymptotic: t < t0");
  const double lt = std::log(t / state.t0);
  Profile out;
  out.t = t;
  out.v_grid = state.profile0.v_grid;
  out.gamma.resize(out.v_grid.size());
  for (std::size_t i = 0; i < out.v_grid.size(); ++i) {
    const Complex g = state.profile0.gamma[i];
    out.gamma[i] = g * std::polar(1.0, -0.5 * out.v_grid[i] * std::norm(g) * lt);
  }
  return out;
}

Complex free_asymptotic_rhs(double v, double t, Complex gamma) {
  return Complex{0.0, -0.5 * v / t * std::norm(gamma)} * gamma;
}

namespace {

void check_series(std::span<const Profile> profiles) {
  for (std::size_t k = 1; k < profiles.size(); ++k) {
    if (profiles[k].v_grid != profiles[0].v_grid)
      throw StructuralError("profile series: velocity grids differ at entry " + std::to_string(k));
    if (!(profiles[k].t > profiles[k - 1].t))
      throw StructuralError("profile series: times not increasing at entry " + std::to_string(k));
  }
}

double wrap(double a) {
  a = std::remainder(a, 2.0 * kPi);
  return a <= -kPi ? a + 2.0 * kPi : a;
}

}  // namespace

std::vector<RemainderSample> measure_remainder(std::span<const Profile> profiles, double bulk_fraction) {
  if (profiles.size() < 3) throw ArgumentError("measure_remainder: need at least three profiles");
  check_series(profiles);
  const auto& v = profiles[0].v_grid;
  std::vector<RemainderSample> out;
  for (std::size_t k = 1; k + 1 < profiles.size(); ++k) {
    const double t0 = profiles[k - 1].t, t1 = profiles[k].t, t2 = profiles[k + 1].t;
    const double hm = t1 - t0, hp = t2 - t1;
    // Three-point derivative at t1; reduces to the centered difference for hm == hp.
    const double cm = -hp / (hm * (hm + hp));
    const double c0 = (hp - hm) / (hm * hp);
    const double cp = hm / (hp * (hm + hp));

    const auto& g = profiles[k].gamma;
    double peak = 0.0;
    for (const auto& c : g) peak = std::max(peak, std::abs(c));

    RemainderSample s;
    s.t = t1;
    s.r.resize(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      const Complex gt = cm * profiles[k - 1].gamma[i] + c0 * g[i] + cp * profiles[k + 1].gamma[i];
      s.r[i] = 0.5 * v[i] / t1 * std::norm(g[i]) * g[i] - Complex{0.0, 1.0} * gt;
      const double a = std::abs(s.r[i]);
      if (peak > 0.0 && std::abs(g[i]) > bulk_fraction * peak) {
        s.r_inf = std::max(s.r_inf, a);
        s.vr_inf = std::max(s.vr_inf, std::abs(v[i]) * a);
      } else {
        s.tail_r_inf = std::max(s.tail_r_inf, a);
      }
    }
    if (!out.empty()) s.cumulative = out.back().cumulative + 0.5 * (s.t - out.back().t) * (s.r_inf + out.back().r_inf);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<double> modulus_drift(std::span<const Profile> profiles) {
  if (profiles.empty()) return {};
  check_series(profiles);
  std::vector<double> out;
  for (const auto& p : profiles) {
    double m = 0.0;
    for (std::size_t i = 0; i < p.gamma.size(); ++i)
      m = std::max(m, std::abs(std::abs(p.gamma[i]) - std::abs(profiles[0].gamma[i])));
    out.push_back(m);
  }
  return out;
}

std::vector<double> log_phase_residual(std::span<const Profile> profiles, double bulk_fraction) {
  if (profiles.empty()) return {};
  check_series(profiles);
  const auto& p0 = profiles[0];
  double peak = 0.0;
  for (const auto& c : p0.gamma) peak = std::max(peak, std::abs(c));
  std::vector<double> out;
  for (const auto& p : profiles) {
    double m = 0.0;
    const double lt = std::log(p.t / p0.t);
    for (std::size_t i = 0; i < p.gamma.size(); ++i) {
      const Complex g0 = p0.gamma[i];
      if (!(peak > 0.0 && std::abs(g0) > bulk_fraction * peak)) continue;
      const double turn = std::arg(p.gamma[i] * std::conj(g0));
      m = std::max(m, std::abs(wrap(turn + 0.5 * p0.v_grid[i] * std::norm(g0) * lt)));
    }
    out.push_back(m);
  }
  return out;
}

double remainder_bound_rhs(const RemainderNorms& n) {
  const double t = n.t, u = n.linf_u, ux = n.linf_ux, lu = n.lu_l2;
  const double q34 = std::pow(t, -0.75);
  return std::pow(t, -1.25) * lu + u * u * u + q34 * u * u * lu + u * ux * std::pow(t, -0.25) * lu +
         q34 * u * lu * (q34 * lu + std::sqrt(t) * ux);
}

void write_remainder_csv(std::ostream& os, std::span<const RemainderSample> rows) {
  os << "time,r_inf,vr_inf,cumulative_r_integral\n" << std::setprecision(17);
  for (const auto& r : rows) os << r.t << ',' << r.r_inf << ',' << r.vr_inf << ',' << r.cumulative << '\n';
}

}  // namespace dnls
