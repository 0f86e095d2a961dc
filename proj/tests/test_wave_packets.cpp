#include <algorithm>
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "dnls/dnls_solver.hpp"
#include "dnls/experiment.hpp"
#include "dnls/vector_field.hpp"
#include "dnls/wave_packets.hpp"

using namespace dnls;

namespace {

ComplexField sample(const GridSpec& g, auto&& f, double t = 0.0) {
  ComplexVector v(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) v[j] = f(g.x(j));
  return {g, t, std::move(v)};
}

double max_abs(const ComplexVector& v) {
  double m = 0.0;
  for (const auto& c : v) m = std::max(m, std::abs(c));
  return m;
}

double max_diff(const ComplexVector& a, const ComplexVector& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

std::vector<double> uniform(double lo, double hi, double step) {
  std::vector<double> v;
  for (double x = lo; x <= hi + 1e-12; x += step) v.push_back(x);
  return v;
}

}  // namespace

TEST_CASE("profiles have unit mass and are even") {
  for (const auto& p : {PacketProfile::compact_bump(), PacketProfile::gaussian()}) {
    const double r = p.support_radius();
    const std::size_t m = 1 << 16;
    const double h = 2.0 * r / m;
    double sum = 0.0;
    for (std::size_t i = 0; i <= m; ++i) sum += p.value(-r + h * i) * ((i == 0 || i == m) ? 0.5 : 1.0);
    CHECK(std::abs(sum * h - 1.0) < 1e-10);
    CHECK(p.value(0.3) == doctest::Approx(p.value(-0.3)));
    CHECK(p.derivative(0.3) == doctest::Approx(-p.derivative(-0.3)));
    // Kernel K is even in s for even chi.
    CHECK(std::abs(p.chirped_transform(1.7) - p.chirped_transform(-1.7)) < 1e-12);
  }
  const auto bump = PacketProfile::compact_bump();
  CHECK(bump.value(1.0) == 0.0);
  CHECK(bump.value(-1.5) == 0.0);
  // Derivatives against central differences.
  const double y = 0.4, h = 1e-5;
  CHECK(bump.derivative(y) == doctest::Approx((bump.value(y + h) - bump.value(y - h)) / (2 * h)).epsilon(1e-7));
  CHECK(bump.second_derivative(y) ==
        doctest::Approx((bump.derivative(y + h) - bump.derivative(y - h)) / (2 * h)).epsilon(1e-6));
}

TEST_CASE("packet modulus, normalization and guards") {
  const GridSpec g(64.0, 4096);
  const auto prof = PacketProfile::compact_bump();
  const double t = 4.0, v = 1.5;
  const auto phi = packet(v, t, g, prof);
  CHECK(phi.time() == t);
  Complex integral{};
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double x = g.x(j);
    CHECK(std::abs(phi[j]) == doctest::Approx(prof.value((x - v * t) / std::sqrt(t))).epsilon(1e-14));
    integral += phi[j] * std::polar(1.0, -x * x / (4.0 * t)) * g.dx();
  }
  CHECK(std::abs(integral - std::sqrt(t)) < 1e-8);

  const auto psi = packet(v, t, g, prof, PacketComponent::Psi);
  const std::size_t j = 2224;  // x = 5.5, inside the support [4, 8]
  const double y = (g.x(j) - v * t) / std::sqrt(t);
  CHECK(std::abs(psi[j]) == doctest::Approx(std::abs(prof.derivative(y))).epsilon(1e-12));

  CHECK_THROWS_AS(packet(v, 0.5, g, prof), ArgumentError);
  try {
    packet(20.0, 4.0, g, prof);
    FAIL("expected DomainError");
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("half_width >=") != std::string::npos);
  }
}

TEST_CASE("packet is an approximate free solution with an explicit O(1/t) residual") {
  // (i d/dt + d^2/dx^2) Phi_v = t^{-1} e^{i phi} (i chi/2 + i y chi'/2 + chi'')(y).
  // The bump is steep near |y| = 1, so the support needs ~250 points at t = 4.
  const GridSpec g(128.0, 32768);
  const auto prof = PacketProfile::compact_bump();
  const double v = 1.0, h = 1e-4;
  double prev = 0.0;
  for (double t : {4.0, 16.0, 64.0}) {
    const auto plus = packet(v, t + h, g, prof), minus = packet(v, t - h, g, prof);
    const auto phi = packet(v, t, g, prof);
    const auto lap = spectral_derivative(phi, 2);
    double res = 0.0, err = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) {
      const Complex r = Complex{0.0, 1.0} * (plus[j] - minus[j]) / (2 * h) + lap[j];
      const double x = g.x(j), y = (x - v * t) / std::sqrt(t);
      Complex pred{};
      if (std::abs(y) < 1.0)
        pred = std::polar(1.0, x * x / (4 * t)) / t *
               Complex{prof.second_derivative(y), 0.5 * (prof.value(y) + y * prof.derivative(y))};
      res = std::max(res, std::abs(r));
      err = std::max(err, std::abs(r - pred));
    }
    CAPTURE(t);
    CHECK(err < 1e-5 * res);
    const double scaled = res * t;
    if (prev > 0.0) CHECK(std::abs(scaled - prev) < 1e-4 * prev);
    prev = scaled;
  }
}

TEST_CASE("extraction oracles") {
  const GridSpec g(64.0, 4096);
  const auto prof = PacketProfile::compact_bump();
  const double t = 4.0, rt = 2.0;

  SUBCASE("constant w gives gamma = c") {
    const Complex c{0.3, -0.4};
    const auto u = sample(
        g, [&](double x) { return c / rt * std::polar(1.0, x * x / (4 * t)) * std::exp(-std::pow((x - 4.0) / 20.0, 8)); },
        t);
    for (const auto& prof_gamma : {extract_gamma(u, {0.5, 1.0, 1.5}, prof), extract_gamma_fourier(u, {0.5, 1.0, 1.5}, prof)})
      for (const auto& gmm : prof_gamma.gamma) CHECK(std::abs(gmm - c) < 1e-6);
  }
  SUBCASE("packet against itself") {
    const double v0 = 1.0;
    const auto u = packet(v0, t, g, prof);
    // sqrt(t) int chi^2 by fine quadrature.
    double chi2 = 0.0;
    const std::size_t m = 1 << 16;
    for (std::size_t i = 1; i < m; ++i) {
      const double y = -1.0 + 2.0 * i / m;
      chi2 += prof.value(y) * prof.value(y);
    }
    chi2 *= 2.0 / m;
    CHECK(std::abs(extract_gamma(u, {v0}, prof).gamma[0] - rt * chi2) < 1e-6);
    CHECK(std::abs(extract_gamma_fourier(u, {v0}, prof).gamma[0] - rt * chi2) < 1e-6);
  }
  SUBCASE("zero field") {
    const auto z = ComplexField::zeros(g, t);
    CHECK(max_abs(extract_gamma(z, {0.0, 1.0}, prof).gamma) == 0.0);
    CHECK(max_abs(extract_gamma_fourier(z, {0.0, 1.0}, prof).gamma) == 0.0);
  }
  SUBCASE("t < 1 and out-of-domain velocities") {
    CHECK_THROWS_AS(extract_gamma(ComplexField::zeros(g, 0.5), {0.0}, prof), ArgumentError);
    CHECK_THROWS_AS(extract_gamma_fourier(ComplexField::zeros(g, 0.5), {0.0}, prof), ArgumentError);
    const Profile p = extract_gamma(ComplexField::zeros(g, t), {0.0, 100.0, -100.0}, prof);
    CHECK(p.v_grid.size() == 1);
    CHECK(p.dropped.size() == 2);
  }
}

TEST_CASE("single mode: gamma peaks at v = 2 xi") {
  const GridSpec g(256.0, 4096);
  const double xi = g.xi(80);  // ~0.98
  const auto u = sample(g, [&](double x) { return std::polar(1.0, xi * x); }, 64.0);
  const auto vs = uniform(0.0, 4.0, 2.0 * g.dxi());
  const Profile p = extract_gamma_fourier(u, vs, PacketProfile::compact_bump());
  std::size_t best = 0;
  for (std::size_t i = 0; i < p.gamma.size(); ++i)
    if (std::abs(p.gamma[i]) > std::abs(p.gamma[best])) best = i;
  CHECK(std::abs(p.v_grid[best] - 2.0 * xi) < 0.25);
  // Exact: |gamma(v)| = sqrt(t) |int e^{i s y - i y^2/4} chi(y) dy|, s = sqrt(t) (xi - v/2).
  const auto prof = PacketProfile::compact_bump();
  const std::size_t m = 1 << 14;
  for (std::size_t i = 0; i < p.gamma.size(); i += 7) {
    const double s = 8.0 * (xi - 0.5 * p.v_grid[i]);
    Complex q{};
    for (std::size_t k = 0; k < m; ++k) {
      const double y = -1.0 + (2.0 * k + 1.0) / m;
      q += std::polar(prof.value(y), s * y - 0.25 * y * y);
    }
    q *= 2.0 / m;
    CAPTURE(p.v_grid[i]);
    CHECK(std::abs(std::abs(p.gamma[i]) - 8.0 * std::abs(q)) < 1e-8 * std::abs(p.gamma[best]));
  }
}

TEST_CASE("dual route agreement on free and nonlinear flows") {
  const GridSpec g(256.0, 4096);
  for (const auto& prof : {PacketProfile::compact_bump(), PacketProfile::gaussian()}) {
    const auto u0 = gaussian_datum(g, 0.1, 1.0);
    const auto u = linear_propagate(u0, 9.0);
    const auto vs = default_v_grid(u, prof, 9.0, 0.1);
    const Profile pp = extract_gamma(u, vs, prof), pf = extract_gamma_fourier(u, vs, prof);
    REQUIRE(pp.v_grid == pf.v_grid);
    CHECK(max_diff(pp.gamma, pf.gamma) < 1e-6 * max_abs(pp.gamma));
  }
  SolverConfig cfg;
  cfg.dt = 2e-3;
  cfg.t_end = 4.0;
  cfg.snapshot_times = {4.0};
  const auto u = evolve(gaussian_datum(g, 0.2, 1.0), cfg).snapshots.at(0).field;
  const auto prof = PacketProfile::compact_bump();
  const auto vs = default_v_grid(u, prof, 4.0, 0.1);
  const Profile pp = extract_gamma(u, vs, prof), pf = extract_gamma_fourier(u, vs, prof);
  CHECK(max_diff(pp.gamma, pf.gamma) < 1e-6 * max_abs(pp.gamma));
}

TEST_CASE("velocity grid") {
  const GridSpec g(256.0, 4096);
  const auto prof = PacketProfile::compact_bump();
  const auto u = linear_propagate(gaussian_datum(g, 0.05, 1.0), 4.0);
  const auto vs = default_v_grid(u, prof, 4.0, 0.1);
  REQUIRE(vs.size() > 10);
  const double step = vs[1] - vs[0];
  const double lattice = 2.0 * g.dxi();
  CHECK(std::abs(step / lattice - std::round(step / lattice)) < 1e-9);
  for (std::size_t i = 1; i < vs.size(); ++i) CHECK(vs[i] - vs[i - 1] == doctest::Approx(step));
  CHECK(vs.back() <= max_packet_velocity(g, prof, 4.0));
  CHECK(vs.front() == doctest::Approx(-vs.back()));
}

TEST_CASE("norm bridge L2_x = t^(1/2) L2_v") {
  const GridSpec g(64.0, 1024);
  const double t = 9.0;
  ComplexVector f(g.size());
  double sx = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    f[j] = std::exp(-0.01 * g.x(j) * g.x(j)) * std::polar(1.0, 0.2 * g.x(j));
    sx += std::norm(f[j]) * g.dx();
  }
  // The same samples seen on the velocity grid v_j = x_j / t.
  CHECK(std::sqrt(t) * l2_v_norm(f, g.dx() / t) == doctest::Approx(std::sqrt(sx)).epsilon(1e-14));
}

TEST_CASE("profile bounds and difference bounds on the free flow") {
  // Width-4 Gaussian: narrow spectrum, so a modest box holds it to t = 256.
  const GridSpec g(1024.0, 8192);
  const auto prof = PacketProfile::compact_bump();
  const auto u0 = gaussian_datum(g, 0.05, 4.0);
  std::map<std::string, std::vector<double>> series;
  for (double t : {4.0, 16.0, 64.0, 256.0}) {
    const auto u = linear_propagate(u0, t);
    const auto lu = apply_L(u), lux = apply_L(spectral_derivative(u, 1));
    const auto vs = default_v_grid(u, prof, t, 1.0 / std::sqrt(t));
    const Profile p = extract_gamma_fourier(u, vs, prof);
    const auto b = difference_bounds(u, lu, lux, p, prof);
    for (const auto& [k, val] : b) series[k].push_back(val);
  }
  for (const auto& [k, vals] : series) {
    std::ostringstream os;
    for (double x : vals) os << ' ' << x;
    MESSAGE(k << ": " << os.str());
    for (double x : vals) {
      CAPTURE(k);
      CHECK(std::isfinite(x));
      CHECK(x < 10.0);
    }
  }
  // ||gamma||_{L2_v} <= ||u||_2 for nonnegative chi of unit mass.
  for (double x : series["gamma_l2"]) CHECK(x <= 1.0 + 1e-6);
  for (double x : series["gamma_l2"]) CHECK(x > 0.9);
  // Difference ratios do not grow with t: the stated t-powers are not beaten.
  for (const char* k : {"spatial_linf", "spatial_l2", "spatial_ux_linf", "fourier_linf", "fourier_l2"}) {
    CAPTURE(k);
    CHECK(series[k].back() <= 1.05 * series[k].front());
  }
}

TEST_CASE("velocity derivative and CSV") {
  Profile p;
  p.t = 1.0;
  const double dv = 0.05;
  for (int i = -200; i < 200; ++i) {
    const double v = i * dv;
    p.v_grid.push_back(v);
    p.gamma.push_back(std::exp(-v * v) * Complex{1.0, 0.5});
  }
  const auto d = velocity_derivative(p);
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double v = p.v_grid[i];
    CHECK(std::abs(d[i] - (-2.0 * v) * std::exp(-v * v) * Complex{1.0, 0.5}) < 1e-10);
  }
  std::ostringstream os;
  write_profile_csv(os, p);
  CHECK(os.str().substr(0, os.str().find('\n')) == "v,re_gamma,im_gamma,abs_gamma");
}
