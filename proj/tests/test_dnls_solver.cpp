#include <cmath>
#include <random>
#include <sstream>
#include <string>

#include "doctest.h"
#include "dnls/dnls_solver.hpp"
#include "dnls/experiment.hpp"
#include "dnls/solitons.hpp"

using namespace dnls;

namespace {

ComplexField sample(const GridSpec& g, auto&& f, double t = 0.0) {
  ComplexVector v(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) v[j] = f(g.x(j));
  return {g, t, std::move(v)};
}

double rel_l2(const ComplexField& a, const ComplexField& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    num += std::norm(a[j] - b[j]);
    den += std::norm(b[j]);
  }
  return std::sqrt(num / den);
}

double linf_diff(const ComplexField& a, const ComplexField& b) {
  double m = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) m = std::max(m, std::abs(a[j] - b[j]));
  return m;
}

// One integrator step on a plane wave, bypassing the boundary guard (a plane
// wave is periodic, not localized).
Complex plane_wave_step(const GridSpec& g, std::size_t k, Complex amp, double h, Integrator kind) {
  ComplexVector hat(g.size());
  hat[k] = amp * static_cast<double>(g.size());  // raw FFT coefficient of amp e^{i xi_k x_j} up to phase
  const double phase0 = g.xi(k) * g.x(0);
  hat[k] *= std::polar(1.0, phase0);
  std::vector<ComplexVector> state{hat};
  ExponentialIntegrator integ(g, kind);
  DnlsNonlinearity rhs(g, /*dealias=*/true);
  integ.step(state, h, rhs);
  return state[0][k] / static_cast<double>(g.size()) * std::polar(1.0, -phase0);
}

}  // namespace

TEST_CASE("zero data stays zero") {
  const GridSpec g(20.0, 256);
  SolverConfig cfg;
  cfg.dt = 1e-2;
  cfg.t_end = 1.0;
  cfg.snapshot_times = {0.0, 0.5, 1.0};
  const ComplexField z = ComplexField::zeros(g);
  const ComplexField one = dnls_step(z, cfg);
  for (std::size_t j = 0; j < g.size(); ++j) CHECK(one[j] == Complex{});
  const EvolveResult r = evolve(z, cfg);
  REQUIRE(r.snapshots.size() == 3);
  for (const auto& s : r.snapshots) {
    CHECK(linf_norm(s.field) == 0.0);
    CHECK(s.record.conserved.mass == 0.0);
    CHECK(s.record.conserved.momentum == 0.0);
    CHECK(s.record.conserved.energy == 0.0);
  }
}

TEST_CASE("plane wave reduces to a single-mode ODE") {
  // u = a(t) e^{ikx}: i a' - k^2 a = k |a|^2 a, so a(t) = A exp(-i (k^2 + k|A|^2) t).
  const GridSpec g(kPi, 32);  // xi_k = k
  const std::size_t k = 3;
  const Complex amp{0.8, 0.6};
  const double kk = g.xi(k);
  auto exact = [&](double h) { return amp * std::polar(1.0, -(kk * kk + kk * std::norm(amp)) * h); };
  for (Integrator kind : {Integrator::IFRK4, Integrator::ETDRK4}) {
    const std::string name = to_string(kind);
    CAPTURE(name);
    const double e1 = std::abs(plane_wave_step(g, k, amp, 0.05, kind) - exact(0.05));
    const double e2 = std::abs(plane_wave_step(g, k, amp, 0.025, kind) - exact(0.025));
    CAPTURE(e1);
    // In the integrating-factor frame the mode obeys b' = -i k |b|^2 b, and
    // IFRK4 is classical RK4 on that scalar ODE, to round-off.
    if (kind == Integrator::IFRK4) {
      auto f = [&](Complex b) { return Complex{0.0, -kk} * std::norm(b) * b; };
      const double h = 0.05;
      const Complex k1 = f(amp), k2 = f(amp + 0.5 * h * k1), k3 = f(amp + 0.5 * h * k2), k4 = f(amp + h * k3);
      const Complex rk4 = std::polar(1.0, -kk * kk * h) * (amp + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
      CHECK(std::abs(plane_wave_step(g, k, amp, h, kind) - rk4) < 1e-14);
      CHECK(e1 < 1e-5);
    }
    // Local error O(h^5): halving h divides it by ~32.
    CHECK(e1 / e2 > 24.0);
    CHECK(e1 / e2 < 40.0);
    CHECK(std::abs(plane_wave_step(g, k, amp, 1e-3, kind) - exact(1e-3)) < 1e-13);
  }
}

TEST_CASE("dnls_step refuses fields touching the boundary") {
  const GridSpec g(kPi, 32);
  const auto u = sample(g, [&](double x) { return std::polar(1.0, 3.0 * x); });
  SolverConfig cfg;
  CHECK_THROWS_AS(dnls_step(u, cfg), DomainError);
}

TEST_CASE("soliton theta = pi/4 to t = 1 against the exact solution") {
  SolitonParams p;
  p.theta = kPi / 4.0;
  const GridSpec g(64.0, 2048);
  SolverConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 1.0;
  cfg.snapshot_times = {1.0};
  for (Integrator kind : {Integrator::IFRK4, Integrator::ETDRK4}) {
    cfg.integrator = kind;
    const EvolveResult r = evolve(soliton_initial(p, g), cfg);
    REQUIRE(r.snapshots.size() == 1);
    CHECK(r.snapshots[0].field.time() == 1.0);
    CHECK(rel_l2(r.snapshots[0].field, soliton_exact(p, g, 1.0)) < 1e-6);
  }
}

TEST_CASE("linear propagation") {
  SUBCASE("pure mode") {
    const GridSpec g(8.0, 64);
    const double xi = g.xi(2);
    const auto u = sample(g, [&](double x) { return std::polar(1.0, xi * x); });
    const auto w = linear_propagate(u, 0.7);
    CHECK(w.time() == 0.7);
    for (std::size_t j = 0; j < g.size(); ++j)
      CHECK(std::abs(w[j] - std::polar(1.0, xi * g.x(j) - xi * xi * 0.7)) < 1e-12);
  }
  SUBCASE("free Gaussian closed form") {
    // e^{-x^2/2} -> (1 + 2it)^{-1/2} exp(-x^2 / (2 (1 + 2it))).
    // Half-width 80 keeps the periodic images below 1e-10 at t = 3.
    const GridSpec g(80.0, 2048);
    const auto u = sample(g, [](double x) { return Complex{std::exp(-0.5 * x * x), 0.0}; });
    for (double t : {0.5, 1.0, 3.0}) {
      const Complex d{1.0, 2.0 * t};
      const auto exact = sample(g, [&](double x) { return std::exp(-x * x / (2.0 * d)) / std::sqrt(d); }, t);
      CHECK(linf_diff(linear_propagate(u, t), exact) < 1e-10);
    }
  }
  SUBCASE("unitary, group action, no backward flow") {
    const GridSpec g(10.0, 256);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> nd;
    ComplexVector v(g.size());
    for (auto& c : v) c = {nd(rng), nd(rng)};
    const ComplexField u(g, 0.0, v);
    CHECK(l2_norm(linear_propagate(u, 2.5)) == doctest::Approx(l2_norm(u)).epsilon(1e-12));
    const auto two_step = linear_propagate(linear_propagate(u, 0.3), 1.1);
    CHECK(linf_diff(two_step, linear_propagate(u, 1.1)) < 1e-12 * linf_norm(u) * 10);
    CHECK_THROWS_AS(linear_propagate(u.with_time(1.0), 0.5), ArgumentError);
  }
}

TEST_CASE("conserved quantities") {
  CHECK(conserved(ComplexField::zeros(GridSpec(5.0, 64))).mass == 0.0);
  // Real Gaussian: P = (1/2) int e^{-4x^2} = sqrt(pi)/4,
  // E = int 4x^2 e^{-2x^2} + (1/2) int e^{-6x^2} = sqrt(pi/2) + sqrt(pi/6)/2.
  const GridSpec g(12.0, 512);
  const auto u = sample(g, [](double x) { return Complex{std::exp(-x * x), 0.0}; });
  const ConservedTriple q = conserved(u);
  CHECK(std::abs(q.mass - std::sqrt(kPi / 2.0)) < 1e-8);
  CHECK(std::abs(q.momentum - std::sqrt(kPi) / 4.0) < 1e-8);
  CHECK(std::abs(q.energy - (std::sqrt(kPi / 2.0) + 0.5 * std::sqrt(kPi / 6.0))) < 1e-8);
  for (double theta : {0.2, kPi / 4.0, 1.2}) {
    SolitonParams p;
    p.theta = theta;
    CHECK(std::abs(conserved(soliton_initial(p, soliton_grid(p))).mass - 8.0 * theta) < 1e-6);
  }
}

TEST_CASE("snapshots land exactly on requested times") {
  const GridSpec g(30.0, 512);
  const auto u = sample(g, [](double x) { return Complex{0.1 * std::exp(-x * x), 0.0}; });
  SolverConfig cfg;
  cfg.dt = 0.03;
  cfg.t_end = 1.0;
  cfg.snapshot_times = {0.0, 0.1, 0.25, 0.7, 1.0};
  const EvolveResult r = evolve(u, cfg);
  REQUIRE(r.snapshots.size() == cfg.snapshot_times.size());
  REQUIRE(r.records.size() == cfg.snapshot_times.size());
  for (std::size_t i = 0; i < r.snapshots.size(); ++i) CHECK(r.snapshots[i].field.time() == cfg.snapshot_times[i]);
  CHECK(linf_diff(r.snapshots[0].field, u) < 1e-15);

  cfg.keep_snapshots = false;
  std::size_t seen = 0;
  const SnapshotObserver obs = [&](const ComplexField&, const DiagnosticsRecord&) { ++seen; };
  const EvolveResult r2 = evolve(u, cfg, std::span(&obs, 1));
  CHECK(r2.snapshots.empty());
  CHECK(r2.records.size() == cfg.snapshot_times.size());
  CHECK(seen == cfg.snapshot_times.size());
}

TEST_CASE("config validation") {
  const GridSpec g(10.0, 256);
  SolverConfig cfg;
  cfg.dt = 1.0;  // far above 0.5 dx^2: warning only
  CHECK(cfg.validate(g).size() == 1);
  cfg.dt = 1e-5;
  CHECK(cfg.validate(g).empty());
  cfg.t_end = 0.0;
  CHECK_THROWS_AS(cfg.validate(g), ArgumentError);
  cfg.t_end = 1.0;
  cfg.snapshot_times = {0.5, 2.0};
  CHECK_THROWS_AS(cfg.validate(g), ArgumentError);
  cfg.snapshot_times = {0.5, 0.2};
  CHECK_THROWS_AS(cfg.validate(g), ArgumentError);
  cfg.snapshot_times = {};
  cfg.dt = -1.0;
  CHECK_THROWS_AS(cfg.validate(g), ArgumentError);
  CHECK(integrator_from_string("etdrk4") == Integrator::ETDRK4);
  CHECK_THROWS_AS(integrator_from_string("euler"), ArgumentError);
}

TEST_CASE("fourth-order self-convergence") {
  const GridSpec g(40.0, 1024);
  const auto u = sample(g, [](double x) { return Complex{0.8 * std::exp(-0.5 * x * x), 0.0}; });
  auto run = [&](double dt) {
    SolverConfig cfg;
    cfg.dt = dt;
    cfg.t_end = 1.0;
    cfg.snapshot_times = {1.0};
    return evolve(u, cfg).snapshots.at(0).field;
  };
  const auto ref = run(0.05 / 16);
  const double e1 = rel_l2(run(0.05), ref);
  const double e2 = rel_l2(run(0.025), ref);
  CAPTURE(e1);
  CAPTURE(e2);
  // Observed order log2(e1 / e2) within 4 +/- 0.5.
  CHECK(std::log2(e1 / e2) > 3.5);
  CHECK(std::log2(e1 / e2) < 4.5);
}

TEST_CASE("scaling symmetry, lambda = 2") {
  // u_l(t, x) = sqrt(l) u(l^2 t, l x). On the grid of half-width L / l the
  // samples of u_l are sqrt(l) times those of u, and dt scales by l^-2.
  const double lambda = 2.0;
  const GridSpec g(48.0, 1024), gs(48.0 / lambda, 1024);
  const auto u0 = sample(g, [](double x) { return Complex{0.6 * std::exp(-0.5 * x * x), 0.3 * x * std::exp(-0.5 * x * x)}; });
  ComplexVector scaled(u0.values().begin(), u0.values().end());
  for (auto& c : scaled) c *= std::sqrt(lambda);
  const ComplexField us0(gs, 0.0, scaled);

  SolverConfig cfg;
  cfg.dt = 2e-3;
  cfg.t_end = 1.0;
  cfg.snapshot_times = {1.0};
  const auto u1 = evolve(u0, cfg).snapshots.at(0).field;
  SolverConfig cs = cfg;
  cs.dt = cfg.dt / (lambda * lambda);
  cs.t_end = cfg.t_end / (lambda * lambda);
  cs.snapshot_times = {cs.t_end};
  const auto us1 = evolve(us0, cs).snapshots.at(0).field;
  double err = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) err = std::max(err, std::abs(us1[j] - std::sqrt(lambda) * u1[j]));
  CHECK(err < 1e-10 * linf_norm(us1));
}

TEST_CASE("momentum and energy signs are the conserved ones") {
  // Large moving datum, so the quartic and mixed terms matter: flipping the
  // sign of either changes P or E by O(1e-1) over t in [0, 2].
  const GridSpec g(64.0, 2048);
  const auto u = sample(g, [](double x) { return 0.6 * std::exp(-0.5 * x * x) * std::polar(1.0, 0.7 * x); });
  SolverConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 2.0;
  cfg.snapshot_times = {0.0, 1.0, 2.0};
  const EvolveResult r = evolve(u, cfg);
  const ConservedTriple q0 = r.records.front().conserved;
  for (const auto& rec : r.records) {
    CHECK(std::abs(rec.conserved.momentum - q0.momentum) < 1e-10);
    CHECK(std::abs(rec.conserved.energy - q0.energy) < 1e-10);
  }
}

TEST_CASE("small Gaussian: conservation over a long run") {
  // Width-1 datum, epsilon = 0.05, to t = 50 on a box that holds it.
  const GridSpec g(1024.0, 16384);
  const auto u0 = gaussian_datum(g, 0.05, 1.0);
  SolverConfig cfg;
  cfg.dt = 4e-3;
  cfg.t_end = 50.0;
  cfg.snapshot_times = {0.0, 10.0, 25.0, 50.0};
  cfg.keep_snapshots = false;
  const EvolveResult r = evolve(u0, cfg);
  const ConservedTriple q0 = r.records.front().conserved;
  for (const auto& rec : r.records) {
    CHECK(std::abs(rec.conserved.mass - q0.mass) / q0.mass < 1e-9);
    CHECK(std::abs(rec.conserved.momentum - q0.momentum) / std::max(std::abs(q0.momentum), 1e-12) < 1e-7);
    CHECK(std::abs(rec.conserved.energy - q0.energy) / std::max(std::abs(q0.energy), 1e-12) < 1e-7);
    CHECK(rec.boundary_ratio < kBoundaryTolerance);
  }
}

TEST_CASE("diagnostics CSV layout") {
  DiagnosticsRecord a;
  a.time = 1.0;
  a.conserved.mass = 1.0 / 3.0;
  DiagnosticsRecord b = a;
  b.vf = VFColumns{0.5, 0.25, 1.5};
  std::ostringstream os;
  write_diagnostics_csv(os, std::vector{a});
  std::string header = os.str().substr(0, os.str().find('\n'));
  CHECK(header == "time,mass,momentum,energy,l2,h1,linf_u,linf_ux");
  CHECK(os.str().find("0.33333333333333331") != std::string::npos);
  std::ostringstream os2;
  write_diagnostics_csv(os2, std::vector{b});
  header = os2.str().substr(0, os2.str().find('\n'));
  CHECK(header == "time,mass,momentum,energy,l2,h1,linf_u,linf_ux,lu_l2,lux_l2,ks_ratio");
}
