#include <cmath>
#include <random>

#include "doctest.h"
#include "dnls/errors.hpp"
#include "dnls/spectral_grid.hpp"

using namespace dnls;

namespace {

ComplexField from_function(const GridSpec& g, auto&& f, double t = 0.0) {
  ComplexVector v(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) v[j] = f(g.x(j));
  return {g, t, std::move(v)};
}

ComplexField random_field(const GridSpec& g, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  ComplexVector v(g.size());
  for (auto& c : v) c = {nd(rng), nd(rng)};
  return {g, 0.0, std::move(v)};
}

double max_diff(const ComplexField& a, const ComplexField& b) {
  double m = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) m = std::max(m, std::abs(a[j] - b[j]));
  return m;
}

}  // namespace

TEST_CASE("grid geometry") {
  const GridSpec g(10.0, 64);
  CHECK(g.dx() * 64 == doctest::Approx(20.0).epsilon(1e-15));
  CHECK(g.x(0) == -10.0);
  CHECK(g.xi(1) == doctest::Approx(kPi / 10.0));
  CHECK(g.mode(32) == -32);
  CHECK(g.is_nyquist(32));
  // Frequencies closed under negation except the Nyquist slot.
  for (std::size_t k = 1; k < 64; ++k) {
    if (g.is_nyquist(k)) continue;
    CHECK(g.xi(64 - k) == doctest::Approx(-g.xi(k)));
  }
  CHECK_THROWS_AS(GridSpec(10.0, 48), ArgumentError);
  CHECK_THROWS_AS(GridSpec(10.0, 4), ArgumentError);
  CHECK_THROWS_AS(GridSpec(-1.0, 64), ArgumentError);
}

TEST_CASE("field invariants") {
  const GridSpec g(5.0, 16);
  CHECK_THROWS_AS(ComplexField(g, 0.0, ComplexVector(15)), StructuralError);
  ComplexVector bad(16);
  bad[3] = {std::nan(""), 0.0};
  CHECK_THROWS_AS(ComplexField(g, 0.0, bad), ArgumentError);
  CHECK_THROWS_AS(inverse_fft(Spectrum{g, ComplexVector(8)}), StructuralError);
}

TEST_CASE("pure mode transforms to a single coefficient") {
  const GridSpec g(8.0, 128);
  const double xi1 = g.xi(1);
  const auto u = from_function(g, [&](double x) { return std::polar(1.0, xi1 * x); });
  const Spectrum s = fft(u);
  // Continuous-line normalization: the coefficient is 2L / sqrt(2 pi) times the
  // phase of x_0 = -L, with magnitude fixed by Parseval.
  CHECK(std::abs(s.values[1]) == doctest::Approx(2.0 * 8.0 / std::sqrt(2.0 * kPi)).epsilon(1e-12));
  for (std::size_t k = 0; k < g.size(); ++k)
    if (k != 1) CHECK(std::abs(s.values[k]) < 1e-12);
}

TEST_CASE("constant field: zero mode only, value 2L / sqrt(2 pi)") {
  const GridSpec g(3.0, 64);
  const auto u = from_function(g, [](double) { return Complex{1.0, 0.0}; });
  const Spectrum s = fft(u);
  // dx / sqrt(2 pi) * sum_j 1 = 2L / sqrt(2 pi).
  CHECK(s.values[0].real() == doctest::Approx(6.0 / std::sqrt(2.0 * kPi)).epsilon(1e-14));
  CHECK(std::abs(s.values[0].imag()) < 1e-14);
  for (std::size_t k = 1; k < g.size(); ++k) CHECK(std::abs(s.values[k]) < 1e-12);
}

TEST_CASE("round trip and Parseval for n = 64 ... 8192") {
  for (std::size_t n = 64; n <= 8192; n *= 2) {
    const GridSpec g(12.5, n);
    const auto u = random_field(g, static_cast<unsigned>(n));
    const Spectrum s = fft(u);
    const auto back = inverse_fft(s, u.time());
    CHECK(max_diff(back, u) / linf_norm(u) < 1e-12);
    CHECK(l2_norm(s) == doctest::Approx(l2_norm(u)).epsilon(1e-12));
  }
}

TEST_CASE("spectral derivatives of eigenfunctions") {
  const GridSpec g(4.0, 64);
  const double xi1 = g.xi(1);
  const auto e = from_function(g, [&](double x) { return std::polar(1.0, xi1 * x); });
  const auto de = spectral_derivative(e, 1);
  for (std::size_t j = 0; j < g.size(); ++j)
    CHECK(std::abs(de[j] - Complex{0.0, xi1} * e[j]) < 1e-10 * xi1);

  const auto c = from_function(g, [&](double x) { return Complex{std::cos(xi1 * x), 0.0}; });
  const auto d2 = spectral_derivative(c, 2);
  for (std::size_t j = 0; j < g.size(); ++j) CHECK(std::abs(d2[j] + xi1 * xi1 * c[j]) < 1e-10 * xi1 * xi1);

  CHECK_THROWS_AS(spectral_derivative(c, 0), ArgumentError);
  CHECK_THROWS_AS(spectral_derivative(c, 4), ArgumentError);
}

TEST_CASE("derivative of a Gaussian") {
  const GridSpec g(10.0, 256);
  const auto u = from_function(g, [](double x) { return Complex{std::exp(-x * x), 0.0}; });
  const auto du = spectral_derivative(u, 1);
  double err = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double x = g.x(j);
    err = std::max(err, std::abs(du[j] - Complex{-2.0 * x * std::exp(-x * x), 0.0}));
  }
  CHECK(err < 1e-8);
}

TEST_CASE("odd derivatives keep real data real") {
  const GridSpec g(6.0, 32);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd;
  ComplexVector v(g.size());
  for (auto& c : v) c = {nd(rng), 0.0};
  const ComplexField u(g, 0.0, v);
  for (int order : {1, 3}) {
    const auto d = spectral_derivative(u, order);
    for (std::size_t j = 0; j < g.size(); ++j) CHECK(std::abs(d[j].imag()) < 1e-10);
  }
}

TEST_CASE("spectral derivative is linear") {
  const GridSpec g(7.0, 128);
  const auto u = random_field(g, 1), v = random_field(g, 2);
  const Complex a{0.3, -1.2}, b{2.0, 0.5};
  ComplexVector w(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) w[j] = a * u[j] + b * v[j];
  const auto lhs = spectral_derivative(ComplexField(g, 0.0, w), 1);
  const auto du = spectral_derivative(u, 1), dv = spectral_derivative(v, 1);
  double err = 0.0, ref = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    err = std::max(err, std::abs(lhs[j] - a * du[j] - b * dv[j]));
    ref = std::max(ref, std::abs(lhs[j]));
  }
  CHECK(err < 1e-12 * ref);
}

TEST_CASE("norms") {
  SUBCASE("constant") {
    const GridSpec g(5.0, 64);
    const Complex c{0.6, -0.8};
    const auto u = from_function(g, [&](double) { return c; });
    CHECK(l2_norm(u) == doctest::Approx(std::abs(c) * std::sqrt(10.0)).epsilon(1e-14));
    CHECK(linf_norm(u) == doctest::Approx(1.0));
  }
  SUBCASE("Gaussian l2 = pi^(1/4)") {
    const GridSpec g(12.0, 256);
    const auto u = from_function(g, [](double x) { return Complex{std::exp(-0.5 * x * x), 0.0}; });
    CHECK(std::abs(l2_norm(u) - std::pow(kPi, 0.25)) < 1e-8);
    // ||u||_{H^1}^2 = ||u||^2 + ||u'||^2 = sqrt(pi) + sqrt(pi)/2.
    CHECK(sobolev_norm(u, 1.0) == doctest::Approx(std::sqrt(1.5 * std::sqrt(kPi))).epsilon(1e-10));
  }
  SUBCASE("h0 is l2") {
    const auto u = random_field(GridSpec(3.0, 128), 11);
    CHECK(sobolev_norm(u, 0.0) == l2_norm(u));
    CHECK(norms(u).l2 == l2_norm(u));
  }
}

TEST_CASE("boundary guard") {
  const GridSpec g(20.0, 512);
  const auto narrow = from_function(g, [](double x) { return Complex{std::exp(-0.5 * x * x), 0.0}; });
  CHECK(boundary_negligible(narrow));
  CHECK_NOTHROW(require_boundary_negligible(narrow, "test", kBoundaryTolerance, true));
  const auto wide = from_function(g, [](double x) { return Complex{std::exp(-0.5 * x * x / 25.0), 0.0}; });
  CHECK_FALSE(boundary_negligible(wide));
  CHECK_THROWS_AS(require_boundary_negligible(wide, "test"), DomainError);
  CHECK(boundary_ratio(ComplexField::zeros(g)) == 0.0);
}

TEST_CASE("refinement is exact for band-limited data") {
  const GridSpec g(10.0, 128);
  const auto u = from_function(g, [](double x) { return std::exp(-0.5 * x * x) * std::polar(1.0, 2.0 * x); });
  const auto f = refine(u, 4);
  CHECK(f.size() == 512);
  double err = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j) {
    const double x = f.grid().x(j);
    err = std::max(err, std::abs(f[j] - std::exp(-0.5 * x * x) * std::polar(1.0, 2.0 * x)));
  }
  CHECK(err < 1e-12);
  for (std::size_t j = 0; j < u.size(); ++j) CHECK(std::abs(f[4 * j] - u[j]) < 1e-13);
  CHECK_THROWS_AS(refine(u, 3), ArgumentError);
}
