#include "dnls/wave_packets.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "dnls/errors.hpp"

namespace dnls {

namespace {

double raw_profile(PacketKind kind, double y) {
  if (kind == PacketKind::Gaussian) return std::exp(-0.5 * y * y);
  const double a = 1.0 - y * y;
  return a > 0.0 ? std::exp(-1.0 / a) : 0.0;
}

// Phasor recurrences drift by a few ulps per step; re-anchor this often.
constexpr std::size_t kAnchor = 64;

}  // namespace

PacketProfile::PacketProfile(PacketKind kind, double radius, std::size_t quadrature_points)
    : kind_(kind), radius_(radius) {
  // Normalization: trapezoid on the support (spectrally accurate for both).
  const std::size_t fine = std::size_t{1} << 16;
  const double hf = 2.0 * radius / static_cast<double>(fine);
  double mass = 0.0;
  for (std::size_t i = 1; i < fine; ++i) mass += raw_profile(kind, -radius + static_cast<double>(i) * hf);
  norm_ = 1.0 / (mass * hf);

  const double h = 2.0 * radius / static_cast<double>(quadrature_points);
  nodes_.resize(quadrature_points + 1);
  weights_.resize(quadrature_points + 1);
  const double w = h / std::sqrt(2.0 * kPi);
  for (std::size_t i = 0; i <= quadrature_points; ++i) {
    const double y = -radius + static_cast<double>(i) * h;
    nodes_[i] = y;
    const double edge = (i == 0 || i == quadrature_points) ? 0.5 : 1.0;
    weights_[i] = edge * w * value(y) * std::polar(1.0, 0.25 * y * y);
  }
}

PacketProfile PacketProfile::compact_bump() { return {PacketKind::CompactBump, 1.0, 2048}; }

PacketProfile PacketProfile::gaussian() { return {PacketKind::Gaussian, 9.0, 8192}; }

double PacketProfile::value(double y) const {
  if (std::abs(y) >= radius_) return 0.0;
  return norm_ * raw_profile(kind_, y);
}

double PacketProfile::derivative(double y) const {
  if (std::abs(y) >= radius_) return 0.0;
  if (kind_ == PacketKind::Gaussian) return -y * value(y);
  const double a = 1.0 - y * y;
  return value(y) * (-2.0 * y / (a * a));
}

double PacketProfile::second_derivative(double y) const {
  if (std::abs(y) >= radius_) return 0.0;
  if (kind_ == PacketKind::Gaussian) return (y * y - 1.0) * value(y);
  const double a = 1.0 - y * y;
  const double f1 = -2.0 * y / (a * a);
  const double f2 = -2.0 / (a * a) - 8.0 * y * y / (a * a * a);
  return value(y) * (f1 * f1 + f2);
}

Complex PacketProfile::chirped_transform(double s) const {
  const double h = nodes_[1] - nodes_[0];
  const Complex step = std::polar(1.0, -s * h);
  Complex rot{1.0, 0.0};
  Complex acc{};
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    rot = (i % kAnchor == 0) ? std::polar(1.0, -s * nodes_[i]) : rot * step;
    acc += weights_[i] * rot;
  }
  return acc;
}

double max_packet_velocity(const GridSpec& grid, const PacketProfile& profile, double t) {
  return (grid.half_width() - grid.dx() - profile.support_radius() * std::sqrt(t)) / t;
}

ComplexField packet(double v, double t, const GridSpec& grid, const PacketProfile& profile,
                    PacketComponent component) {
  if (!(t >= 1.0)) throw ArgumentError("packet: requires t >= 1");
  const double rt = std::sqrt(t);
  const double reach = std::abs(v) * t + profile.support_radius() * rt;
  if (reach > grid.half_width() - grid.dx()) {
    std::ostringstream os;
    os << "packet: support of Phi_v (v = " << v << ", t = " << t << ") leaves the domain; half_width >= "
       << reach + grid.dx() << " required, have " << grid.half_width();
    throw DomainError(os.str());
  }
  ComplexVector values(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double x = grid.x(j);
    const double y = (x - v * t) / rt;
    if (std::abs(y) >= profile.support_radius()) continue;
    const double amp = component == PacketComponent::Phi ? profile.value(y) : profile.derivative(y);
    values[j] = amp * std::polar(1.0, x * x / (4.0 * t));
  }
  return {grid, t, std::move(values)};
}

Profile extract_gamma(const ComplexField& u, const std::vector<double>& v_grid, const PacketProfile& profile,
                      const ExtractionOptions& options) {
  const double t = u.time();
  if (!(t >= 1.0)) throw ArgumentError("extract_gamma: requires t >= 1");
  const GridSpec& g = u.grid();
  const double rt = std::sqrt(t);

  std::size_t factor = 1;
  while (g.dx() / static_cast<double>(factor) > rt / options.samples_per_unit &&
         g.size() * factor * 2 <= options.max_refined_points)
    factor *= 2;
  const ComplexField fine = factor > 1 ? refine(u, factor) : u;
  const GridSpec& gf = fine.grid();
  const double dxf = gf.dx();
  const double radius = profile.support_radius();
  const double vmax = max_packet_velocity(g, profile, t);

  Profile out;
  out.t = t;
  for (double v : v_grid) {
    if (std::abs(v) > vmax) {
      out.dropped.push_back(v);
      continue;
    }
    const double c = v * t;
    const double lo = (c - radius * rt + g.half_width()) / dxf;
    const double hi = (c + radius * rt + g.half_width()) / dxf;
    const auto j0 = static_cast<std::size_t>(std::max(0.0, std::ceil(lo)));
    const auto j1 = std::min(gf.size() - 1, static_cast<std::size_t>(std::floor(hi)));
    Complex acc{};
    for (std::size_t j = j0; j <= j1; ++j) {
      const double x = gf.x(j);
      const double chi = profile.value((x - c) / rt);
      if (chi == 0.0) continue;
      acc += fine[j] * std::polar(chi, -x * x / (4.0 * t));
    }
    out.v_grid.push_back(v);
    out.gamma.push_back(acc * dxf);
  }
  return out;
}

namespace {

// conj(Phi_v_hat) pairing: gamma(v) = sqrt(t) sum_k g_k conj(K1(sqrt(t)(xi_k - v/2))) dxi,
// with g_k = e^{i t xi_k^2} u_hat_k. The Nyquist coefficient is split evenly
// between +xi_N and -xi_N, matching the trigonometric interpolant.
struct FourierPairing {
  const GridSpec& grid;
  const PacketProfile& profile;
  double t;
  ComplexVector g;                 // indexed by slot
  std::vector<std::size_t> active; // slots with g != 0
  ComplexVector table;             // conj K1 at sqrt(t) dxi m, m in [-n, n]
  bool have_table = false;

  Complex lattice(long p) {
    const long n = static_cast<long>(grid.size());
    if (!have_table) {
      table.resize(static_cast<std::size_t>(2 * n + 1));
      const double base = std::sqrt(t) * grid.dxi();
      // chi is even, so K (and K1) are even in s.
      for (long m = 0; m <= n; ++m) {
        const Complex k1 = std::conj(profile.fourier_kernel(base * static_cast<double>(m)));
        table[static_cast<std::size_t>(n + m)] = k1;
        table[static_cast<std::size_t>(n - m)] = k1;
      }
      have_table = true;
    }
    Complex acc{};
    for (std::size_t k : active) {
      if (grid.is_nyquist(k)) {
        const long nn = n / 2;
        acc += 0.5 * g[k] *
               (table[static_cast<std::size_t>(n + nn - p)] + table[static_cast<std::size_t>(n - nn - p)]);
        continue;
      }
      acc += g[k] * table[static_cast<std::size_t>(n + grid.mode(k) - p)];
    }
    return acc;
  }

  Complex general(double v) const {
    const double rt = std::sqrt(t);
    Complex acc{};
    for (std::size_t k : active) {
      if (grid.is_nyquist(k)) {
        const double xn = grid.xi_max();
        acc += 0.5 * g[k] *
               (std::conj(profile.fourier_kernel(rt * (xn - 0.5 * v))) +
                std::conj(profile.fourier_kernel(rt * (-xn - 0.5 * v))));
        continue;
      }
      acc += g[k] * std::conj(profile.fourier_kernel(rt * (grid.xi(k) - 0.5 * v)));
    }
    return acc;
  }
};

}  // namespace

Profile extract_gamma_fourier(const ComplexField& u, const std::vector<double>& v_grid, const PacketProfile& profile) {
  const double t = u.time();
  if (!(t >= 1.0)) throw ArgumentError("extract_gamma_fourier: requires t >= 1");
  const GridSpec& g = u.grid();
  const Spectrum s = fft(u);
  FourierPairing pair{g, profile, t, ComplexVector(g.size()), {}, {}, false};
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (s.values[k] == Complex{}) continue;
    const double xi = g.is_nyquist(k) ? g.xi_max() : g.xi(k);
    pair.g[k] = s.values[k] * std::polar(1.0, t * xi * xi);
    pair.active.push_back(k);
  }
  const double scale = std::sqrt(t) * g.dxi();
  const double vmax = max_packet_velocity(g, profile, t);
  const long half = static_cast<long>(g.size() / 2);

  Profile out;
  out.t = t;
  for (double v : v_grid) {
    if (std::abs(v) > vmax) {
      out.dropped.push_back(v);
      continue;
    }
    const double p = v / (2.0 * g.dxi());
    const double pr = std::round(p);
    const bool on_lattice = std::abs(p - pr) <= 1e-9 * std::max(1.0, std::abs(p)) && std::abs(pr) <= half;
    out.v_grid.push_back(v);
    out.gamma.push_back(scale * (on_lattice ? pair.lattice(static_cast<long>(pr)) : pair.general(v)));
  }
  return out;
}

std::vector<double> default_v_grid(const ComplexField& u, const PacketProfile& profile, double t,
                                   double spacing_hint, double rel_threshold) {
  const GridSpec& g = u.grid();
  const Spectrum s = fft(u);
  double peak = 0.0;
  for (const auto& c : s.values) peak = std::max(peak, std::abs(c));
  double xi_sup = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k)
    if (peak > 0.0 && std::abs(s.values[k]) >= rel_threshold * peak) xi_sup = std::max(xi_sup, std::abs(g.xi(k)));
  double vlim = max_packet_velocity(g, profile, t);
  if (peak > 0.0) vlim = std::min(vlim, 2.0 * xi_sup);
  const double lattice = 2.0 * g.dxi();
  const double step = lattice * std::max(1.0, std::round(spacing_hint / lattice));
  const auto m = static_cast<long>(std::floor(std::max(vlim, 0.0) / step));
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(2 * m + 1));
  for (long i = -m; i <= m; ++i) v.push_back(static_cast<double>(i) * step);
  return v;
}

double l2_v_norm(const ComplexVector& values, double dv) {
  double acc = 0.0;
  for (const auto& c : values) acc += std::norm(c);
  return std::sqrt(acc * dv);
}

ComplexVector velocity_derivative(const Profile& profile) {
  const std::size_t n = profile.gamma.size();
  if (n < 2) return ComplexVector(n);
  const double dv = profile.v_grid[1] - profile.v_grid[0];
  ComplexVector data = profile.gamma;
  Fft plan(n);
  plan.forward(data);
  const double period = dv * static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) {
    const long m = k < (n + 1) / 2 ? static_cast<long>(k) : static_cast<long>(k) - static_cast<long>(n);
    if (n % 2 == 0 && k == n / 2) {
      data[k] = 0.0;
      continue;
    }
    data[k] *= Complex{0.0, 2.0 * kPi * static_cast<double>(m) / period};
  }
  plan.backward(data);
  return data;
}

namespace {

// u(x) and u_x(x) at arbitrary points from the trigonometric interpolant.
void evaluate_with_derivative(const Spectrum& s, const std::vector<double>& xs, ComplexVector& val,
                              ComplexVector& der) {
  const GridSpec& g = s.grid;
  const std::size_t n = g.size();
  const double norm = g.dxi() / std::sqrt(2.0 * kPi);
  // Slots in increasing-mode order, starting at -n/2 (the Nyquist slot).
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = (i + n / 2) % n;
  val.assign(xs.size(), Complex{});
  der.assign(xs.size(), Complex{});
  for (std::size_t q = 0; q < xs.size(); ++q) {
    const double x = xs[q];
    const Complex step = std::polar(1.0, g.dxi() * x);
    const double xi0 = -g.xi_max();
    Complex rot;
    Complex a{}, b{};
    for (std::size_t i = 0; i < n; ++i) {
      const double xi = xi0 + static_cast<double>(i) * g.dxi();
      rot = (i % kAnchor == 0) ? std::polar(1.0, xi * x) : rot * step;
      const Complex c = s.values[order[i]];
      if (i == 0) {
        a += c * std::cos(xi * x);
        continue;
      }
      a += c * rot;
      b += Complex{0.0, xi} * c * rot;
    }
    val[q] = a * norm;
    der[q] = b * norm;
  }
}

double sup_abs(const ComplexVector& v) {
  double m = 0.0;
  for (const auto& c : v) m = std::max(m, std::abs(c));
  return m;
}

}  // namespace

std::map<std::string, double> difference_bounds(const ComplexField& u, const ComplexField& lu,
                                                const ComplexField& lux, const Profile& gamma,
                                                const PacketProfile& profile) {
  const double t = u.time();
  if (!(t >= 1.0)) throw ArgumentError("difference_bounds: requires t >= 1");
  if (std::abs(gamma.t - t) > 1e-12 * t) throw StructuralError("difference_bounds: profile time differs from field time");
  if (gamma.v_grid.size() < 2) throw ArgumentError("difference_bounds: need at least two velocities");
  const GridSpec& g = u.grid();
  const double lu_norm = l2_norm(lu);
  const double lux_norm = l2_norm(lux);
  const double dv = gamma.v_grid[1] - gamma.v_grid[0];
  const Spectrum s = fft(u);

  std::vector<double> xs(gamma.v_grid.size());
  for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = gamma.v_grid[i] * t;
  ComplexVector uv, uxv;
  evaluate_with_derivative(s, xs, uv, uxv);

  ComplexVector d(xs.size()), dx(xs.size());
  const double rt = std::sqrt(t);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double v = gamma.v_grid[i];
    const Complex lead = std::polar(1.0 / rt, 0.25 * v * v * t) * gamma.gamma[i];
    d[i] = uv[i] - lead;
    dx[i] = uxv[i] - Complex{0.0, 0.5 * v} * lead;
  }

  // Fourier side: gamma at v = 2 xi_k on the lattice; zero where the packet
  // cannot be placed.
  std::vector<double> vk;
  std::vector<std::size_t> slots;
  const double vmax = max_packet_velocity(g, profile, t);
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (g.is_nyquist(k)) continue;
    if (std::abs(2.0 * g.xi(k)) <= vmax) {
      vk.push_back(2.0 * g.xi(k));
      slots.push_back(k);
    }
  }
  const Profile gk = extract_gamma_fourier(u, vk, profile);
  // Kernel mass (2i)^{-1/2}, undone here.
  const Complex c = std::sqrt(Complex{0.0, 2.0});
  ComplexVector fd(s.values);
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const double xi = g.xi(slots[i]);
    fd[slots[i]] -= c * std::polar(1.0, -t * xi * xi) * gk.gamma[i];
  }
  double fsum = 0.0;
  for (const auto& c : fd) fsum += std::norm(c);

  std::map<std::string, double> r;
  r["spatial_linf"] = sup_abs(d) / (std::pow(t, -0.75) * lu_norm);
  r["spatial_l2"] = l2_v_norm(d, dv) / (lu_norm / t);
  r["spatial_ux_linf"] = sup_abs(dx) / (std::pow(t, -0.75) * (lu_norm + lux_norm));
  r["fourier_linf"] = sup_abs(fd) / (std::pow(t, -0.25) * lu_norm);
  r["fourier_l2"] = std::sqrt(fsum * g.dxi()) / (lu_norm / rt);

  r["gamma_linf"] = sup_abs(gamma.gamma) / (rt * linf_norm(u));
  r["gamma_l2"] = l2_v_norm(gamma.gamma, dv) / l2_norm(u);
  r["dgamma_l2"] = l2_v_norm(velocity_derivative(gamma), dv) / lu_norm;
  for (int k = 0; k <= 2; ++k) {
    double m = 0.0;
    for (std::size_t i = 0; i < gamma.gamma.size(); ++i) {
      const double bracket = std::sqrt(1.0 + gamma.v_grid[i] * gamma.v_grid[i]);
      m = std::max(m, std::pow(bracket, 0.5 * k) * std::abs(gamma.gamma[i]));
    }
    r["weighted_k" + std::to_string(k)] = m / (lu_norm + sobolev_norm(u, k));
  }
  return r;
}

void write_profile_csv(std::ostream& os, const Profile& profile) {
  os << "v,re_gamma,im_gamma,abs_gamma\n";
  os << std::setprecision(17);
  for (std::size_t i = 0; i < profile.gamma.size(); ++i) {
    const Complex c = profile.gamma[i];
    os << profile.v_grid[i] << ',' << c.real() << ',' << c.imag() << ',' << std::abs(c) << '\n';
  }
}

}  // namespace dnls
