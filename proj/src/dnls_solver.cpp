#include "dnls/dnls_solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

namespace dnls {

const char* to_string(Integrator kind) {
  switch (kind) {
    case Integrator::IFRK4: return "IFRK4";
    case Integrator::ETDRK4: return "ETDRK4";
  }
  return "?";
}

Integrator integrator_from_string(const std::string& name) {
  if (name == "IFRK4" || name == "ifrk4") return Integrator::IFRK4;
  if (name == "ETDRK4" || name == "etdrk4") return Integrator::ETDRK4;
  throw ArgumentError("unknown integrator '" + name + "'");
}

std::vector<std::string> SolverConfig::validate(const GridSpec& grid) const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ArgumentError("SolverConfig: dt must be positive");
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw ArgumentError("SolverConfig: t_end must be positive");
  if (!std::is_sorted(snapshot_times.begin(), snapshot_times.end())) {
    throw ArgumentError("SolverConfig: snapshot_times must be sorted");
  }
  for (double s : snapshot_times) {
    if (s < 0.0 || s > t_end) throw ArgumentError("SolverConfig: snapshot time outside [0, t_end]");
  }
  std::vector<std::string> warnings;
  if (dt > 0.5 * grid.dx() * grid.dx()) {
    std::ostringstream os;
    os << "dt = " << dt << " exceeds 0.5 dx^2 = " << 0.5 * grid.dx() * grid.dx()
       << " (no stability limit for exponential integrators; informational)";
    warnings.push_back(os.str());
  }
  return warnings;
}

std::vector<double> uniform_snapshot_times(double t_end, double spacing, bool include_zero) {
  if (!(spacing > 0.0)) throw ArgumentError("uniform_snapshot_times: spacing must be positive");
  std::vector<double> out;
  if (include_zero) out.push_back(0.0);
  const auto count = static_cast<long>(std::floor(t_end / spacing + 1e-9));
  for (long i = 1; i <= count; ++i) out.push_back(std::min(t_end, static_cast<double>(i) * spacing));
  return out;
}

// --- conserved quantities and diagnostics ---------------------------------

ConservedTriple conserved(const ComplexField& field) {
  const ComplexField ux = spectral_derivative(field, 1);
  const double dx = field.grid().dx();
  ConservedTriple q;
  for (std::size_t j = 0; j < field.size(); ++j) {
    const Complex u = field[j];
    const double a2 = std::norm(u);
    const double current = std::imag(std::conj(u) * ux[j]);
    q.mass += a2;
    q.momentum += current + 0.5 * a2 * a2;
    q.energy += std::norm(ux[j]) + 1.5 * a2 * current + 0.5 * a2 * a2 * a2;
  }
  q.mass *= dx;
  q.momentum *= dx;
  q.energy *= dx;
  return q;
}

ComplexField linear_propagate(const ComplexField& field, double t_target) {
  if (t_target < field.time()) {
    throw ArgumentError("linear_propagate: target time precedes the field time");
  }
  const double tau = t_target - field.time();
  ComplexField out = apply_multiplier(field, [tau](double xi, std::size_t) {
    return std::polar(1.0, -xi * xi * tau);
  });
  return out.with_time(t_target);
}

DiagnosticsRecord diagnose(const ComplexField& field) {
  DiagnosticsRecord r;
  r.time = field.time();
  r.conserved = conserved(field);
  const Norms n = norms(field);
  r.l2 = n.l2;
  r.h1 = n.h1;
  r.linf_u = n.linf;
  r.linf_ux = linf_norm(spectral_derivative(field, 1));
  r.boundary_ratio = boundary_ratio(field);
  return r;
}

void write_diagnostics_csv(std::ostream& os, std::span<const DiagnosticsRecord> rows) {
  const bool with_vf = !rows.empty() && rows.front().vf.has_value();
  os << "time,mass,momentum,energy,l2,h1,linf_u,linf_ux";
  if (with_vf) os << ",lu_l2,lux_l2,ks_ratio";
  os << '\n';
  char buf[64];
  auto put = [&](double v, bool first = false) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    if (!first) os << ',';
    os << buf;
  };
  for (const auto& r : rows) {
    put(r.time, true);
    put(r.conserved.mass);
    put(r.conserved.momentum);
    put(r.conserved.energy);
    put(r.l2);
    put(r.h1);
    put(r.linf_u);
    put(r.linf_ux);
    if (with_vf) {
      const VFColumns vf = r.vf.value_or(VFColumns{});
      put(vf.lu_l2);
      put(vf.lux_l2);
      put(vf.ks_ratio);
    }
    os << '\n';
  }
}

// --- nonlinearity ----------------------------------------------------------

DnlsNonlinearity::DnlsNonlinearity(const GridSpec& grid, bool dealias)
    : grid_(grid), fft_(grid.size()), mask_(grid.size(), 1.0), ik_(grid.size()),
      scaled_mask_(grid.size()), flux_xi_(grid.size()) {
  const long cutoff = static_cast<long>(grid.size()) / 3;  // keep |m| <= (2/3)(n/2)
  const double inv_n = 1.0 / static_cast<double>(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (dealias && std::abs(grid.mode(k)) > cutoff) mask_[k] = 0.0;
    ik_[k] = grid.is_nyquist(k) ? Complex{} : Complex{0.0, grid.xi(k)};
    scaled_mask_[k] = mask_[k] * inv_n;
    flux_xi_[k] = -mask_[k] * ik_[k].imag();
  }
}

void DnlsNonlinearity::to_physical(std::span<const Complex> hat, ComplexVector& phys) const {
  phys.resize(hat.size());
  for (std::size_t k = 0; k < hat.size(); ++k) phys[k] = scaled_mask_[k] * hat[k];
  fft_.backward_unscaled(phys);
}

void DnlsNonlinearity::cubic_flux(std::span<const Complex> u, ComplexVector& out) const {
  out.resize(u.size());
  for (std::size_t j = 0; j < u.size(); ++j) out[j] = std::norm(u[j]) * u[j];
  fft_.forward(out);
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double f = flux_xi_[k];
    out[k] = Complex{-f * out[k].imag(), f * out[k].real()};
  }
}

void DnlsNonlinearity::evaluate(std::span<const ComplexVector> hat, std::span<ComplexVector> out) const {
  thread_local ComplexVector phys;
  to_physical(hat[0], phys);
  cubic_flux(phys, out[0]);
}

// --- exponential integrators ----------------------------------------------

struct ExponentialIntegrator::Coefficients {
  ComplexVector e_half, e_full;
  // ETDRK4 only.
  ComplexVector q, f1, f2, f3;
};

ExponentialIntegrator::ExponentialIntegrator(const GridSpec& grid, Integrator kind)
    : grid_(grid), kind_(kind) {}

const ExponentialIntegrator::Coefficients& ExponentialIntegrator::coefficients(double h) {
  if (auto it = cache_.find(h); it != cache_.end()) return *it->second;
  auto c = std::make_shared<Coefficients>();
  const std::size_t n = grid_.size();
  c->e_half.resize(n);
  c->e_full.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double xi = grid_.xi(k);
    c->e_half[k] = std::polar(1.0, -xi * xi * h / 2.0);
    c->e_full[k] = std::polar(1.0, -xi * xi * h);
  }
  if (kind_ == Integrator::ETDRK4) {
    // phi-function combinations by contour averaging around h*L (radius 1),
    // which avoids cancellation when |h L| is small.
    constexpr int kContour = 64;
    c->q.resize(n);
    c->f1.resize(n);
    c->f2.resize(n);
    c->f3.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      const double xi = grid_.xi(k);
      const Complex hl{0.0, -xi * xi * h};
      Complex q{}, f1{}, f2{}, f3{};
      for (int m = 0; m < kContour; ++m) {
        const Complex r = hl + std::polar(1.0, 2.0 * kPi * (m + 0.5) / kContour);
        const Complex er = std::exp(r);
        const Complex r3 = r * r * r;
        q += (std::exp(r / 2.0) - 1.0) / r;
        f1 += (-4.0 - r + er * (4.0 - 3.0 * r + r * r)) / r3;
        f2 += (2.0 + r + er * (r - 2.0)) / r3;
        f3 += (-4.0 - 3.0 * r - r * r + er * (4.0 - r)) / r3;
      }
      c->q[k] = h * q / double(kContour);
      c->f1[k] = h * f1 / double(kContour);
      c->f2[k] = h * f2 / double(kContour);
      c->f3[k] = h * f3 / double(kContour);
    }
  }
  auto& ref = *c;
  cache_.emplace(h, std::move(c));
  return ref;
}

void ExponentialIntegrator::step(std::vector<ComplexVector>& v, double h, const NonlinearTerm& rhs) {
  const std::size_t nc = rhs.components();
  if (v.size() != nc) throw StructuralError("ExponentialIntegrator: component count mismatch");
  const std::size_t n = grid_.size();
  for (auto* buf : {&a_, &b_, &c_, &d_, &stage_}) {
    buf->resize(nc);
    for (auto& comp : *buf) comp.resize(n);
  }
  const Coefficients& co = coefficients(h);

  if (kind_ == Integrator::IFRK4) {
    // Classical RK4 for w = e^{-tL} v, written back in v.
    rhs.evaluate(v, a_);
    for (std::size_t i = 0; i < nc; ++i)
      for (std::size_t k = 0; k < n; ++k) stage_[i][k] = co.e_half[k] * (v[i][k] + 0.5 * h * a_[i][k]);
    rhs.evaluate(stage_, b_);
    for (std::size_t i = 0; i < nc; ++i)
      for (std::size_t k = 0; k < n; ++k) stage_[i][k] = co.e_half[k] * v[i][k] + 0.5 * h * b_[i][k];
    rhs.evaluate(stage_, c_);
    for (std::size_t i = 0; i < nc; ++i)
      for (std::size_t k = 0; k < n; ++k) stage_[i][k] = co.e_full[k] * v[i][k] + h * co.e_half[k] * c_[i][k];
    rhs.evaluate(stage_, d_);
    for (std::size_t i = 0; i < nc; ++i)
      for (std::size_t k = 0; k < n; ++k) {
        v[i][k] = co.e_full[k] * v[i][k] +
                  h / 6.0 * (co.e_full[k] * a_[i][k] + 2.0 * co.e_half[k] * (b_[i][k] + c_[i][k]) + d_[i][k]);
      }
    return;
  }

  // ETDRK4 (Cox-Matthews).
  rhs.evaluate(v, a_);  // N(v)
  for (std::size_t i = 0; i < nc; ++i)
    for (std::size_t k = 0; k < n; ++k) stage_[i][k] = co.e_half[k] * v[i][k] + co.q[k] * a_[i][k];
  rhs.evaluate(stage_, b_);  // N(a)
  std::vector<ComplexVector> a_stage = stage_;
  for (std::size_t i = 0; i < nc; ++i)
    for (std::size_t k = 0; k < n; ++k) stage_[i][k] = co.e_half[k] * v[i][k] + co.q[k] * b_[i][k];
  rhs.evaluate(stage_, c_);  // N(b)
  for (std::size_t i = 0; i < nc; ++i)
    for (std::size_t k = 0; k < n; ++k)
      stage_[i][k] = co.e_half[k] * a_stage[i][k] + co.q[k] * (2.0 * c_[i][k] - a_[i][k]);
  rhs.evaluate(stage_, d_);  // N(c)
  for (std::size_t i = 0; i < nc; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      v[i][k] = co.e_full[k] * v[i][k] + co.f1[k] * a_[i][k] + 2.0 * co.f2[k] * (b_[i][k] + c_[i][k]) +
                co.f3[k] * d_[i][k];
    }
}

// --- drivers ---------------------------------------------------------------

namespace {

class LinearTerm final : public NonlinearTerm {
 public:
  std::size_t components() const override { return 1; }
  void evaluate(std::span<const ComplexVector> hat, std::span<ComplexVector> out) const override {
    out[0].assign(hat[0].size(), Complex{});
  }
};

void check_finite(std::span<const Complex> hat, double last_good_time) {
  if (!all_finite(hat)) {
    std::ostringstream os;
    os << "non-finite values after step from t = " << last_good_time;
    throw BlowUpError(os.str(), last_good_time);
  }
}

}  // namespace

ComplexField dnls_step(const ComplexField& field, const SolverConfig& cfg) {
  require_boundary_negligible(field, "dnls_step");
  const GridSpec& g = field.grid();
  ExponentialIntegrator integrator(g, cfg.integrator);
  DnlsNonlinearity nonlinearity(g, cfg.dealias);
  LinearTerm linear;
  std::vector<ComplexVector> state{ComplexVector(field.values().begin(), field.values().end())};
  const Fft& fft = nonlinearity.transform();
  fft.forward(state[0]);
  integrator.step(state, cfg.dt, cfg.nonlinear ? static_cast<const NonlinearTerm&>(nonlinearity) : linear);
  check_finite(state[0], field.time());
  fft.backward(state[0]);
  return {g, field.time() + cfg.dt, std::move(state[0])};
}

std::vector<std::vector<double>> plan_steps(double t0, const SolverConfig& cfg) {
  std::vector<double> targets;
  for (double s : cfg.snapshot_times)
    if (s >= t0) targets.push_back(s);
  if (targets.empty() || targets.back() < cfg.t_end) targets.push_back(cfg.t_end);
  std::vector<std::vector<double>> plan;
  double t = t0;
  for (double s : targets) {
    std::vector<double> steps;
    const double span = s - t;
    if (span > 0.0) {
      const auto count = static_cast<long>(std::ceil(span / cfg.dt - 1e-9));
      for (long i = 0; i + 1 < count; ++i) steps.push_back(cfg.dt);
      double last = span - static_cast<double>(count - 1) * cfg.dt;
      if (std::abs(last - cfg.dt) <= 1e-12 * cfg.dt) last = cfg.dt;
      steps.push_back(last);
    }
    plan.push_back(std::move(steps));
    t = s;
  }
  return plan;
}

EvolveResult evolve(const ComplexField& field, const SolverConfig& cfg,
                    std::span<const SnapshotObserver> observers) {
  const GridSpec& g = field.grid();
  EvolveResult result;
  result.warnings = cfg.validate(g);
  ExponentialIntegrator integrator(g, cfg.integrator);
  DnlsNonlinearity nonlinearity(g, cfg.dealias);
  LinearTerm linear;
  const NonlinearTerm& rhs = cfg.nonlinear ? static_cast<const NonlinearTerm&>(nonlinearity) : linear;
  const Fft& fft = nonlinearity.transform();

  std::vector<ComplexVector> state{ComplexVector(field.values().begin(), field.values().end())};
  fft.forward(state[0]);

  std::vector<double> targets;
  for (double s : cfg.snapshot_times)
    if (s >= field.time()) targets.push_back(s);
  if (targets.empty() || targets.back() < cfg.t_end) targets.push_back(cfg.t_end);
  const auto plan = plan_steps(field.time(), cfg);
  const std::size_t requested = static_cast<std::size_t>(
      std::count_if(cfg.snapshot_times.begin(), cfg.snapshot_times.end(), [&](double s) { return s >= field.time(); }));

  double t = field.time();
  try {
    for (std::size_t seg = 0; seg < plan.size(); ++seg) {
      for (double h : plan[seg]) {
        integrator.step(state, h, rhs);
        check_finite(state[0], t);
        t += h;
      }
      t = targets[seg];
      if (seg >= requested) continue;
      ComplexVector phys = state[0];
      fft.backward(phys);
      ComplexField snap(g, t, std::move(phys));
      DiagnosticsRecord rec = diagnose(snap);
      for (const auto& obs : observers) obs(snap, rec);
      result.records.push_back(rec);
      if (cfg.keep_snapshots) result.snapshots.push_back({std::move(snap), rec});
    }
  } catch (const BlowUpError& e) {
    throw EvolveError(e, std::move(result));
  }
  return result;
}

}  // namespace dnls
