#include "dnls/vector_field.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "dnls/power_fit.hpp"

namespace dnls {

ComplexField apply_L(const ComplexField& field) {
  if (field.time() < 0.0) throw ArgumentError("apply_L: negative time");
  require_boundary_negligible(field, "apply_L", kBoundaryTolerance, /*x_weighted=*/true);
  const GridSpec& g = field.grid();
  const double t = field.time();
  const ComplexField ux = spectral_derivative(field, 1);
  ComplexVector out(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) out[j] = g.x(j) * field[j] + Complex{0.0, 2.0 * t} * ux[j];
  return field.with_values(std::move(out));
}

double ks_inequality_ratio(const ComplexField& u, const ComplexField& lu) {
  if (!(u.time() > 0.0)) throw ArgumentError("ks_inequality_ratio: requires t > 0");
  if (!(u.grid() == lu.grid())) throw StructuralError("ks_inequality_ratio: grid mismatch");
  const double lu_norm = l2_norm(lu);
  if (lu_norm == 0.0) return std::numeric_limits<double>::infinity();
  const double sup = linf_norm(u);
  return sup * sup * u.time() / (l2_norm(u) * lu_norm);
}

VFDiagnostics vector_field_diagnostics(const ComplexField& u) {
  VFDiagnostics d;
  d.t = u.time();
  const ComplexField lu = apply_L(u);
  d.lu_l2 = l2_norm(lu);
  d.lux_l2 = l2_norm(apply_L(spectral_derivative(u, 1)));
  d.ks_ratio = u.time() > 0.0 ? ks_inequality_ratio(u, lu) : 0.0;
  d.growth_exponent = std::numeric_limits<double>::quiet_NaN();
  return d;
}

const VFDiagnostics& VectorFieldTracker::add(const ComplexField& u) {
  VFDiagnostics d = vector_field_diagnostics(u);
  history_.push_back(d);
  std::vector<std::pair<double, double>> series;
  for (const auto& h : history_)
    if (h.t >= t_min_ && h.lu_l2 > 0.0) series.emplace_back(h.t, h.lu_l2);
  if (series.size() >= min_points_) history_.back().growth_exponent = fit_power_law(series, t_min_).exponent;
  return history_.back();
}

void TandemNonlinearity::evaluate(std::span<const ComplexVector> hat, std::span<ComplexVector> out) const {
  thread_local ComplexVector u, z, work;
  u_term_.to_physical(hat[0], u);
  u_term_.cubic_flux(u, out[0]);

  u_term_.to_physical(hat[1], z);
  const std::size_t n = u.size();
  const auto& mask = u_term_.mask();
  const auto& ik = u_term_.derivative_symbol();
  work.resize(n);
  out[1].resize(n);
  // flux part: 2|u|^2 z - u^2 conj(z); source part: |u|^2 u.
  for (std::size_t j = 0; j < n; ++j) work[j] = 2.0 * std::norm(u[j]) * z[j] - u[j] * u[j] * std::conj(z[j]);
  u_term_.transform().forward(work);
  for (std::size_t j = 0; j < n; ++j) out[1][j] = std::norm(u[j]) * u[j];
  u_term_.transform().forward(out[1]);
  for (std::size_t k = 0; k < n; ++k) out[1][k] = mask[k] * (out[1][k] - ik[k] * work[k]);
}

namespace {

class ZeroTerm final : public NonlinearTerm {
 public:
  std::size_t components() const override { return 2; }
  void evaluate(std::span<const ComplexVector> hat, std::span<ComplexVector> out) const override {
    for (std::size_t i = 0; i < 2; ++i) out[i].assign(hat[i].size(), Complex{});
  }
};

}  // namespace

TandemResult evolve_tandem(const ComplexField& u0, const SolverConfig& cfg) {
  const GridSpec& g = u0.grid();
  cfg.validate(g);
  const ComplexField z0 = apply_L(u0);
  ExponentialIntegrator integrator(g, cfg.integrator);
  TandemNonlinearity tandem(g, cfg.dealias);
  ZeroTerm zero;
  const NonlinearTerm& rhs = cfg.nonlinear ? static_cast<const NonlinearTerm&>(tandem) : zero;
  const Fft fft(g.size());

  std::vector<ComplexVector> state{ComplexVector(u0.values().begin(), u0.values().end()),
                                   ComplexVector(z0.values().begin(), z0.values().end())};
  for (auto& c : state) fft.forward(c);

  TandemResult result;
  result.u.push_back(u0);
  result.z.push_back(z0);

  std::vector<double> targets;
  for (double s : cfg.snapshot_times)
    if (s >= u0.time()) targets.push_back(s);
  const std::size_t requested = targets.size();
  if (targets.empty() || targets.back() < cfg.t_end) targets.push_back(cfg.t_end);
  const auto plan = plan_steps(u0.time(), cfg);

  double t = u0.time();
  for (std::size_t seg = 0; seg < plan.size(); ++seg) {
    for (double h : plan[seg]) {
      integrator.step(state, h, rhs);
      if (!all_finite(state[0]) || !all_finite(state[1])) {
        std::ostringstream os;
        os << "evolve_tandem: non-finite values after step from t = " << t;
        throw BlowUpError(os.str(), t);
      }
      t += h;
    }
    t = targets[seg];
    if (seg >= requested || t == u0.time()) continue;
    ComplexVector pu = state[0], pz = state[1];
    fft.backward(pu);
    fft.backward(pz);
    result.u.emplace_back(g, t, std::move(pu));
    result.z.emplace_back(g, t, std::move(pz));
  }
  return result;
}

std::vector<ComplexField> evolve_linearized_z(std::span<const ComplexField> u_trajectory,
                                              const SolverConfig& cfg) {
  if (u_trajectory.empty()) throw StructuralError("evolve_linearized_z: empty trajectory");
  const ComplexField& u0 = u_trajectory.front();
  TandemResult tandem = evolve_tandem(u0, cfg);
  if (tandem.u.size() != u_trajectory.size()) {
    std::ostringstream os;
    os << "evolve_linearized_z: trajectory has " << u_trajectory.size() << " entries, configuration yields "
       << tandem.u.size();
    throw StructuralError(os.str());
  }
  for (std::size_t i = 0; i < u_trajectory.size(); ++i) {
    const ComplexField& given = u_trajectory[i];
    const ComplexField& mine = tandem.u[i];
    if (!(given.grid() == mine.grid()) || std::abs(given.time() - mine.time()) > 1e-12 * (1.0 + mine.time())) {
      throw StructuralError("evolve_linearized_z: time grid mismatch at entry " + std::to_string(i));
    }
    double diff = 0.0, ref = 0.0;
    for (std::size_t j = 0; j < given.size(); ++j) {
      diff += std::norm(given[j] - mine[j]);
      ref += std::norm(mine[j]);
    }
    if (diff > 1e-20 * std::max(ref, 1e-300) && diff > 0.0) {
      throw StructuralError("evolve_linearized_z: trajectory was not produced with this configuration");
    }
  }
  return std::move(tandem.z);
}

}  // namespace dnls
