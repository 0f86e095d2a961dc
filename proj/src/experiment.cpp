#include "dnls/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <future>
#include <optional>
#include <random>
#include <sstream>

#include "dnls/errors.hpp"
#include "dnls/field_io.hpp"
#include "dnls/vector_field.hpp"
#include "json.hpp"

namespace dnls {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

// --- text helpers --------------------------------------------------------------

namespace {

std::string num(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return {buf, res.ptr};
}

std::string csv_num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& text) {
  const std::string v = trim(text);
  double out = 0.0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || res.ec != std::errc{} || res.ptr != v.data() + v.size() || !std::isfinite(out))
    throw ArgumentError("config: '" + key + "' expects a number, got '" + text + "'");
  return out;
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& text) {
  const std::string v = trim(text);
  std::uint64_t out = 0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || res.ec != std::errc{} || res.ptr != v.data() + v.size())
    throw ArgumentError("config: '" + key + "' expects a non-negative integer, got '" + text + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& text) {
  const std::string v = trim(text);
  if (v == "true") return true;
  if (v == "false") return false;
  throw ArgumentError("config: '" + key + "' expects true or false, got '" + text + "'");
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  if (trim(text).empty()) return out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(key, item));
  return out;
}

std::string list_text(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + num(v[i]);
  return s;
}

const char* data_name(DataKind d) {
  switch (d) {
    case DataKind::Gaussian: return "gaussian";
    case DataKind::Soliton: return "soliton";
    case DataKind::Custom: return "custom";
  }
  return "?";
}

bool near_time(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b)); }

}  // namespace

const char* to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Simulate: return "simulate";
    case ExperimentKind::DecayScan: return "decay_scan";
    case ExperimentKind::PacketTest: return "packet_test";
    case ExperimentKind::SolitonTest: return "soliton_test";
    case ExperimentKind::LinearBaseline: return "linear_baseline";
  }
  return "?";
}

ExperimentKind experiment_kind_from_string(const std::string& name) {
  for (auto k : {ExperimentKind::Simulate, ExperimentKind::DecayScan, ExperimentKind::PacketTest,
                 ExperimentKind::SolitonTest, ExperimentKind::LinearBaseline}) {
    std::string dashed = to_string(k);
    std::replace(dashed.begin(), dashed.end(), '_', '-');
    if (name == to_string(k) || name == dashed) return k;
  }
  throw ArgumentError("unknown experiment kind '" + name + "'");
}

// --- config --------------------------------------------------------------------

ExperimentConfig ExperimentConfig::defaults(ExperimentKind kind) {
  ExperimentConfig c;
  c.kind = kind;
  if (kind == ExperimentKind::SolitonTest) {
    c.data = DataKind::Soliton;
    c.half_width = 0.0;  // chosen from the soliton parameters
    c.n = 0;
    c.dt = 1e-3;
    c.t_end = 20.0;
  }
  return c;
}

void ExperimentConfig::set(const std::string& key_in, const std::string& value_in) {
  const std::string key = trim(key_in);
  const std::string value = trim(value_in);
  if (key == "kind") return;
  if (key == "grid.half_width") half_width = parse_double(key, value);
  else if (key == "grid.n") n = parse_unsigned(key, value);
  else if (key == "solver.dt") dt = parse_double(key, value);
  else if (key == "solver.t_end") t_end = parse_double(key, value);
  else if (key == "solver.integrator") integrator = integrator_from_string(value);
  else if (key == "solver.dealias") dealias = parse_bool(key, value);
  else if (key == "solver.snapshot_spacing") snapshot_spacing = parse_double(key, value);
  else if (key == "data") {
    if (value == "gaussian") data = DataKind::Gaussian;
    else if (value == "soliton") data = DataKind::Soliton;
    else if (value == "custom") data = DataKind::Custom;
    else throw ArgumentError("config: data must be gaussian, soliton or custom, got '" + value + "'");
  } else if (key == "data.epsilon") epsilon = parse_double(key, value);
  else if (key == "data.width") width = parse_double(key, value);
  else if (key == "data.noise") noise = parse_double(key, value);
  else if (key == "data.theta") soliton.theta = parse_double(key, value);
  else if (key == "data.scale") soliton.scale = parse_double(key, value);
  else if (key == "data.shift") soliton.shift = parse_double(key, value);
  else if (key == "data.phase") soliton.phase = parse_double(key, value);
  else if (key == "data.file") data_file = value;
  else if (key == "epsilon_ladder") epsilon_ladder = parse_list(key, value);
  else if (key == "fit.t_min") fit_t_min = parse_double(key, value);
  else if (key == "packets.times") packet_times = parse_list(key, value);
  else if (key == "packets.profile") {
    if (value == "bump") packet_profile = PacketKind::CompactBump;
    else if (value == "gaussian") packet_profile = PacketKind::Gaussian;
    else throw ArgumentError("config: packets.profile must be bump or gaussian, got '" + value + "'");
  } else if (key == "packets.v_spacing") v_spacing = parse_double(key, value);
  else if (key == "checks.conservation_t_end") conservation_t_end = parse_double(key, value);
  else if (key == "output_dir") output_dir = value;
  else if (key == "seed") seed = parse_unsigned(key, value);
  else throw ArgumentError("config: unknown key '" + key + "'");
}

void ExperimentConfig::apply(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ArgumentError("config line " + std::to_string(lineno) + ": expected key = value");
    set(line.substr(0, eq), line.substr(eq + 1));
  }
}

void ExperimentConfig::validate() const {
  const bool auto_grid = data == DataKind::Soliton && half_width == 0.0 && n == 0;
  if (!auto_grid) {
    if (!(half_width > 0.0)) throw ArgumentError("config: grid.half_width must be positive");
    if (n < 8 || !is_power_of_two(n)) throw ArgumentError("config: grid.n must be a power of two >= 8");
  }
  if (!(dt > 0.0)) throw ArgumentError("config: solver.dt must be positive");
  if (!(t_end > 0.0)) throw ArgumentError("config: solver.t_end must be positive");
  if (!(snapshot_spacing > 0.0)) throw ArgumentError("config: solver.snapshot_spacing must be positive");
  if (data == DataKind::Gaussian) {
    for (double e : epsilons())
      if (!(e > 0.0 && e < 0.5)) throw ArgumentError("config: epsilon " + num(e) + " outside (0, 0.5)");
    if (!(width > 0.0)) throw ArgumentError("config: data.width must be positive");
    if (!(noise >= 0.0 && noise < 1.0)) throw ArgumentError("config: data.noise must lie in [0, 1)");
  }
  if (data == DataKind::Soliton) soliton.validate();
  if (data == DataKind::Custom && !fs::exists(data_file))
    throw ArgumentError("config: data.file '" + data_file + "' does not exist");
  if (!(fit_t_min >= 0.0)) throw ArgumentError("config: fit.t_min must be >= 0");
  for (double t : packet_times)
    if (!(t >= 1.0)) throw ArgumentError("config: packets.times must be >= 1");
  if (!(v_spacing > 0.0)) throw ArgumentError("config: packets.v_spacing must be positive");
  if (output_dir.empty()) throw ArgumentError("config: output_dir is empty");
}

std::string ExperimentConfig::serialize() const {
  std::ostringstream os;
  os << "kind = " << to_string(kind) << '\n'
     << "grid.half_width = " << num(half_width) << '\n'
     << "grid.n = " << n << '\n'
     << "solver.dt = " << num(dt) << '\n'
     << "solver.t_end = " << num(t_end) << '\n'
     << "solver.integrator = " << (integrator == Integrator::IFRK4 ? "ifrk4" : "etdrk4") << '\n'
     << "solver.dealias = " << (dealias ? "true" : "false") << '\n'
     << "solver.snapshot_spacing = " << num(snapshot_spacing) << '\n'
     << "data = " << data_name(data) << '\n'
     << "data.epsilon = " << num(epsilon) << '\n'
     << "data.width = " << num(width) << '\n'
     << "data.noise = " << num(noise) << '\n'
     << "data.theta = " << num(soliton.theta) << '\n'
     << "data.scale = " << num(soliton.scale) << '\n'
     << "data.shift = " << num(soliton.shift) << '\n'
     << "data.phase = " << num(soliton.phase) << '\n'
     << "data.file = " << data_file << '\n'
     << "epsilon_ladder = " << list_text(epsilon_ladder) << '\n'
     << "fit.t_min = " << num(fit_t_min) << '\n'
     << "packets.times = " << list_text(packet_times) << '\n'
     << "packets.profile = " << (packet_profile == PacketKind::CompactBump ? "bump" : "gaussian") << '\n'
     << "packets.v_spacing = " << num(v_spacing) << '\n'
     << "checks.conservation_t_end = " << num(conservation_t_end) << '\n'
     << "output_dir = " << output_dir << '\n'
     << "seed = " << seed << '\n';
  return os.str();
}

std::string ExperimentConfig::hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : serialize()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<double> ExperimentConfig::epsilons() const {
  return epsilon_ladder.empty() ? std::vector<double>{epsilon} : epsilon_ladder;
}

SolverConfig ExperimentConfig::solver(double t_end_override) const {
  SolverConfig s;
  s.dt = dt;
  s.t_end = t_end_override > 0.0 ? t_end_override : t_end;
  s.dealias = dealias;
  s.integrator = integrator;
  s.snapshot_times = uniform_snapshot_times(s.t_end, snapshot_spacing, true);
  s.nonlinear = kind != ExperimentKind::LinearBaseline;
  return s;
}

ExperimentConfig load_config(const fs::path& path, ExperimentKind kind) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("config: cannot read '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  ExperimentConfig c = ExperimentConfig::defaults(kind);
  c.apply(buf.str());
  return c;
}

// --- data ----------------------------------------------------------------------

HypothesisResult hypothesis_check(const ComplexField& u0, double epsilon) {
  HypothesisResult r;
  r.epsilon = epsilon;
  r.epsilon_effective = sobolev_norm(multiply_by_x(u0), 1.0) + l2_norm(u0);
  r.pass = r.epsilon_effective <= epsilon * (1.0 + 1e-9);
  return r;
}

ComplexField gaussian_datum(const GridSpec& grid, double epsilon, double width, double noise, std::uint64_t seed) {
  if (!(epsilon > 0.0)) throw ArgumentError("gaussian_datum: epsilon must be positive");
  if (!(width > 0.0)) throw ArgumentError("gaussian_datum: width must be positive");
  constexpr int kModes = 8;
  ComplexVector coeff(2 * kModes + 1);
  if (noise > 0.0) {
    std::mt19937_64 rng(seed);
    // Explicit 53-bit mantissa draw: identical on every platform.
    auto uniform = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53 * 2.0 - 1.0; };
    for (auto& c : coeff) c = Complex{uniform(), uniform()} / static_cast<double>(2 * kModes + 1);
  }
  ComplexVector v(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double x = grid.x(j);
    Complex r{};
    for (int m = -kModes; m <= kModes; ++m) r += coeff[static_cast<std::size_t>(m + kModes)] * std::polar(1.0, m * x / (4.0 * width));
    v[j] = std::exp(-0.5 * x * x / (width * width)) * (1.0 + noise * r);
  }
  ComplexField shape(grid, 0.0, std::move(v));
  require_boundary_negligible(shape, "gaussian_datum", kBoundaryTolerance, /*x_weighted=*/true);
  const double a = epsilon / hypothesis_check(shape, epsilon).epsilon_effective;
  ComplexVector scaled(shape.values().begin(), shape.values().end());
  for (auto& c : scaled) c *= a;
  return shape.with_values(std::move(scaled));
}

GridSpec soliton_run_grid(const ExperimentConfig& cfg) {
  if (cfg.half_width > 0.0 && cfg.n > 0) return cfg.grid();
  const auto& p = cfg.soliton;
  p.validate();
  return soliton_grid(p, std::abs(p.shift) + std::abs(p.speed()) * cfg.t_end + 32.0 / p.scale);
}

ComplexField initial_datum(const ExperimentConfig& cfg, double epsilon) {
  switch (cfg.data) {
    case DataKind::Gaussian: return gaussian_datum(cfg.grid(), epsilon, cfg.width, cfg.noise, cfg.seed);
    case DataKind::Soliton: return soliton_initial(cfg.soliton, soliton_run_grid(cfg));
    case DataKind::Custom: return read_snapshot(fs::path(cfg.data_file));
  }
  throw ArgumentError("initial_datum: unknown data kind");
}

// --- pipelines -------------------------------------------------------------------

namespace {

VFColumns vf_columns(const ComplexField& u) {
  const VFDiagnostics d = vector_field_diagnostics(u);
  return {d.lu_l2, d.lux_l2, d.ks_ratio};
}

std::map<std::string, FitResult> decay_fits(const std::vector<DiagnosticsRecord>& rows, double t_min) {
  std::vector<std::pair<double, double>> a, b, c, d;
  for (const auto& r : rows) {
    a.emplace_back(r.time, r.linf_u);
    b.emplace_back(r.time, r.linf_ux);
    if (r.vf) {
      c.emplace_back(r.time, r.vf->lu_l2);
      d.emplace_back(r.time, r.vf->lux_l2);
    }
  }
  std::map<std::string, FitResult> out;
  out["linf_u"] = fit_power_law(a, t_min, "linf_u");
  out["linf_ux"] = fit_power_law(b, t_min, "linf_ux");
  out["lu_l2"] = fit_power_law(c, t_min, "lu_l2");
  out["lux_l2"] = fit_power_law(d, t_min, "lux_l2");
  return out;
}

}  // namespace

DecayRun run_decay(const ComplexField& u0, const SolverConfig& cfg_in, double fit_t_min, bool linear_exact) {
  const auto start = std::chrono::steady_clock::now();
  SolverConfig cfg = cfg_in;
  cfg.keep_snapshots = false;
  DecayRun run;
  if (linear_exact) {
    run.warnings = cfg.validate(u0.grid());
    for (double t : cfg.snapshot_times) {
      if (t < u0.time()) continue;
      const ComplexField u = linear_propagate(u0, t);
      DiagnosticsRecord rec = diagnose(u);
      rec.vf = vf_columns(u);
      run.records.push_back(rec);
    }
  } else {
    SnapshotObserver obs = [&](const ComplexField& u, const DiagnosticsRecord& rec) {
      DiagnosticsRecord r = rec;
      r.vf = vf_columns(u);
      run.records.push_back(r);
    };
    run.warnings = evolve(u0, cfg, std::span<const SnapshotObserver>(&obs, 1)).warnings;
  }
  run.fits = decay_fits(run.records, fit_t_min);
  run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return run;
}

PacketRun run_packets(const ComplexField& u0, const SolverConfig& cfg_in, const PacketProfile& profile,
                      const std::vector<double>& check_times, double v_spacing) {
  SolverConfig cfg = cfg_in;
  cfg.keep_snapshots = false;
  std::vector<double> times = cfg.snapshot_times;
  times.push_back(1.0);
  for (double c : check_times)
    if (c <= cfg.t_end) times.push_back(c);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end(), near_time), times.end());
  cfg.snapshot_times = times;

  PacketRun out;
  std::vector<double> vgrid;
  std::vector<RemainderNorms> norms;
  SnapshotObserver obs = [&](const ComplexField& u, const DiagnosticsRecord& rec) {
    const double t = u.time();
    const ComplexField lu = apply_L(u);
    const ComplexField lux = apply_L(spectral_derivative(u, 1));
    DiagnosticsRecord r = rec;
    r.vf = VFColumns{l2_norm(lu), l2_norm(lux), t > 0.0 ? ks_inequality_ratio(u, lu) : 0.0};
    out.records.push_back(r);
    if (t < 1.0) return;
    if (vgrid.empty()) vgrid = default_v_grid(u, profile, cfg.t_end, v_spacing);
    Profile gf = extract_gamma_fourier(u, vgrid, profile);
    if (!gf.dropped.empty()) throw DomainError("run_packets: packets left the domain at t = " + num(t));
    norms.push_back({t, rec.linf_u, rec.linf_ux, r.vf->lu_l2});
    for (double c : check_times) {
      if (!near_time(t, c)) continue;
      Profile gp = extract_gamma(u, vgrid, profile);
      double diff = 0.0, peak = 0.0;
      for (std::size_t i = 0; i < gp.gamma.size(); ++i) {
        diff = std::max(diff, std::abs(gp.gamma[i] - gf.gamma[i]));
        peak = std::max(peak, std::abs(gp.gamma[i]));
      }
      out.dual_route_error[c] = peak > 0.0 ? diff / peak : diff;
      out.bounds[c] = difference_bounds(u, lu, lux, gf, profile);
      out.physical[c] = std::move(gp);
    }
    out.profiles.push_back(std::move(gf));
  };
  evolve(u0, cfg, std::span<const SnapshotObserver>(&obs, 1));

  if (out.profiles.size() >= 3) {
    out.remainder = measure_remainder(out.profiles);
    for (std::size_t i = 0; i < out.remainder.size(); ++i) {
      const double rhs = remainder_bound_rhs(norms[i + 1]);
      out.remainder_bound_ratio.push_back(rhs > 0.0 ? out.remainder[i].r_inf / rhs : 0.0);
    }
  }
  out.drift = modulus_drift(out.profiles);
  out.log_phase = log_phase_residual(out.profiles);
  return out;
}

bool late_increment_smaller(const std::vector<double>& times, const std::vector<double>& series, double t_split) {
  if (times.size() != series.size() || times.size() < 3) throw ArgumentError("late_increment_smaller: need >= 3 samples");
  std::size_t mid = 0;
  for (std::size_t i = 0; i < times.size(); ++i)
    if (times[i] <= t_split) mid = i;
  if (mid == 0 || mid + 1 >= times.size()) throw ArgumentError("late_increment_smaller: split outside the series");
  return std::abs(series.back() - series[mid]) < std::abs(series[mid] - series.front());
}

bool ExperimentResult::all_pass() const {
  if (!errors.empty()) return false;
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

// --- experiment driver --------------------------------------------------------------

namespace {

class Writer {
 public:
  Writer(const fs::path& dir, ExperimentResult& result) : dir_(dir), result_(result) {}

  template <typename Fn>
  void file(const std::string& name, Fn&& body) {
    std::ofstream os(dir_ / name, std::ios::binary);
    if (!os) throw ArgumentError("cannot write '" + (dir_ / name).string() + "'");
    body(os);
    if (!os) throw ArgumentError("write failed for '" + (dir_ / name).string() + "'");
    result_.files.push_back(name);
  }

 private:
  fs::path dir_;
  ExperimentResult& result_;
};

void check(ExperimentResult& r, std::string name, bool pass, double value, std::string limit, std::string detail = {}) {
  r.checks.push_back({std::move(name), pass, value, std::move(limit), std::move(detail)});
}

std::string eps_tag(const ExperimentConfig& cfg, double eps) {
  return cfg.epsilons().size() > 1 ? "_eps" + num(eps) : std::string{};
}

void write_fits_csv(std::ostream& os, const std::vector<FitResult>& fits) {
  os << "quantity,exponent,constant,r_squared,t_min,t_max,points\n";
  for (const auto& f : fits)
    os << f.quantity << ',' << csv_num(f.exponent) << ',' << csv_num(f.constant) << ',' << csv_num(f.r_squared) << ','
       << csv_num(f.t_range.first) << ',' << csv_num(f.t_range.second) << ',' << f.points << '\n';
}

double max_ks(const std::vector<DiagnosticsRecord>& rows, double t0, double t1) {
  double m = 0.0;
  for (const auto& r : rows)
    if (r.vf && r.time >= t0 && r.time <= t1) m = std::max(m, r.vf->ks_ratio);
  return m;
}

double conservation_drift(const std::vector<DiagnosticsRecord>& rows, double t1, std::string& detail) {
  if (rows.empty()) return 0.0;
  const auto& c0 = rows.front().conserved;
  double dm = 0.0, dp = 0.0, de = 0.0;
  for (const auto& r : rows) {
    if (r.time > t1 * (1.0 + 1e-12)) break;
    dm = std::max(dm, std::abs(r.conserved.mass - c0.mass) / std::abs(c0.mass));
    dp = std::max(dp, std::abs(r.conserved.momentum - c0.momentum) / std::abs(c0.momentum));
    de = std::max(de, std::abs(r.conserved.energy - c0.energy) / std::abs(c0.energy));
  }
  detail = "mass " + num(dm) + ", momentum " + num(dp) + ", energy " + num(de);
  return std::max({dm, dp, de});
}

void decay_checks(ExperimentResult& r, const ExperimentConfig& cfg, const DecayRun& run, bool linear) {
  const std::string tag = cfg.epsilons().size() > 1 ? "[eps=" + num(run.epsilon) + "]" : "";
  if (cfg.data == DataKind::Gaussian)
    check(r, "hypothesis" + tag, run.hypothesis.pass, run.hypothesis.epsilon_effective, "<= " + num(run.epsilon));
  for (const char* q : {"linf_u", "linf_ux"}) {
    const FitResult& f = run.fits.at(q);
    if (linear) {
      check(r, std::string("decay_") + q + tag, std::abs(f.exponent + 0.5) <= 0.02, f.exponent, "-0.5 +/- 0.02");
    } else {
      check(r, std::string("decay_") + q + tag, f.exponent >= -0.55 && f.exponent <= -0.45 && f.r_squared > 0.99,
            f.exponent, "[-0.55, -0.45], r2 > 0.99", "r2 = " + num(f.r_squared));
    }
  }
  if (!linear) {
    for (const char* q : {"lu_l2", "lux_l2"}) {
      const FitResult& f = run.fits.at(q);
      check(r, std::string("growth_") + q + tag, f.exponent >= -0.02 && f.exponent <= 0.1, f.exponent, "[-0.02, 0.1]");
    }
    std::string detail;
    const double drift = conservation_drift(run.records, std::min(cfg.conservation_t_end, cfg.t_end), detail);
    check(r, "conservation" + tag, drift < 1e-7, drift, "< 1e-7", detail);
  } else {
    const double lu0 = run.records.front().vf->lu_l2;
    double dev = 0.0;
    for (const auto& rec : run.records) dev = std::max(dev, std::abs(rec.vf->lu_l2 - lu0) / lu0);
    check(r, "lu_conserved" + tag, dev < 1e-9, dev, "< 1e-9");
  }
  const double ks = max_ks(run.records, 1.0, cfg.t_end);
  check(r, "ks_ratio" + tag, ks <= 3.0, ks, "<= 3");
}

void run_decay_kind(ExperimentResult& r, const ExperimentConfig& cfg, Writer& w, bool linear) {
  const auto eps = cfg.epsilons();
  const SolverConfig scfg = cfg.solver();
  std::vector<std::future<DecayRun>> jobs;
  for (double e : eps) {
    jobs.push_back(std::async(std::launch::async, [&cfg, &scfg, e, linear] {
      const ComplexField u0 = initial_datum(cfg, e);
      DecayRun run = run_decay(u0, scfg, cfg.fit_t_min, linear);
      run.epsilon = e;
      run.hypothesis = hypothesis_check(u0, e);
      return run;
    }));
  }
  std::vector<DecayRun> runs;
  std::vector<std::string> failures;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    try {
      runs.push_back(jobs[i].get());
    } catch (const EvolveError& e) {
      failures.push_back("eps " + num(eps[i]) + ": " + e.what());
      DecayRun partial;
      partial.epsilon = eps[i];
      partial.records = e.partial().records;
      w.file("diagnostics" + eps_tag(cfg, eps[i]) + ".csv", [&](std::ostream& os) { write_diagnostics_csv(os, partial.records); });
    } catch (const Error& e) {
      failures.push_back("eps " + num(eps[i]) + ": " + e.what());
    }
  }
  std::vector<FitResult> fits;
  for (const auto& run : runs) {
    w.file("diagnostics" + eps_tag(cfg, run.epsilon) + ".csv", [&](std::ostream& os) { write_diagnostics_csv(os, run.records); });
    for (const auto& [name, f] : run.fits) {
      FitResult g = f;
      if (eps.size() > 1) g.quantity += "[eps=" + num(run.epsilon) + "]";
      fits.push_back(g);
    }
    for (const auto& wmsg : run.warnings) r.warnings.push_back(wmsg);
    decay_checks(r, cfg, run, linear);
  }
  r.fits.insert(r.fits.end(), fits.begin(), fits.end());
  w.file("fits.csv", [&](std::ostream& os) { write_fits_csv(os, fits); });
  if (!linear && runs.size() > 1 && failures.empty()) {
    for (const char* q : {"lu_l2", "lux_l2"}) {
      bool mono = true;
      for (std::size_t i = 1; i < runs.size(); ++i) {
        const bool up = runs[i].epsilon > runs[i - 1].epsilon;
        const double a = runs[i - 1].fits.at(q).exponent, b = runs[i].fits.at(q).exponent;
        if (up ? b < a : a < b) mono = false;
      }
      check(r, std::string("ladder_monotone_") + q, mono, static_cast<double>(runs.size()), "nondecreasing in epsilon");
    }
  }
  for (auto& f : failures) r.errors.push_back(std::move(f));
}

void run_packet_kind(ExperimentResult& r, const ExperimentConfig& cfg, Writer& w) {
  const double eps = cfg.epsilons().front();
  const ComplexField u0 = initial_datum(cfg, eps);
  const PacketProfile profile =
      cfg.packet_profile == PacketKind::CompactBump ? PacketProfile::compact_bump() : PacketProfile::gaussian();
  const PacketRun run = run_packets(u0, cfg.solver(), profile, cfg.packet_times, cfg.v_spacing);

  w.file("diagnostics.csv", [&](std::ostream& os) { write_diagnostics_csv(os, run.records); });
  std::vector<double> csv_times{1.0};
  csv_times.insert(csv_times.end(), cfg.packet_times.begin(), cfg.packet_times.end());
  csv_times.push_back(cfg.t_end);
  for (const auto& p : run.profiles) {
    if (std::none_of(csv_times.begin(), csv_times.end(), [&](double c) { return near_time(p.t, c); })) continue;
    w.file("gamma_t" + num(p.t) + ".csv", [&](std::ostream& os) { write_profile_csv(os, p); });
  }
  w.file("remainder.csv", [&](std::ostream& os) { write_remainder_csv(os, run.remainder); });
  w.file("drift.csv", [&](std::ostream& os) {
    os << "time,modulus_drift,log_phase_residual\n";
    for (std::size_t i = 0; i < run.profiles.size(); ++i)
      os << csv_num(run.profiles[i].t) << ',' << csv_num(run.drift[i]) << ',' << csv_num(run.log_phase[i]) << '\n';
  });
  w.file("difference_bounds.csv", [&](std::ostream& os) {
    bool header = false;
    for (const auto& [t, m] : run.bounds) {
      if (!header) {
        os << "time,dual_route_error";
        for (const auto& kv : m) os << ',' << kv.first;
        os << '\n';
        header = true;
      }
      os << csv_num(t) << ',' << csv_num(run.dual_route_error.at(t));
      for (const auto& kv : m) os << ',' << csv_num(kv.second);
      os << '\n';
    }
  });

  for (const auto& [t, e] : run.dual_route_error) check(r, "dual_route[t=" + num(t) + "]", e < 1e-6, e, "< 1e-6");
  if (!run.bounds.empty()) {
    const auto& first = run.bounds.begin()->second;
    for (const char* q : {"spatial_linf", "spatial_l2", "spatial_ux_linf", "fourier_linf", "fourier_l2"}) {
      double worst = 0.0;
      for (const auto& [t, m] : run.bounds) worst = std::max(worst, m.at(q) / first.at(q));
      check(r, std::string("bounded_") + q, worst < 10.0, worst, "< 10 x value at first check time");
    }
  }
  if (!run.profiles.empty()) {
    double g1 = 0.0;
    for (const auto& c : run.profiles.front().gamma) g1 = std::max(g1, std::abs(c));
    const double drift = *std::max_element(run.drift.begin(), run.drift.end());
    check(r, "modulus_drift", drift < 0.2 * g1, g1 > 0.0 ? drift / g1 : 0.0, "< 0.2 (relative to max |gamma(1)|)");
  }
  if (run.remainder.size() >= 3 && cfg.t_end > 50.0) {
    std::vector<double> tr, cr;
    for (const auto& s : run.remainder) {
      tr.push_back(s.t);
      cr.push_back(s.cumulative);
    }
    check(r, "remainder_integrable", late_increment_smaller(tr, cr, 50.0), cr.back(),
          "increment over [50, t_end] < increment over [t_0, 50]");
    std::vector<double> tp;
    for (const auto& p : run.profiles) tp.push_back(p.t);
    check(r, "log_phase_bounded", late_increment_smaller(tp, run.log_phase, 50.0), run.log_phase.back(),
          "increment over [50, t_end] < increment over [1, 50]");
  }
  if (!run.remainder_bound_ratio.empty()) {
    const double m = *std::max_element(run.remainder_bound_ratio.begin(), run.remainder_bound_ratio.end());
    r.warnings.push_back("remainder bound constant (max |R| / rhs) = " + num(m));
  }
}

void run_soliton_kind(ExperimentResult& r, const ExperimentConfig& cfg, Writer& w) {
  const SolitonParams& p = cfg.soliton;
  const GridSpec grid = soliton_run_grid(cfg);
  const ComplexField q0 = soliton_initial(p, grid);
  SolverConfig scfg = cfg.solver();
  scfg.keep_snapshots = false;

  struct Row {
    double t, peak, predicted, error, phase;
  };
  std::vector<Row> rows;
  SnapshotObserver obs = [&](const ComplexField& u, const DiagnosticsRecord&) {
    const ComplexField exact = soliton_exact(p, grid, u.time());
    double diff = 0.0, ref = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
      diff += std::norm(u[j] - exact[j]);
      ref += std::norm(exact[j]);
    }
    const double peak = track_peak(u).x;
    // Unwrapped arg u at the peak; the profile's own phase there is fixed.
    double phase = std::arg(evaluate_at(u, peak));
    if (!rows.empty()) phase = rows.back().phase + std::remainder(phase - rows.back().phase, 2.0 * kPi);
    rows.push_back({u.time(), peak, track_peak(exact).x, std::sqrt(diff / ref), phase});
  };
  const EvolveResult res = evolve(q0, scfg, std::span<const SnapshotObserver>(&obs, 1));
  for (const auto& wmsg : res.warnings) r.warnings.push_back(wmsg);

  w.file("diagnostics.csv", [&](std::ostream& os) { write_diagnostics_csv(os, res.records); });
  w.file("soliton_track.csv", [&](std::ostream& os) {
    os << "time,peak_x,predicted_peak_x,relative_l2_error\n";
    for (const auto& row : rows)
      os << csv_num(row.t) << ',' << csv_num(row.peak) << ',' << csv_num(row.predicted) << ',' << csv_num(row.error) << '\n';
  });

  double max_err = 0.0;
  for (const auto& row : rows) max_err = std::max(max_err, row.error);
  // The solver tolerance is anchored at t = 1 (or t_end if shorter).
  double err_t1 = rows.back().error, t1 = rows.back().t;
  for (const auto& row : rows)
    if (row.t >= 1.0 - 1e-12) {
      err_t1 = row.error;
      t1 = row.t;
      break;
    }
  std::vector<double> ts, xs, phs;
  for (const auto& row : rows) {
    ts.push_back(row.t);
    xs.push_back(row.peak);
    phs.push_back(row.phase);
  }
  const LineFit speed = fit_line(ts, xs);
  const LineFit rate = fit_line(ts, phs);
  std::vector<std::pair<double, double>> series;
  for (const auto& rec : res.records) series.emplace_back(rec.time, rec.linf_u);
  const FitResult f = fit_power_law(series, cfg.fit_t_min, "linf_u");
  r.fits.push_back(f);
  const double mass = res.records.front().conserved.mass;
  const LocalizationReport loc = localization_product(p, grid);
  const HypothesisResult hyp = hypothesis_check(q0, 0.1);

  check(r, "soliton_error", err_t1 < 1e-6, err_t1, "< 1e-6 (relative L2 vs exact at t = " + num(t1) + ")");
  check(r, "soliton_mass", std::abs(mass - p.mass()) < 1e-6, mass, "8 theta = " + num(p.mass()) + " +/- 1e-6");
  check(r, "soliton_linf_exponent", std::abs(f.exponent) <= 0.02, f.exponent, "[-0.02, 0.02]");
  check(r, "localization_product", loc.product >= 1.0, loc.product, ">= 1");
  check(r, "hypothesis_obstruction", !hyp.pass, hyp.epsilon_effective, "fails at epsilon 0.1");

  Json rep;
  rep["theta"] = p.theta;
  rep["lambda"] = p.scale;
  rep["scale"] = p.scale;
  rep["shift"] = p.shift;
  rep["phase"] = p.phase;
  rep["grid"] = {{"half_width", grid.half_width()}, {"n", grid.size()}};
  rep["mass"] = mass;
  rep["mass_expected"] = p.mass();
  rep["mass_error"] = std::abs(mass - p.mass());
  rep["speed_exact"] = p.speed();
  rep["speed_predicted"] = p.speed();
  rep["speed_measured"] = speed.slope;
  rep["phase_rate"] = p.phase_rate();
  rep["phase_rate_measured"] = rate.slope;
  rep["l2_error_vs_exact_at_t"] = {{"t", t1}, {"error", err_t1}};
  rep["l2_error_vs_exact_at_t_end"] = {{"t", rows.back().t}, {"error", rows.back().error}};
  rep["max_relative_l2_error"] = max_err;
  rep["linf_exponent"] = f.exponent;
  rep["localization"] = {{"l2", loc.l2},
                         {"x_h1", loc.x_h1},
                         {"x_h1_seminorm", loc.x_h1_seminorm},
                         {"product", loc.product},
                         {"homogeneous_product", loc.homogeneous_product}};
  rep["hypothesis"] = {{"epsilon", hyp.epsilon}, {"epsilon_effective", hyp.epsilon_effective}, {"pass", hyp.pass}};
  w.file("soliton_report.json", [&](std::ostream& os) { os << rep.dump(2) << '\n'; });
}

void run_simulate_kind(ExperimentResult& r, const ExperimentConfig& cfg, Writer& w) {
  const double eps = cfg.epsilons().front();
  const ComplexField u0 = initial_datum(cfg, eps);
  SolverConfig scfg = cfg.solver();
  scfg.keep_snapshots = false;
  std::optional<ComplexField> last;
  SnapshotObserver obs = [&](const ComplexField& u, const DiagnosticsRecord&) { last = u; };
  const EvolveResult res = evolve(u0, scfg, std::span<const SnapshotObserver>(&obs, 1));
  for (const auto& wmsg : res.warnings) r.warnings.push_back(wmsg);
  w.file("diagnostics.csv", [&](std::ostream& os) { write_diagnostics_csv(os, res.records); });
  if (last) w.file("final.bin", [&](std::ostream& os) { write_snapshot(os, *last); });
  check(r, "completed", true, cfg.t_end, "reached t_end");
}

Json manifest_json(const ExperimentResult& r) {
  Json m;
  m["tool"] = "dnls-lab";
  m["version"] = "0.1.0";
  m["kind"] = to_string(r.config.kind);
  Json cfg = Json::object();
  std::istringstream in(r.config.serialize());
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    cfg[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  m["config"] = cfg;
  m["config_hash"] = r.config.hash();
  m["files"] = r.files;
  Json fits = Json::array();
  for (const auto& f : r.fits)
    fits.push_back({{"quantity", f.quantity},
                    {"exponent", f.exponent},
                    {"constant", f.constant},
                    {"r_squared", f.r_squared},
                    {"t_range", {f.t_range.first, f.t_range.second}},
                    {"points", f.points}});
  m["fits"] = fits;
  Json checks = Json::array();
  for (const auto& c : r.checks)
    checks.push_back({{"name", c.name}, {"pass", c.pass}, {"value", c.value}, {"limit", c.limit}, {"detail", c.detail}});
  m["checks"] = checks;
  m["errors"] = r.errors;
  m["warnings"] = r.warnings;
  m["all_pass"] = r.all_pass();
  return m;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const fs::path dir(cfg.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ArgumentError("output_dir '" + cfg.output_dir + "' is not writable");

  ExperimentResult r;
  r.config = cfg;
  Writer w(dir, r);
  w.file("config.txt", [&](std::ostream& os) { os << cfg.serialize(); });
  if (cfg.data == DataKind::Gaussian && cfg.kind != ExperimentKind::DecayScan && cfg.kind != ExperimentKind::LinearBaseline) {
    // Decay scans record the hypothesis per ladder entry.
    const double eps = cfg.epsilons().front();
    const HypothesisResult h = hypothesis_check(gaussian_datum(cfg.grid(), eps, cfg.width, cfg.noise, cfg.seed), eps);
    check(r, "hypothesis", h.pass, h.epsilon_effective, "<= " + num(eps));
  }
  try {
    switch (cfg.kind) {
      case ExperimentKind::Simulate: run_simulate_kind(r, cfg, w); break;
      case ExperimentKind::DecayScan: run_decay_kind(r, cfg, w, false); break;
      case ExperimentKind::LinearBaseline: run_decay_kind(r, cfg, w, true); break;
      case ExperimentKind::PacketTest: run_packet_kind(r, cfg, w); break;
      case ExperimentKind::SolitonTest: run_soliton_kind(r, cfg, w); break;
    }
  } catch (const std::exception& e) {
    r.errors.push_back(e.what());
  }
  const Json m = manifest_json(r);
  std::ofstream os(dir / "manifest.json", std::ios::binary);
  os << m.dump(2) << '\n';
  if (!os) throw ArgumentError("cannot write manifest.json in '" + cfg.output_dir + "'");
  return r;
}

}  // namespace dnls
