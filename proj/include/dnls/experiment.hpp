#pragma once

// Experiment configuration, the run pipelines behind the CLI subcommands and
// manifest output.
//
// Config files are flat `key = value` lines. `#` starts a comment, blank
// lines are ignored, lists are comma separated. Keys (defaults depend on the
// experiment kind, see ExperimentConfig::defaults):
//
//   grid.half_width  grid.n
//   solver.dt  solver.t_end  solver.integrator (ifrk4|etdrk4)  solver.dealias (true|false)
//   solver.snapshot_spacing
//   data (gaussian|soliton|custom)
//   data.epsilon  data.width  data.noise          gaussian datum
//   data.theta  data.scale  data.shift  data.phase soliton datum
//   data.file                                      custom datum (binary snapshot)
//   epsilon_ladder   list; empty means a single run at data.epsilon
//   fit.t_min        start of the power-law fit window
//   packets.times    list of times for difference bounds and gamma CSVs
//   packets.profile  (bump|gaussian)
//   packets.v_spacing
//   checks.conservation_t_end
//   output_dir  seed
//
// Unknown keys and malformed values raise ArgumentError.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "dnls/asymptotic_ode.hpp"
#include "dnls/dnls_solver.hpp"
#include "dnls/power_fit.hpp"
#include "dnls/solitons.hpp"
#include "dnls/wave_packets.hpp"

namespace dnls {

enum class ExperimentKind { Simulate, DecayScan, PacketTest, SolitonTest, LinearBaseline };
enum class DataKind { Gaussian, Soliton, Custom };

const char* to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& name);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::DecayScan;
  double half_width = 4096.0;
  std::size_t n = 65536;
  double dt = 2e-3;
  double t_end = 100.0;
  Integrator integrator = Integrator::IFRK4;
  bool dealias = true;
  double snapshot_spacing = 0.5;

  DataKind data = DataKind::Gaussian;
  double epsilon = 0.05;
  double width = 1.0;
  double noise = 0.0;
  SolitonParams soliton;
  std::string data_file;

  std::vector<double> epsilon_ladder;
  double fit_t_min = 5.0;
  std::vector<double> packet_times{4.0, 16.0, 64.0};
  PacketKind packet_profile = PacketKind::CompactBump;
  double v_spacing = 0.1;
  double conservation_t_end = 50.0;

  std::string output_dir = "out";
  std::uint64_t seed = 0;

  static ExperimentConfig defaults(ExperimentKind kind);

  /// Sets one key from its text form.
  void set(const std::string& key, const std::string& value);
  /// Applies every key of a config text in order (a `kind` key is ignored).
  void apply(const std::string& text);
  /// Throws ArgumentError on inadmissible values.
  void validate() const;

  /// Canonical `key = value` text, one key per line in a fixed order;
  /// apply(serialize()) reproduces the config.
  std::string serialize() const;
  /// FNV-1a 64 of serialize(), as 16 hex digits.
  std::string hash() const;

  std::vector<double> epsilons() const;
  SolverConfig solver(double t_end_override = -1.0) const;
  GridSpec grid() const { return {half_width, n}; }
};

/// Reads a config file for the given kind: defaults(kind) then the file's keys.
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentKind kind);

struct HypothesisResult {
  double epsilon_effective = 0.0;  // ||x u0||_{H^1} + ||u0||_2
  double epsilon = 0.0;
  bool pass = true;
};

/// Small-data hypothesis for u0 against the configured epsilon.
HypothesisResult hypothesis_check(const ComplexField& u0, double epsilon);

/// A e^{-x^2 / (2 width^2)} (1 + noise r(x)), r a seeded random trigonometric
/// polynomial of low frequency, with A chosen so the hypothesis value equals
/// epsilon.
ComplexField gaussian_datum(const GridSpec& grid, double epsilon, double width, double noise = 0.0,
                            std::uint64_t seed = 0);

/// The configured initial datum on the configured grid (for soliton data the
/// grid is chosen by soliton_grid, see soliton_run_grid).
ComplexField initial_datum(const ExperimentConfig& cfg, double epsilon);
GridSpec soliton_run_grid(const ExperimentConfig& cfg);

struct CheckResult {
  std::string name;
  bool pass = false;
  double value = 0.0;
  std::string limit;
  std::string detail;
};

// --- pipelines ---------------------------------------------------------------

struct DecayRun {
  double epsilon = 0.0;
  HypothesisResult hypothesis;
  std::vector<DiagnosticsRecord> records;  // with vector-field columns
  std::map<std::string, FitResult> fits;   // linf_u, linf_ux, lu_l2, lux_l2
  std::vector<std::string> warnings;
  double seconds = 0.0;
};

/// Evolves u0 (exactly by the free flow when `linear_exact`), records
/// diagnostics with vector-field columns at cfg.snapshot_times and fits the
/// decay/growth exponents over t >= fit_t_min.
DecayRun run_decay(const ComplexField& u0, const SolverConfig& cfg, double fit_t_min, bool linear_exact = false);

struct PacketRun {
  std::vector<Profile> profiles;  // Fourier route, every snapshot with t >= 1, shared v-grid
  std::map<double, std::map<std::string, double>> bounds;  // at the check times
  std::map<double, double> dual_route_error;  // max |gamma_F - gamma_P| / max |gamma_P|
  std::map<double, Profile> physical;         // physical route at the check times
  std::vector<RemainderSample> remainder;
  std::vector<double> drift;
  std::vector<double> log_phase;
  std::vector<double> remainder_bound_ratio;  // r_inf / remainder_bound_rhs at remainder times
  std::vector<DiagnosticsRecord> records;  // with vector-field columns
};

PacketRun run_packets(const ComplexField& u0, const SolverConfig& cfg, const PacketProfile& profile,
                      const std::vector<double>& check_times, double v_spacing);

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<std::string> files;  // relative to output_dir
  std::vector<FitResult> fits;
  std::vector<CheckResult> checks;
  std::vector<std::string> errors;
  std::vector<std::string> warnings;
  bool all_pass() const;
};

/// Runs the configured experiment, writes CSVs and manifest.json into
/// output_dir. Module errors are caught and recorded; whatever was produced
/// before the error is still written.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Late growth below early growth: |s(t_end) - s(t_split)| < |s(t_split) - s(t_0)|,
/// with s(t_split) taken at the last sample not after t_split.
bool late_increment_smaller(const std::vector<double>& times, const std::vector<double>& series, double t_split);

}  // namespace dnls
