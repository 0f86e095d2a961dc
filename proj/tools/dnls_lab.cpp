// dnls-lab: command-line front end for the DNLS experiments.
//
//   dnls-lab <simulate|decay-scan|packet-test|soliton-test|linear-baseline>
//            [--config FILE] [--out DIR] [--epsilon E] [--theta T] [--t-end T]
//            [--n N] [--seed S]
//
// Exit status 0 iff every enabled check passed.

#include <cstdio>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "dnls/errors.hpp"
#include "dnls/experiment.hpp"

namespace {

struct Flags {
  std::string config;
  std::optional<std::string> out;
  std::optional<double> epsilon;
  std::optional<double> theta;
  std::optional<double> t_end;
  std::optional<std::uint64_t> n;
  std::optional<std::uint64_t> seed;
};

void add_flags(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "flat key = value config file")->check(CLI::ExistingFile);
  sub->add_option("--out", f.out, "output directory");
  sub->add_option("--epsilon", f.epsilon, "data size (replaces any epsilon ladder)");
  sub->add_option("--theta", f.theta, "soliton parameter in (0, pi/2)");
  sub->add_option("--t-end", f.t_end, "final time");
  sub->add_option("--n", f.n, "grid points (power of two)");
  sub->add_option("--seed", f.seed, "seed for randomized data");
}

int run(dnls::ExperimentKind kind, const Flags& f) {
  dnls::ExperimentConfig cfg =
      f.config.empty() ? dnls::ExperimentConfig::defaults(kind) : dnls::load_config(f.config, kind);
  if (f.out) cfg.output_dir = *f.out;
  if (f.epsilon) {
    cfg.epsilon = *f.epsilon;
    cfg.epsilon_ladder.clear();
  }
  if (f.theta) cfg.soliton.theta = *f.theta;
  if (f.t_end) cfg.t_end = *f.t_end;
  if (f.n) cfg.n = static_cast<std::size_t>(*f.n);
  if (f.seed) cfg.seed = *f.seed;

  const dnls::ExperimentResult r = dnls::run_experiment(cfg);
  for (const auto& c : r.checks)
    std::printf("%-4s %-32s %.6g  (%s)%s%s\n", c.pass ? "PASS" : "FAIL", c.name.c_str(), c.value, c.limit.c_str(),
                c.detail.empty() ? "" : " ", c.detail.c_str());
  for (const auto& e : r.errors) std::fprintf(stderr, "error: %s\n", e.c_str());
  for (const auto& w : r.warnings) std::fprintf(stderr, "note: %s\n", w.c_str());
  std::printf("manifest: %s/manifest.json\n", cfg.output_dir.c_str());
  return r.all_pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical experiments for the derivative nonlinear Schrodinger equation"};
  app.require_subcommand(1);
  Flags flags;
  const std::pair<const char*, dnls::ExperimentKind> subs[] = {
      {"simulate", dnls::ExperimentKind::Simulate},
      {"decay-scan", dnls::ExperimentKind::DecayScan},
      {"packet-test", dnls::ExperimentKind::PacketTest},
      {"soliton-test", dnls::ExperimentKind::SolitonTest},
      {"linear-baseline", dnls::ExperimentKind::LinearBaseline},
  };
  const char* help[] = {
      "evolve the configured datum and write diagnostics",
      "fit decay and vector-field growth exponents (optionally over an epsilon ladder)",
      "wave-packet profile, difference bounds and asymptotic-equation remainder",
      "soliton propagation, mass and localization checks",
      "exact free evolution of the datum, decay and Lu conservation",
  };
  std::vector<CLI::App*> apps;
  for (std::size_t i = 0; i < std::size(subs); ++i) {
    apps.push_back(app.add_subcommand(subs[i].first, help[i]));
    add_flags(apps.back(), flags);
  }
  CLI11_PARSE(app, argc, argv);

  try {
    for (std::size_t i = 0; i < apps.size(); ++i)
      if (apps[i]->parsed()) return run(subs[i].second, flags);
  } catch (const dnls::Error& e) {
    std::fprintf(stderr, "dnls-lab: %s\n", e.what());
    return 2;
  }
  return 2;
}
