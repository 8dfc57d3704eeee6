// fdd: run feature-discovery experiments and the theory checks.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "fdd/domains.hpp"
#include "fdd/error.hpp"
#include "fdd/harness.hpp"

namespace {

constexpr int kExitError = 1;
constexpr int kExitConfig = 2;
constexpr int kExitTheory = 3;

struct RunFlags {
  std::string config;
  std::map<std::string, std::string> overrides;
  std::vector<std::string> sets;
};

std::string summary_path(const std::string& out) {
  std::filesystem::path p(out);
  return (p.parent_path() / (p.stem().string() + "_summary" + p.extension().string())).string();
}

void print_summary(const std::vector<fdd::SummaryRow>& rows) {
  std::printf("%-16s %5s %5s %9s %14s %12s %12s\n", "method", "iter", "runs", "features", "td_error_l2", "ci95",
              "wall_ms");
  for (const auto& r : rows) {
    std::printf("%-16s %5zu %5zu %9.1f %14.6g %12s %12.3f\n", r.method.c_str(), r.iteration, r.runs,
                r.mean_features, r.mean_td_error,
                r.ci_half_width ? std::to_string(*r.ci_half_width).c_str() : "-", r.mean_wall_ms);
  }
}

int cmd_run(const RunFlags& flags) {
  fdd::ExperimentConfig cfg;
  if (!flags.config.empty()) cfg = fdd::apply_config(cfg, fdd::load_key_values(flags.config));
  std::map<std::string, std::string> extra;
  for (const auto& kv : flags.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw fdd::ConfigError("--set expects key=value, got '" + kv + "'");
    extra[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  cfg = fdd::apply_config(cfg, extra);
  cfg = fdd::apply_config(cfg, flags.overrides);

  const auto records = fdd::run_experiment(cfg);
  const auto summary = fdd::aggregate(records);
  if (!cfg.out.empty()) {
    std::ofstream out(cfg.out);
    if (!out) throw fdd::ConfigError("cannot write '" + cfg.out + "'");
    fdd::write_records_csv(out, records);
    std::ofstream sout(summary_path(cfg.out));
    fdd::write_summary_csv(sout, summary);
    std::cerr << "wrote " << records.size() << " records to " << cfg.out << "\n";
  }
  print_summary(summary);
  return 0;
}

int cmd_theory(const fdd::TheoryCheckOptions& opt) {
  const auto rows = fdd::run_theory_checks(opt);
  fdd::print_theory_table(std::cout, rows);
  for (const auto& r : rows) {
    if (!r.passed()) return kExitTheory;
  }
  return 0;
}

int cmd_list() {
  for (const auto& d : fdd::builtin_domains()) {
    std::cout << d.name << "\n  state:   " << d.state_description << "\n  policy:  " << d.policy
              << "\n  gamma:   " << d.default_gamma << "\n  horizon: " << d.horizon
              << "\n  base features: " << d.num_base_features;
    if (d.bins_per_dim) std::cout << " (" << d.bins_per_dim << " bins per dimension)";
    std::cout << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Batch feature discovery for linear policy evaluation"};
  app.require_subcommand(1);

  RunFlags flags;
  auto* run = app.add_subcommand("run", "run an experiment and write per-iteration records");
  run->add_option("--config", flags.config, "key = value config file")->check(CLI::ExistingFile);
  for (const char* key : {"domain", "method", "iterations", "samples", "runs", "seed", "gamma", "reg",
                          "pool-size", "out", "threads"}) {
    run->add_option_function<std::string>(
        std::string("--") + key, [&flags, key](const std::string& v) { flags.overrides[key] = v; },
        std::string("override config key ") + key);
  }
  run->add_option("--set", flags.sets, "extra key=value entries, e.g. --set bins=10");

  fdd::TheoryCheckOptions theory;
  auto* tc = app.add_subcommand("theory-check", "verify the rank, angle and bound-reduction properties");
  tc->add_option("--max-n", theory.max_n, "largest number of base features in the sweeps")
      ->check(CLI::Range(1, 8));
  tc->add_option("--gamma", theory.gamma, "discount factor")->check(CLI::Range(0.0, 0.999999));
  tc->add_option("--seed", theory.seed, "random seed");

  auto* list = app.add_subcommand("list-domains", "describe the built-in domains");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) return cmd_run(flags);
    if (*tc) return cmd_theory(theory);
    if (*list) return cmd_list();
  } catch (const fdd::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return 0;
}
