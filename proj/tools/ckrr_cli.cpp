#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "ckrr/experiments.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 1;
constexpr int kExitNumericalFailure = 2;
constexpr int kExitValidationFailure = 3;

struct CliOptions {
  std::string config_path;
  std::string output;
  bool has_seed = false;
  std::uint64_t seed = 0;
  bool has_reps = false;
  int reps = 0;
};

ckrr::ExperimentConfig resolve_config(const CliOptions& opts,
                                      ckrr::ExperimentMode mode) {
  ckrr::ExperimentConfig cfg = opts.config_path.empty()
                                   ? ckrr::default_config()
                                   : ckrr::load_config(opts.config_path);
  cfg.mode = mode;
  if (opts.has_seed) cfg.base_seed = opts.seed;
  if (opts.has_reps) cfg.n_rep = opts.reps;
  if (!opts.output.empty()) cfg.output = opts.output;
  ckrr::validate_config(cfg);
  return cfg;
}

void print_table_summary(const ckrr::SweepTable& table,
                         const std::string& output) {
  std::cout << "wrote " << table.rows.size() << " rows";
  if (!output.empty()) std::cout << " to " << output;
  std::cout << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Centered kernel ridge regression: risk sweeps, risk "
               "estimation and joint kernel/regularization tuning"};
  app.require_subcommand(1);

  CliOptions opts;
  app.add_option("--config", opts.config_path, "JSON config file");
  app.add_option("--out", opts.output, "output path (CSV or JSON report)");
  auto* seed_opt =
      app.add_option("--seed", opts.seed, "override the base seed");
  auto* reps_opt =
      app.add_option("--reps", opts.reps, "override the replicate count");

  auto* sweep = app.add_subcommand(
      "sweep", "synthetic lambda sweep with risk limits and estimators");
  auto* realdata = app.add_subcommand(
      "realdata", "permutation experiment on a CSV dataset");
  auto* tune = app.add_subcommand(
      "tune", "joint kernel/regularization selection through z");
  auto* validate = app.add_subcommand(
      "validate", "run the invariant suite and emit a JSON report");

  CLI11_PARSE(app, argc, argv);
  opts.has_seed = seed_opt->count() > 0;
  opts.has_reps = reps_opt->count() > 0;

  try {
    if (sweep->parsed()) {
      auto cfg = resolve_config(opts, ckrr::ExperimentMode::sweep);
      if (cfg.output.empty()) cfg.output = "sweep.csv";
      const auto table = ckrr::run_sweep(cfg);
      print_table_summary(table, cfg.output);
    } else if (realdata->parsed()) {
      auto cfg = resolve_config(opts, ckrr::ExperimentMode::realdata);
      if (cfg.output.empty()) cfg.output = "realdata.csv";
      const auto table = ckrr::run_realdata(cfg);
      print_table_summary(table, cfg.output);
    } else if (tune->parsed()) {
      const auto cfg = resolve_config(opts, ckrr::ExperimentMode::tune);
      const auto report = ckrr::run_tune(cfg);
      const std::string text = report.to_json();
      if (cfg.output.empty()) {
        std::cout << text << "\n";
      } else {
        std::ofstream out(cfg.output);
        if (!out) throw ckrr::Error("cannot open " + cfg.output);
        out << text << "\n";
        std::cout << "wrote tuning report to " << cfg.output << "\n";
      }
    } else if (validate->parsed()) {
      const auto cfg = resolve_config(opts, ckrr::ExperimentMode::validate);
      const auto report = ckrr::run_validate(cfg);
      const std::string text = report.to_json();
      if (cfg.output.empty()) {
        std::cout << text << "\n";
      } else {
        std::ofstream out(cfg.output);
        if (!out) throw ckrr::Error("cannot open " + cfg.output);
        out << text << "\n";
      }
      int failures = 0;
      for (const auto& c : report.checks) {
        std::cout << (c.pass ? "PASS " : "FAIL ") << c.name
                  << " (measured " << c.measured << ", tolerance "
                  << c.tolerance << ")\n";
        if (!c.pass) ++failures;
      }
      if (failures > 0) {
        std::cerr << failures << " validation check(s) failed\n";
        return kExitValidationFailure;
      }
    }
  } catch (const ckrr::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const ckrr::Error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumericalFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumericalFailure;
  }
  return kExitOk;
}
