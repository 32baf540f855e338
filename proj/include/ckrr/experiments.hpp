#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ckrr/datagen.hpp"
#include "ckrr/estimators.hpp"
#include "ckrr/kernels.hpp"
#include "ckrr/regression.hpp"
#include "ckrr/tuning.hpp"

namespace ckrr {

enum class ExperimentMode { sweep, realdata, tune, validate };

std::string to_string(ExperimentMode mode);

struct LambdaGrid {
  double min = 1e-3;
  double max = 1e2;
  int count = 30;

  /// Log-spaced, strictly increasing.
  std::vector<double> values() const;
};

/// One experiment description; defaults reproduce the reference synthetic
/// sweep (n = 200, p = 100, Toeplitz(0.4) covariance, sigma2 = 0.5, sin
/// target, four kernels, 30 log-spaced lambdas, 50 replicates).
struct ExperimentConfig {
  ExperimentMode mode = ExperimentMode::sweep;
  int n = 200;
  int p = 100;
  double sigma2 = 0.5;
  CovarianceKind covariance = CovarianceKind::toeplitz;
  double rho = 0.4;
  DesignDistribution distribution = DesignDistribution::gaussian;
  std::string target = "sin";
  std::vector<KernelSpec> kernels;
  LambdaGrid lambda_grid;
  int n_test = 500;
  int n_rep = 50;
  std::uint64_t base_seed = 42;
  std::string input_csv;
  double train_fraction = 0.6;
  int n_permutations = 500;
  double realdata_sigma2 = 0.05;
  std::string output;
  VarYDivisor var_divisor = VarYDivisor::n;
  double z_search_min = 1e-6;  // magnitudes of the tune search interval
  double z_search_max = 1e4;
};

/// The four reference kernels: linear(1,0), polynomial(0.02,2,2),
/// sigmoid(0.04,-1), exponential(0.03,0).
std::vector<KernelSpec> default_kernels();

ExperimentConfig default_config();

/// Parses a JSON config file; unknown keys are rejected. Throws
/// ConfigError with the offending field path.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config_json(const std::string& text);

void validate_config(const ExperimentConfig& cfg);

/// One (kernel, lambda) cell of a sweep, averaged over replicates or
/// permutations.
struct SweepRow {
  std::string kernel;
  double lambda = 0.0;
  double r_train = 0.0;
  double r_train_limit = 0.0;
  double r_test_mc = 0.0;
  double r_test_mc_se = 0.0;
  double r_test_limit = 0.0;
  double r_hat_lemma2 = 0.0;
  double r_hat_thm2 = 0.0;
  int n_rep = 0;
  std::uint64_t seed = 0;
};

struct SweepTable {
  std::vector<SweepRow> rows;
  bool has_limits = true;  // realdata mode omits the limit columns
};

SweepTable run_sweep(const ExperimentConfig& cfg);
SweepTable run_realdata(const ExperimentConfig& cfg);

/// Atomic write (temp file + rename); '.' decimal separator, header always
/// emitted.
void write_sweep_csv(const std::string& path, const SweepTable& table);

struct TuneReport {
  TuningResult result;
  /// Kernel label -> Monte Carlo prediction risk realized at that kernel's
  /// lambda_star (reachable kernels only).
  std::map<std::string, McEstimate> realized_risk;
  std::uint64_t seed = 0;
  std::string to_json() const;
};

TuneReport run_tune(const ExperimentConfig& cfg);

struct ValidationCheck {
  std::string name;
  double measured = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  bool all_pass() const;
  std::string to_json() const;
};

ValidationReport run_validate(const ExperimentConfig& cfg);

/// Worker count: CKRR_THREADS when set, hardware concurrency otherwise.
int worker_count();

/// Runs fn(0..n_tasks-1) on a small thread pool. Tasks must be independent;
/// results should be written to preallocated slots so the reduction order
/// stays deterministic.
void parallel_for(int n_tasks, const std::function<void(int)>& fn);

}  // namespace ckrr
