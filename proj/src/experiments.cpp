#include "ckrr/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "ckrr/asymptotics.hpp"
#include "ckrr/rmt.hpp"

namespace ckrr {

using nlohmann::json;

std::string to_string(ExperimentMode mode) {
  switch (mode) {
    case ExperimentMode::sweep:
      return "sweep";
    case ExperimentMode::realdata:
      return "realdata";
    case ExperimentMode::tune:
      return "tune";
    case ExperimentMode::validate:
      return "validate";
  }
  return "unknown";
}

std::vector<double> LambdaGrid::values() const {
  if (count < 1) throw ConfigError("lambda grid count must be >= 1");
  if (!(min > 0.0) || !(max >= min))
    throw ConfigError("lambda grid must be strictly positive and increasing");
  std::vector<double> out(count);
  if (count == 1) {
    out[0] = min;
    return out;
  }
  const double lo = std::log10(min);
  const double hi = std::log10(max);
  for (int i = 0; i < count; ++i)
    out[i] = std::pow(10.0, lo + (hi - lo) * i / (count - 1));
  return out;
}

std::vector<KernelSpec> default_kernels() {
  // Weak-curvature members of the four families. Small alpha keeps the
  // per-sample kernel fluctuation terms (driven by g''(0) and nu) well
  // below the smallest lambda of the default grid, so the finite-size
  // deviation from the deterministic limits stays in the few-percent
  // range at n = 200, p = 100. All have nu >= 0 at tau = 1, so the whole
  // lambda grid maps to z < 0.
  return {make_kernel(KernelFamily::linear, 1.0, 0.0),
          make_kernel(KernelFamily::polynomial, 0.02, 2.0, 2),
          make_kernel(KernelFamily::sigmoid, 0.04, -1.0),
          make_kernel(KernelFamily::exponential, 0.03, 0.0)};
}

ExperimentConfig default_config() {
  ExperimentConfig cfg;
  cfg.kernels = default_kernels();
  return cfg;
}

namespace {

ExperimentMode mode_from_string(const std::string& name) {
  if (name == "sweep") return ExperimentMode::sweep;
  if (name == "realdata") return ExperimentMode::realdata;
  if (name == "tune") return ExperimentMode::tune;
  if (name == "validate") return ExperimentMode::validate;
  throw ConfigError("unknown mode: " + name);
}

KernelSpec kernel_from_json(const json& j, int index) {
  const std::string where = "kernels[" + std::to_string(index) + "]";
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (key != "family" && key != "alpha" && key != "beta" &&
        key != "degree" && key != "name")
      throw ConfigError(where + ": unknown key '" + key + "'");
  }
  if (!j.contains("family"))
    throw ConfigError(where + ": missing 'family'");
  KernelSpec spec;
  spec.family = kernel_family_from_string(j.at("family").get<std::string>());
  spec.alpha = j.value("alpha", 1.0);
  spec.beta = j.value("beta", 0.0);
  spec.degree = j.value("degree", 1);
  spec.name = j.value("name", std::string());
  try {
    validate(spec);
  } catch (const Error& e) {
    throw ConfigError(where + ": " + e.what());
  }
  return spec;
}

CovarianceModel make_covariance(const ExperimentConfig& cfg) {
  switch (cfg.covariance) {
    case CovarianceKind::identity:
      return CovarianceModel::identity(cfg.p);
    case CovarianceKind::toeplitz:
      return CovarianceModel::toeplitz(cfg.p, cfg.rho);
    case CovarianceKind::explicit_matrix:
      throw ConfigError("explicit covariance matrices are not expressible "
                        "in the config file");
  }
  throw ConfigError("bad covariance kind");
}

std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) return "nan";
  return std::string(buf, ptr);
}

std::string format_u64(std::uint64_t v) {
  char buf[24];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

}  // namespace

ExperimentConfig parse_config_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config root must be an object");

  static const std::vector<std::string> known = {
      "mode",       "n",           "p",
      "sigma2",     "covariance",  "distribution",
      "target",     "kernels",     "lambda_grid",
      "n_test",     "n_rep",       "base_seed",
      "input_csv",  "train_fraction", "n_permutations",
      "realdata_sigma2", "output", "var_divisor",
      "z_search_min", "z_search_max"};
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw ConfigError("unknown config key '" + key + "'");
  }

  ExperimentConfig cfg = default_config();
  try {
    if (j.contains("mode"))
      cfg.mode = mode_from_string(j.at("mode").get<std::string>());
    cfg.n = j.value("n", cfg.n);
    cfg.p = j.value("p", cfg.p);
    cfg.sigma2 = j.value("sigma2", cfg.sigma2);
    if (j.contains("covariance")) {
      const json& c = j.at("covariance");
      const std::string kind = c.at("kind").get<std::string>();
      if (kind == "identity") {
        cfg.covariance = CovarianceKind::identity;
      } else if (kind == "toeplitz") {
        cfg.covariance = CovarianceKind::toeplitz;
        cfg.rho = c.value("rho", 0.4);
      } else {
        throw ConfigError("covariance.kind must be 'identity' or 'toeplitz'");
      }
    }
    if (j.contains("distribution"))
      cfg.distribution = design_distribution_from_string(
          j.at("distribution").get<std::string>());
    cfg.target = j.value("target", cfg.target);
    if (j.contains("kernels")) {
      const json& ks = j.at("kernels");
      if (!ks.is_array() || ks.empty())
        throw ConfigError("kernels must be a non-empty array");
      cfg.kernels.clear();
      for (int i = 0; i < static_cast<int>(ks.size()); ++i)
        cfg.kernels.push_back(kernel_from_json(ks[i], i));
    }
    if (j.contains("lambda_grid")) {
      const json& g = j.at("lambda_grid");
      cfg.lambda_grid.min = g.value("min", cfg.lambda_grid.min);
      cfg.lambda_grid.max = g.value("max", cfg.lambda_grid.max);
      cfg.lambda_grid.count = g.value("count", cfg.lambda_grid.count);
    }
    cfg.n_test = j.value("n_test", cfg.n_test);
    cfg.n_rep = j.value("n_rep", cfg.n_rep);
    cfg.base_seed = j.value("base_seed", cfg.base_seed);
    cfg.input_csv = j.value("input_csv", cfg.input_csv);
    cfg.train_fraction = j.value("train_fraction", cfg.train_fraction);
    cfg.n_permutations = j.value("n_permutations", cfg.n_permutations);
    cfg.realdata_sigma2 = j.value("realdata_sigma2", cfg.realdata_sigma2);
    cfg.output = j.value("output", cfg.output);
    if (j.contains("var_divisor")) {
      const std::string div = j.at("var_divisor").get<std::string>();
      if (div == "n")
        cfg.var_divisor = VarYDivisor::n;
      else if (div == "n-1")
        cfg.var_divisor = VarYDivisor::n_minus_1;
      else
        throw ConfigError("var_divisor must be 'n' or 'n-1'");
    }
    cfg.z_search_min = j.value("z_search_min", cfg.z_search_min);
    cfg.z_search_max = j.value("z_search_max", cfg.z_search_max);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config field error: ") + e.what());
  }
  validate_config(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_json(buffer.str());
}

void validate_config(const ExperimentConfig& cfg) {
  if (cfg.n < 2) throw ConfigError("n must be >= 2");
  if (cfg.p < 1) throw ConfigError("p must be >= 1");
  if (!(cfg.sigma2 >= 0.0)) throw ConfigError("sigma2 must be >= 0");
  if (cfg.kernels.empty()) throw ConfigError("kernel list must be non-empty");
  if (cfg.target != "sin")
    throw ConfigError("unknown target '" + cfg.target + "' (built-in: sin)");
  (void)cfg.lambda_grid.values();  // validates positivity/monotonicity
  if (cfg.n_test < 1) throw ConfigError("n_test must be >= 1");
  if (cfg.n_rep < 1) throw ConfigError("n_rep must be >= 1");
  if (!(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0))
    throw ConfigError("train_fraction must lie in (0, 1)");
  if (cfg.n_permutations < 1)
    throw ConfigError("n_permutations must be >= 1");
  if (!(cfg.realdata_sigma2 >= 0.0))
    throw ConfigError("realdata_sigma2 must be >= 0");
  if (!(cfg.z_search_min > 0.0 && cfg.z_search_max > cfg.z_search_min))
    throw ConfigError("z search interval must satisfy 0 < min < max");
  if (cfg.mode == ExperimentMode::realdata && cfg.input_csv.empty())
    throw ConfigError("realdata mode requires input_csv");
}

int worker_count() {
  if (const char* env = std::getenv("CKRR_THREADS")) {
    const int k = std::atoi(env);
    if (k >= 1) return k;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(int n_tasks, const std::function<void(int)>& fn) {
  const int workers = std::min(worker_count(), n_tasks);
  if (workers <= 1) {
    for (int i = 0; i < n_tasks; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= n_tasks) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

SweepTable run_sweep(const ExperimentConfig& cfg) {
  validate_config(cfg);
  const int n = cfg.n;
  const int p = cfg.p;
  const double c = static_cast<double>(p) / n;
  const double sigma2 = cfg.sigma2;
  const CovarianceModel sigma = make_covariance(cfg);
  const TargetFunction f = target_sin(p);
  const FunctionMoments mom = sin_moments(sigma, p);
  const double tau = sigma.tau();
  const std::vector<double> lambdas = cfg.lambda_grid.values();
  const int n_kernels = static_cast<int>(cfg.kernels.size());
  const int n_lambdas = static_cast<int>(lambdas.size());

  std::vector<KernelScalars> scalars;
  scalars.reserve(n_kernels);
  for (const auto& spec : cfg.kernels)
    scalars.push_back(kernel_scalars(spec, tau));

  // Deterministic limits are replicate-independent.
  const SpectralModel smodel = SpectralModel::from_covariance(sigma, n);
  std::vector<double> train_limit(n_kernels * n_lambdas);
  std::vector<double> test_limit(n_kernels * n_lambdas);
  for (int k = 0; k < n_kernels; ++k) {
    for (int l = 0; l < n_lambdas; ++l) {
      const double z = z_of_lambda(lambdas[l], scalars[k]);
      const double m_z = stieltjes_fixed_point(smodel, z).m;
      const int idx = k * n_lambdas + l;
      test_limit[idx] = limit_test_risk(mom, sigma, n, p, sigma2, m_z);
      train_limit[idx] = limit_train_risk(mom, sigma, n, p, sigma2, m_z, c,
                                          lambdas[l], scalars[k].g0p);
    }
  }

  const int cells = n_kernels * n_lambdas;
  std::vector<double> mc(cfg.n_rep * cells);
  std::vector<double> train(cfg.n_rep * cells);
  std::vector<double> lemma2(cfg.n_rep * cells);
  std::vector<double> thm2(cfg.n_rep * cells);

  parallel_for(cfg.n_rep, [&](int r) {
    const std::uint64_t rep_seed = replicate_seed(cfg.base_seed, r);
    const Eigen::MatrixXd X = sample_design(
        n, sigma, cfg.distribution, derive_seed(rep_seed, kStreamDesign));
    const Eigen::VectorXd f_train = apply_target(f, X);
    Eigen::VectorXd y = f_train;
    if (sigma2 > 0.0)
      y += std::sqrt(sigma2) *
           gaussian_noise(n, derive_seed(rep_seed, kStreamNoise));
    const Eigen::MatrixXd S = sample_design(
        cfg.n_test, sigma, cfg.distribution, derive_seed(rep_seed, kStreamTest));
    const Eigen::VectorXd f_test = apply_target(f, S);
    const RiskEstimatorWorkspace ws(X, y, cfg.var_divisor);

    EstimatorInputs in;
    in.X = X;
    in.y = y;
    in.c = c;
    in.sigma2 = sigma2;
    in.var_divisor = cfg.var_divisor;

    for (int k = 0; k < n_kernels; ++k) {
      const CenteredKernelSystem system(X, cfg.kernels[k]);
      const Eigen::MatrixXd kappa =
          centered_info_matrix(X, S, system.gram(), cfg.kernels[k]);
      in.g0p = scalars[k].g0p;
      for (int l = 0; l < n_lambdas; ++l) {
        const double lambda = lambdas[l];
        const Eigen::VectorXd a = system.solve_dual(y, lambda);
        const Eigen::VectorXd pred = (kappa * a).array() + y.mean();
        const int idx = (r * n_kernels + k) * n_lambdas + l;
        mc[idx] = (pred - f_test).squaredNorm() / cfg.n_test;
        train[idx] = system.train_risk_analytic(f_train, lambda, sigma2);
        const double z = z_of_lambda(lambda, scalars[k]);
        const double m_hat = ws.m_hat(z);
        in.z = z;
        in.lambda = lambda;
        lemma2[idx] = ratio_risk_estimate(train[idx], m_hat, in).value;
        thm2[idx] = ws.resolvent_estimate(z, c, sigma2);
      }
    }
  });

  SweepTable table;
  table.has_limits = true;
  table.rows.reserve(cells);
  for (int k = 0; k < n_kernels; ++k) {
    for (int l = 0; l < n_lambdas; ++l) {
      SweepRow row;
      row.kernel = cfg.kernels[k].label();
      row.lambda = lambdas[l];
      row.n_rep = cfg.n_rep;
      row.seed = cfg.base_seed;
      const int cell = k * n_lambdas + l;
      double mc_sum = 0.0, train_sum = 0.0, l2_sum = 0.0, t2_sum = 0.0;
      for (int r = 0; r < cfg.n_rep; ++r) {
        const int idx = (r * n_kernels + k) * n_lambdas + l;
        mc_sum += mc[idx];
        train_sum += train[idx];
        l2_sum += lemma2[idx];
        t2_sum += thm2[idx];
      }
      row.r_test_mc = mc_sum / cfg.n_rep;
      row.r_train = train_sum / cfg.n_rep;
      row.r_hat_lemma2 = l2_sum / cfg.n_rep;
      row.r_hat_thm2 = t2_sum / cfg.n_rep;
      if (cfg.n_rep > 1) {
        double ss = 0.0;
        for (int r = 0; r < cfg.n_rep; ++r) {
          const int idx = (r * n_kernels + k) * n_lambdas + l;
          ss += (mc[idx] - row.r_test_mc) * (mc[idx] - row.r_test_mc);
        }
        row.r_test_mc_se = std::sqrt(ss / (cfg.n_rep - 1) / cfg.n_rep);
      }
      row.r_train_limit = train_limit[cell];
      row.r_test_limit = test_limit[cell];
      table.rows.push_back(std::move(row));
    }
  }
  if (!cfg.output.empty()) write_sweep_csv(cfg.output, table);
  return table;
}

SweepTable run_realdata(const ExperimentConfig& cfg) {
  validate_config(cfg);
  const Dataset ds = load_csv_dataset(cfg.input_csv);
  const int total = static_cast<int>(ds.features.rows());
  const int p = static_cast<int>(ds.features.cols());
  const int n = static_cast<int>(cfg.train_fraction * total);
  const int n_test = total - n;
  if (n < 2 || n_test < 1)
    throw InsufficientRows("split gives n = " + std::to_string(n) +
                           ", n_test = " + std::to_string(n_test));
  const double c = static_cast<double>(p) / n;
  const double sigma2 = cfg.realdata_sigma2;
  const double sigma_noise = std::sqrt(sigma2);
  const std::vector<double> lambdas = cfg.lambda_grid.values();
  const int n_kernels = static_cast<int>(cfg.kernels.size());
  const int n_lambdas = static_cast<int>(lambdas.size());
  const int cells = n_kernels * n_lambdas;
  const int n_perm = cfg.n_permutations;

  std::vector<double> heldout(n_perm * cells);
  std::vector<double> train(n_perm * cells);
  std::vector<double> lemma2(n_perm * cells);
  std::vector<double> thm2(n_perm * cells);

  parallel_for(n_perm, [&](int q) {
    const std::uint64_t perm_seed = replicate_seed(cfg.base_seed, q);
    std::vector<int> order(total);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(derive_seed(perm_seed, kStreamPermutation));
    std::shuffle(order.begin(), order.end(), rng);

    Eigen::MatrixXd X_train(n, p), X_test(n_test, p);
    Eigen::VectorXd y_train(n), y_test(n_test);
    for (int i = 0; i < n; ++i) {
      X_train.row(i) = ds.features.row(order[i]);
      y_train(i) = ds.response(order[i]);
    }
    for (int i = 0; i < n_test; ++i) {
      X_test.row(i) = ds.features.row(order[n + i]);
      y_test(i) = ds.response(order[n + i]);
    }

    // Standardize features with train-split statistics.
    const Eigen::RowVectorXd mean = X_train.colwise().mean();
    Eigen::RowVectorXd stddev =
        ((X_train.rowwise() - mean).array().square().colwise().sum() / n)
            .sqrt();
    for (int j = 0; j < p; ++j)
      if (!(stddev(j) > 0.0)) stddev(j) = 1.0;
    X_train = (X_train.rowwise() - mean).array().rowwise() / stddev.array();
    X_test = (X_test.rowwise() - mean).array().rowwise() / stddev.array();

    const Eigen::VectorXd y_train_clean = y_train;
    Eigen::VectorXd y_test_noisy = y_test;
    if (sigma2 > 0.0) {
      y_train += sigma_noise *
                 gaussian_noise(n, derive_seed(perm_seed, kStreamNoise));
      y_test_noisy += sigma_noise *
                      gaussian_noise(n_test, derive_seed(perm_seed, kStreamTest));
    }

    const double tau = X_train.rowwise().squaredNorm().mean() / p;
    const RiskEstimatorWorkspace ws(X_train, y_train, cfg.var_divisor);

    EstimatorInputs in;
    in.X = X_train;
    in.y = y_train;
    in.c = c;
    in.sigma2 = sigma2;
    in.var_divisor = cfg.var_divisor;

    for (int k = 0; k < n_kernels; ++k) {
      const KernelScalars scal = kernel_scalars(cfg.kernels[k], tau);
      const CenteredKernelSystem system(X_train, cfg.kernels[k]);
      const Eigen::MatrixXd kappa = centered_info_matrix(
          X_train, X_test, system.gram(), cfg.kernels[k]);
      in.g0p = scal.g0p;
      for (int l = 0; l < n_lambdas; ++l) {
        const double lambda = lambdas[l];
        const Eigen::VectorXd a = system.solve_dual(y_train, lambda);
        const double y_bar = y_train.mean();
        const int idx = (q * n_kernels + k) * n_lambdas + l;

        const Eigen::VectorXd pred_test = (kappa * a).array() + y_bar;
        heldout[idx] =
            (pred_test - y_test_noisy).squaredNorm() / n_test - sigma2;

        // Realized in-sample risk against the pre-noise response.
        const Eigen::VectorXd pred_train =
            (system.centered_gram() * a).array() + y_bar;
        train[idx] = (pred_train - y_train_clean).squaredNorm() / n;

        const double z = z_of_lambda(lambda, scal);
        const double m_hat = ws.m_hat(z);
        in.z = z;
        in.lambda = lambda;
        lemma2[idx] = ratio_risk_estimate(train[idx], m_hat, in).value;
        thm2[idx] = ws.resolvent_estimate(z, c, sigma2);
      }
    }
  });

  SweepTable table;
  table.has_limits = false;
  table.rows.reserve(cells);
  for (int k = 0; k < n_kernels; ++k) {
    for (int l = 0; l < n_lambdas; ++l) {
      SweepRow row;
      row.kernel = cfg.kernels[k].label();
      row.lambda = lambdas[l];
      row.n_rep = n_perm;
      row.seed = cfg.base_seed;
      double mc_sum = 0.0, train_sum = 0.0, l2_sum = 0.0, t2_sum = 0.0;
      for (int q = 0; q < n_perm; ++q) {
        const int idx = (q * n_kernels + k) * n_lambdas + l;
        mc_sum += heldout[idx];
        train_sum += train[idx];
        l2_sum += lemma2[idx];
        t2_sum += thm2[idx];
      }
      row.r_test_mc = mc_sum / n_perm;
      row.r_train = train_sum / n_perm;
      row.r_hat_lemma2 = l2_sum / n_perm;
      row.r_hat_thm2 = t2_sum / n_perm;
      if (n_perm > 1) {
        double ss = 0.0;
        for (int q = 0; q < n_perm; ++q) {
          const int idx = (q * n_kernels + k) * n_lambdas + l;
          ss += (heldout[idx] - row.r_test_mc) * (heldout[idx] - row.r_test_mc);
        }
        row.r_test_mc_se = std::sqrt(ss / (n_perm - 1) / n_perm);
      }
      table.rows.push_back(std::move(row));
    }
  }
  if (!cfg.output.empty()) write_sweep_csv(cfg.output, table);
  return table;
}

void write_sweep_csv(const std::string& path, const SweepTable& table) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open output file: " + tmp);
    if (table.has_limits) {
      out << "kernel,lambda,r_train,r_train_limit,r_test_mc,r_test_mc_se,"
             "r_test_limit,r_hat_lemma2,r_hat_thm2,n_rep,seed\n";
    } else {
      out << "kernel,lambda,r_train,r_test_mc,r_test_mc_se,"
             "r_hat_lemma2,r_hat_thm2,n_rep,seed\n";
    }
    for (const auto& row : table.rows) {
      out << row.kernel << ',' << format_double(row.lambda) << ','
          << format_double(row.r_train) << ',';
      if (table.has_limits) out << format_double(row.r_train_limit) << ',';
      out << format_double(row.r_test_mc) << ','
          << format_double(row.r_test_mc_se) << ',';
      if (table.has_limits) out << format_double(row.r_test_limit) << ',';
      out << format_double(row.r_hat_lemma2) << ','
          << format_double(row.r_hat_thm2) << ',' << row.n_rep << ','
          << format_u64(row.seed) << '\n';
    }
    if (!out) throw Error("write failed: " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw Error("atomic rename failed: " + tmp + " -> " + path);
}

TuneReport run_tune(const ExperimentConfig& cfg) {
  validate_config(cfg);
  const int n = cfg.n;
  const int p = cfg.p;
  const double c = static_cast<double>(p) / n;
  const CovarianceModel sigma = make_covariance(cfg);
  const TargetFunction f = target_sin(p);
  const double tau = sigma.tau();

  const std::uint64_t seed0 = replicate_seed(cfg.base_seed, 0);
  const Eigen::MatrixXd X = sample_design(
      n, sigma, cfg.distribution, derive_seed(seed0, kStreamDesign));
  Eigen::VectorXd y = apply_target(f, X);
  if (cfg.sigma2 > 0.0)
    y += std::sqrt(cfg.sigma2) *
         gaussian_noise(n, derive_seed(seed0, kStreamNoise));

  TuneReport report;
  report.seed = cfg.base_seed;

  if (cfg.covariance == CovarianceKind::identity) {
    const RiskEstimatorWorkspace ws(X, y, cfg.var_divisor);
    TuningResult res;
    try {
      res.m_star = optimal_m_identity(ws.quad_a(), ws.var_y(), n, p);
    } catch (const NegativeRadicand&) {
      res.m_star = optimal_m_identity_grid(ws.quad_a(), ws.var_y(), n, p);
      res.used_grid_fallback = true;
    }
    res.z_star = find_z_for_m(X, res.m_star, cfg.z_search_min,
                              cfg.z_search_max);
    res.r_test_at_optimum = ws.resolvent_estimate(res.z_star, c, cfg.sigma2);
    for (const auto& spec : cfg.kernels) {
      const KernelScalars scal = kernel_scalars(spec, tau);
      try {
        res.lambda_star_per_kernel[spec.label()] =
            lambda_from_z(res.z_star, scal);
      } catch (const Unreachable&) {
        res.lambda_star_per_kernel[spec.label()] = std::nullopt;
      }
    }
    report.result = std::move(res);
  } else {
    report.result = optimize_z_general(X, y, cfg.sigma2, -cfg.z_search_max,
                                       -cfg.z_search_min, cfg.kernels, tau,
                                       cfg.var_divisor);
  }

  // Verification: refit at each kernel's lambda_star and measure the Monte
  // Carlo prediction risk on the same design with shared seeds, so realized
  // risks across kernels are directly comparable.
  const std::uint64_t verify_seed = derive_seed(cfg.base_seed, 0x5EEDF00DULL);
  for (const auto& spec : cfg.kernels) {
    const auto it = report.result.lambda_star_per_kernel.find(spec.label());
    if (it == report.result.lambda_star_per_kernel.end() || !it->second)
      continue;
    report.realized_risk[spec.label()] = prediction_risk_mc(
        X, spec, *it->second, f, sigma, cfg.distribution, cfg.sigma2,
        cfg.n_test, cfg.n_rep, verify_seed);
  }
  return report;
}

std::string TuneReport::to_json() const {
  json j;
  j["m_star"] = result.m_star;
  j["z_star"] = result.z_star;
  j["r_test_at_optimum"] = result.r_test_at_optimum;
  j["used_grid_fallback"] = result.used_grid_fallback;
  j["non_unimodal"] = result.non_unimodal;
  j["seed"] = seed;
  json lambdas = json::object();
  for (const auto& [name, lambda] : result.lambda_star_per_kernel) {
    if (lambda)
      lambdas[name] = *lambda;
    else
      lambdas[name] = "unreachable";
  }
  j["lambda_star"] = lambdas;
  json risks = json::object();
  for (const auto& [name, mc] : realized_risk) {
    risks[name] = {{"mean", mc.mean}, {"std_error", mc.std_error}};
  }
  j["realized_risk"] = risks;
  return j.dump(2);
}

bool ValidationReport::all_pass() const {
  for (const auto& check : checks)
    if (!check.pass) return false;
  return true;
}

std::string ValidationReport::to_json() const {
  json j;
  j["all_pass"] = all_pass();
  json arr = json::array();
  for (const auto& check : checks) {
    arr.push_back({{"name", check.name},
                   {"measured", check.measured},
                   {"tolerance", check.tolerance},
                   {"pass", check.pass},
                   {"detail", check.detail}});
  }
  j["checks"] = arr;
  return j.dump(2);
}

}  // namespace ckrr
