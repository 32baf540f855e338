// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Criteria are pinned here, in code, including every tolerance.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <string>
#include <vector>

#include "ckrr/asymptotics.hpp"
#include "ckrr/experiments.hpp"
#include "ckrr/rmt.hpp"
#include "ckrr/tuning.hpp"

using namespace ckrr;

namespace {

int failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
  std::printf("%s criterion %d: %s\n", pass ? "PASS" : "FAIL", criterion,
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* format, ...) {
  char buffer[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buffer, sizeof(buffer), format, args);
  va_end(args);
  return buffer;
}

struct SweepErrors {
  double worst_test = 0.0;
  double worst_train = 0.0;
  double worst_thm2_all = 0.0;
  double worst_both_above = 0.0;  // lambda >= 0.1
};

SweepErrors sweep_errors(const SweepTable& table) {
  SweepErrors out;
  for (const auto& row : table.rows) {
    out.worst_test = std::max(
        out.worst_test, std::abs(row.r_test_mc - row.r_test_limit) /
                            std::max(row.r_test_limit, 0.05));
    out.worst_train = std::max(
        out.worst_train, std::abs(row.r_train - row.r_train_limit) /
                             std::max(row.r_train_limit, 0.05));
    const double thm2 =
        std::abs(row.r_hat_thm2 - row.r_test_mc) / row.r_test_mc;
    const double lemma2 =
        std::abs(row.r_hat_lemma2 - row.r_test_mc) / row.r_test_mc;
    out.worst_thm2_all = std::max(out.worst_thm2_all, thm2);
    if (row.lambda >= 0.1)
      out.worst_both_above =
          std::max(out.worst_both_above, std::max(thm2, lemma2));
  }
  return out;
}

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const size_t n = values.size();
  return n % 2 == 1 ? values[n / 2]
                    : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace

int main() {
  const ExperimentConfig base = default_config();

  // Criteria 1 and 2: agreement of the Monte Carlo risks with the
  // deterministic limits at the reference scale, Gaussian then Rademacher,
  // tolerance 0.10 per grid cell, runtime bound 10 minutes per sweep.
  SweepTable gauss_table;
  {
    const auto t0 = std::chrono::steady_clock::now();
    gauss_table = run_sweep(base);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    const SweepErrors err = sweep_errors(gauss_table);
    report(1,
           err.worst_test <= 0.10 && err.worst_train <= 0.10 &&
               seconds <= 600.0,
           fmt("gaussian sweep, worst |R_test(MC)-R_test_inf|/max(.,0.05) = "
               "%.4f and train counterpart = %.4f (tol 0.10), runtime %.1f s "
               "(limit 600 s)",
               err.worst_test, err.worst_train, seconds));
  }
  {
    ExperimentConfig cfg = base;
    cfg.distribution = DesignDistribution::rademacher;
    const auto t0 = std::chrono::steady_clock::now();
    const SweepTable table = run_sweep(cfg);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    const SweepErrors err = sweep_errors(table);
    report(2,
           err.worst_test <= 0.10 && err.worst_train <= 0.10 &&
               seconds <= 600.0,
           fmt("rademacher sweep, worst test = %.4f, worst train = %.4f "
               "(tol 0.10), runtime %.1f s",
               err.worst_test, err.worst_train, seconds));
  }

  // Criterion 3: estimator consistency. Both estimators within 10% of the
  // Monte Carlo risk for lambda >= 0.1; the resolvent estimator alone down
  // to lambda = 1e-3; the per-replicate estimator/risk gap shrinks in
  // median when (n, p) doubles.
  {
    const SweepErrors err = sweep_errors(gauss_table);
    bool shrink = true;
    double med_small = 0.0, med_large = 0.0;
    {
      const KernelSpec spec = base.kernels[3];  // exponential
      std::vector<double> meds[2];
      int scale_idx = 0;
      for (const int scale : {1, 2}) {
        const int n = 200 * scale;
        const int p = 100 * scale;
        const CovarianceModel sigma = toeplitz_sigma(p, 0.4);
        const TargetFunction f = target_sin(p);
        const KernelScalars scal = kernel_scalars(spec, sigma.tau());
        for (int r = 0; r < 20; ++r) {
          const std::uint64_t seed = replicate_seed(base.base_seed, r);
          const Eigen::MatrixXd X =
              sample_design(n, sigma, DesignDistribution::gaussian,
                            derive_seed(seed, kStreamDesign));
          const Eigen::VectorXd y = make_labels(
              X, f, std::sqrt(0.5), derive_seed(seed, kStreamNoise));
          const RiskEstimatorWorkspace ws(X, y);
          double gap = 0.0;
          int count = 0;
          for (const double lambda : {0.03, 0.3, 3.0, 30.0}) {
            const double z = z_of_lambda(lambda, scal);
            const double estimate =
                ws.resolvent_estimate(z, static_cast<double>(p) / n, 0.5);
            const McEstimate mc = prediction_risk_mc(
                X, spec, lambda, f, sigma, DesignDistribution::gaussian, 0.5,
                1000, 8, derive_seed(seed, 100 + count));
            gap += std::abs(estimate - mc.mean);
            ++count;
          }
          meds[scale_idx].push_back(gap / count);
        }
        ++scale_idx;
      }
      med_small = median(meds[0]);
      med_large = median(meds[1]);
      shrink = med_large < med_small;
    }
    report(3,
           err.worst_both_above <= 0.10 && err.worst_thm2_all <= 0.10 &&
               shrink,
           fmt("both estimators within %.4f of MC for lambda >= 0.1 (tol "
               "0.10); resolvent estimator within %.4f over the whole grid "
               "(tol 0.10); median gap %.4f at (200,100) -> %.4f at "
               "(400,200), shrinking: %s",
               err.worst_both_above, err.worst_thm2_all, med_small, med_large,
               shrink ? "yes" : "no"));
  }

  // Criterion 4: kernel irrelevance. Grid minima of the limiting test risk
  // agree across kernels within 1%; after tuning, realized Monte Carlo
  // risks at each kernel's lambda_star agree within 2 pooled standard
  // errors.
  {
    std::map<std::string, double> min_limit;
    for (const auto& row : gauss_table.rows) {
      const auto it = min_limit.find(row.kernel);
      if (it == min_limit.end() || row.r_test_limit < it->second)
        min_limit[row.kernel] = row.r_test_limit;
    }
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (const auto& [kernel, value] : min_limit) {
      (void)kernel;
      lo = std::min(lo, value);
      hi = std::max(hi, value);
    }
    const double spread = (hi - lo) / lo;

    ExperimentConfig tune_cfg = base;
    tune_cfg.mode = ExperimentMode::tune;
    tune_cfg.covariance = CovarianceKind::identity;
    tune_cfg.n_rep = 20;
    const TuneReport tune = run_tune(tune_cfg);
    bool risks_agree = true;
    double worst_sigma = 0.0;
    for (auto a = tune.realized_risk.begin(); a != tune.realized_risk.end();
         ++a) {
      for (auto b = std::next(a); b != tune.realized_risk.end(); ++b) {
        const double pooled = std::sqrt(a->second.std_error *
                                            a->second.std_error +
                                        b->second.std_error *
                                            b->second.std_error);
        const double distance =
            std::abs(a->second.mean - b->second.mean) / pooled;
        worst_sigma = std::max(worst_sigma, distance);
        if (distance > 2.0) risks_agree = false;
      }
    }
    report(4, spread <= 0.01 && risks_agree,
           fmt("limit grid minima spread %.5f across kernels (tol 0.01); "
               "realized tuned risks within %.2f pooled SE of each other "
               "(tol 2), %zu kernels reachable",
               spread, worst_sigma, tune.realized_risk.size()));
  }

  // Criterion 5: exact-class identity suite, run through the validation
  // report with the tolerances pinned there (1e-12 / 1e-10 / 1e-8).
  {
    const ValidationReport validation = run_validate(base);
    struct Wanted {
      const char* name;
      double tolerance;
    };
    const std::vector<Wanted> wanted = {
        {"train_test_limit_identity", 1e-12},
        {"woodbury_resolvent_nxn", 1e-10},
        {"woodbury_resolvent_pxp", 1e-10},
        {"identity_simplification_vs_general", 1e-12},
        {"centering_zero_row_col_sums", 1e-10},
        {"centering_idempotent", 1e-10},
        {"dual_primal_equivalence", 1e-8},
    };
    bool all = true;
    double worst_ratio = 0.0;
    for (const auto& want : wanted) {
      bool found = false;
      for (const auto& check : validation.checks) {
        if (check.name != want.name) continue;
        found = true;
        if (!(check.pass && check.tolerance <= want.tolerance)) all = false;
        worst_ratio = std::max(worst_ratio, check.measured / want.tolerance);
      }
      if (!found) all = false;
    }
    report(5, all,
           fmt("algebraic identity suite (%zu checks), worst "
               "measured/tolerance ratio %.3g",
               wanted.size(), worst_ratio));
  }

  // Criterion 6: Stieltjes solver against the identity-covariance closed
  // form on the c x z grid, plus the golden-ratio point.
  {
    double worst = 0.0;
    for (const double c : {0.25, 0.5, 1.0, 2.0}) {
      SpectralModel model;
      model.p = 200;
      model.n = static_cast<int>(std::lround(200 / c));
      model.c = 200.0 / model.n;
      model.sigma_eigs = Eigen::VectorXd::Ones(200);
      for (const double z : {-0.1, -1.0, -10.0}) {
        worst = std::max(worst,
                         std::abs(stieltjes_fixed_point(model, z).m -
                                  stieltjes_identity_closed_form(c, z)));
      }
    }
    const double golden_gap =
        std::abs(stieltjes_identity_closed_form(1.0, -1.0) -
                 0.5 * (std::sqrt(5.0) - 1.0));
    report(6, worst <= 1e-10 && golden_gap <= 1e-10,
           fmt("fixed point vs closed form, worst |diff| = %.3g (tol 1e-10); "
               "golden-ratio gap %.3g",
               worst, golden_gap));
  }

  // Criterion 7: tuning closed form. m_star beats a 10^4-point grid search
  // on 50 random identity-covariance instances; the tuned z_star lands
  // within one lambda-grid step of the sweep argmin of the resolvent
  // estimate column.
  {
    const int n = 200;
    const int p = 100;
    const TargetFunction f = target_sin(p);
    const CovarianceModel eye = CovarianceModel::identity(p);
    bool beats_grid = true;
    double worst_excess = -std::numeric_limits<double>::infinity();
    for (int t = 0; t < 50; ++t) {
      const std::uint64_t seed = replicate_seed(base.base_seed + 1, t);
      const Eigen::MatrixXd X = sample_design(
          n, eye, DesignDistribution::gaussian, derive_seed(seed, 1));
      const Eigen::VectorXd y =
          make_labels(X, f, std::sqrt(0.5), derive_seed(seed, 2));
      const RiskEstimatorWorkspace ws(X, y);
      const double m_star = optimal_m_identity(ws.quad_a(), ws.var_y(), n, p);
      const double at_star =
          tuning_objective_identity(m_star, ws.quad_a(), ws.var_y(), n, p);
      double grid_min = std::numeric_limits<double>::infinity();
      for (int i = 1; i <= 10000; ++i) {
        grid_min = std::min(grid_min,
                            tuning_objective_identity(20.0 * i / 10000.0,
                                                      ws.quad_a(), ws.var_y(),
                                                      n, p));
      }
      worst_excess = std::max(worst_excess, at_star - grid_min);
      if (at_star > grid_min + 1e-8) beats_grid = false;
    }

    ExperimentConfig tune_cfg = base;
    tune_cfg.mode = ExperimentMode::tune;
    tune_cfg.covariance = CovarianceKind::identity;
    tune_cfg.n_rep = 4;
    tune_cfg.n_test = 100;
    const TuneReport tune = run_tune(tune_cfg);

    ExperimentConfig sweep_cfg = base;
    sweep_cfg.covariance = CovarianceKind::identity;
    const SweepTable sweep = run_sweep(sweep_cfg);
    // The resolvent-estimate column depends on the kernel only through the
    // lambda -> z mapping; read the argmin off the linear kernel rows,
    // whose grid is z = -lambda.
    int argmin_index = -1;
    double best = std::numeric_limits<double>::infinity();
    std::vector<double> lambdas;
    for (const auto& row : sweep.rows) {
      if (row.kernel != "linear") continue;
      lambdas.push_back(row.lambda);
      if (row.r_hat_thm2 < best) {
        best = row.r_hat_thm2;
        argmin_index = static_cast<int>(lambdas.size()) - 1;
      }
    }
    const double step = std::log(lambdas[1] / lambdas[0]);
    const double continuous =
        std::abs(std::log(-tune.result.z_star / lambdas[argmin_index])) /
        step;
    const int z_index = static_cast<int>(std::lround(
        std::log(-tune.result.z_star / lambdas[0]) / step));
    const int index_distance = std::abs(z_index - argmin_index);
    report(7, beats_grid && index_distance <= 1,
           fmt("m_star beats the 1e4-point grid on 50 instances (worst "
               "objective excess %.2g, tol 1e-8); tuned z_star = %.4f sits "
               "%d grid cell(s) from the sweep argmin lambda = %.4f "
               "(continuous distance %.2f steps, tol: adjacent cell)",
               worst_excess, tune.result.z_star, index_distance,
               lambdas[argmin_index], continuous));
  }

  // Criterion 8: operator-norm error of the kernel linearization decays
  // with n for the exponential kernel at n = p.
  {
    const KernelSpec spec = make_kernel(KernelFamily::exponential, 1.0, 0.0);
    std::vector<double> scaled;
    for (const int n : {100, 200, 400}) {
      const CovarianceModel eye = CovarianceModel::identity(n);
      const Eigen::MatrixXd X =
          sample_design(n, eye, DesignDistribution::gaussian,
                        derive_seed(base.base_seed, 9000 + n));
      const Eigen::MatrixXd diff =
          gram_matrix(X, spec) - kernel_linearization(X, spec, eye);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
          diff, Eigen::EigenvaluesOnly);
      scaled.push_back(es.eigenvalues().cwiseAbs().maxCoeff() / std::sqrt(n));
    }
    const bool decreasing = scaled[0] > scaled[1] && scaled[1] > scaled[2];
    report(8, decreasing,
           fmt("||K - K_inf||/sqrt(n) at n = p in {100, 200, 400}: "
               "%.4f, %.4f, %.4f (must be decreasing)",
               scaled[0], scaled[1], scaled[2]));
  }

  if (failures == 0) {
    std::printf("all acceptance criteria passed\n");
    return 0;
  }
  std::printf("%d acceptance criterion(s) failed\n", failures);
  return 1;
}
