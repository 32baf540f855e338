#include <cmath>
#include <limits>
#include <sstream>

#include "ckrr/asymptotics.hpp"
#include "ckrr/experiments.hpp"
#include "ckrr/rmt.hpp"

namespace ckrr {

namespace {

double operator_norm(const Eigen::MatrixXd& A) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      0.5 * (A + A.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

Eigen::MatrixXd centering_matrix(int n) {
  return Eigen::MatrixXd::Identity(n, n) -
         Eigen::MatrixXd::Constant(n, n, 1.0 / n);
}

ValidationCheck check(const std::string& name, double measured,
                      double tolerance, const std::string& detail) {
  return {name, measured, tolerance, measured <= tolerance, detail};
}

}  // namespace

ValidationReport run_validate(const ExperimentConfig& cfg) {
  ValidationReport report;
  const std::uint64_t seed = cfg.base_seed;
  const std::string seed_note = "seed=" + std::to_string(seed);

  // --- Centering identities -------------------------------------------
  {
    const int n = 60;
    const CovarianceModel sigma = CovarianceModel::identity(8);
    const Eigen::MatrixXd X =
        sample_design(n, sigma, DesignDistribution::gaussian,
                      derive_seed(seed, 11));
    const KernelSpec spec = make_kernel(KernelFamily::exponential, 1.0, 0.0);
    const Eigen::MatrixXd K = gram_matrix(X, spec);
    const Eigen::MatrixXd Kc = center_gram(K);
    const double scale = K.norm();
    const double row_sums = Kc.rowwise().sum().cwiseAbs().maxCoeff();
    const double col_sums = Kc.colwise().sum().cwiseAbs().maxCoeff();
    report.checks.push_back(check("centering_zero_row_col_sums",
                                  std::max(row_sums, col_sums) / scale, 1e-10,
                                  seed_note));
    report.checks.push_back(check("centering_idempotent",
                                  (center_gram(Kc) - Kc).norm() / scale,
                                  1e-10, seed_note));
    report.checks.push_back(check("centering_symmetry",
                                  (Kc - Kc.transpose()).norm() / scale, 1e-10,
                                  seed_note));

    // Linear kernels linearize exactly: K = g(0) 11^T + g'(0) XX^T / p.
    const KernelSpec lin = make_kernel(KernelFamily::linear, 1.3, 0.7);
    const Eigen::MatrixXd K_lin = gram_matrix(X, lin);
    const Eigen::MatrixXd K_inf = kernel_linearization(X, lin, sigma);
    report.checks.push_back(check("linear_gram_linearization_exact",
                                  (K_lin - K_inf).norm() / K_lin.norm(),
                                  1e-10, seed_note));
  }

  // --- Resolvent identities --------------------------------------------
  {
    const int n = 80;
    const int p = 40;
    const double z = -1.0;
    const CovarianceModel sigma = toeplitz_sigma(p, 0.4);
    const Eigen::MatrixXd X =
        sample_design(n, sigma, DesignDistribution::gaussian,
                      derive_seed(seed, 12));
    const Eigen::MatrixXd P = centering_matrix(n);
    const Eigen::MatrixXd Qtilde = feature_resolvent(X, z);
    const Eigen::MatrixXd Qz =
        (P * X * X.transpose() * P / p -
         z * Eigen::MatrixXd::Identity(n, n))
            .llt()
            .solve(Eigen::MatrixXd::Identity(n, n));
    const Eigen::MatrixXd rhs_n =
        -(1.0 / z) * Eigen::MatrixXd::Identity(n, n) +
        (1.0 / (z * p)) * P * X * Qtilde * X.transpose() * P;
    report.checks.push_back(check("woodbury_resolvent_nxn",
                                  (Qz - rhs_n).norm() / Qz.norm(), 1e-10,
                                  seed_note));
    const Eigen::MatrixXd rhs_p =
        -(1.0 / z) * Eigen::MatrixXd::Identity(p, p) +
        (1.0 / (z * p)) * X.transpose() * P * Qz * P * X;
    report.checks.push_back(check("woodbury_resolvent_pxp",
                                  (Qtilde - rhs_p).norm() / Qtilde.norm(),
                                  1e-10, seed_note));
    const Eigen::MatrixXd defining =
        (X.transpose() * P * X / p - z * Eigen::MatrixXd::Identity(p, p)) *
        Qtilde;
    report.checks.push_back(
        check("resolvent_defining_equation",
              (defining - Eigen::MatrixXd::Identity(p, p)).norm() /
                  std::sqrt(static_cast<double>(p)),
              1e-10, seed_note));
  }

  // --- Limit formula identities ----------------------------------------
  {
    const int n = 200;
    const int p = 100;
    const double c = static_cast<double>(p) / n;
    const double sigma2 = 0.5;
    const CovarianceModel sigma = toeplitz_sigma(p, 0.4);
    const FunctionMoments mom = sin_moments(sigma, p);
    const SpectralModel smodel = SpectralModel::from_covariance(sigma, n);
    double worst = 0.0;
    for (const auto& spec : default_kernels()) {
      const KernelScalars scal = kernel_scalars(spec, sigma.tau());
      for (const double lambda : LambdaGrid{1e-3, 1e2, 12}.values()) {
        const double z = z_of_lambda(lambda, scal);
        const double m_z = stieltjes_fixed_point(smodel, z).m;
        const double r_test = limit_test_risk(mom, sigma, n, p, sigma2, m_z);
        const double r_train = limit_train_risk(mom, sigma, n, p, sigma2,
                                                m_z, c, lambda, scal.g0p);
        const double back = test_risk_from_train_risk(r_train, c, lambda, m_z,
                                                      scal.g0p, sigma2);
        worst = std::max(worst,
                         std::abs(back - r_test) / (1.0 + std::abs(r_test)));
      }
    }
    report.checks.push_back(
        check("train_test_limit_identity", worst, 1e-12, "kernel/lambda grid"));

    // Identity-covariance display vs the general formulas at Sigma = I.
    const CovarianceModel eye = CovarianceModel::identity(p);
    const FunctionMoments mom_eye = sin_moments(eye, p);
    double worst_id = 0.0;
    for (const double z : {-0.3, -1.0, -5.0}) {
      const double m_z = stieltjes_identity_closed_form(c, z);
      const double lambda = -z;  // linear kernel mapping
      const RiskLimits lim =
          limit_risks_identity(mom_eye, n, p, sigma2, m_z, c, lambda, 1.0);
      const double general_test =
          limit_test_risk(mom_eye, eye, n, p, sigma2, m_z);
      const double general_train = limit_train_risk(mom_eye, eye, n, p,
                                                    sigma2, m_z, c, lambda,
                                                    1.0);
      worst_id = std::max(
          worst_id, std::abs(lim.r_test_inf - general_test) /
                        (1.0 + std::abs(general_test)));
      worst_id = std::max(
          worst_id, std::abs(lim.r_train_inf - general_train) /
                        (1.0 + std::abs(general_train)));
    }
    report.checks.push_back(
        check("identity_simplification_vs_general", worst_id, 1e-12, ""));
  }

  // --- Stieltjes solver --------------------------------------------------
  {
    double worst = 0.0;
    for (const double c : {0.25, 0.5, 1.0, 2.0}) {
      const int p = 100;
      const int n = static_cast<int>(std::lround(p / c));
      SpectralModel model;
      model.p = p;
      model.n = n;
      model.c = static_cast<double>(p) / n;
      model.sigma_eigs = Eigen::VectorXd::Ones(p);
      for (const double z : {-0.1, -1.0, -10.0}) {
        const double fixed = stieltjes_fixed_point(model, z).m;
        const double closed = stieltjes_identity_closed_form(model.c, z);
        worst = std::max(worst, std::abs(fixed - closed));
      }
    }
    report.checks.push_back(
        check("stieltjes_fixed_point_vs_closed_form", worst, 1e-10,
              "c in {0.25,0.5,1,2}, z in {-0.1,-1,-10}"));

    const double golden = 0.5 * (std::sqrt(5.0) - 1.0);
    report.checks.push_back(check(
        "stieltjes_golden_ratio_value",
        std::abs(stieltjes_identity_closed_form(1.0, -1.0) - golden), 1e-10,
        "m(c=1, z=-1) solves m^2 + m - 1 = 0"));

    SpectralModel model;
    model.p = 100;
    model.n = 200;
    model.c = 0.5;
    model.sigma_eigs =
        toeplitz_sigma(100, 0.4).eigenvalues();
    const double reference = stieltjes_fixed_point(model, -1.0).m;
    double drift = 0.0;
    for (const double m0 : {1e-3, 1.0}) {
      const double m = stieltjes_fixed_point(model, -1.0, 1e-13, 10000, m0).m;
      drift = std::max(drift, std::abs(m - reference));
    }
    report.checks.push_back(check("stieltjes_initialization_stability", drift,
                                  1e-9, "m0 in {default, 1e-3, 1}"));
  }

  // --- Dual/primal equivalence and smoother consistency ------------------
  {
    const KernelSpec lin = make_kernel(KernelFamily::linear, 1.0, 0.0);
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
      const int n = 6 + (trial % 3) * 7;  // 6, 13, 20
      const int p = 2 + (trial % 4);
      const CovarianceModel eye = CovarianceModel::identity(p);
      const Eigen::MatrixXd X =
          sample_design(n, eye, DesignDistribution::gaussian,
                        derive_seed(seed, 100 + trial));
      const Eigen::VectorXd y =
          gaussian_noise(n, derive_seed(seed, 200 + trial));
      const double lambda = 0.5;
      const Eigen::MatrixXd P = centering_matrix(n);
      const Eigen::MatrixXd Phi = X / std::sqrt(static_cast<double>(p));
      const Eigen::VectorXd yc = y.array() - y.mean();
      const Eigen::VectorXd primal =
          (Phi.transpose() * P * Phi +
           lambda * Eigen::MatrixXd::Identity(p, p))
              .ldlt()
              .solve(Phi.transpose() * P * yc);
      const Eigen::MatrixXd K = gram_matrix(X, lin);
      const Eigen::VectorXd dual =
          Phi.transpose() * P *
          (P * K * P + lambda * Eigen::MatrixXd::Identity(n, n))
              .ldlt()
              .solve(yc);
      worst = std::max(worst, (primal - dual).norm());
    }
    report.checks.push_back(
        check("dual_primal_equivalence", worst, 1e-8, "n <= 20, p <= 5"));

    // predict on the training inputs equals the smoother applied to y.
    const int n = 40;
    const int p = 10;
    const CovarianceModel eye = CovarianceModel::identity(p);
    const Eigen::MatrixXd X = sample_design(
        n, eye, DesignDistribution::gaussian, derive_seed(seed, 300));
    const Eigen::VectorXd y = gaussian_noise(n, derive_seed(seed, 301));
    const KernelSpec spec = make_kernel(KernelFamily::exponential, 1.0, 0.0);
    const double lambda = 0.7;
    const CkrrModel model = fit(X, y, spec, lambda);
    const Eigen::MatrixXd P = centering_matrix(n);
    const Eigen::MatrixXd Kc = center_gram(model.K);
    const Eigen::MatrixXd H =
        Kc * (Kc + lambda * Eigen::MatrixXd::Identity(n, n))
                 .ldlt()
                 .solve(P) +
        Eigen::MatrixXd::Constant(n, n, 1.0 / n);
    const Eigen::VectorXd via_smoother = H * y;
    const Eigen::VectorXd via_predict = predict(model, X);
    report.checks.push_back(check(
        "smoother_consistency",
        (via_smoother - via_predict).cwiseAbs().maxCoeff(), 1e-10, seed_note));

    const CkrrModel shifted = fit(X, (y.array() + 3.5).matrix(), spec, lambda);
    report.checks.push_back(
        check("fit_shift_invariance",
              (predict(shifted, X).array() - via_predict.array() - 3.5)
                  .abs()
                  .maxCoeff(),
              1e-10, seed_note));

    EstimatorInputs in;
    in.X = X;
    in.y = y;
    in.z = -1.0;
    in.c = static_cast<double>(p) / n;
    in.lambda = 1.0;
    in.g0p = 1.0;
    in.sigma2 = 0.25;
    EstimatorInputs in_shift = in;
    in_shift.y = (y.array() + 5.0).matrix();
    const double m_hat = empirical_stieltjes(X, in.z);
    const double delta_resolvent = std::abs(resolvent_risk_estimate(in) -
                                            resolvent_risk_estimate(in_shift));
    const double delta_ratio =
        std::abs(ratio_risk_estimate(0.3, m_hat, in).value -
                 ratio_risk_estimate(0.3, m_hat, in_shift).value);
    report.checks.push_back(check("estimator_shift_invariance",
                                  std::max(delta_resolvent, delta_ratio),
                                  1e-10, seed_note));
  }

  // --- lambda <-> z round trip -------------------------------------------
  {
    double worst = 0.0;
    for (const auto& spec : default_kernels()) {
      const KernelScalars scal = kernel_scalars(spec, 1.0);
      for (const double lambda : LambdaGrid{1e-3, 1e2, 10}.values()) {
        const double z = z_of_lambda(lambda, scal);
        worst = std::max(worst,
                         std::abs(lambda_from_z(z, scal) - lambda) / lambda);
      }
    }
    report.checks.push_back(check("lambda_z_round_trip", worst, 1e-12, ""));
  }

  // --- Empirical Stieltjes convention and consistency ---------------------
  {
    const int n = 400;
    const int p = 200;
    const double c = 0.5;
    const double z = -1.0;
    const CovarianceModel eye = CovarianceModel::identity(p);
    const Eigen::MatrixXd X = sample_design(
        n, eye, DesignDistribution::gaussian, derive_seed(seed, 400));
    const double closed = stieltjes_identity_closed_form(c, z);
    const double m_n = empirical_stieltjes(X, z);
    const double m_p = empirical_stieltjes_companion(X, z);
    std::ostringstream detail;
    detail << "closed_form=" << closed << " nxn_trace=" << m_n
           << " pxp_trace=" << m_p
           << "; the n x n trace is the convention that matches the "
              "fixed point";
    ValidationCheck conv;
    conv.name = "empirical_stieltjes_convention";
    conv.measured = std::abs(m_n - closed);
    conv.tolerance = std::abs(m_p - closed);
    conv.pass = std::abs(m_n - closed) < std::abs(m_p - closed);
    conv.detail = detail.str();
    report.checks.push_back(conv);

    report.checks.push_back(check("empirical_stieltjes_consistency",
                                  std::abs(m_n - closed), 0.05,
                                  "n=400, p=200, z=-1, " + seed_note));
  }

  // --- Kernel linearization decay ----------------------------------------
  {
    const KernelSpec spec = make_kernel(KernelFamily::exponential, 1.0, 0.0);
    std::ostringstream detail;
    detail << "||K - K_inf||/sqrt(n) at n=p:";
    double previous = std::numeric_limits<double>::infinity();
    bool decreasing = true;
    double last_ratio = 0.0;
    for (const int n : {100, 200, 400}) {
      const CovarianceModel eye = CovarianceModel::identity(n);
      const Eigen::MatrixXd X = sample_design(
          n, eye, DesignDistribution::gaussian, derive_seed(seed, 500 + n));
      const Eigen::MatrixXd K = gram_matrix(X, spec);
      const Eigen::MatrixXd K_inf = kernel_linearization(X, spec, eye);
      const double scaled = operator_norm(K - K_inf) / std::sqrt(n);
      detail << ' ' << scaled;
      if (scaled >= previous) decreasing = false;
      last_ratio = scaled / previous;
      previous = scaled;
    }
    ValidationCheck decay;
    decay.name = "kernel_linearization_norm_decay";
    decay.measured = last_ratio;  // < 1 when decreasing
    decay.tolerance = 1.0;
    decay.pass = decreasing;
    decay.detail = detail.str();
    report.checks.push_back(decay);
  }

  // --- Deterministic equivalents of the feature resolvent -----------------
  {
    const int p = 200;
    const int n = 400;
    const double z = -1.0;
    const CovarianceModel sigma = toeplitz_sigma(p, 0.4);
    const SpectralModel smodel = SpectralModel::from_covariance(sigma, n);
    const double m_z = stieltjes_fixed_point(smodel, z).m;
    const Eigen::VectorXd d = sigma.eigenvalues();
    const Eigen::MatrixXd W = sigma.eigenvectors();
    const Eigen::VectorXd inv_diag = (1.0 + m_z * d.array()).inverse();
    const Eigen::MatrixXd equivalent =
        -(1.0 / z) * W * inv_diag.asDiagonal() * W.transpose();

    const int n_draws = 20;
    double bilinear_sum = 0.0;
    double trace_sum = 0.0;
    for (int t = 0; t < n_draws; ++t) {
      const Eigen::MatrixXd X = sample_design(
          n, sigma, DesignDistribution::gaussian, derive_seed(seed, 600 + t));
      const Eigen::MatrixXd Qtilde = feature_resolvent(X, z);
      bilinear_sum += Qtilde(0, 1);
      trace_sum += Qtilde.trace() / p;
    }
    report.checks.push_back(
        check("qtilde_bilinear_equivalent",
              std::abs(bilinear_sum / n_draws - equivalent(0, 1)), 0.1,
              "u=e1, v=e2, n=2p=400, 20 draws, " + seed_note));
    report.checks.push_back(
        check("qtilde_trace_equivalent",
              std::abs(trace_sum / n_draws - equivalent.trace() / p), 0.05,
              "n=2p=400, 20 draws, " + seed_note));
  }

  // --- Statistical sanity of the samplers ---------------------------------
  {
    double worst = 0.0;
    std::ostringstream detail;
    for (const int p : {100, 400}) {
      const CovarianceModel sigma = toeplitz_sigma(p, 0.4);
      const Eigen::MatrixXd X =
          sample_design(200, sigma, DesignDistribution::gaussian,
                        derive_seed(seed, 700 + p));
      const double tau = sigma.tau();
      const double mean_diag = X.rowwise().squaredNorm().mean() / p;
      const double bound =
          3.0 * std::sqrt(2.0 / p) * sigma.operator_norm();
      worst = std::max(worst, std::abs(mean_diag - tau) / bound);
      detail << " p=" << p << ": |dev|/bound="
             << std::abs(mean_diag - tau) / bound;
    }
    report.checks.push_back(
        check("tau_concentration", worst, 1.0, detail.str()));

    const int n = 4000;
    const int p = 5;
    const CovarianceModel sigma = toeplitz_sigma(p, 0.4);
    const Eigen::MatrixXd G = sample_design(
        n, sigma, DesignDistribution::gaussian, derive_seed(seed, 800));
    const Eigen::MatrixXd R = sample_design(
        n, sigma, DesignDistribution::rademacher, derive_seed(seed, 801));
    const Eigen::MatrixXd cov_g = (G.transpose() * G) / n;
    const Eigen::MatrixXd cov_r = (R.transpose() * R) / n;
    report.checks.push_back(
        check("design_universality_second_moments",
              (cov_g - cov_r).cwiseAbs().maxCoeff(), 0.15,
              "gaussian vs rademacher, n=4000, p=5, " + seed_note));
  }

  return report;
}

}  // namespace ckrr
