#include "ckrr/regression.hpp"

#include <cmath>

namespace ckrr {

namespace {

Eigen::VectorXd center(const Eigen::VectorXd& v) {
  return v.array() - v.mean();
}

}  // namespace

CkrrModel fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
              const KernelSpec& spec, double lambda) {
  if (!(lambda > 0.0)) throw Error("fit requires lambda > 0");
  if (X.rows() < 2) throw Error("fit requires n >= 2");
  if (y.size() != X.rows()) throw Error("fit: y size mismatch");
  validate(spec);

  CkrrModel model;
  model.X_train = X;
  model.kernel = spec;
  model.lambda = lambda;
  model.y_bar = y.mean();
  model.K = gram_matrix(X, spec);

  Eigen::MatrixXd A = center_gram(model.K);
  // K_c is PSD, so (K_c + lambda I) has eigenvalues in [lambda, ||K_c|| +
  // lambda]; a one-norm bound gives a cheap condition estimate.
  const double norm_bound = A.cwiseAbs().colwise().sum().maxCoeff();
  if ((norm_bound + lambda) / lambda > 1e14)
    throw SolveFailure("K_c + lambda I is numerically singular (condition "
                       "estimate exceeds 1e14)");
  A.diagonal().array() += lambda;

  const Eigen::VectorXd rhs = center(y);
  Eigen::LLT<Eigen::MatrixXd> llt(A);
  if (llt.info() == Eigen::Success) {
    model.dual_coef = llt.solve(rhs);
  } else {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
    if (ldlt.info() != Eigen::Success)
      throw SolveFailure("factorization of K_c + lambda I failed");
    model.dual_coef = ldlt.solve(rhs);
  }
  return model;
}

Eigen::VectorXd predict(const CkrrModel& model, const Eigen::MatrixXd& S) {
  if (S.cols() != model.X_train.cols())
    throw Error("predict: feature dimension mismatch");
  const Eigen::MatrixXd kappa_c =
      centered_info_matrix(model.X_train, S, model.K, model.kernel);
  return (kappa_c * model.dual_coef).array() + model.y_bar;
}

double empirical_risk_analytic(const Eigen::MatrixXd& X,
                               const Eigen::VectorXd& f_values,
                               const KernelSpec& spec, double lambda,
                               double sigma2) {
  if (!(lambda > 0.0)) throw Error("empirical_risk_analytic requires lambda > 0");
  const Eigen::Index n = X.rows();
  const Eigen::MatrixXd K = gram_matrix(X, spec);
  Eigen::MatrixXd Kc = center_gram(K);

  Eigen::MatrixXd A = Kc;
  const double norm_bound = A.cwiseAbs().colwise().sum().maxCoeff();
  if ((norm_bound + lambda) / lambda > 1e14)
    throw SolveFailure("K_c + lambda I is numerically singular");
  A.diagonal().array() += lambda;

  // H = K_c (K_c + lambda I)^-1 P + (1/n) 11^T, built explicitly.
  const double inv_n = 1.0 / static_cast<double>(n);
  Eigen::MatrixXd P = Eigen::MatrixXd::Identity(n, n) -
                      inv_n * Eigen::MatrixXd::Ones(n, n);
  Eigen::LLT<Eigen::MatrixXd> llt(A);
  if (llt.info() != Eigen::Success)
    throw SolveFailure("factorization of K_c + lambda I failed");
  Eigen::MatrixXd H =
      Kc * llt.solve(P) + inv_n * Eigen::MatrixXd::Ones(n, n);

  const Eigen::VectorXd bias = H * f_values - f_values;
  return inv_n * bias.squaredNorm() + sigma2 * inv_n * H.squaredNorm();
}

McEstimate prediction_risk_mc(const Eigen::MatrixXd& X, const KernelSpec& spec,
                              double lambda, const TargetFunction& f,
                              const CovarianceModel& sigma,
                              DesignDistribution dist, double sigma2,
                              int n_test, int n_rep, std::uint64_t seed) {
  if (n_test < 1 || n_rep < 1)
    throw Error("prediction_risk_mc requires n_test >= 1 and n_rep >= 1");
  const CenteredKernelSystem system(X, spec);
  const Eigen::VectorXd f_train = apply_target(f, X);
  const double sigma_noise = std::sqrt(sigma2);
  const int n = system.n();

  Eigen::VectorXd per_rep(n_rep);
  for (int r = 0; r < n_rep; ++r) {
    const std::uint64_t rep_seed = replicate_seed(seed, r);
    Eigen::VectorXd y = f_train;
    if (sigma2 > 0.0)
      y += sigma_noise * gaussian_noise(n, derive_seed(rep_seed, kStreamNoise));
    const Eigen::VectorXd a = system.solve_dual(y, lambda);
    const Eigen::MatrixXd S =
        sample_design(n_test, sigma, dist, derive_seed(rep_seed, kStreamTest));
    const Eigen::MatrixXd kappa_c =
        centered_info_matrix(X, S, system.gram(), spec);
    const Eigen::VectorXd pred = (kappa_c * a).array() + y.mean();
    const Eigen::VectorXd truth = apply_target(f, S);
    per_rep(r) = (pred - truth).squaredNorm() / n_test;
  }

  McEstimate out;
  out.mean = per_rep.mean();
  if (n_rep > 1) {
    const double var =
        (per_rep.array() - out.mean).square().sum() / (n_rep - 1);
    out.std_error = std::sqrt(var / n_rep);
  }
  return out;
}

CenteredKernelSystem::CenteredKernelSystem(const Eigen::MatrixXd& X,
                                           const KernelSpec& spec)
    : K_(gram_matrix(X, spec)), Kc_(center_gram(K_)) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Kc_);
  if (es.info() != Eigen::Success)
    throw Error("eigendecomposition of the centered Gram matrix failed");
  V_ = es.eigenvectors();
  mu_ = es.eigenvalues();
}

Eigen::VectorXd CenteredKernelSystem::solve_dual(const Eigen::VectorXd& y,
                                                 double lambda) const {
  if (!(lambda > 0.0)) throw Error("solve_dual requires lambda > 0");
  const Eigen::VectorXd w = V_.transpose() * center(y);
  return V_ * (w.array() / (mu_.array() + lambda)).matrix();
}

double CenteredKernelSystem::train_risk_analytic(
    const Eigen::VectorXd& f_values, double lambda, double sigma2) const {
  const double inv_n = 1.0 / static_cast<double>(n());
  const Eigen::VectorXd w = V_.transpose() * center(f_values);
  // (H - I) f has eigen-coefficients -lambda / (mu + lambda) on P f, and
  // tr(H H^T) = sum (mu / (mu + lambda))^2 + 1.
  const Eigen::ArrayXd shrink = lambda / (mu_.array() + lambda);
  const double bias = (shrink.square() * w.array().square()).sum();
  const double variance =
      sigma2 * ((mu_.array() / (mu_.array() + lambda)).square().sum() + 1.0);
  return inv_n * (bias + variance);
}

double CenteredKernelSystem::smoother_trace(double lambda) const {
  const double fit_trace = (mu_.array() / (mu_.array() + lambda)).sum();
  return (fit_trace + 1.0) / static_cast<double>(n());
}

}  // namespace ckrr
