#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "ckrr/datagen.hpp"
#include "ckrr/kernels.hpp"

namespace ckrr {

/// Fitted centered kernel ridge regressor. Predictions are
/// kappa_c(s)^T dual_coef + y_bar with dual_coef = (K_c + lambda I)^-1 P y.
struct CkrrModel {
  Eigen::MatrixXd X_train;
  Eigen::VectorXd dual_coef;
  double y_bar = 0.0;
  double lambda = 0.0;
  KernelSpec kernel;
  Eigen::MatrixXd K;  // cached Gram matrix of the training inputs
};

/// Solves (K_c + lambda I) a = P y with a Cholesky factorization, falling
/// back to LDLT. Throws SolveFailure when the system is numerically
/// singular.
CkrrModel fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
              const KernelSpec& spec, double lambda);

Eigen::VectorXd predict(const CkrrModel& model, const Eigen::MatrixXd& S);

/// In-sample risk against the noiseless target values, with the expectation
/// over Gaussian training noise taken in closed form through the linear
/// smoother H = K_c (K_c + lambda I)^-1 P + (1/n) 11^T:
///   (1/n) ||(H - I) f||^2 + (sigma2/n) tr(H H^T).
double empirical_risk_analytic(const Eigen::MatrixXd& X,
                               const Eigen::VectorXd& f_values,
                               const KernelSpec& spec, double lambda,
                               double sigma2);

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

/// Monte Carlo prediction risk: with X held fixed, each replicate redraws
/// the training noise (refit) and a fresh test set of n_test points, and
/// averages (f_hat(s) - f(s))^2.
McEstimate prediction_risk_mc(const Eigen::MatrixXd& X, const KernelSpec& spec,
                              double lambda, const TargetFunction& f,
                              const CovarianceModel& sigma,
                              DesignDistribution dist, double sigma2,
                              int n_test, int n_rep, std::uint64_t seed);

/// Eigendecomposition of the centered Gram matrix for one (X, kernel)
/// pair; amortizes lambda sweeps. All methods are const and thread-safe.
class CenteredKernelSystem {
 public:
  CenteredKernelSystem(const Eigen::MatrixXd& X, const KernelSpec& spec);

  const Eigen::MatrixXd& gram() const { return K_; }
  const Eigen::MatrixXd& centered_gram() const { return Kc_; }
  const Eigen::VectorXd& eigenvalues() const { return mu_; }
  int n() const { return static_cast<int>(K_.rows()); }

  /// (K_c + lambda I)^-1 P y.
  Eigen::VectorXd solve_dual(const Eigen::VectorXd& y, double lambda) const;

  /// Same closed-form risk as empirical_risk_analytic, through the
  /// eigenbasis.
  double train_risk_analytic(const Eigen::VectorXd& f_values, double lambda,
                             double sigma2) const;

  /// (1/n) tr H for the smoother at this lambda.
  double smoother_trace(double lambda) const;

 private:
  Eigen::MatrixXd K_;
  Eigen::MatrixXd Kc_;
  Eigen::MatrixXd V_;   // eigenvectors of K_c
  Eigen::VectorXd mu_;  // eigenvalues of K_c, ascending
};

}  // namespace ckrr
