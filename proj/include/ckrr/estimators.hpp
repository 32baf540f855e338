#pragma once

#include <Eigen/Dense>

#include "ckrr/errors.hpp"

namespace ckrr {

enum class VarYDivisor { n, n_minus_1 };

/// Operands of the training-data risk estimators.
struct EstimatorInputs {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  double z = 0.0;
  double c = 0.0;       // p / n
  double lambda = 0.0;
  double g0p = 0.0;     // g'(0)
  double sigma2 = 0.0;
  VarYDivisor var_divisor = VarYDivisor::n;
};

struct RatioEstimate {
  double value = 0.0;
  /// Set when c lambda m_hat / g'(0) < 1e-3; the estimate is returned but
  /// is known to be unreliable at small lambda.
  bool instability_warning = false;
};

/// Test-risk estimate obtained by rescaling an empirical-risk value:
///   (c lambda m_hat / g'(0))^-2 r_train - sigma2 (g'(0)/(c lambda m_hat) - 1)^2.
RatioEstimate ratio_risk_estimate(double r_train_emp, double m_hat,
                                  const EstimatorInputs& in);

/// Resolvent-based estimate, fully data-driven:
///   (1/(c z m_hat)^2) [ (1/(np)) y^T P X (z Qt^2 - Qt) X^T P y + var(y) ]
///     - sigma2,
/// with Qt = (X^T P X / p - z I)^-1 and m_hat = (1/p) tr(X X^T/p - z I)^-1.
double resolvent_risk_estimate(const EstimatorInputs& in);

/// Identity-covariance form (no matrix inversion):
///   [n (1+m)^2 var(y) - m (2+m) (A - p var(y))] / [n (1+m)^2 - p m^2]
///     - sigma2,  with A = y^T P (X X^T / n) P y.
double resolvent_risk_estimate_identity(const EstimatorInputs& in,
                                        double m_hat);

/// Scalar core of the identity-covariance form; exposed for the tuning
/// objective. Throws DenominatorNonPositive when n (1+m)^2 <= p m^2.
double resolvent_identity_from_scalars(double quad_a, double var_y,
                                       double m_hat, int n, int p,
                                       double sigma2);

/// Precomputed spectral data for one (X, y) pair: supports O(p) evaluation
/// of m_hat and both estimators across a z sweep.
class RiskEstimatorWorkspace {
 public:
  RiskEstimatorWorkspace(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                         VarYDivisor divisor = VarYDivisor::n);

  int n() const { return n_; }
  int p() const { return p_; }
  double var_y() const { return var_y_; }
  /// y^T P (X X^T / n) P y.
  double quad_a() const { return quad_a_; }

  /// (1/p) tr (X X^T / p - z I_n)^-1.
  double m_hat(double z) const;
  double resolvent_estimate(double z, double c, double sigma2) const;
  double resolvent_estimate_identity(double z, double c, double sigma2) const;

 private:
  int n_ = 0;
  int p_ = 0;
  double var_y_ = 0.0;
  double quad_a_ = 0.0;
  Eigen::VectorXd gram_eigs_;      // eigenvalues of X X^T / p
  Eigen::VectorXd centered_eigs_;  // eigenvalues of X^T P X / p
  Eigen::VectorXd w_;              // eigen-coefficients of X^T P y
};

}  // namespace ckrr
