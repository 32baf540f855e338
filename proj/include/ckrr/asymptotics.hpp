#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <limits>

#include "ckrr/datagen.hpp"

namespace ckrr {

/// Moments of the target under x ~ N(0, Sigma): E[grad f], var f, E f.
struct FunctionMoments {
  Eigen::VectorXd e_grad;
  double var_f = 0.0;
  double e_f = 0.0;
};

/// Analytic moments for f(x) = sin(1^T x / sqrt(p)). With
/// s2 = 1^T Sigma 1 / p:
///   E f = 0, E[grad f] = exp(-s2/2) (1/sqrt(p)) 1,
///   var f = (1 - exp(-2 s2)) / 2.
FunctionMoments sin_moments(const CovarianceModel& sigma, int p);

struct McMoments {
  FunctionMoments moments;
  double se_e_f = 0.0;
  double se_var_f = 0.0;
  double se_e_grad_max = 0.0;  // largest per-coordinate standard error
};

/// Sample moments over n_samples Gaussian draws.
McMoments mc_moments(const TargetFunction& f, const CovarianceModel& sigma,
                     int n_samples, std::uint64_t seed);

struct RiskLimits {
  double r_train_inf = 0.0;
  double r_test_inf = 0.0;
  double m_z = 0.0;
  double z = std::numeric_limits<double>::quiet_NaN();
};

/// Deterministic limit of the prediction risk:
///   [n s2 + n var_f - n m E[grad]^T S ((I+mS)^-1 + (I+mS)^-2) S E[grad]]
///     / [n - m^2 tr S^2 (I+mS)^-2]  -  s2,
/// evaluated in the eigenbasis of Sigma. Throws DenominatorNonPositive
/// when the denominator is not positive.
double limit_test_risk(const FunctionMoments& mom, const CovarianceModel& sigma,
                       int n, int p, double sigma2, double m_z);

/// Deterministic limit of the empirical risk:
///   (c lambda m / g'(0))^2 * [same ratio] + s2 - 2 s2 c lambda m / g'(0).
double limit_train_risk(const FunctionMoments& mom,
                        const CovarianceModel& sigma, int n, int p,
                        double sigma2, double m_z, double c, double lambda,
                        double g0p);

/// Identity-covariance simplification of both limits, using ||E[grad]||^2
/// and the (1+m)^2 algebra. Denominator n (1+m)^2 - p m^2 must be positive.
RiskLimits limit_risks_identity(const FunctionMoments& mom, int n, int p,
                                double sigma2, double m_z, double c,
                                double lambda, double g0p);

/// Test limit recovered from the train limit:
///   (c lambda m / g'(0))^-2 r_train - s2 (g'(0) / (c lambda m) - 1)^2.
double test_risk_from_train_risk(double r_train_inf, double c, double lambda,
                                 double m_z, double g0p, double sigma2);

}  // namespace ckrr
