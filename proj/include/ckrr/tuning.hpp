#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ckrr/estimators.hpp"
#include "ckrr/kernels.hpp"

namespace ckrr {

struct TuningResult {
  double m_star = 0.0;
  double z_star = 0.0;
  /// Kernel label -> lambda realizing z_star; nullopt when no positive
  /// lambda exists for that kernel.
  std::map<std::string, std::optional<double>> lambda_star_per_kernel;
  /// Estimated test risk at z_star; a single scalar shared by every
  /// reachable kernel.
  double r_test_at_optimum = 0.0;
  bool used_grid_fallback = false;
  bool non_unimodal = false;
};

/// Closed-form minimizer of the identity-covariance risk-estimate objective
/// over m > 0, with A = y^T P (X X^T / n) P y and var_y = var(y). The
/// returned value is post-validated against the stationarity equation
///   p var_y [p m^2 + n (1+m)^2] = A (n + n m + p m^2).
/// Throws NegativeRadicand when the quadratic has no real root (callers
/// fall back to a grid search) and NonPositiveM when no positive
/// stationary point exists.
double optimal_m_identity(double A, double var_y, int n, int p);

/// Identity-covariance objective at a free m (sigma2 omitted; it shifts the
/// objective uniformly). Used by the grid-search fallback and as the
/// oracle for the closed form.
double tuning_objective_identity(double m, double A, double var_y, int n,
                                 int p);

/// Grid + golden-section minimizer of the identity objective over
/// m in (0, m_max]; fallback path when the closed form fails.
double optimal_m_identity_grid(double A, double var_y, int n, int p,
                               int grid_points = 10000, double m_max = 20.0);

/// Inverts z -> m_hat(z) by bisection on [-z_max, -z_min]; m_hat is
/// strictly increasing in z on the negative axis.
double find_z_for_m(const Eigen::MatrixXd& X, double m_target,
                    double z_min = 1e-6, double z_max = 1e4,
                    double tol = 1e-10);

double find_z_for_m_from_eigs(const Eigen::VectorXd& gram_eigs, int p,
                              double m_target, double z_min = 1e-6,
                              double z_max = 1e4, double tol = 1e-10);

/// lambda = -z g'(0) - nu; throws Unreachable when the result is not
/// positive (the kernel cannot realize this z).
double lambda_from_z(double z, const KernelScalars& scalars);

/// 1-D minimization of the resolvent risk estimate over z in [z_lo, z_hi]
/// (both negative): 64-point log-grid scan to localize the basin, then
/// golden-section refinement. kernels/tau feed the per-kernel lambda map.
TuningResult optimize_z_general(const Eigen::MatrixXd& X,
                                const Eigen::VectorXd& y, double sigma2,
                                double z_lo, double z_hi,
                                const std::vector<KernelSpec>& kernels,
                                double tau,
                                VarYDivisor divisor = VarYDivisor::n);

}  // namespace ckrr
