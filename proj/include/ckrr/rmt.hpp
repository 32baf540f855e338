#pragma once

#include <Eigen/Dense>

#include "ckrr/datagen.hpp"
#include "ckrr/kernels.hpp"

namespace ckrr {

/// Spectral side of a regression problem: dimensions and the covariance
/// spectrum entering the Marchenko-Pastur fixed point.
struct SpectralModel {
  int p = 0;
  int n = 0;
  double c = 0.0;  // p / n
  Eigen::VectorXd sigma_eigs;

  static SpectralModel from_covariance(const CovarianceModel& sigma, int n);
};

struct StieltjesSolution {
  double z = 0.0;
  double m = 0.0;
  int iterations = 0;
  double residual = 0.0;
};

/// z = -(lambda + nu) / g'(0).
double z_of_lambda(double lambda, const KernelScalars& scalars);

/// Same mapping, but rejects z that is non-negative or not at macroscopic
/// distance from the given empirical spectrum (eigenvalues of X^T P X / p).
double z_of_lambda_checked(double lambda, const KernelScalars& scalars,
                           const Eigen::VectorXd& spectrum);

/// Solves m = -[cz - (1/n) tr Sigma (I + m Sigma)^-1]^-1 for real z < 0 by
/// damped fixed-point iteration started at m0 = -1/(cz).
StieltjesSolution stieltjes_fixed_point(const SpectralModel& model, double z,
                                        double tol = 1e-12,
                                        int max_iter = 10000,
                                        double m0 = 0.0);

/// Identity-covariance closed form
///   m = [-(cz - c + 1) - sqrt((cz - c - 1)^2 - 4c)] / (2cz),
/// valid for z < 0; throws BranchViolation when the result is not positive.
double stieltjes_identity_closed_form(double c, double z);

/// Empirical estimate (1/p) tr (X X^T / p - z I_n)^-1.
double empirical_stieltjes(const Eigen::MatrixXd& X, double z);

/// Eigenvalues of X X^T / p (all n of them, zeros included), computed from
/// the smaller Gram side. Ascending.
Eigen::VectorXd design_gram_spectrum(const Eigen::MatrixXd& X);

/// Same estimate from a precomputed spectrum; used by z sweeps.
double empirical_stieltjes_from_eigs(const Eigen::VectorXd& gram_eigs, int p,
                                     double z);

/// Companion estimate (1/p) tr (X^T X / p - z I_p)^-1 (p x p trace). Kept
/// for the convention cross-check in the validation report.
double empirical_stieltjes_companion(const Eigen::MatrixXd& X, double z);

/// (X^T P X / p - z I_p)^-1; symmetric, defined for every z < 0.
Eigen::MatrixXd feature_resolvent(const Eigen::MatrixXd& X, double z);

/// First-order expansion of the Gram matrix around the rank-one bulk:
///   [g(0) + g''(0) tr(Sigma^2) / (2 p^2)] 11^T + g'(0) X X^T / p + nu I.
Eigen::MatrixXd kernel_linearization(const Eigen::MatrixXd& X,
                                     const KernelSpec& spec,
                                     const CovarianceModel& sigma);

}  // namespace ckrr
