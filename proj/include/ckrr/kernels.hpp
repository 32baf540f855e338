#pragma once

#include <Eigen/Dense>
#include <string>

#include "ckrr/errors.hpp"

namespace ckrr {

enum class KernelFamily { linear, polynomial, sigmoid, exponential };

std::string to_string(KernelFamily family);
KernelFamily kernel_family_from_string(const std::string& name);

/// Inner-product kernel k(x, x') = g(x^T x' / p), with g selected by the
/// family:
///   linear       g(u) = alpha*u + beta
///   polynomial   g(u) = (alpha*u + beta)^degree
///   sigmoid      g(u) = tanh(alpha*u + beta)
///   exponential  g(u) = exp(alpha*u + beta)
struct KernelSpec {
  KernelFamily family = KernelFamily::linear;
  double alpha = 1.0;
  double beta = 0.0;
  int degree = 1;    // polynomial only
  std::string name;  // label for reports; empty means the family name

  std::string label() const { return name.empty() ? to_string(family) : name; }
};

KernelSpec make_kernel(KernelFamily family, double alpha, double beta,
                       int degree = 1);

/// Throws DegenerateKernel if g'(0) = 0 and Error on malformed parameters
/// (e.g. polynomial degree < 1).
void validate(const KernelSpec& spec);

/// Scalar quantities of g used throughout the risk formulas.
/// nu = g(tau) - g(0) - tau*g'(0) holds by construction.
struct KernelScalars {
  double g0 = 0.0;    // g(0)
  double g0p = 0.0;   // g'(0)
  double g0pp = 0.0;  // g''(0)
  double g_tau = 0.0;
  double nu = 0.0;
  double tau = 0.0;
};

double eval_g(const KernelSpec& spec, double u);

/// Closed-form derivatives at 0 plus g(tau); requires tau > 0.
KernelScalars kernel_scalars(const KernelSpec& spec, double tau);

/// K_ij = g(x_i^T x_j / p) for the rows of X. Symmetric by construction.
Eigen::MatrixXd gram_matrix(const Eigen::MatrixXd& X, const KernelSpec& spec);

/// K_c = P K P with P = I - (1/n) 1 1^T. Rows and columns of the result
/// sum to zero and centering is idempotent.
Eigen::MatrixXd center_gram(const Eigen::MatrixXd& K);

/// Centered information vector kappa_c(s) = P kappa(s) - (1/n) P K 1,
/// where kappa(s)_i = g(x_i^T s / p) and K is the Gram matrix of X.
Eigen::VectorXd centered_info_vector(const Eigen::MatrixXd& X,
                                     const Eigen::VectorXd& s,
                                     const Eigen::MatrixXd& K,
                                     const KernelSpec& spec);

/// Batch version: row j holds kappa_c(S.row(j))^T. Shape m x n.
Eigen::MatrixXd centered_info_matrix(const Eigen::MatrixXd& X,
                                     const Eigen::MatrixXd& S,
                                     const Eigen::MatrixXd& K,
                                     const KernelSpec& spec);

}  // namespace ckrr
