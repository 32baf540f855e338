#include "ckrr/kernels.hpp"

#include <cmath>

namespace ckrr {

namespace {

// Integer power; pow(0, 0) = 1 by convention, which matters for
// polynomial derivative formulas with beta = 0.
double ipow(double base, int exponent) {
  double result = 1.0;
  for (int i = 0; i < exponent; ++i) result *= base;
  return result;
}

double g_prime_at_zero(const KernelSpec& spec) {
  switch (spec.family) {
    case KernelFamily::linear:
      return spec.alpha;
    case KernelFamily::polynomial:
      return spec.degree * spec.alpha * ipow(spec.beta, spec.degree - 1);
    case KernelFamily::sigmoid: {
      const double t = std::tanh(spec.beta);
      return spec.alpha * (1.0 - t * t);
    }
    case KernelFamily::exponential:
      return spec.alpha * std::exp(spec.beta);
  }
  return 0.0;
}

double g_second_at_zero(const KernelSpec& spec) {
  switch (spec.family) {
    case KernelFamily::linear:
      return 0.0;
    case KernelFamily::polynomial:
      return spec.degree * (spec.degree - 1) * spec.alpha * spec.alpha *
             ipow(spec.beta, spec.degree - 2);
    case KernelFamily::sigmoid: {
      const double t = std::tanh(spec.beta);
      return -2.0 * spec.alpha * spec.alpha * t * (1.0 - t * t);
    }
    case KernelFamily::exponential:
      return spec.alpha * spec.alpha * std::exp(spec.beta);
  }
  return 0.0;
}

}  // namespace

std::string to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::linear:
      return "linear";
    case KernelFamily::polynomial:
      return "polynomial";
    case KernelFamily::sigmoid:
      return "sigmoid";
    case KernelFamily::exponential:
      return "exponential";
  }
  return "unknown";
}

KernelFamily kernel_family_from_string(const std::string& name) {
  if (name == "linear") return KernelFamily::linear;
  if (name == "polynomial") return KernelFamily::polynomial;
  if (name == "sigmoid") return KernelFamily::sigmoid;
  if (name == "exponential") return KernelFamily::exponential;
  throw Error("unknown kernel family: " + name);
}

KernelSpec make_kernel(KernelFamily family, double alpha, double beta,
                       int degree) {
  KernelSpec spec;
  spec.family = family;
  spec.alpha = alpha;
  spec.beta = beta;
  spec.degree = degree;
  validate(spec);
  return spec;
}

void validate(const KernelSpec& spec) {
  if (!std::isfinite(spec.alpha) || !std::isfinite(spec.beta))
    throw Error("kernel parameters must be finite");
  if (spec.family == KernelFamily::polynomial && spec.degree < 1)
    throw Error("polynomial kernel requires degree >= 1");
  if (g_prime_at_zero(spec) == 0.0)
    throw DegenerateKernel("kernel has g'(0) = 0 (" + spec.label() + ")");
}

double eval_g(const KernelSpec& spec, double u) {
  const double v = spec.alpha * u + spec.beta;
  switch (spec.family) {
    case KernelFamily::linear:
      return v;
    case KernelFamily::polynomial:
      return ipow(v, spec.degree);
    case KernelFamily::sigmoid:
      return std::tanh(v);
    case KernelFamily::exponential:
      return std::exp(v);
  }
  return 0.0;
}

KernelScalars kernel_scalars(const KernelSpec& spec, double tau) {
  if (!(tau > 0.0)) throw Error("kernel_scalars requires tau > 0");
  KernelScalars s;
  s.tau = tau;
  s.g0 = eval_g(spec, 0.0);
  s.g0p = g_prime_at_zero(spec);
  s.g0pp = g_second_at_zero(spec);
  s.g_tau = eval_g(spec, tau);
  s.nu = s.g_tau - s.g0 - tau * s.g0p;
  if (s.g0p == 0.0)
    throw DegenerateKernel("kernel has g'(0) = 0 (" + spec.label() + ")");
  return s;
}

Eigen::MatrixXd gram_matrix(const Eigen::MatrixXd& X, const KernelSpec& spec) {
  const Eigen::Index n = X.rows();
  const double p = static_cast<double>(X.cols());
  Eigen::MatrixXd inner = (X * X.transpose()) / p;
  Eigen::MatrixXd K(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i <= j; ++i) {
      const double value = eval_g(spec, inner(i, j));
      K(i, j) = value;
      K(j, i) = value;
    }
  }
  return K;
}

Eigen::MatrixXd center_gram(const Eigen::MatrixXd& K) {
  // P K P expanded to avoid forming P: K - r1^T - 1c^T + m 11^T with
  // r = row means, c = column means, m = grand mean.
  const Eigen::VectorXd row_means = K.rowwise().mean();
  const Eigen::RowVectorXd col_means = K.colwise().mean();
  const double grand_mean = K.mean();
  Eigen::MatrixXd Kc = K;
  Kc.colwise() -= row_means;
  Kc.rowwise() -= col_means;
  Kc.array() += grand_mean;
  return Kc;
}

Eigen::VectorXd centered_info_vector(const Eigen::MatrixXd& X,
                                     const Eigen::VectorXd& s,
                                     const Eigen::MatrixXd& K,
                                     const KernelSpec& spec) {
  const double p = static_cast<double>(X.cols());
  Eigen::VectorXd kappa = (X * s) / p;
  for (Eigen::Index i = 0; i < kappa.size(); ++i)
    kappa(i) = eval_g(spec, kappa(i));
  // P kappa - (1/n) P K 1: center kappa, then subtract centered row means.
  const Eigen::VectorXd k_rowmean = K.rowwise().mean();
  Eigen::VectorXd out = kappa.array() - kappa.mean();
  out -= (k_rowmean.array() - k_rowmean.mean()).matrix();
  return out;
}

Eigen::MatrixXd centered_info_matrix(const Eigen::MatrixXd& X,
                                     const Eigen::MatrixXd& S,
                                     const Eigen::MatrixXd& K,
                                     const KernelSpec& spec) {
  const double p = static_cast<double>(X.cols());
  Eigen::MatrixXd kappa = (S * X.transpose()) / p;  // m x n
  for (Eigen::Index j = 0; j < kappa.cols(); ++j)
    for (Eigen::Index i = 0; i < kappa.rows(); ++i)
      kappa(i, j) = eval_g(spec, kappa(i, j));
  const Eigen::VectorXd k_rowmean = K.rowwise().mean();
  const Eigen::RowVectorXd centered_rowmean =
      (k_rowmean.array() - k_rowmean.mean()).matrix().transpose();
  Eigen::MatrixXd out = kappa.colwise() - kappa.rowwise().mean();
  out.rowwise() -= centered_rowmean;
  return out;
}

}  // namespace ckrr
