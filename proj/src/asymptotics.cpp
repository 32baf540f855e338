#include "ckrr/asymptotics.hpp"

#include <cmath>

namespace ckrr {

FunctionMoments sin_moments(const CovarianceModel& sigma, int p) {
  const double s2 =
      Eigen::VectorXd::Ones(p).dot(sigma.matrix() * Eigen::VectorXd::Ones(p)) /
      static_cast<double>(p);
  FunctionMoments mom;
  mom.e_f = 0.0;
  mom.e_grad = Eigen::VectorXd::Constant(
      p, std::exp(-0.5 * s2) / std::sqrt(static_cast<double>(p)));
  mom.var_f = 0.5 * (1.0 - std::exp(-2.0 * s2));
  return mom;
}

McMoments mc_moments(const TargetFunction& f, const CovarianceModel& sigma,
                     int n_samples, std::uint64_t seed) {
  if (n_samples < 100) throw Error("mc_moments requires n_samples >= 100");
  const int p = sigma.dim();
  const Eigen::MatrixXd X = sample_design(
      n_samples, sigma, DesignDistribution::gaussian, seed);

  Eigen::VectorXd values(n_samples);
  Eigen::VectorXd grad_sum = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd grad_sq_sum = Eigen::VectorXd::Zero(p);
  for (int i = 0; i < n_samples; ++i) {
    values(i) = f.value(X.row(i));
    const Eigen::VectorXd g = f.gradient(X.row(i));
    grad_sum += g;
    grad_sq_sum += g.cwiseProduct(g);
  }

  McMoments out;
  out.moments.e_f = values.mean();
  const Eigen::ArrayXd centered = values.array() - out.moments.e_f;
  out.moments.var_f = centered.square().sum() / (n_samples - 1);
  out.moments.e_grad = grad_sum / n_samples;

  out.se_e_f = std::sqrt(out.moments.var_f / n_samples);
  // SE of the sample variance via the fourth central moment.
  const double m4 = centered.square().square().sum() / n_samples;
  const double var_of_var =
      (m4 - out.moments.var_f * out.moments.var_f) / n_samples;
  out.se_var_f = std::sqrt(std::max(var_of_var, 0.0));
  const Eigen::ArrayXd grad_var =
      (grad_sq_sum.array() - n_samples * out.moments.e_grad.array().square()) /
      (n_samples - 1);
  out.se_e_grad_max =
      std::sqrt(grad_var.maxCoeff() / n_samples);
  return out;
}

namespace {

/// Shared ratio of the limiting risks, computed in the Sigma eigenbasis.
double risk_ratio(const FunctionMoments& mom, const CovarianceModel& sigma,
                  int n, double sigma2, double m_z) {
  const Eigen::ArrayXd d = sigma.eigenvalues().array();
  const Eigen::ArrayXd denom1 = 1.0 + m_z * d;
  const double trace_term = (d.square() / denom1.square()).sum();
  const double denominator = n - m_z * m_z * trace_term;
  if (!(denominator > 0.0))
    throw DenominatorNonPositive(
        "risk-limit denominator is non-positive: " +
        std::to_string(denominator));

  const Eigen::ArrayXd b =
      (sigma.eigenvectors().transpose() * mom.e_grad).array();
  const double quad =
      (b.square() * d.square() * (1.0 / denom1 + 1.0 / denom1.square())).sum();
  const double numerator = n * (sigma2 + mom.var_f) - n * m_z * quad;
  return numerator / denominator;
}

}  // namespace

double limit_test_risk(const FunctionMoments& mom, const CovarianceModel& sigma,
                       int n, int p, double sigma2, double m_z) {
  if (mom.e_grad.size() != p || sigma.dim() != p)
    throw Error("limit_test_risk: dimension mismatch");
  return risk_ratio(mom, sigma, n, sigma2, m_z) - sigma2;
}

double limit_train_risk(const FunctionMoments& mom,
                        const CovarianceModel& sigma, int n, int p,
                        double sigma2, double m_z, double c, double lambda,
                        double g0p) {
  if (!(lambda > 0.0) || g0p == 0.0)
    throw Error("limit_train_risk requires lambda > 0 and g'(0) != 0");
  if (mom.e_grad.size() != p || sigma.dim() != p)
    throw Error("limit_train_risk: dimension mismatch");
  const double k = c * lambda * m_z / g0p;
  return k * k * risk_ratio(mom, sigma, n, sigma2, m_z) + sigma2 -
         2.0 * sigma2 * k;
}

RiskLimits limit_risks_identity(const FunctionMoments& mom, int n, int p,
                                double sigma2, double m_z, double c,
                                double lambda, double g0p) {
  const double one_plus = (1.0 + m_z) * (1.0 + m_z);
  const double denominator = n * one_plus - p * m_z * m_z;
  if (!(denominator > 0.0))
    throw DenominatorNonPositive(
        "identity risk-limit denominator is non-positive: " +
        std::to_string(denominator));
  const double grad_sq = mom.e_grad.squaredNorm();
  const double ratio = (n * one_plus * (sigma2 + mom.var_f) -
                        n * m_z * (2.0 + m_z) * grad_sq) /
                       denominator;
  const double k = c * lambda * m_z / g0p;
  RiskLimits out;
  out.m_z = m_z;
  out.r_test_inf = ratio - sigma2;
  out.r_train_inf = k * k * ratio + sigma2 - 2.0 * sigma2 * k;
  return out;
}

double test_risk_from_train_risk(double r_train_inf, double c, double lambda,
                                 double m_z, double g0p, double sigma2) {
  if (!(lambda > 0.0)) throw Error("test_risk_from_train_risk: lambda > 0");
  if (m_z == 0.0) throw Error("test_risk_from_train_risk: m_z must be nonzero");
  const double k = c * lambda * m_z / g0p;
  const double inv = 1.0 / k;
  return inv * inv * r_train_inf - sigma2 * (inv - 1.0) * (inv - 1.0);
}

}  // namespace ckrr
