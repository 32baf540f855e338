#include "ckrr/estimators.hpp"

#include <cmath>

#include "ckrr/rmt.hpp"

namespace ckrr {

namespace {

double sample_variance(const Eigen::VectorXd& y, VarYDivisor divisor) {
  const double n = static_cast<double>(y.size());
  const double ss = (y.array() - y.mean()).square().sum();
  return divisor == VarYDivisor::n ? ss / n : ss / (n - 1.0);
}

}  // namespace

RatioEstimate ratio_risk_estimate(double r_train_emp, double m_hat,
                                  const EstimatorInputs& in) {
  if (!(in.lambda > 0.0)) throw Error("ratio_risk_estimate: lambda > 0");
  if (m_hat == 0.0) throw Error("ratio_risk_estimate: m_hat must be nonzero");
  const double k = in.c * in.lambda * m_hat / in.g0p;
  RatioEstimate out;
  out.instability_warning = k < 1e-3;
  const double inv = 1.0 / k;
  out.value = inv * inv * r_train_emp -
              in.sigma2 * (inv - 1.0) * (inv - 1.0);
  return out;
}

RiskEstimatorWorkspace::RiskEstimatorWorkspace(const Eigen::MatrixXd& X,
                                               const Eigen::VectorXd& y,
                                               VarYDivisor divisor)
    : n_(static_cast<int>(X.rows())), p_(static_cast<int>(X.cols())) {
  if (y.size() != X.rows()) throw Error("estimator workspace: size mismatch");
  if (n_ < 2) throw Error("estimator workspace: n >= 2 required");
  var_y_ = sample_variance(y, divisor);

  const Eigen::VectorXd py = (y.array() - y.mean()).matrix();
  const Eigen::VectorXd xtpy = X.transpose() * py;
  quad_a_ = xtpy.squaredNorm() / static_cast<double>(n_);

  gram_eigs_ = design_gram_spectrum(X);

  const Eigen::MatrixXd Xc = X.rowwise() - X.colwise().mean();
  const Eigen::MatrixXd M = (Xc.transpose() * Xc) / static_cast<double>(p_);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  if (es.info() != Eigen::Success)
    throw Error("eigendecomposition of X^T P X / p failed");
  centered_eigs_ = es.eigenvalues();
  w_ = es.eigenvectors().transpose() * xtpy;
}

double RiskEstimatorWorkspace::m_hat(double z) const {
  return empirical_stieltjes_from_eigs(gram_eigs_, p_, z);
}

double RiskEstimatorWorkspace::resolvent_estimate(double z, double c,
                                                  double sigma2) const {
  if (!(z < 0.0)) throw Error("resolvent_estimate requires z < 0");
  const double m = m_hat(z);
  // z Qt^2 - Qt has eigenvalues (2z - d) / (d - z)^2.
  const Eigen::ArrayXd gap = centered_eigs_.array() - z;
  const double quad =
      (w_.array().square() * (2.0 * z - centered_eigs_.array()) /
       gap.square())
          .sum() /
      (static_cast<double>(n_) * static_cast<double>(p_));
  const double prefactor = 1.0 / (c * z * m * c * z * m);
  return prefactor * (quad + var_y_) - sigma2;
}

double resolvent_identity_from_scalars(double quad_a, double var_y,
                                       double m_hat, int n, int p,
                                       double sigma2) {
  const double one_plus = (1.0 + m_hat) * (1.0 + m_hat);
  const double denominator = n * one_plus - p * m_hat * m_hat;
  if (!(denominator > 0.0))
    throw DenominatorNonPositive(
        "identity estimator denominator is non-positive: " +
        std::to_string(denominator));
  return (n * one_plus * var_y -
          m_hat * (2.0 + m_hat) * (quad_a - p * var_y)) /
             denominator -
         sigma2;
}

double RiskEstimatorWorkspace::resolvent_estimate_identity(
    double z, double c, double sigma2) const {
  (void)c;
  return resolvent_identity_from_scalars(quad_a_, var_y_, m_hat(z), n_, p_,
                                         sigma2);
}

double resolvent_risk_estimate(const EstimatorInputs& in) {
  const RiskEstimatorWorkspace ws(in.X, in.y, in.var_divisor);
  return ws.resolvent_estimate(in.z, in.c, in.sigma2);
}

double resolvent_risk_estimate_identity(const EstimatorInputs& in,
                                        double m_hat) {
  const double n = static_cast<double>(in.X.rows());
  const Eigen::VectorXd py = (in.y.array() - in.y.mean()).matrix();
  const double quad_a = (in.X.transpose() * py).squaredNorm() / n;
  const double var_y = sample_variance(in.y, in.var_divisor);
  return resolvent_identity_from_scalars(quad_a, var_y, m_hat,
                                         static_cast<int>(in.X.rows()),
                                         static_cast<int>(in.X.cols()),
                                         in.sigma2);
}

}  // namespace ckrr
