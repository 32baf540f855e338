#include "ckrr/rmt.hpp"

#include <algorithm>
#include <cmath>

namespace ckrr {

SpectralModel SpectralModel::from_covariance(const CovarianceModel& sigma,
                                             int n) {
  SpectralModel model;
  model.p = sigma.dim();
  model.n = n;
  model.c = static_cast<double>(model.p) / static_cast<double>(n);
  model.sigma_eigs = sigma.eigenvalues();
  return model;
}

double z_of_lambda(double lambda, const KernelScalars& scalars) {
  if (scalars.g0p == 0.0) throw DegenerateKernel("g'(0) = 0");
  return -(lambda + scalars.nu) / scalars.g0p;
}

double z_of_lambda_checked(double lambda, const KernelScalars& scalars,
                           const Eigen::VectorXd& spectrum) {
  const double z = z_of_lambda(lambda, scalars);
  if (!(z < 0.0))
    throw SupportViolation("z = " + std::to_string(z) +
                           " is not on the negative real axis");
  const double lo = spectrum.minCoeff();
  const double hi = spectrum.maxCoeff();
  const double margin = 0.01 * std::max(hi - lo, 1e-12);
  if (z >= lo - margin - 1e-6)
    throw SupportViolation("z = " + std::to_string(z) +
                           " is within the safety margin of the empirical "
                           "spectrum [" + std::to_string(lo) + ", " +
                           std::to_string(hi) + "]");
  return z;
}

StieltjesSolution stieltjes_fixed_point(const SpectralModel& model, double z,
                                        double tol, int max_iter, double m0) {
  if (!(z < 0.0)) throw Error("stieltjes_fixed_point requires z < 0");
  if (!(tol > 0.0)) throw Error("stieltjes_fixed_point requires tol > 0");
  const double c = model.c;
  const double inv_n = 1.0 / static_cast<double>(model.n);
  const auto& eigs = model.sigma_eigs;

  const auto step = [&](double m) {
    const double trace = (eigs.array() / (1.0 + m * eigs.array())).sum();
    return -1.0 / (c * z - inv_n * trace);
  };
  const auto residual_of = [&](double m) { return std::abs(step(m) - m); };

  double m = (m0 == 0.0) ? -1.0 / (c * z) : m0;
  double res = residual_of(m);
  for (int it = 1; it <= max_iter; ++it) {
    double candidate = step(m);
    double cand_res = residual_of(candidate);
    if (cand_res > res) {
      candidate = m + 0.5 * (candidate - m);
      cand_res = residual_of(candidate);
    }
    m = candidate;
    res = cand_res;
    if (res <= tol) return {z, m, it, res};
  }
  throw NoConvergence("stieltjes_fixed_point: residual " +
                      std::to_string(res) + " after " +
                      std::to_string(max_iter) + " iterations");
}

double stieltjes_identity_closed_form(double c, double z) {
  if (!(z < 0.0))
    throw Error("stieltjes_identity_closed_form requires z < 0");
  const double cz = c * z;
  const double disc = (cz - c - 1.0) * (cz - c - 1.0) - 4.0 * c;
  if (disc < 0.0)
    throw BranchViolation("negative discriminant at c = " + std::to_string(c) +
                          ", z = " + std::to_string(z));
  const double m = (-(cz - c + 1.0) - std::sqrt(disc)) / (2.0 * cz);
  if (!(m > 0.0))
    throw BranchViolation("closed-form branch gave m = " + std::to_string(m));
  return m;
}

Eigen::VectorXd design_gram_spectrum(const Eigen::MatrixXd& X) {
  const Eigen::Index n = X.rows();
  const Eigen::Index p = X.cols();
  Eigen::VectorXd eigs = Eigen::VectorXd::Zero(n);
  if (n <= p) {
    Eigen::MatrixXd G = (X * X.transpose()) / static_cast<double>(p);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G,
                                                      Eigen::EigenvaluesOnly);
    eigs = es.eigenvalues();
  } else {
    Eigen::MatrixXd G = (X.transpose() * X) / static_cast<double>(p);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G,
                                                      Eigen::EigenvaluesOnly);
    // X X^T / p shares the nonzero spectrum and has n - p extra zeros.
    eigs.tail(p) = es.eigenvalues();
  }
  std::sort(eigs.data(), eigs.data() + eigs.size());
  return eigs;
}

double empirical_stieltjes_from_eigs(const Eigen::VectorXd& gram_eigs, int p,
                                     double z) {
  if (!(z < 0.0)) throw Error("empirical_stieltjes requires z < 0");
  return (gram_eigs.array() - z).inverse().sum() / static_cast<double>(p);
}

double empirical_stieltjes(const Eigen::MatrixXd& X, double z) {
  return empirical_stieltjes_from_eigs(design_gram_spectrum(X),
                                       static_cast<int>(X.cols()), z);
}

double empirical_stieltjes_companion(const Eigen::MatrixXd& X, double z) {
  if (!(z < 0.0)) throw Error("empirical_stieltjes requires z < 0");
  const Eigen::Index p = X.cols();
  Eigen::MatrixXd G = (X.transpose() * X) / static_cast<double>(p);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G, Eigen::EigenvaluesOnly);
  return (es.eigenvalues().array() - z).inverse().sum() /
         static_cast<double>(p);
}

Eigen::MatrixXd feature_resolvent(const Eigen::MatrixXd& X, double z) {
  if (!(z < 0.0)) throw Error("feature_resolvent requires z < 0");
  const Eigen::Index p = X.cols();
  Eigen::MatrixXd Xc = X.rowwise() - X.colwise().mean();
  Eigen::MatrixXd A =
      (Xc.transpose() * Xc) / static_cast<double>(p) -
      z * Eigen::MatrixXd::Identity(p, p);
  Eigen::MatrixXd inv = A.llt().solve(Eigen::MatrixXd::Identity(p, p));
  // Symmetrize to wash out solver asymmetry.
  return 0.5 * (inv + inv.transpose());
}

Eigen::MatrixXd kernel_linearization(const Eigen::MatrixXd& X,
                                     const KernelSpec& spec,
                                     const CovarianceModel& sigma) {
  validate(spec);
  const Eigen::Index n = X.rows();
  const double p = static_cast<double>(X.cols());
  const KernelScalars s = kernel_scalars(spec, sigma.tau());
  const double trace_sigma2 = sigma.eigenvalues().array().square().sum();
  const double bulk = s.g0 + s.g0pp * trace_sigma2 / (2.0 * p * p);
  Eigen::MatrixXd K =
      bulk * Eigen::MatrixXd::Ones(n, n) + (s.g0p / p) * (X * X.transpose());
  K.diagonal().array() += s.nu;
  return K;
}

}  // namespace ckrr
