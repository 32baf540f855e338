#include "ckrr/datagen.hpp"

#include <cmath>
#include <random>

namespace ckrr {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

CovarianceModel::CovarianceModel(CovarianceKind kind, Eigen::MatrixXd matrix,
                                 double rho)
    : kind_(kind), rho_(rho), matrix_(std::move(matrix)) {
  if (matrix_.rows() != matrix_.cols())
    throw Error("covariance matrix must be square");
  if (!matrix_.isApprox(matrix_.transpose(), 1e-12))
    throw Error("covariance matrix must be symmetric");
  if (!matrix_.allFinite()) throw Error("covariance matrix must be finite");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(matrix_);
  if (es.info() != Eigen::Success)
    throw Error("covariance eigendecomposition failed");
  eigenvalues_ = es.eigenvalues();
  eigenvectors_ = es.eigenvectors();
  const double norm = std::max(std::abs(eigenvalues_(0)),
                               std::abs(eigenvalues_(eigenvalues_.size() - 1)));
  if (eigenvalues_(0) < -1e-8 * std::max(norm, 1.0))
    throw NotPsd("covariance has a negative eigenvalue: " +
                 std::to_string(eigenvalues_(0)));
  eigenvalues_ = eigenvalues_.cwiseMax(0.0);
}

CovarianceModel CovarianceModel::identity(int p) {
  return CovarianceModel(CovarianceKind::identity,
                         Eigen::MatrixXd::Identity(p, p), 0.0);
}

CovarianceModel CovarianceModel::toeplitz(int p, double rho) {
  if (!(rho >= 0.0 && rho < 1.0))
    throw Error("toeplitz rho must lie in [0, 1)");
  Eigen::MatrixXd sigma(p, p);
  for (int j = 0; j < p; ++j)
    for (int i = 0; i < p; ++i) sigma(i, j) = std::pow(rho, std::abs(i - j));
  return CovarianceModel(CovarianceKind::toeplitz, std::move(sigma), rho);
}

CovarianceModel CovarianceModel::from_matrix(Eigen::MatrixXd sigma) {
  return CovarianceModel(CovarianceKind::explicit_matrix, std::move(sigma),
                         0.0);
}

CovarianceModel toeplitz_sigma(int p, double rho) {
  return CovarianceModel::toeplitz(p, rho);
}

Eigen::MatrixXd sqrt_psd(const CovarianceModel& sigma) {
  const Eigen::VectorXd roots = sigma.eigenvalues().cwiseSqrt();
  return sigma.eigenvectors() * roots.asDiagonal() *
         sigma.eigenvectors().transpose();
}

std::string to_string(DesignDistribution dist) {
  return dist == DesignDistribution::gaussian ? "gaussian" : "rademacher";
}

DesignDistribution design_distribution_from_string(const std::string& name) {
  if (name == "gaussian") return DesignDistribution::gaussian;
  if (name == "rademacher") return DesignDistribution::rademacher;
  throw Error("unknown design distribution: " + name);
}

Eigen::MatrixXd sample_design(int n, const CovarianceModel& sigma,
                              DesignDistribution dist, std::uint64_t seed) {
  if (n < 2) throw Error("sample_design requires n >= 2");
  const int p = sigma.dim();
  std::mt19937_64 rng(seed);
  Eigen::MatrixXd Z(n, p);
  if (dist == DesignDistribution::gaussian) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < p; ++j) Z(i, j) = normal(rng);
  } else {
    std::bernoulli_distribution coin(0.5);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < p; ++j) Z(i, j) = coin(rng) ? 1.0 : -1.0;
  }
  if (sigma.kind() == CovarianceKind::identity) return Z;
  // x_i = S z_i with the symmetric root, so X = Z S.
  return Z * sqrt_psd(sigma);
}

TargetFunction target_sin(int p) {
  const double inv_sqrt_p = 1.0 / std::sqrt(static_cast<double>(p));
  TargetFunction f;
  f.name = "sin";
  f.value = [inv_sqrt_p](const Eigen::VectorXd& x) {
    return std::sin(x.sum() * inv_sqrt_p);
  };
  f.gradient = [inv_sqrt_p, p](const Eigen::VectorXd& x) {
    const double scale = std::cos(x.sum() * inv_sqrt_p) * inv_sqrt_p;
    return Eigen::VectorXd::Constant(p, scale).eval();
  };
  return f;
}

Eigen::VectorXd apply_target(const TargetFunction& f,
                             const Eigen::MatrixXd& X) {
  Eigen::VectorXd out(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) out(i) = f.value(X.row(i));
  return out;
}

Eigen::VectorXd gaussian_noise(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd eps(n);
  for (int i = 0; i < n; ++i) eps(i) = normal(rng);
  return eps;
}

Eigen::VectorXd make_labels(const Eigen::MatrixXd& X, const TargetFunction& f,
                            double sigma_noise, std::uint64_t seed) {
  Eigen::VectorXd y = apply_target(f, X);
  if (sigma_noise > 0.0)
    y += sigma_noise * gaussian_noise(static_cast<int>(X.rows()), seed);
  return y;
}

std::uint64_t replicate_seed(std::uint64_t base_seed, std::uint64_t replicate) {
  return base_seed ^ (replicate * 0x9E3779B97F4A7C15ULL);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(seed ^ splitmix64(stream));
}

}  // namespace ckrr
