#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ckrr/errors.hpp"

namespace ckrr {

enum class CovarianceKind { identity, toeplitz, explicit_matrix };

/// Symmetric PSD covariance with a cached eigendecomposition, used both for
/// sampling and for the spectral risk formulas.
class CovarianceModel {
 public:
  static CovarianceModel identity(int p);
  static CovarianceModel toeplitz(int p, double rho);
  static CovarianceModel from_matrix(Eigen::MatrixXd sigma);

  int dim() const { return static_cast<int>(matrix_.rows()); }
  CovarianceKind kind() const { return kind_; }
  double rho() const { return rho_; }
  const Eigen::MatrixXd& matrix() const { return matrix_; }
  /// Ascending, clamped at zero.
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
  const Eigen::MatrixXd& eigenvectors() const { return eigenvectors_; }
  double trace() const { return matrix_.trace(); }
  double operator_norm() const { return eigenvalues_(eigenvalues_.size() - 1); }
  /// (1/p) tr Sigma.
  double tau() const { return trace() / dim(); }

 private:
  CovarianceModel(CovarianceKind kind, Eigen::MatrixXd matrix, double rho);

  CovarianceKind kind_;
  double rho_ = 0.0;
  Eigen::MatrixXd matrix_;
  Eigen::VectorXd eigenvalues_;
  Eigen::MatrixXd eigenvectors_;
};

/// Sigma_ij = rho^|i-j|; rho in [0, 1).
CovarianceModel toeplitz_sigma(int p, double rho);

/// Symmetric S with S S = Sigma, via eigendecomposition with negative
/// eigenvalues clamped to zero. Throws NotPsd when an eigenvalue is below
/// -1e-8 * ||Sigma||.
Eigen::MatrixXd sqrt_psd(const CovarianceModel& sigma);

enum class DesignDistribution { gaussian, rademacher };

std::string to_string(DesignDistribution dist);
DesignDistribution design_distribution_from_string(const std::string& name);

/// n x p design with rows x_i = S z_i, z_i i.i.d. standard normal or
/// uniform on {-1, +1}. Deterministic given the seed.
Eigen::MatrixXd sample_design(int n, const CovarianceModel& sigma,
                              DesignDistribution dist, std::uint64_t seed);

/// Scalar target with an analytic gradient.
struct TargetFunction {
  std::string name;
  std::function<double(const Eigen::VectorXd&)> value;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;
};

/// f(x) = sin(1^T x / sqrt(p)).
TargetFunction target_sin(int p);

Eigen::VectorXd apply_target(const TargetFunction& f, const Eigen::MatrixXd& X);

/// y_i = f(x_i) + sigma_noise * eps_i with standard normal eps.
Eigen::VectorXd make_labels(const Eigen::MatrixXd& X, const TargetFunction& f,
                            double sigma_noise, std::uint64_t seed);

/// Gaussian noise vector, exposed so harness code can redraw eps with the
/// design held fixed.
Eigen::VectorXd gaussian_noise(int n, std::uint64_t seed);

/// Per-replicate seed: base ^ (r * 0x9E3779B97F4A7C15).
std::uint64_t replicate_seed(std::uint64_t base_seed, std::uint64_t replicate);

/// Independent stream within one replicate (design vs. noise vs. test draw).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

// Stream tags used by the experiment harness.
inline constexpr std::uint64_t kStreamDesign = 1;
inline constexpr std::uint64_t kStreamNoise = 2;
inline constexpr std::uint64_t kStreamTest = 3;
inline constexpr std::uint64_t kStreamPermutation = 4;

/// Tabular dataset loaded from CSV: header row, last column is the
/// response, remaining columns are features. Missing values are rejected.
struct Dataset {
  std::vector<std::string> feature_names;
  std::string response_name;
  Eigen::MatrixXd features;  // rows = samples
  Eigen::VectorXd response;
};

Dataset load_csv_dataset(const std::string& path);

}  // namespace ckrr
