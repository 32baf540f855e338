#include "ckrr/tuning.hpp"

#include <cmath>
#include <limits>

#include "ckrr/rmt.hpp"

namespace ckrr {

double tuning_objective_identity(double m, double A, double var_y, int n,
                                 int p) {
  return resolvent_identity_from_scalars(A, var_y, m, n, p, 0.0);
}

double optimal_m_identity(double A, double var_y, int n, int p) {
  if (!std::isfinite(A) || !std::isfinite(var_y))
    throw Error("optimal_m_identity: non-finite inputs");
  const double pn = static_cast<double>(p) * n;
  const double B = static_cast<double>(p) * (n + p) * var_y -
                   static_cast<double>(p) * A;
  const double C = static_cast<double>(n) * A - 2.0 * pn * var_y;
  const double E = pn * var_y - static_cast<double>(n) * A;
  const double radicand = C * C - 4.0 * B * E;
  if (!(radicand >= 0.0))
    throw NegativeRadicand("optimal_m_identity: radicand = " +
                           std::to_string(radicand));
  if (B == 0.0)
    throw NegativeRadicand("optimal_m_identity: degenerate quadratic");

  const double sq = std::sqrt(radicand);
  const double roots[2] = {(C + sq) / (2.0 * B), (C - sq) / (2.0 * B)};

  double best_m = std::numeric_limits<double>::quiet_NaN();
  double best_value = std::numeric_limits<double>::infinity();
  for (const double m : roots) {
    if (!(m > 0.0)) continue;
    double value;
    try {
      value = tuning_objective_identity(m, A, var_y, n, p);
    } catch (const DenominatorNonPositive&) {
      continue;
    }
    if (value < best_value) {
      best_value = value;
      best_m = m;
    }
  }
  if (!std::isfinite(best_m))
    throw NonPositiveM("optimal_m_identity: no positive stationary point");

  const double m = best_m;
  const double lhs =
      static_cast<double>(p) * var_y *
      (static_cast<double>(p) * m * m + n * (1.0 + m) * (1.0 + m));
  const double rhs =
      A * (n + static_cast<double>(n) * m + static_cast<double>(p) * m * m);
  const double scale = std::max({std::abs(lhs), std::abs(rhs), 1.0});
  if (std::abs(lhs - rhs) > 1e-8 * scale)
    throw NumericalError("optimal_m_identity: stationarity residual " +
                         std::to_string(std::abs(lhs - rhs) / scale));
  return m;
}

double optimal_m_identity_grid(double A, double var_y, int n, int p,
                               int grid_points, double m_max) {
  double best_m = std::numeric_limits<double>::quiet_NaN();
  double best_value = std::numeric_limits<double>::infinity();
  for (int i = 1; i <= grid_points; ++i) {
    const double m = m_max * static_cast<double>(i) / grid_points;
    double value;
    try {
      value = tuning_objective_identity(m, A, var_y, n, p);
    } catch (const DenominatorNonPositive&) {
      continue;
    }
    if (value < best_value) {
      best_value = value;
      best_m = m;
    }
  }
  if (!std::isfinite(best_m))
    throw NonPositiveM("optimal_m_identity_grid: objective undefined on the "
                       "whole grid");

  // Golden-section refinement around the grid minimum.
  const double step = m_max / grid_points;
  double a = std::max(best_m - step, step * 1e-6);
  double b = std::min(best_m + step, m_max);
  const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - ratio * (b - a);
  double x2 = a + ratio * (b - a);
  double f1 = tuning_objective_identity(x1, A, var_y, n, p);
  double f2 = tuning_objective_identity(x2, A, var_y, n, p);
  for (int it = 0; it < 200 && (b - a) > 1e-12 * (1.0 + b); ++it) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - ratio * (b - a);
      f1 = tuning_objective_identity(x1, A, var_y, n, p);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + ratio * (b - a);
      f2 = tuning_objective_identity(x2, A, var_y, n, p);
    }
  }
  return 0.5 * (a + b);
}

double find_z_for_m_from_eigs(const Eigen::VectorXd& gram_eigs, int p,
                              double m_target, double z_min, double z_max,
                              double tol) {
  if (!(m_target > 0.0)) throw Error("find_z_for_m requires m_target > 0");
  double lo = -z_max;
  double hi = -z_min;
  const double m_lo = empirical_stieltjes_from_eigs(gram_eigs, p, lo);
  const double m_hi = empirical_stieltjes_from_eigs(gram_eigs, p, hi);
  if (m_target < m_lo || m_target > m_hi)
    throw OutOfRange("m_target = " + std::to_string(m_target) +
                     " is outside [" + std::to_string(m_lo) + ", " +
                     std::to_string(m_hi) + "] reachable on the z bracket");
  // m_hat is strictly increasing in z, so plain bisection converges.
  for (int it = 0; it < 2000; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double m_mid = empirical_stieltjes_from_eigs(gram_eigs, p, mid);
    if (std::abs(m_mid - m_target) <= tol) return mid;
    if (m_mid < m_target)
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= std::numeric_limits<double>::epsilon() * std::abs(lo))
      return 0.5 * (lo + hi);
  }
  throw NoConvergence("find_z_for_m: bisection did not reach tolerance");
}

double find_z_for_m(const Eigen::MatrixXd& X, double m_target, double z_min,
                    double z_max, double tol) {
  return find_z_for_m_from_eigs(design_gram_spectrum(X),
                                static_cast<int>(X.cols()), m_target, z_min,
                                z_max, tol);
}

double lambda_from_z(double z, const KernelScalars& scalars) {
  if (scalars.g0p == 0.0) throw DegenerateKernel("g'(0) = 0");
  const double lambda = -z * scalars.g0p - scalars.nu;
  if (!(lambda > 0.0))
    throw Unreachable("z = " + std::to_string(z) +
                      " requires lambda = " + std::to_string(lambda) +
                      " <= 0 for this kernel");
  return lambda;
}

TuningResult optimize_z_general(const Eigen::MatrixXd& X,
                                const Eigen::VectorXd& y, double sigma2,
                                double z_lo, double z_hi,
                                const std::vector<KernelSpec>& kernels,
                                double tau, VarYDivisor divisor) {
  if (!(z_lo < z_hi && z_hi < 0.0))
    throw Error("optimize_z_general requires z_lo < z_hi < 0");
  const RiskEstimatorWorkspace ws(X, y, divisor);
  const double c =
      static_cast<double>(X.cols()) / static_cast<double>(X.rows());
  const auto objective = [&](double t) {
    return ws.resolvent_estimate(-std::exp(t), c, sigma2);
  };

  // Log-grid scan over |z| to localize the basin.
  const int grid_n = 64;
  const double t_lo = std::log(-z_hi);  // small |z|
  const double t_hi = std::log(-z_lo);  // large |z|
  Eigen::VectorXd values(grid_n);
  int best_idx = 0;
  for (int i = 0; i < grid_n; ++i) {
    const double t = t_lo + (t_hi - t_lo) * i / (grid_n - 1);
    values(i) = objective(t);
    if (values(i) < values(best_idx)) best_idx = i;
  }
  int local_minima = 0;
  for (int i = 1; i + 1 < grid_n; ++i)
    if (values(i) < values(i - 1) && values(i) < values(i + 1)) ++local_minima;
  if (values(0) < values(1)) ++local_minima;
  if (values(grid_n - 1) < values(grid_n - 2)) ++local_minima;

  const double t_step = (t_hi - t_lo) / (grid_n - 1);
  double a = t_lo + t_step * std::max(best_idx - 1, 0);
  double b = t_lo + t_step * std::min(best_idx + 1, grid_n - 1);
  const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - ratio * (b - a);
  double x2 = a + ratio * (b - a);
  double f1 = objective(x1);
  double f2 = objective(x2);
  for (int it = 0; it < 200 && (b - a) > 1e-10; ++it) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - ratio * (b - a);
      f1 = objective(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + ratio * (b - a);
      f2 = objective(x2);
    }
  }
  const double t_star = 0.5 * (a + b);

  TuningResult result;
  result.z_star = -std::exp(t_star);
  result.m_star = ws.m_hat(result.z_star);
  result.r_test_at_optimum = ws.resolvent_estimate(result.z_star, c, sigma2);
  result.non_unimodal = local_minima > 1;
  for (const auto& spec : kernels) {
    const KernelScalars scalars = kernel_scalars(spec, tau);
    try {
      result.lambda_star_per_kernel[spec.label()] =
          lambda_from_z(result.z_star, scalars);
    } catch (const Unreachable&) {
      result.lambda_star_per_kernel[spec.label()] = std::nullopt;
    }
  }
  return result;
}

}  // namespace ckrr
