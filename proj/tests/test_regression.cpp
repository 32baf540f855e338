#include <doctest.h>

#include <cmath>
#include <random>

#include "ckrr/regression.hpp"

using namespace ckrr;

namespace {

const KernelSpec kLinear = make_kernel(KernelFamily::linear, 1.0, 0.0);

// Two-point instance solvable by hand: X = (1, -1)^T, y = (1, -1),
// lambda = 1. K = [[1,-1],[-1,1]] is already centered, so the dual
// system is [[2,-1],[-1,2]] a = y with solution a = (1/3, -1/3).
struct TwoPoint {
  Eigen::MatrixXd X{2, 1};
  Eigen::VectorXd y{2};
  TwoPoint() {
    X << 1.0, -1.0;
    y << 1.0, -1.0;
  }
};

}  // namespace

TEST_CASE("fit solves the centered dual system") {
  const TwoPoint inst;
  const CkrrModel model = fit(inst.X, inst.y, kLinear, 1.0);
  CHECK(model.y_bar == doctest::Approx(0.0));
  CHECK(model.dual_coef(0) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(model.dual_coef(1) == doctest::Approx(-1.0 / 3.0).epsilon(1e-12));

  // Cross-check against a generic dense solve of (K_c + I) a = P y.
  const Eigen::MatrixXd Kc = center_gram(model.K);
  const Eigen::VectorXd direct =
      (Kc + Eigen::MatrixXd::Identity(2, 2))
          .fullPivLu()
          .solve((inst.y.array() - inst.y.mean()).matrix());
  CHECK((model.dual_coef - direct).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("constant responses produce the constant predictor") {
  const Eigen::MatrixXd X =
      sample_design(12, CovarianceModel::identity(3),
                    DesignDistribution::gaussian, 2);
  const Eigen::VectorXd y = Eigen::VectorXd::Constant(12, 4.2);
  const CkrrModel model =
      fit(X, y, make_kernel(KernelFamily::exponential, 1.0, 0.0), 0.5);
  CHECK(model.dual_coef.cwiseAbs().maxCoeff() <= 1e-12);
  const Eigen::VectorXd pred = predict(model, X.topRows(4));
  CHECK((pred.array() - 4.2).abs().maxCoeff() <= 1e-12);
}

TEST_CASE("huge regularization collapses to the mean") {
  const Eigen::MatrixXd X =
      sample_design(10, CovarianceModel::identity(2),
                    DesignDistribution::gaussian, 3);
  const Eigen::VectorXd y = gaussian_noise(10, 4);
  const CkrrModel model = fit(X, y, kLinear, 1e9);
  CHECK(model.dual_coef.cwiseAbs().maxCoeff() <= 1e-8);
  const Eigen::VectorXd pred = predict(model, X);
  CHECK((pred.array() - y.mean()).abs().maxCoeff() <= 1e-6);
}

TEST_CASE("predict on the hand instance") {
  const TwoPoint inst;
  const CkrrModel model = fit(inst.X, inst.y, kLinear, 1.0);
  Eigen::MatrixXd s(2, 1);
  s << 0.0, 1.0;
  const Eigen::VectorXd pred = predict(model, s);
  CHECK(pred(0) == doctest::Approx(0.0));
  CHECK(pred(1) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("fit rejects bad inputs") {
  const TwoPoint inst;
  CHECK_THROWS_AS(fit(inst.X, inst.y, kLinear, 0.0), Error);
  CHECK_THROWS_AS(fit(inst.X, inst.y, kLinear, 1e-16), SolveFailure);
}

TEST_CASE("empirical risk, analytic over the noise") {
  const int n = 30;
  const int p = 6;
  const CovarianceModel sigma = CovarianceModel::identity(p);
  const Eigen::MatrixXd X =
      sample_design(n, sigma, DesignDistribution::gaussian, 11);
  const KernelSpec spec = make_kernel(KernelFamily::exponential, 0.8, 0.0);

  SUBCASE("constant targets with no noise cost nothing") {
    CHECK(empirical_risk_analytic(X, Eigen::VectorXd::Constant(n, 2.0), spec,
                                  0.7, 0.0) <= 1e-20);
  }
  SUBCASE("infinite regularization leaves the centered target plus noise") {
    const Eigen::VectorXd fx = apply_target(target_sin(p), X);
    const double sigma2 = 0.3;
    const double risk = empirical_risk_analytic(X, fx, spec, 1e9, sigma2);
    const double expected =
        (fx.array() - fx.mean()).square().sum() / n + sigma2 / n;
    CHECK(risk == doctest::Approx(expected).epsilon(1e-6));
  }
  SUBCASE("matches a Monte Carlo average over noise draws") {
    const Eigen::VectorXd fx = apply_target(target_sin(p), X);
    const double sigma2 = 0.25;
    const double lambda = 0.5;
    const double analytic =
        empirical_risk_analytic(X, fx, spec, lambda, sigma2);

    const CenteredKernelSystem system(X, spec);
    const int n_draws = 2000;
    Eigen::VectorXd risks(n_draws);
    for (int t = 0; t < n_draws; ++t) {
      const Eigen::VectorXd y =
          fx + std::sqrt(sigma2) * gaussian_noise(n, 900 + t);
      const Eigen::VectorXd a = system.solve_dual(y, lambda);
      const Eigen::VectorXd pred =
          (system.centered_gram() * a).array() + y.mean();
      risks(t) = (pred - fx).squaredNorm() / n;
    }
    const double mc = risks.mean();
    const double se = std::sqrt((risks.array() - mc).square().sum() /
                                (n_draws - 1) / n_draws);
    CHECK(std::abs(analytic - mc) <= 3.0 * se);
  }
  SUBCASE("eigen path agrees with the dense smoother route") {
    const Eigen::VectorXd fx = apply_target(target_sin(p), X);
    const CenteredKernelSystem system(X, spec);
    for (const double lambda : {1e-3, 0.1, 3.0}) {
      CHECK(system.train_risk_analytic(fx, lambda, 0.4) ==
            doctest::Approx(empirical_risk_analytic(X, fx, spec, lambda, 0.4))
                .epsilon(1e-10));
    }
  }
}

TEST_CASE("Monte Carlo prediction risk") {
  const int p = 5;
  const CovarianceModel sigma = CovarianceModel::identity(p);
  const TargetFunction f = target_sin(p);
  const Eigen::MatrixXd X =
      sample_design(40, sigma, DesignDistribution::gaussian, 17);
  const KernelSpec spec = make_kernel(KernelFamily::linear, 1.0, 0.0);

  SUBCASE("identically zero problem has zero risk") {
    TargetFunction zero;
    zero.name = "zero";
    zero.value = [](const Eigen::VectorXd&) { return 0.0; };
    zero.gradient = [p](const Eigen::VectorXd&) {
      return Eigen::VectorXd::Zero(p).eval();
    };
    const McEstimate est = prediction_risk_mc(
        X, spec, 1.0, zero, sigma, DesignDistribution::gaussian, 0.0, 50, 4,
        1);
    CHECK(est.mean <= 1e-24);
  }
  SUBCASE("infinite regularization approaches var_f") {
    // At lambda -> inf the predictor is ybar, so the risk tends to
    // var_f plus the O(1/n) fluctuation of ybar.
    const McEstimate est = prediction_risk_mc(
        X, spec, 1e10, f, sigma, DesignDistribution::gaussian, 0.0, 4000, 30,
        2);
    const double var_f = 0.5 * (1.0 - std::exp(-2.0));  // s2 = 1 under I
    CHECK(std::abs(est.mean - var_f) <=
          4.0 * est.std_error + 2.0 / 40.0);
  }
  SUBCASE("standard error shrinks with more replicates") {
    const McEstimate few = prediction_risk_mc(
        X, spec, 0.5, f, sigma, DesignDistribution::gaussian, 0.3, 100, 40, 3);
    const McEstimate many = prediction_risk_mc(
        X, spec, 0.5, f, sigma, DesignDistribution::gaussian, 0.3, 100, 160,
        3);
    CHECK(many.std_error < few.std_error);
  }
}

TEST_CASE("dual and primal coefficients agree for the linear kernel") {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 8; ++trial) {
    const int n = 6 + 2 * trial;  // up to 20
    const int p = 2 + trial % 4;
    Eigen::MatrixXd X(n, p);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < p; ++j) X(i, j) = normal(rng);
      y(i) = normal(rng);
    }
    const double lambda = 0.3 + 0.2 * trial;
    const Eigen::MatrixXd P =
        Eigen::MatrixXd::Identity(n, n) -
        Eigen::MatrixXd::Constant(n, n, 1.0 / n);
    const Eigen::MatrixXd Phi = X / std::sqrt(static_cast<double>(p));
    const Eigen::VectorXd yc = (y.array() - y.mean()).matrix();

    const Eigen::VectorXd primal =
        (Phi.transpose() * P * Phi + lambda * Eigen::MatrixXd::Identity(p, p))
            .ldlt()
            .solve(Phi.transpose() * P * yc);
    const Eigen::MatrixXd K = gram_matrix(X, kLinear);
    const Eigen::VectorXd dual =
        Phi.transpose() * P *
        (P * K * P + lambda * Eigen::MatrixXd::Identity(n, n))
            .ldlt()
            .solve(yc);
    CHECK((primal - dual).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("in-sample predictions equal the smoother applied to y") {
  const int n = 25;
  const Eigen::MatrixXd X =
      sample_design(n, CovarianceModel::identity(4),
                    DesignDistribution::gaussian, 31);
  const Eigen::VectorXd y = gaussian_noise(n, 32);
  const KernelSpec spec = make_kernel(KernelFamily::sigmoid, 1.0, -0.7);
  const double lambda = 0.4;
  const CkrrModel model = fit(X, y, spec, lambda);

  const Eigen::MatrixXd P = Eigen::MatrixXd::Identity(n, n) -
                            Eigen::MatrixXd::Constant(n, n, 1.0 / n);
  const Eigen::MatrixXd Kc = center_gram(model.K);
  const Eigen::MatrixXd H =
      Kc * (Kc + lambda * Eigen::MatrixXd::Identity(n, n)).ldlt().solve(P) +
      Eigen::MatrixXd::Constant(n, n, 1.0 / n);
  CHECK((predict(model, X) - H * y).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("predictions are invariant to constant shifts of y") {
  const Eigen::MatrixXd X =
      sample_design(18, CovarianceModel::identity(3),
                    DesignDistribution::gaussian, 41);
  const Eigen::VectorXd y = gaussian_noise(18, 42);
  const KernelSpec spec = make_kernel(KernelFamily::exponential, 0.6, 0.0);
  const Eigen::MatrixXd S =
      sample_design(9, CovarianceModel::identity(3),
                    DesignDistribution::gaussian, 43);
  const Eigen::VectorXd base = predict(fit(X, y, spec, 0.8), S);
  const Eigen::VectorXd shifted =
      predict(fit(X, (y.array() + 2.75).matrix(), spec, 0.8), S);
  CHECK((shifted.array() - base.array() - 2.75).abs().maxCoeff() <= 1e-10);
}
