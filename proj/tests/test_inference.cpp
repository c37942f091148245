#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>

#include "oracles.hpp"
#include "partlasso/inference.hpp"
#include "partlasso/simlab.hpp"
#include "partlasso/stats.hpp"

using namespace partlasso;

namespace {

LassoFit fit_lasso(const PartitionedDesign& d, const Vector& y, double lam) {
  return solve(LassoProblem::residualized(d, y, lam), {.tol = 1e-12, .max_iter = 500000});
}

Vector ols(const Matrix& xg, const Vector& y) {
  return oracle::explicit_inverse(xg.transpose() * xg) * xg.transpose() * y;
}

}  // namespace

TEST_CASE("quantiles agree with bisection oracles") {
  for (double p : {0.5, 0.8, 0.975, 0.995, 1e-6}) {
    CHECK(std::abs(stats::normal_quantile(p) - oracle::normal_quantile(p)) <= 1e-8);
  }
  CHECK(stats::normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
  CHECK(stats::chi_square_quantile(0.95, 1) ==
        doctest::Approx(std::pow(stats::normal_quantile(0.975), 2)).epsilon(1e-10));
  CHECK(stats::chi_square_quantile(0.95, 2) == doctest::Approx(-2.0 * std::log(0.05)).epsilon(1e-10));
}

TEST_CASE("KS statistic and p-value") {
  std::vector<double> sample{0.0};
  CHECK(stats::ks_statistic_normal(sample) == doctest::Approx(0.5));
  for (double d : {0.02, 0.03, 0.05}) {
    const double x = d * std::sqrt(2000.0);
    CHECK(std::abs(stats::ks_pvalue(d, 2000) - oracle::kolmogorov_tail(x)) <= 0.01);
  }
  CHECK(stats::ks_pvalue(0.0, 100) == doctest::Approx(1.0));
}

TEST_CASE("beta_G_hat is OLS when the penalized block is zero or orthogonal") {
  std::mt19937_64 rng(1);
  const PartitionedDesign d(oracle::random_matrix(15, 6, rng), {0, 2});
  const Vector y = oracle::random_vector(15, rng);
  const LassoFit big = fit_lasso(d, y, 1e3);
  REQUIRE(big.active_set.empty());
  const PartialFit f = fit_partial(d, y, big, 1.0);
  CHECK((f.beta_g_hat - ols(d.x_g(), y)).norm() <= 1e-10);
  CHECK((f.cov - oracle::explicit_inverse(d.x_g().transpose() * d.x_g())).cwiseAbs().maxCoeff() <= 1e-12);

  const PartitionedDesign orth = generate_design({.family = DesignFamily::orthogonal, .n = 20, .p = 6, .g = {1}}, 3);
  const Vector y2 = oracle::random_vector(20, rng) + orth.x() * Vector::Ones(6);
  const PartialFit g = fit_partial(orth, y2, fit_lasso(orth, y2, 0.1), 2.0);
  CHECK((g.beta_g_hat - ols(orth.x_g(), y2)).norm() <= 1e-10);
  CHECK(g.cov(0, 0) == doctest::Approx(4.0 / 20.0));
}

TEST_CASE("beta_G_hat matches the joint-objective minimizer") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix raw = oracle::random_matrix(25, 8, rng);
    const PartitionedDesign d(raw, {1, 5});
    const Vector y = d.x() * (Vector(8) << 1, 2, 0, -1, 0, 1, 0, 0).finished() + oracle::random_vector(25, rng);
    const double lam = 0.15;
    const PartialFit f = fit_partial(d, y, fit_lasso(d, y, lam), 1.0);
    std::vector<bool> penalized(8, true);
    penalized[1] = penalized[5] = false;
    const Vector joint = oracle::joint_minimizer(d.x(), y, penalized, lam);
    CHECK(std::abs(f.beta_g_hat(0) - joint(1)) <= 1e-6);
    CHECK(std::abs(f.beta_g_hat(1) - joint(5)) <= 1e-6);
    for (Index k = 0; k < d.m(); ++k) {
      CHECK(std::abs(f.lasso_fit.beta(k) - joint(d.minus_g()[static_cast<std::size_t>(k)])) <= 1e-6);
    }
  }
}

TEST_CASE("non-converged fits carry a warning") {
  std::mt19937_64 rng(3);
  const PartitionedDesign d(oracle::random_matrix(20, 30, rng), {0});
  const Vector y = oracle::random_vector(20, rng);
  const LassoFit lf = solve(LassoProblem::residualized(d, y, 0.01), {.tol = 1e-15, .max_iter = 1});
  const PartialFit f = fit_partial(d, y, lf, 1.0);
  CHECK_FALSE(f.trusted());
  CHECK_FALSE(f.warnings.empty());
}

TEST_CASE("confidence_region") {
  Vector c(1);
  c << 0.3;
  const Matrix cov = Matrix::Constant(1, 1, 0.25);
  const auto r95 = confidence_region(c, cov, 0.95);
  CHECK(r95.half_width(0) == doctest::Approx(oracle::normal_quantile(0.975) * 0.5).epsilon(1e-9));
  CHECK(r95.half_width(0) == doctest::Approx(1.959963984540054 * 0.5).epsilon(1e-12));
  CHECK(r95.interval_contains(0, 0.3 + 0.97));
  CHECK_FALSE(r95.interval_contains(0, 0.3 + 0.99));

  const Matrix dcov = (Vector(3) << 1, 2, 0.5).finished().asDiagonal();
  const Vector c3 = Vector::Zero(3);
  double prev = 0.0;
  for (double level : {0.5, 0.8, 0.95, 0.99, 0.999}) {
    const auto r = confidence_region(c3, dcov, level);
    CHECK(r.half_width(1) > prev);
    prev = r.half_width(1);
    CHECK(r.ellipsoid_contains(c3));
  }
  CHECK_THROWS(confidence_region(c3, dcov, 1.0));
  CHECK_THROWS(confidence_region(c3, dcov, 0.0));
}

TEST_CASE("sigma plug-in") {
  std::mt19937_64 rng(4);
  const PartitionedDesign d = generate_design({.family = DesignFamily::gaussian_iid, .n = 400, .p = 20, .g = {0}}, 5);
  const Vector beta0 = make_beta0(d, {.s = 2});
  auto inst = generate_response(std::make_shared<PartitionedDesign>(d), beta0, 1.5, 9);
  const LassoFit lf = fit_lasso(d, inst.y, lambda_rule(4, 1.5, 400, 20));
  const double s = estimate_sigma(d, inst.y, lf);
  CHECK(s == doctest::Approx(1.5).epsilon(0.1));
}

TEST_CASE("delta diagnostic") {
  const auto orth = std::make_shared<PartitionedDesign>(
      generate_design({.family = DesignFamily::orthogonal, .n = 50, .p = 10, .g = {0, 1}}, 1));
  const Vector beta0 = make_beta0(*orth, {.s = 3});
  const auto inst = generate_response(orth, beta0, 1.0, 4);
  const LassoFit lf = fit_lasso(*orth, inst.y, lambda_rule(4, 1, 50, 10));
  const auto dd = delta_diagnostic(*orth, lf, inst.beta0_minus_g());
  CHECK(dd.delta_inf <= 1e-12);
  CHECK(dd.bound <= 1e-12);

  // Exact pivot when Theta = 0.
  const PartialFit pf = fit_partial(*orth, inst.y, lf, 1.0);
  const Vector lhs = std::sqrt(50.0) * (pf.beta_g_hat - inst.beta0_g());
  const Vector rhs = std::sqrt(50.0) * ols(orth->x_g(), inst.epsilon);
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-9);

  const auto tc = std::make_shared<PartitionedDesign>(generate_design(
      {.family = DesignFamily::theta_controlled, .n = 60, .p = 15, .tau = 0.3, .g = {0, 1}}, 2));
  const Vector b0 = make_beta0(*tc, {.s = 3});
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto in = generate_response(tc, b0, 1.0, seed);
    const LassoFit f = fit_lasso(*tc, in.y, lambda_rule(4, 1, 60, 15));
    const auto dg = delta_diagnostic(*tc, f, in.beta0_minus_g());
    const Vector diff = f.beta - in.beta0_minus_g();
    const Vector direct = std::sqrt(60.0) * oracle::theta(tc->x_g(), tc->x_minus_g()) * diff;
    CHECK((dg.delta - direct).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK(dg.delta_inf <= dg.bound + 1e-12);
    const double bound = oracle::theta(tc->x_g(), tc->x_minus_g()).cwiseAbs().rowwise().sum().maxCoeff() *
                         std::sqrt(60.0) * diff.lpNorm<1>();
    CHECK(dg.bound == doctest::Approx(bound).epsilon(1e-9));
    // Decomposition: sqrt(n)(beta_G_hat - beta0_G) + Delta = sqrt(n)(X_G^T X_G)^{-1} X_G^T eps.
    const PartialFit p = fit_partial(*tc, in.y, f, 1.0);
    const Vector left = std::sqrt(60.0) * (p.beta_g_hat - in.beta0_g()) + dg.delta;
    CHECK((left - std::sqrt(60.0) * ols(tc->x_g(), in.epsilon)).cwiseAbs().maxCoeff() <= 1e-9);
  }

  const auto in = generate_response(tc, b0, 1.0, 1);
  const LassoFit f = fit_lasso(*tc, in.y, 0.3);
  CHECK(delta_diagnostic(*tc, f, f.beta).delta_inf == 0.0);
}
