#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "nsmod/analytic.hpp"
#include "nsmod/direction.hpp"

using namespace nsmod;

TEST(Direction, SmoothQuadraticAcceptsFirstDirection) {
  auto s = make_euclidean_space(2);
  LambdaProblem p(s, {[](const Eigen::VectorXd& x) { return 0.5 * x.squaredNorm(); }},
                  {[](const Eigen::VectorXd& x) { return Eigen::VectorXd(x); }});
  const auto d = compute_descent_direction(p, s->primal(Eigen::Vector2d(1, 0)), 0.1, 1e-3, 0.1);
  EXPECT_EQ(d.status, DirectionStatus::AcceptableDescent);
  EXPECT_EQ(d.inner_iters, 1);
  EXPECT_LT((d.v.coeffs - Eigen::Vector2d(-1, 0)).norm(), 1e-12);
  EXPECT_EQ(d.xi_set_size, 1u);
}

TEST(Direction, OpposingGradientsAreCritical) {
  auto s = make_euclidean_space(2);
  LambdaProblem p(s, {[](const Eigen::VectorXd& x) { return x(0); }, [](const Eigen::VectorXd& x) { return -x(0); }},
                  {[](const Eigen::VectorXd&) { return Eigen::VectorXd(Eigen::Vector2d(1, 0)); },
                   [](const Eigen::VectorXd&) { return Eigen::VectorXd(Eigen::Vector2d(-1, 0)); }});
  const auto d = compute_descent_direction(p, s->primal(Eigen::Vector2d(0.3, -2)), 0.1, 1e-6, 0.1);
  EXPECT_EQ(d.status, DirectionStatus::CriticalWithinDelta);
  EXPECT_NEAR(d.norm, 0.0, 1e-7);
  EXPECT_EQ(d.inner_iters, 1);
}

TEST(Direction, AbsoluteValueAtKink) {
  auto s = make_euclidean_space(1);
  LambdaProblem p(s, {[](const Eigen::VectorXd& x) { return std::abs(x(0)); }},
                  {[](const Eigen::VectorXd& x) { return Eigen::VectorXd::Constant(1, x(0) >= 0 ? 1.0 : -1.0); }});
  const auto d = compute_descent_direction(p, s->primal(Eigen::VectorXd::Zero(1)), 0.1, 1e-6, 0.1);
  EXPECT_EQ(d.status, DirectionStatus::CriticalWithinDelta);
  EXPECT_EQ(d.inner_iters, 2);
  EXPECT_EQ(d.xi_set_size, 2u);
  EXPECT_NEAR(d.norm, 0.0, 1e-7);
  ASSERT_EQ(d.inner_norms.size(), 2u);
  EXPECT_DOUBLE_EQ(d.inner_norms[0], 1.0);
}

TEST(Direction, ContractOnRandomPoints) {
  const auto p = analytic::make_absdist();
  const auto& s = *p.space();
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  const double eps = 0.05, delta = 1e-3, c = 0.1;
  for (int trial = 0; trial < 50; ++trial) {
    const auto x = s.primal(Eigen::Vector2d(u(rng), u(rng)));
    const auto d = compute_descent_direction(p, x, eps, delta, c);
    ASSERT_NE(d.status, DirectionStatus::SamplingFailed) << d.message;
    if (d.status == DirectionStatus::CriticalWithinDelta) {
      EXPECT_LE(d.norm, delta);
    } else {
      const double nv = d.v.coeffs.norm();
      EXPECT_NEAR(nv, d.norm, 1e-12 * (1 + nv));
      const Eigen::VectorXd y = x.coeffs + (eps / nv) * d.v.coeffs;
      for (std::size_t i = 0; i < 2; ++i) {
        const double fx = p.value(i, x), fy = p.value(i, s.primal(y));
        EXPECT_LE(fy, fx - c * eps * nv + 1e-12);
      }
    }
    for (std::size_t l = 1; l < d.inner_norms.size(); ++l) EXPECT_LE(d.inner_norms[l], d.inner_norms[l - 1] + 1e-10);
    // Each extra inner iteration adds between one and k sampled elements.
    const auto extra = static_cast<std::size_t>(d.inner_iters - 1);
    EXPECT_GE(d.xi_set_size, 2u + extra);
    EXPECT_LE(d.xi_set_size, 2u + 2u * extra);
    EXPECT_EQ(d.inner_norms.size(), static_cast<std::size_t>(d.inner_iters));
  }
}

TEST(Direction, RejectsBadArguments) {
  const auto p = analytic::make_absdist();
  const auto x = p.space()->primal(Eigen::Vector2d(1, 1));
  EXPECT_THROW(compute_descent_direction(p, x, 0.0, 1e-3, 0.1), ArgumentError);
  EXPECT_THROW(compute_descent_direction(p, x, 0.1, -1.0, 0.1), ArgumentError);
  EXPECT_THROW(compute_descent_direction(p, x, 0.1, 1e-3, 1.5), ArgumentError);
}
