#include <cmath>

#include <gtest/gtest.h>

#include "nsmod/sampling.hpp"

using namespace nsmod;

namespace {

LambdaProblem scalar(LambdaProblem::ValueFn f, LambdaProblem::GradFn g) {
  return LambdaProblem(make_euclidean_space(1), {std::move(f)}, {std::move(g)});
}

Eigen::VectorXd v1(double t) { return Eigen::VectorXd::Constant(1, t); }

}  // namespace

TEST(Sampling, AbsoluteValueFirstProbe) {
  auto p = scalar([](const Eigen::VectorXd& x) { return std::abs(x(0)); },
                  [](const Eigen::VectorXd& x) { return v1(x(0) >= 0 ? 1.0 : -1.0); });
  const auto& s = *p.space();
  const auto out = find_new_subderivative(p, 0, s.primal(v1(0.2)), s.primal(v1(-1)), s.dual(v1(-1)), 0.5, 0.5);
  EXPECT_DOUBLE_EQ(out.t_found, 0.25);
  EXPECT_EQ(out.oracle_calls, 1);
  EXPECT_DOUBLE_EQ(out.xi_new.coeffs(0), -1.0);
}

TEST(Sampling, SmoothEarlyExit) {
  auto p = scalar([](const Eigen::VectorXd& x) { return 0.5 * x(0) * x(0); },
                  [](const Eigen::VectorXd& x) { return v1(x(0)); });
  const auto& s = *p.space();
  // From x = 1 along v = -1 with radius 4 the midpoint is y = -1, where the
  // gradient -1 already pairs positively with xi_tilde = -1.
  const auto out = find_new_subderivative(p, 0, s.primal(v1(1.0)), s.primal(v1(-1)), s.dual(v1(-1)), 4.0, 0.1);
  EXPECT_EQ(out.oracle_calls, 1);
  EXPECT_DOUBLE_EQ(out.t_found, 2.0);
  EXPECT_DOUBLE_EQ(out.xi_new.coeffs(0), -1.0);
}

// f(y) = max(-y, 2y - 0.9) has its kink at y = 0.3. From x = 0 along v = +1
// with eps = 0.5: the probe 0.25 still sees slope -1; h(0.5) > h(0.25) moves
// a up, and the probe 0.375 crosses the kink.
TEST(Sampling, KinkBeyondMidpoint) {
  auto p = scalar([](const Eigen::VectorXd& x) { return std::max(-x(0), 2.0 * x(0) - 0.9); },
                  [](const Eigen::VectorXd& x) { return v1(2.0 * x(0) - 0.9 > -x(0) ? 2.0 : -1.0); });
  const auto& s = *p.space();
  const auto out = find_new_subderivative(p, 0, s.primal(v1(0.0)), s.primal(v1(1)), s.dual(v1(1)), 0.5, 0.5);
  EXPECT_EQ(out.oracle_calls, 2);
  EXPECT_DOUBLE_EQ(out.t_found, 0.375);
  EXPECT_DOUBLE_EQ(out.xi_new.coeffs(0), 2.0);
  ASSERT_EQ(out.brackets.size(), 2u);
  EXPECT_DOUBLE_EQ(out.brackets[1].first, 0.25);
  EXPECT_DOUBLE_EQ(out.brackets[1].second, 0.5);
  // Strict improvement inequality, with the kink bracketed.
  EXPECT_GT(1.0 * out.xi_new.coeffs(0), -0.5 * 1.0);
  EXPECT_LT(out.brackets[1].first, 0.3);
  EXPECT_GT(out.brackets[1].second, 0.3);
}

TEST(Sampling, BracketsShrinkMonotonically) {
  // Kink line x1 = 0.6; with c = 0.3 the acceptance test at radius 1 fails,
  // which is the situation the bisection is meant for.
  auto s = make_euclidean_space(2);
  LambdaProblem p(s, {[](const Eigen::VectorXd& x) { return std::abs(x(0) - 0.6) + 0.1 * x(1) * x(1); }},
                  {[](const Eigen::VectorXd& x) {
                    return Eigen::Vector2d(x(0) - 0.6 >= 0 ? 1.0 : -1.0, 0.2 * x(1)).eval();
                  }});
  const DualVector xi = s->dual(Eigen::Vector2d(1, 0));
  const auto out = find_new_subderivative(p, 0, s->primal(Eigen::Vector2d(0, 0)), riesz_inv(xi), xi, 1.0, 0.3);
  ASSERT_GE(out.brackets.size(), 2u);
  for (std::size_t j = 1; j < out.brackets.size(); ++j) {
    const auto [a0, b0] = out.brackets[j - 1];
    const auto [a1, b1] = out.brackets[j];
    EXPECT_GE(a1, a0);
    EXPECT_LE(b1, b0);
    EXPECT_DOUBLE_EQ(b1 - a1, 0.5 * (b0 - a0));
  }
  EXPECT_GT(dual_inner(xi, out.xi_new), -0.3 * dual_inner(xi, xi));
  EXPECT_GT(out.t_found, 0.6 - 1e-12);
}

TEST(Sampling, FailureAfterCap) {
  // An oracle that always reports a subgradient opposite to xi_tilde.
  auto p = scalar([](const Eigen::VectorXd& x) { return -x(0); }, [](const Eigen::VectorXd&) { return v1(-1.0); });
  const auto& s = *p.space();
  try {
    find_new_subderivative(p, 0, s.primal(v1(0.0)), s.primal(v1(1)), s.dual(v1(1)), 1.0, 0.5, 8);
    FAIL() << "expected SamplingFailure";
  } catch (const SamplingFailure& e) {
    EXPECT_DOUBLE_EQ(e.last_xi().coeffs(0), -1.0);
    EXPECT_EQ(e.evals().subgrad, 8);
    EXPECT_GT(e.last_t(), 0.0);
    EXPECT_LT(e.last_t(), 1.0);
  }
}

TEST(Sampling, RejectsBadArguments) {
  auto p = scalar([](const Eigen::VectorXd& x) { return x(0); }, [](const Eigen::VectorXd&) { return v1(1.0); });
  const auto& s = *p.space();
  const auto x = s.primal(v1(0.0));
  EXPECT_THROW(find_new_subderivative(p, 0, x, s.primal(v1(1)), s.dual(v1(1)), 0.0, 0.5), ArgumentError);
  EXPECT_THROW(find_new_subderivative(p, 0, x, s.primal(v1(1)), s.dual(v1(1)), 1.0, 1.0), ArgumentError);
  EXPECT_THROW(find_new_subderivative(p, 0, x, s.primal(v1(0)), s.dual(v1(0)), 1.0, 0.5), ArgumentError);
}
