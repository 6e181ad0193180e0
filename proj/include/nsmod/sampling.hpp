#pragma once

// Search for a new subderivative of an objective whose acceptance test
// failed along the current direction v = R^{-1}(xi_tilde).
//
// With h(t) = f(x + t v) - f(x) + c t ||v||^2, bisection on (0, eps/||v||]
// probes t = (a + b) / 2 and accepts the oracle's subderivative xi' at
// x + t v once <xi_tilde, xi'>_* > -c ||xi_tilde||_*^2. Otherwise the bracket
// moves to the side where h still has to increase.

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nsmod/error.hpp"
#include "nsmod/problem.hpp"
#include "nsmod/space.hpp"

namespace nsmod {

inline constexpr int kDefaultMaxBisect = 60;

struct SamplingOutcome {
  DualVector xi_new;
  double t_found = 0.0;
  int oracle_calls = 0;  // subgradient evaluations
  EvalCounts evals;
  std::vector<std::pair<double, double>> brackets;  // (a, b) at each probe
};

class SamplingFailure : public Error {
 public:
  SamplingFailure(const std::string& what, DualVector last_xi, double last_t, EvalCounts evals)
      : Error(what), last_xi_(std::move(last_xi)), last_t_(last_t), evals_(evals) {}
  const DualVector& last_xi() const { return last_xi_; }
  double last_t() const { return last_t_; }
  const EvalCounts& evals() const { return evals_; }

 private:
  DualVector last_xi_;
  double last_t_;
  EvalCounts evals_;
};

/// Optional function values the caller already has.
struct SamplingHints {
  std::optional<double> f_x;  // f_i(x)
  std::optional<double> f_b;  // f_i(x + (eps/||v||) v)
};

template <MultiObjectiveProblem P>
SamplingOutcome find_new_subderivative(const P& problem, std::size_t objective, const PrimalVector& x,
                                       const PrimalVector& v_tilde, const DualVector& xi_tilde, double eps,
                                       double c, int max_bisect = kDefaultMaxBisect,
                                       const SamplingHints& hints = {}) {
  if (!(eps > 0.0)) throw ArgumentError("sampling radius eps must be positive");
  if (!(c > 0.0 && c < 1.0)) throw ArgumentError("Armijo parameter c must lie in (0, 1)");
  if (max_bisect < 1) throw ArgumentError("max_bisect must be at least 1");
  const InnerProductSpace& space = space_of(x);
  const double v_norm = space.norm(v_tilde);
  if (!(v_norm > 0.0)) throw ArgumentError("sampling direction must be nonzero");

  const double xi_norm_sq = space.dual_inner(xi_tilde, xi_tilde);
  const double threshold = -c * xi_norm_sq;
  const double slope = c * v_norm * v_norm;

  SamplingOutcome out;
  auto eval = [&](double t) {
    ++out.evals.func;
    return problem.value(objective, step(x, t, v_tilde));
  };
  const double f_x = hints.f_x ? *hints.f_x : eval(0.0);
  auto h = [&](double t, double f_t) { return f_t - f_x + slope * t; };

  double a = 0.0;
  double b = eps / v_norm;
  std::optional<double> h_b;
  if (hints.f_b) h_b = h(b, *hints.f_b);
  double t = 0.5 * (a + b);

  DualVector xi = space.zero_dual();
  double probe = t;
  for (int j = 0; j < max_bisect; ++j) {
    out.brackets.emplace_back(a, b);
    probe = t;
    xi = problem.subgradient(objective, step(x, t, v_tilde));
    ++out.oracle_calls;
    ++out.evals.subgrad;
    if (space.dual_inner(xi_tilde, xi) > threshold) {
      out.xi_new = std::move(xi);
      out.t_found = t;
      return out;
    }
    if (!h_b) h_b = h(b, eval(b));
    const double h_t = h(t, eval(t));
    if (*h_b > h_t) {
      a = t;
    } else {
      b = t;
      h_b = h_t;
    }
    t = 0.5 * (a + b);
  }
  throw SamplingFailure("no acceptable subderivative after " + std::to_string(max_bisect) + " bisection steps",
                        std::move(xi), probe, out.evals);
}

}  // namespace nsmod
