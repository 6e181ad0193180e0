#pragma once

// Common descent direction from a growing sample Xi of subderivatives.
//
// Xi starts with one subderivative per objective, taken at x itself. Each
// inner iteration takes the min-norm element xi_l of -conv(Xi), and then one of:
//   - ||xi_l||_* <= delta: x is treated as (eps, delta)-critical;
//   - every objective decreases by at least c eps ||v_l|| at
//     x + (eps/||v_l||) v_l: v_l is an acceptable descent direction;
//   - otherwise every failing objective contributes one new subderivative.

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "nsmod/min_norm.hpp"
#include "nsmod/problem.hpp"
#include "nsmod/sampling.hpp"
#include "nsmod/space.hpp"

namespace nsmod {

enum class DirectionStatus { CriticalWithinDelta, AcceptableDescent, SamplingFailed };

inline const char* to_string(DirectionStatus s) {
  switch (s) {
    case DirectionStatus::CriticalWithinDelta: return "CriticalWithinDelta";
    case DirectionStatus::AcceptableDescent: return "AcceptableDescent";
    case DirectionStatus::SamplingFailed: return "SamplingFailed";
  }
  return "?";
}

struct DirectionOptions {
  int max_inner = 500;
  int max_bisect = kDefaultMaxBisect;
  double qp_tol = 0.0;  // <= 0 selects the min-norm default
};

struct DirectionResult {
  PrimalVector v;  // R^{-1}(xi)
  DualVector xi;
  double norm = 0.0;  // ||xi||_* (= ||v||), the value every test used
  DirectionStatus status = DirectionStatus::SamplingFailed;
  std::size_t xi_set_size = 0;
  int inner_iters = 0;
  EvalCounts evals;
  std::vector<double> inner_norms;  // ||xi_l||_* per inner iteration
  Eigen::VectorXd f_x;              // f(x)
  std::optional<Eigen::VectorXd> f_trial;  // f(x + (eps/||v||) v) for the returned v, when evaluated
  std::string message;
};

/// `f_x`, when given, must hold f(x); it saves one evaluation of every objective.
template <MultiObjectiveProblem P>
DirectionResult compute_descent_direction(const P& problem, const PrimalVector& x, double eps, double delta,
                                          double c, const DirectionOptions& opts = {},
                                          const Eigen::VectorXd* f_x = nullptr) {
  if (!(eps > 0.0)) throw ArgumentError("eps must be positive");
  if (!(delta > 0.0)) throw ArgumentError("delta must be positive");
  if (!(c > 0.0 && c < 1.0)) throw ArgumentError("Armijo parameter c must lie in (0, 1)");
  const std::size_t k = problem.num_objectives();
  if (k == 0) throw ArgumentError("problem has no objectives");
  const InnerProductSpace& space = *problem.space();
  space.check(x);

  DirectionResult out;
  if (f_x) {
    out.f_x = *f_x;
  } else {
    out.f_x = problem.values(x);
    out.evals.func += static_cast<long>(k);
  }

  std::vector<DualVector> xis;
  xis.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    xis.push_back(problem.subgradient(i, x));
    ++out.evals.subgrad;
  }

  auto fail = [&](std::string why) {
    out.status = DirectionStatus::SamplingFailed;
    out.message = std::move(why);
    out.xi_set_size = xis.size();
    return out;
  };

  for (int l = 1; l <= opts.max_inner; ++l) {
    out.inner_iters = l;
    MinNormResult mn;
    try {
      mn = min_norm_point(xis, opts.qp_tol);
    } catch (const MinNormSolverError& e) {
      if (out.inner_norms.empty()) {
        out.xi = e.best().xi_tilde;
        out.v = space.riesz_inv(out.xi);
        out.norm = space.dual_norm(out.xi);
      }
      return fail(e.what());
    }
    out.xi = std::move(mn.xi_tilde);
    out.v = space.riesz_inv(out.xi);
    out.norm = space.dual_norm(out.xi);
    out.inner_norms.push_back(out.norm);
    out.f_trial.reset();

    if (out.norm <= delta) {
      out.status = DirectionStatus::CriticalWithinDelta;
      out.xi_set_size = xis.size();
      return out;
    }

    const double t_trial = eps / out.norm;
    const PrimalVector trial = step(x, t_trial, out.v);
    const Eigen::VectorXd f_trial = problem.values(trial);
    out.evals.func += static_cast<long>(k);
    out.f_trial = f_trial;

    const double required = c * eps * out.norm;
    std::vector<std::size_t> insufficient;
    for (std::size_t i = 0; i < k; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      if (f_trial(ii) > out.f_x(ii) - required) insufficient.push_back(i);
    }
    if (insufficient.empty()) {
      out.status = DirectionStatus::AcceptableDescent;
      out.xi_set_size = xis.size();
      return out;
    }

    const double xi_norm_sq = space.dual_inner(out.xi, out.xi);
    for (std::size_t j : insufficient) {
      const auto jj = static_cast<Eigen::Index>(j);
      try {
        SamplingOutcome s = find_new_subderivative(problem, j, x, out.v, out.xi, eps, c, opts.max_bisect,
                                                   SamplingHints{out.f_x(jj), f_trial(jj)});
        out.evals += s.evals;
        if (!(space.dual_inner(out.xi, s.xi_new) > -c * xi_norm_sq))
          return fail("sampled subderivative violates the improvement inequality");
        xis.push_back(std::move(s.xi_new));
      } catch (const SamplingFailure& e) {
        out.evals += e.evals();
        return fail(std::string("objective ") + std::to_string(j) + ": " + e.what());
      }
    }
  }
  return fail("inner iteration cap " + std::to_string(opts.max_inner) + " reached");
}

}  // namespace nsmod
