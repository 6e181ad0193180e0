#pragma once

// Nonsmooth multiobjective descent: directions from the sampled
// eps-subdifferential, Armijo backtracking with the step floor eps_j/||v_j||,
// and the (eps_bar, delta_bar)-criticality stop.

#include <chrono>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "nsmod/direction.hpp"
#include "nsmod/problem.hpp"
#include "nsmod/space.hpp"

namespace nsmod {

/// Positive tolerance sequence j -> value, j = 1, 2, ...
class ToleranceSchedule {
 public:
  enum class Kind { Constant, InverseSqrt, Custom };

  static ToleranceSchedule constant(double value) {
    check_positive(value);
    return ToleranceSchedule(Kind::Constant, value, {});
  }

  /// scale / sqrt(j): tends to zero, and the product of two such schedules
  /// is not summable.
  static ToleranceSchedule inverse_sqrt(double scale) {
    check_positive(scale);
    return ToleranceSchedule(Kind::InverseSqrt, scale, {});
  }

  static ToleranceSchedule custom(std::function<double(int)> fn) {
    if (!fn) throw ArgumentError("custom schedule needs a callable");
    return ToleranceSchedule(Kind::Custom, 0.0, std::move(fn));
  }

  double operator()(int j) const {
    switch (kind_) {
      case Kind::Constant: return scale_;
      case Kind::InverseSqrt: return scale_ / std::sqrt(static_cast<double>(j));
      case Kind::Custom: {
        const double v = fn_(j);
        if (!(v > 0.0)) throw ArgumentError("tolerance schedule produced a non-positive value");
        return v;
      }
    }
    return scale_;
  }

  Kind kind() const { return kind_; }
  double scale() const { return scale_; }

 private:
  ToleranceSchedule(Kind kind, double scale, std::function<double(int)> fn)
      : kind_(kind), scale_(scale), fn_(std::move(fn)) {}
  static void check_positive(double v) {
    if (!(v > 0.0)) throw ArgumentError("tolerance schedule values must be positive");
  }

  Kind kind_;
  double scale_;
  std::function<double(int)> fn_;
};

struct SolverConfig {
  double eps_bar = 1e-4;
  double delta_bar = 1e-4;
  ToleranceSchedule eps_seq = ToleranceSchedule::constant(1e-4);
  ToleranceSchedule delta_seq = ToleranceSchedule::constant(1e-4);
  double c = 0.1;
  double t0 = 1.0;
  int max_outer_iters = 10000;
  bool record_iterates = false;
  DirectionOptions direction{};

  /// Constant sequences eps_j = eps_bar, delta_j = delta_bar.
  static SolverConfig constant(double eps_bar, double delta_bar, double c = 0.1, double t0 = 1.0) {
    SolverConfig cfg;
    cfg.eps_bar = eps_bar;
    cfg.delta_bar = delta_bar;
    cfg.eps_seq = ToleranceSchedule::constant(eps_bar);
    cfg.delta_seq = ToleranceSchedule::constant(delta_bar);
    cfg.c = c;
    cfg.t0 = t0;
    return cfg;
  }

  /// Throws ArgumentError on invalid parameters. With `convergence_mode`,
  /// built-in schedules must also satisfy eps_j, delta_j -> 0 with
  /// sum eps_j delta_j = infinity; custom schedules cannot be checked.
  void validate(bool convergence_mode = false) const {
    if (!(eps_bar >= 0.0) || !(delta_bar >= 0.0)) throw ArgumentError("eps_bar and delta_bar must be >= 0");
    if (!(c > 0.0 && c < 1.0)) throw ArgumentError("Armijo parameter c must lie in (0, 1)");
    if (!(t0 > 0.0)) throw ArgumentError("t0 must be positive");
    if (max_outer_iters < 1) throw ArgumentError("max_outer_iters must be at least 1");
    if (!convergence_mode) return;
    using K = ToleranceSchedule::Kind;
    if (eps_seq.kind() == K::Constant || delta_seq.kind() == K::Constant)
      throw ArgumentError("convergence mode needs tolerance sequences tending to zero");
    // Both remaining built-in kinds are InverseSqrt (or Custom): the
    // product decays like 1/j, whose series diverges.
  }
};

enum class RunStatus { EpsDeltaCritical, MaxIters, SamplingFailed };

inline const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::EpsDeltaCritical: return "EpsDeltaCritical";
    case RunStatus::MaxIters: return "MaxIters";
    case RunStatus::SamplingFailed: return "SamplingFailed";
  }
  return "?";
}

struct IterationRecord {
  int iter = 0;
  Eigen::VectorXd f;   // f(x_j)
  double norm_v = 0.0;
  double step = 0.0;   // t_bar; 0 on the stopping row
  bool step_floor = false;  // t_bar = eps_j / ||v_j||
  std::size_t xi_set_size = 0;
  long func_evals = 0;
  long subgrad_evals = 0;
  double eps = 0.0;
  double delta = 0.0;
  DirectionStatus direction = DirectionStatus::SamplingFailed;
};

struct RunRecord {
  std::vector<IterationRecord> rows;
  RunStatus status = RunStatus::MaxIters;
  PrimalVector x_final;
  Eigen::VectorXd f_final;
  std::vector<Eigen::VectorXd> iterates;  // x_j, only with record_iterates
  double wall_ms = 0.0;
  std::string message;

  /// Outer iterations that produced a step.
  int steps() const {
    int n = 0;
    for (const auto& r : rows) n += r.step > 0.0 ? 1 : 0;
    return n;
  }
  std::size_t max_xi_set_size() const {
    std::size_t m = 0;
    for (const auto& r : rows) m = std::max(m, r.xi_set_size);
    return m;
  }
};

struct ArmijoResult {
  double t = 0.0;
  int s_bar = -1;            // accepted halving exponent, -1 when the floor applied
  bool floor = false;
  std::optional<Eigen::VectorXd> f_new;  // f at x + t v when it was evaluated
  EvalCounts evals;
};

/// Backtracking over t = 2^{-s} t0 with the test
/// f_i(x + t v) <= f_i(x) - c t ||v||^2 for all i; the result is
/// max(2^{-s_bar} t0, eps_j/||v||), so halving stops once t drops below the floor.
template <MultiObjectiveProblem P>
ArmijoResult armijo_step(const P& problem, const PrimalVector& x, const PrimalVector& v, double eps_j, double c,
                         double t0, const Eigen::VectorXd* f_x = nullptr, std::optional<double> v_norm = {}) {
  if (!(t0 > 0.0)) throw ArgumentError("t0 must be positive");
  const InnerProductSpace& space = *problem.space();
  const double nv = v_norm ? *v_norm : space.norm(v);
  if (!(nv > 0.0)) throw ArgumentError("Armijo step needs a nonzero direction");
  const auto k = static_cast<long>(problem.num_objectives());

  ArmijoResult out;
  Eigen::VectorXd fx;
  if (f_x) {
    fx = *f_x;
  } else {
    fx = problem.values(x);
    out.evals.func += k;
  }
  const double floor = eps_j / nv;
  double t = t0;
  for (int s = 0; t >= floor; ++s, t *= 0.5) {
    Eigen::VectorXd ft = problem.values(step(x, t, v));
    out.evals.func += k;
    if (((ft.array() - fx.array()) <= -c * t * nv * nv).all()) {
      out.t = t;
      out.s_bar = s;
      out.f_new = std::move(ft);
      return out;
    }
  }
  out.t = floor;
  out.floor = true;
  return out;
}

template <MultiObjectiveProblem P>
RunRecord solve(const P& problem, const PrimalVector& x1, const SolverConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  const InnerProductSpace& space = *problem.space();
  space.check(x1);
  const auto k = static_cast<long>(problem.num_objectives());

  RunRecord rec;
  PrimalVector x = x1;
  Eigen::VectorXd fx = problem.values(x);
  long pending_func = k;  // evaluations charged to the next row

  auto finish = [&](RunStatus status) {
    rec.status = status;
    rec.x_final = x;
    rec.f_final = fx;
    rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return rec;
  };

  for (int j = 1; j <= config.max_outer_iters; ++j) {
    if (config.record_iterates) rec.iterates.push_back(x.coeffs);
    const double eps_j = config.eps_seq(j);
    const double delta_j = config.delta_seq(j);

    DirectionResult dir = compute_descent_direction(problem, x, eps_j, delta_j, config.c, config.direction, &fx);

    IterationRecord row;
    row.iter = j;
    row.f = fx;
    row.norm_v = dir.norm;
    row.xi_set_size = dir.xi_set_size;
    row.func_evals = pending_func + dir.evals.func;
    row.subgrad_evals = dir.evals.subgrad;
    row.eps = eps_j;
    row.delta = delta_j;
    row.direction = dir.status;
    pending_func = 0;

    if (dir.status == DirectionStatus::SamplingFailed) {
      rec.rows.push_back(std::move(row));
      rec.message = dir.message;
      return finish(RunStatus::SamplingFailed);
    }
    // The line search result would be discarded when stopping, so skip it.
    if (dir.norm <= config.delta_bar && eps_j <= config.eps_bar) {
      rec.rows.push_back(std::move(row));
      return finish(RunStatus::EpsDeltaCritical);
    }
    if (!(dir.norm > 0.0)) {
      // Exactly stationary but the schedule forbids stopping: stay put.
      rec.rows.push_back(std::move(row));
      continue;
    }

    ArmijoResult ls = armijo_step(problem, x, dir.v, eps_j, config.c, config.t0, &fx, dir.norm);
    row.func_evals += ls.evals.func;
    if (dir.status == DirectionStatus::CriticalWithinDelta && ls.floor) {
      // Small direction that passed no acceptance test: the floor step
      // eps_j / ||v|| is not known to descend, so hold x and let the
      // schedule tighten.
      rec.rows.push_back(std::move(row));
      continue;
    }
    row.step = ls.t;
    row.step_floor = ls.floor;
    rec.rows.push_back(std::move(row));

    const PrimalVector next = step(x, ls.t, dir.v);
    if (ls.f_new) {
      fx = std::move(*ls.f_new);
    } else if (ls.floor && dir.f_trial) {
      fx = *dir.f_trial;  // same point as the acceptance test
    } else {
      fx = problem.values(next);
      pending_func += k;
    }
    x = next;
  }
  return finish(RunStatus::MaxIters);
}

}  // namespace nsmod
