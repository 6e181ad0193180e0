#pragma once

// Closed-form nonsmooth test problems on Euclidean R^n with known Pareto sets.
//
// Kink convention: sign(0) := +1 for absolute values.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "nsmod/error.hpp"
#include "nsmod/problem.hpp"
#include "nsmod/space.hpp"

namespace nsmod::analytic {

inline double kink_sign(double t) { return t >= 0.0 ? 1.0 : -1.0; }

/// Distance from p to the segment [a, b].
inline double segment_distance(const Eigen::VectorXd& p, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::VectorXd d = b - a;
  const double len_sq = d.squaredNorm();
  double s = len_sq > 0.0 ? (p - a).dot(d) / len_sq : 0.0;
  s = std::clamp(s, 0.0, 1.0);
  return (p - (a + s * d)).norm();
}

class AnalyticProblem {
 public:
  using ValueFn = std::function<double(const Eigen::VectorXd&)>;
  using GradFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
  using DistanceFn = std::function<double(const Eigen::VectorXd&)>;

  AnalyticProblem(std::string name, Eigen::Index dim, std::vector<ValueFn> f, std::vector<GradFn> g,
                  std::vector<double> lower_bounds, DistanceFn pareto = {})
      : name_(std::move(name)),
        space_(make_euclidean_space(dim)),
        f_(std::move(f)),
        g_(std::move(g)),
        lower_(std::move(lower_bounds)),
        pareto_(std::move(pareto)) {
    if (f_.empty() || f_.size() != g_.size() || f_.size() != lower_.size())
      throw ArgumentError("analytic problem objective lists are inconsistent");
  }

  const std::string& name() const { return name_; }
  std::size_t num_objectives() const { return f_.size(); }
  const SpaceHandle& space() const { return space_; }
  Eigen::Index dim() const { return space_->dim(); }

  double value(std::size_t i, const PrimalVector& x) const {
    space_->check(x);
    return f_.at(i)(x.coeffs);
  }

  Eigen::VectorXd values(const PrimalVector& x) const {
    Eigen::VectorXd out(static_cast<Eigen::Index>(f_.size()));
    for (std::size_t i = 0; i < f_.size(); ++i) out(static_cast<Eigen::Index>(i)) = value(i, x);
    return out;
  }

  DualVector subgradient(std::size_t i, const PrimalVector& x) const {
    space_->check(x);
    return space_->dual(g_.at(i)(x.coeffs));
  }

  /// inf f_i over the whole space.
  double infimum(std::size_t i) const { return lower_.at(i); }

  bool has_pareto_oracle() const { return static_cast<bool>(pareto_); }

  /// Euclidean distance from x to the known Pareto set.
  double pareto_distance(const PrimalVector& x) const {
    if (!pareto_) throw UnsupportedError("problem '" + name_ + "' has no known Pareto set");
    space_->check(x);
    return pareto_(x.coeffs);
  }

 private:
  std::string name_;
  SpaceHandle space_;
  std::vector<ValueFn> f_;
  std::vector<GradFn> g_;
  std::vector<double> lower_;
  DistanceFn pareto_;
};

static_assert(MultiObjectiveProblem<AnalyticProblem>);

/// f1 = |x1| + x2^2, f2 = |x1 - 2| + x2^2 on R^2; Pareto set [0,2] x {0}.
inline AnalyticProblem make_absdist() {
  auto f1 = [](const Eigen::VectorXd& x) { return std::abs(x(0)) + x(1) * x(1); };
  auto f2 = [](const Eigen::VectorXd& x) { return std::abs(x(0) - 2.0) + x(1) * x(1); };
  auto g1 = [](const Eigen::VectorXd& x) { return Eigen::Vector2d(kink_sign(x(0)), 2.0 * x(1)).eval(); };
  auto g2 = [](const Eigen::VectorXd& x) { return Eigen::Vector2d(kink_sign(x(0) - 2.0), 2.0 * x(1)).eval(); };
  auto dist = [](const Eigen::VectorXd& x) {
    return segment_distance(x, Eigen::Vector2d(0.0, 0.0), Eigen::Vector2d(2.0, 0.0));
  };
  return AnalyticProblem("absdist", 2, {f1, f2}, {g1, g2}, {0.0, 0.0}, dist);
}

/// f1 = ||x - a||^2, f2 = ||x + a||^2; Pareto set is the segment [-a, a].
inline AnalyticProblem make_smooth_pair(Eigen::VectorXd a = Eigen::Vector2d(1.0, 0.0)) {
  auto f1 = [a](const Eigen::VectorXd& x) { return (x - a).squaredNorm(); };
  auto f2 = [a](const Eigen::VectorXd& x) { return (x + a).squaredNorm(); };
  auto g1 = [a](const Eigen::VectorXd& x) { return Eigen::VectorXd(2.0 * (x - a)); };
  auto g2 = [a](const Eigen::VectorXd& x) { return Eigen::VectorXd(2.0 * (x + a)); };
  auto dist = [a](const Eigen::VectorXd& x) { return segment_distance(x, -a, a); };
  return AnalyticProblem("smoothpair", a.size(), {f1, f2}, {g1, g2}, {0.0, 0.0}, dist);
}

/// Single objective ||x||_1 on R^dim; minimizer 0.
inline AnalyticProblem make_l1(Eigen::Index dim = 2) {
  auto f = [](const Eigen::VectorXd& x) { return x.lpNorm<1>(); };
  auto g = [](const Eigen::VectorXd& x) { return Eigen::VectorXd(x.unaryExpr([](double t) { return kink_sign(t); })); };
  auto dist = [](const Eigen::VectorXd& x) { return x.norm(); };
  return AnalyticProblem("l1", dim, {f}, {g}, {0.0}, dist);
}

inline std::vector<std::string> problem_names() { return {"absdist", "smoothpair", "l1"}; }

inline AnalyticProblem make_problem(const std::string& name) {
  if (name == "absdist") return make_absdist();
  if (name == "smoothpair") return make_smooth_pair();
  if (name == "l1") return make_l1();
  throw ArgumentError("unknown analytic problem '" + name + "'");
}

}  // namespace nsmod::analytic
