#pragma once

#include <concepts>
#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "nsmod/space.hpp"

namespace nsmod {

/// A multiobjective problem min (f_1, ..., f_k) over a Hilbert space.
///
/// `value(i, x)` evaluates one objective, `values(x)` all of them (a problem
/// may share work across objectives there), and `subgradient(i, x)` returns
/// one element of the Clarke subdifferential of f_i at x. Oracles must be
/// safe for concurrent read-only use.
template <class P>
concept MultiObjectiveProblem =
    requires(const P& p, std::size_t i, const PrimalVector& x) {
      { p.num_objectives() } -> std::convertible_to<std::size_t>;
      { p.space() } -> std::convertible_to<SpaceHandle>;
      { p.value(i, x) } -> std::convertible_to<double>;
      { p.values(x) } -> std::convertible_to<Eigen::VectorXd>;
      { p.subgradient(i, x) } -> std::same_as<DualVector>;
    };

/// Oracle call counters accumulated by the algorithms.
struct EvalCounts {
  long func = 0;     // scalar objective evaluations
  long subgrad = 0;  // subgradient oracle calls

  EvalCounts& operator+=(const EvalCounts& o) {
    func += o.func;
    subgrad += o.subgrad;
    return *this;
  }
};

/// Problem assembled from plain callables; handy for tests and small demos.
class LambdaProblem {
 public:
  using ValueFn = std::function<double(const Eigen::VectorXd&)>;
  using GradFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

  LambdaProblem(SpaceHandle space, std::vector<ValueFn> values, std::vector<GradFn> grads)
      : space_(std::move(space)), values_(std::move(values)), grads_(std::move(grads)) {
    if (values_.empty()) throw ArgumentError("problem needs at least one objective");
    if (values_.size() != grads_.size())
      throw ArgumentError("objective and subgradient counts differ");
  }

  std::size_t num_objectives() const { return values_.size(); }
  const SpaceHandle& space() const { return space_; }

  double value(std::size_t i, const PrimalVector& x) const {
    space_->check(x);
    return values_.at(i)(x.coeffs);
  }

  Eigen::VectorXd values(const PrimalVector& x) const {
    Eigen::VectorXd out(static_cast<Eigen::Index>(values_.size()));
    for (std::size_t i = 0; i < values_.size(); ++i) out(static_cast<Eigen::Index>(i)) = value(i, x);
    return out;
  }

  DualVector subgradient(std::size_t i, const PrimalVector& x) const {
    space_->check(x);
    return space_->dual(grads_.at(i)(x.coeffs));
  }

 private:
  SpaceHandle space_;
  std::vector<ValueFn> values_;
  std::vector<GradFn> grads_;
};

static_assert(MultiObjectiveProblem<LambdaProblem>);

}  // namespace nsmod
