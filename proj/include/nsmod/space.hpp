#pragma once

// Finite-dimensional Hilbert space with an explicit Gram matrix.
//
// Primal elements (points, directions) and dual elements (subderivatives)
// are kept as distinct types. A dual element g acts on a primal v through
// the nodal pairing g^T v, which does not involve the Gram matrix; moving
// from dual to primal goes through the Riesz map, i.e. a solve with M.

#include <cmath>
#include <memory>
#include <string>
#include <utility>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "nsmod/error.hpp"

namespace nsmod {

class InnerProductSpace;
using SpaceHandle = std::shared_ptr<const InnerProductSpace>;
using SparseMatrix = Eigen::SparseMatrix<double>;

struct PrimalVector {
  Eigen::VectorXd coeffs;
  SpaceHandle space;
};

struct DualVector {
  Eigen::VectorXd coeffs;
  SpaceHandle space;
};

class InnerProductSpace : public std::enable_shared_from_this<InnerProductSpace> {
 public:
  static constexpr double kSymmetryTol = 1e-12;

  /// Euclidean space R^dim (M = I). All operations take exact shortcuts.
  explicit InnerProductSpace(Eigen::Index dim) : dim_(dim), euclidean_(true) {
    if (dim <= 0) throw ArgumentError("space dimension must be positive");
  }

  explicit InnerProductSpace(SparseMatrix gram) : dim_(gram.rows()), euclidean_(false) {
    if (gram.rows() <= 0 || gram.rows() != gram.cols())
      throw DimensionError("Gram matrix must be square and nonempty");
    gram.makeCompressed();
    const double scale = gram.norm();
    const SparseMatrix transposed = gram.transpose();
    const double asym = (gram - transposed).norm();
    if (!(asym <= kSymmetryTol * scale))
      throw FactorizationError("Gram matrix is not symmetric (relative asymmetry " +
                               std::to_string(scale > 0 ? asym / scale : asym) + ")");
    gram_ = std::move(gram);
    factor_ = std::make_shared<Eigen::SimplicialLLT<SparseMatrix>>(gram_);
    if (factor_->info() != Eigen::Success)
      throw FactorizationError("Gram matrix is not positive definite");
  }

  explicit InnerProductSpace(const Eigen::MatrixXd& gram)
      : InnerProductSpace(SparseMatrix(gram.sparseView())) {}

  Eigen::Index dim() const { return dim_; }
  bool is_euclidean() const { return euclidean_; }

  /// Gram matrix; materialized as the identity for Euclidean spaces.
  SparseMatrix gram() const {
    if (!euclidean_) return gram_;
    SparseMatrix id(dim_, dim_);
    id.setIdentity();
    return id;
  }

  PrimalVector primal(Eigen::VectorXd coeffs) const {
    check_length(coeffs);
    return {std::move(coeffs), shared_from_this()};
  }
  DualVector dual(Eigen::VectorXd coeffs) const {
    check_length(coeffs);
    return {std::move(coeffs), shared_from_this()};
  }
  PrimalVector zero_primal() const { return primal(Eigen::VectorXd::Zero(dim_)); }
  DualVector zero_dual() const { return dual(Eigen::VectorXd::Zero(dim_)); }

  /// M * y for an arbitrary coefficient vector.
  Eigen::VectorXd apply_gram(const Eigen::VectorXd& y) const {
    if (euclidean_) return y;
    return gram_ * y;
  }

  /// M^{-1} * g for an arbitrary coefficient vector.
  Eigen::VectorXd solve_gram(const Eigen::VectorXd& g) const {
    if (euclidean_) return g;
    Eigen::VectorXd r = factor_->solve(g);
    if (factor_->info() != Eigen::Success) throw FactorizationError("Gram solve failed");
    return r;
  }

  double inner(const PrimalVector& u, const PrimalVector& v) const {
    check(u);
    check(v);
    if (euclidean_) return u.coeffs.dot(v.coeffs);
    return u.coeffs.dot(gram_ * v.coeffs);
  }

  double norm(const PrimalVector& v) const { return std::sqrt(std::max(0.0, inner(v, v))); }

  /// Riesz map R: v -> <v, .>, coefficients M v.
  DualVector riesz(const PrimalVector& v) const {
    check(v);
    return dual(apply_gram(v.coeffs));
  }

  /// R^{-1}: returns r with M r = xi.coeffs.
  PrimalVector riesz_inv(const DualVector& xi) const {
    check(xi);
    return primal(solve_gram(xi.coeffs));
  }

  /// <xi, eta>_* = g_xi^T M^{-1} g_eta.
  double dual_inner(const DualVector& xi, const DualVector& eta) const {
    check(xi);
    check(eta);
    if (euclidean_) return xi.coeffs.dot(eta.coeffs);
    return xi.coeffs.dot(solve_gram(eta.coeffs));
  }

  double dual_norm(const DualVector& xi) const {
    return std::sqrt(std::max(0.0, dual_inner(xi, xi)));
  }

  /// xi(v) = g^T v; independent of M.
  double dual_pair(const DualVector& xi, const PrimalVector& v) const {
    check(xi);
    check(v);
    return xi.coeffs.dot(v.coeffs);
  }

  template <class Vec>
  void check(const Vec& v) const {
    if (v.space.get() != this)
      throw DimensionError(v.space && v.space->dim() != dim_
                               ? "vector dimension " + std::to_string(v.space->dim()) +
                                     " does not match space dimension " + std::to_string(dim_)
                               : "vector belongs to a different space");
    check_length(v.coeffs);
  }

 private:
  void check_length(const Eigen::VectorXd& coeffs) const {
    if (coeffs.size() != dim_)
      throw DimensionError("coefficient length " + std::to_string(coeffs.size()) +
                           " does not match space dimension " + std::to_string(dim_));
  }

  Eigen::Index dim_;
  bool euclidean_;
  SparseMatrix gram_;
  // Immutable after construction; solve() is const and safe to share.
  std::shared_ptr<const Eigen::SimplicialLLT<SparseMatrix>> factor_;
};

inline SpaceHandle make_euclidean_space(Eigen::Index dim) {
  return std::make_shared<const InnerProductSpace>(dim);
}

inline SpaceHandle make_space(SparseMatrix gram) {
  return std::make_shared<const InnerProductSpace>(std::move(gram));
}

inline SpaceHandle make_space(const Eigen::MatrixXd& gram) {
  return std::make_shared<const InnerProductSpace>(gram);
}

inline const InnerProductSpace& space_of(const PrimalVector& v) {
  if (!v.space) throw ArgumentError("vector has no space");
  return *v.space;
}

inline const InnerProductSpace& space_of(const DualVector& v) {
  if (!v.space) throw ArgumentError("vector has no space");
  return *v.space;
}

inline void require_same_space(const SpaceHandle& a, const SpaceHandle& b) {
  if (a.get() != b.get()) throw DimensionError("vectors belong to different spaces");
}

// Free-function forms; each dispatches to the owning space.
inline PrimalVector riesz_inv(const DualVector& xi) { return space_of(xi).riesz_inv(xi); }
inline double dual_inner(const DualVector& xi, const DualVector& eta) {
  require_same_space(xi.space, eta.space);
  return space_of(xi).dual_inner(xi, eta);
}
inline double dual_norm(const DualVector& xi) { return space_of(xi).dual_norm(xi); }
inline double dual_pair(const DualVector& xi, const PrimalVector& v) {
  require_same_space(xi.space, v.space);
  return space_of(xi).dual_pair(xi, v);
}
inline double inner(const PrimalVector& u, const PrimalVector& v) {
  require_same_space(u.space, v.space);
  return space_of(u).inner(u, v);
}
inline double norm(const PrimalVector& v) { return space_of(v).norm(v); }

/// x + t v
inline PrimalVector step(const PrimalVector& x, double t, const PrimalVector& v) {
  require_same_space(x.space, v.space);
  return {x.coeffs + t * v.coeffs, x.space};
}

inline DualVector operator*(double s, const DualVector& xi) { return {s * xi.coeffs, xi.space}; }
inline DualVector operator-(const DualVector& xi) { return {-xi.coeffs, xi.space}; }

}  // namespace nsmod
