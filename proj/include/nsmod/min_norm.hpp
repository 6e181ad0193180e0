#pragma once

// Minimum-norm element of -conv(Xi) for a finite generator set Xi.
//
// The problem is reduced to min lambda^T G lambda over the unit simplex with
// G_ij = <xi_i, xi_j>_*. It is solved by Wolfe's nearest-point method written
// entirely in terms of G, then polished with pairwise Frank-Wolfe steps until
// the optimality certificate
//
//     (G lambda)_i >= lambda^T G lambda - tol   for every i
//
// holds. The certificate is the contract; the iteration scheme is not.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nsmod/error.hpp"
#include "nsmod/space.hpp"

namespace nsmod {

struct MinNormResult {
  DualVector xi_tilde;     // -sum_i lambda_i xi_i
  Eigen::VectorXd lambda;  // convex weights
  double norm_sq = 0.0;    // ||xi_tilde||_*^2
  int iterations = 0;
};

struct SimplexQpResult {
  Eigen::VectorXd lambda;
  double value = 0.0;  // lambda^T G lambda
  double gap = 0.0;    // value - min_i (G lambda)_i, the certificate residual
  int iterations = 0;
  bool converged = false;
};

class MinNormSolverError : public Error {
 public:
  MinNormSolverError(const std::string& what, MinNormResult best)
      : Error(what), best_(std::move(best)) {}
  const MinNormResult& best() const { return best_; }

 private:
  MinNormResult best_;
};

inline double default_min_norm_tol(const Eigen::MatrixXd& gram) {
  return 1e-12 * (1.0 + gram.diagonal().maxCoeff());
}

inline int default_min_norm_cap(Eigen::Index m) {
  return static_cast<int>(10 * m * m + 100);
}

namespace detail {

inline double certificate_gap(const Eigen::MatrixXd& G, const Eigen::VectorXd& lambda,
                              double* value = nullptr) {
  const Eigen::VectorXd g = G * lambda;
  const double v = lambda.dot(g);
  if (value) *value = v;
  return v - g.minCoeff();
}

// Minimizer of a^T G_SS a subject to sum(a) = 1, via the KKT system. A
// rank-revealing solve keeps duplicated or affinely dependent generators
// from breaking the step.
inline Eigen::VectorXd affine_minimizer(const Eigen::MatrixXd& G, const std::vector<Eigen::Index>& S) {
  const auto n = static_cast<Eigen::Index>(S.size());
  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + 1, n + 1);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b < n; ++b) kkt(a, b) = G(S[a], S[b]);
    kkt(a, n) = 1.0;
    kkt(n, a) = 1.0;
  }
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + 1);
  rhs(n) = 1.0;
  Eigen::VectorXd sol = kkt.completeOrthogonalDecomposition().solve(rhs);
  Eigen::VectorXd alpha = sol.head(n);
  const double s = alpha.sum();
  if (std::abs(s) > 0.0) alpha /= s;
  return alpha;
}

}  // namespace detail

/// Minimizes lambda^T G lambda over the unit simplex. G must be symmetric PSD.
inline SimplexQpResult solve_simplex_qp(const Eigen::MatrixXd& G_in, double tol, int max_iter) {
  const Eigen::Index m = G_in.rows();
  if (m == 0 || G_in.cols() != m) throw ArgumentError("simplex QP needs a square nonempty Gram matrix");
  if (!(tol > 0.0)) throw ArgumentError("min-norm tolerance must be positive");

  SimplexQpResult out;
  const double scale = std::max(G_in.diagonal().maxCoeff(), 0.0);
  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(m);
  Eigen::Index start = 0;
  G_in.diagonal().minCoeff(&start);
  lambda(start) = 1.0;
  if (scale == 0.0) {
    // Every generator is zero.
    out.lambda = lambda;
    out.converged = true;
    return out;
  }
  const Eigen::MatrixXd G = G_in / scale;
  const double stol = tol / scale;

  std::vector<Eigen::Index> S{start};
  int iter = 0;
  Eigen::Index last_added = -1;

  // Wolfe major/minor cycles.
  while (iter < max_iter) {
    const Eigen::VectorXd g = G * lambda;
    const double value = lambda.dot(g);
    Eigen::Index j = 0;
    g.minCoeff(&j);
    if (value - g(j) <= stol) break;
    if (std::find(S.begin(), S.end(), j) != S.end() || j == last_added) break;  // stalled by round-off
    S.push_back(j);
    last_added = j;

    while (iter < max_iter) {
      ++iter;
      const Eigen::VectorXd alpha = detail::affine_minimizer(G, S);
      if ((alpha.array() > 0.0).all()) {
        lambda.setZero();
        for (std::size_t a = 0; a < S.size(); ++a) lambda(S[a]) = alpha(static_cast<Eigen::Index>(a));
        break;
      }
      double theta = 1.0;
      for (std::size_t a = 0; a < S.size(); ++a) {
        const double al = alpha(static_cast<Eigen::Index>(a));
        const double la = lambda(S[a]);
        if (al <= 0.0 && la - al > 0.0) theta = std::min(theta, la / (la - al));
      }
      for (std::size_t a = 0; a < S.size(); ++a)
        lambda(S[a]) += theta * (alpha(static_cast<Eigen::Index>(a)) - lambda(S[a]));
      std::vector<Eigen::Index> kept;
      for (Eigen::Index s : S) {
        if (lambda(s) > 1e-15)
          kept.push_back(s);
        else
          lambda(s) = 0.0;
      }
      if (kept.empty()) {
        kept.push_back(j);
        lambda.setZero();
        lambda(j) = 1.0;
      }
      lambda /= lambda.sum();
      S = std::move(kept);
    }
  }

  // Pairwise Frank-Wolfe polish: move weight from the worst support vertex
  // to the best vertex with an exact line search.
  double value = 0.0;
  double gap = detail::certificate_gap(G, lambda, &value);
  while (gap > stol && iter < max_iter) {
    ++iter;
    const Eigen::VectorXd g = G * lambda;
    Eigen::Index to = 0;
    g.minCoeff(&to);
    Eigen::Index from = -1;
    double worst = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < m; ++i) {
      if (lambda(i) > 0.0 && g(i) > worst) {
        worst = g(i);
        from = i;
      }
    }
    if (from < 0 || from == to) break;
    const double curv = G(to, to) - 2.0 * G(to, from) + G(from, from);
    const double slope = g(to) - g(from);  // directional derivative / 2
    double gamma = lambda(from);
    if (curv > 0.0) gamma = std::min(gamma, -slope / curv);
    if (!(gamma > 0.0)) break;
    lambda(to) += gamma;
    lambda(from) -= gamma;
    if (lambda(from) < 1e-300) lambda(from) = 0.0;
    gap = detail::certificate_gap(G, lambda, &value);
  }

  lambda = lambda.cwiseMax(0.0);
  lambda /= lambda.sum();
  gap = detail::certificate_gap(G, lambda, &value);
  out.lambda = lambda;
  out.value = std::max(0.0, value) * scale;
  out.gap = gap * scale;
  out.iterations = iter;
  out.converged = gap <= stol;
  return out;
}

/// Dual Gram matrix G_ij = <xi_i, xi_j>_*, symmetrized.
inline Eigen::MatrixXd dual_gram(std::span<const DualVector> xis) {
  const auto m = static_cast<Eigen::Index>(xis.size());
  const InnerProductSpace& space = space_of(xis.front());
  const Eigen::Index n = space.dim();
  Eigen::MatrixXd coeffs(n, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    space.check(xis[static_cast<std::size_t>(i)]);
    coeffs.col(i) = xis[static_cast<std::size_t>(i)].coeffs;
  }
  Eigen::MatrixXd reps(n, m);
  for (Eigen::Index i = 0; i < m; ++i) reps.col(i) = space.solve_gram(coeffs.col(i));
  const Eigen::MatrixXd G = coeffs.transpose() * reps;
  return 0.5 * (G + G.transpose());
}

/// xi_tilde = argmin over -conv(xis) of ||xi||_*^2. A non-positive `tol`
/// selects the default 1e-12 * (1 + max diag G).
inline MinNormResult min_norm_point(std::span<const DualVector> xis, double tol = 0.0) {
  if (xis.empty()) throw ArgumentError("min_norm_point needs at least one generator");
  const Eigen::MatrixXd G = dual_gram(xis);
  if (tol <= 0.0) tol = default_min_norm_tol(G);
  const SimplexQpResult qp = solve_simplex_qp(G, tol, default_min_norm_cap(G.rows()));

  const InnerProductSpace& space = space_of(xis.front());
  Eigen::VectorXd combo = Eigen::VectorXd::Zero(space.dim());
  for (std::size_t i = 0; i < xis.size(); ++i) combo += qp.lambda(static_cast<Eigen::Index>(i)) * xis[i].coeffs;

  MinNormResult result{space.dual(-combo), qp.lambda, qp.value, qp.iterations};
  if (!qp.converged)
    throw MinNormSolverError("min-norm QP did not reach its certificate (gap " + std::to_string(qp.gap) +
                                 ", tol " + std::to_string(tol) + ")",
                             std::move(result));
  return result;
}

inline MinNormResult min_norm_point(const std::vector<DualVector>& xis, double tol = 0.0) {
  return min_norm_point(std::span<const DualVector>(xis.data(), xis.size()), tol);
}

}  // namespace nsmod
