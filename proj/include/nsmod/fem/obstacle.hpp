#pragma once

// Bicriteria optimal control of the obstacle problem on (-1, 1)^2:
//
//   J1(u) = 1/2 ||S(u) - y_d||^2_{L2},   J2(u) = C/2 ||u - u_d||^2_{L2},
//
// where y = S(u) solves the discrete obstacle problem
//   min 1/2 y^T K y - (M u)^T y  over interior nodal y <= psi,  y = 0 on the boundary.
//
// Controls live on all nodes and the control space carries the L2 Gram
// matrix M. Subderivatives are returned as functional coefficients, so the
// dual norm is the L2 norm of their Riesz representative.

#include <cmath>
#include <cstddef>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "nsmod/error.hpp"
#include "nsmod/fem/mesh.hpp"
#include "nsmod/fem/operators.hpp"
#include "nsmod/problem.hpp"
#include "nsmod/space.hpp"

namespace nsmod::fem {

inline constexpr double kDefaultControlWeight = 1.5e-2;
inline constexpr double kActiveSetTol = 1e-12;

enum class ObstacleKind { Constant, Piecewise };

inline ObstacleKind parse_obstacle_kind(const std::string& s) {
  if (s == "constant") return ObstacleKind::Constant;
  if (s == "piecewise") return ObstacleKind::Piecewise;
  throw ArgumentError("unknown obstacle kind '" + s + "' (expected constant|piecewise)");
}

/// Nodal interpolation of the benchmark obstacles. Piecewise cases are tested
/// in order: x1 <= 0 && x2 <= 0 -> 1/3, x1 >= 0 && x2 >= 0 -> 1, else 2/3.
inline Eigen::VectorXd make_obstacle(ObstacleKind kind, const Mesh& mesh) {
  Eigen::VectorXd psi(static_cast<Eigen::Index>(mesh.num_nodes()));
  for (std::size_t i = 0; i < mesh.num_nodes(); ++i) {
    const auto& p = mesh.nodes[i];
    double v = 1.0;
    if (kind == ObstacleKind::Piecewise) {
      if (p.x() <= 0.0 && p.y() <= 0.0)
        v = 1.0 / 3.0;
      else if (p.x() >= 0.0 && p.y() >= 0.0)
        v = 1.0;
      else
        v = 2.0 / 3.0;
    }
    psi(static_cast<Eigen::Index>(i)) = v;
  }
  return psi;
}

struct ObstacleState {
  PrimalVector y;                 // nodal state, zero on the boundary
  std::vector<char> active;       // per node; y_i = psi_i enforced
  Eigen::VectorXd residual;       // K y - M u on interior nodes
  Eigen::VectorXd control;        // the u this state was computed for
  int iterations = 0;             // active-set sweeps

  std::size_t active_count() const {
    std::size_t n = 0;
    for (char a : active) n += a ? 1 : 0;
    return n;
  }
};

class ObstacleSolverError : public Error {
 public:
  using Error::Error;
};

class ObstacleControlProblem {
 public:
  ObstacleControlProblem(Mesh mesh, Eigen::VectorXd psi, double control_weight = kDefaultControlWeight,
                         double y_d = 2.0, double u_d = 0.0)
      : data_(std::make_shared<Data>()) {
    validate_mesh(mesh);
    const auto n = static_cast<Eigen::Index>(mesh.num_nodes());
    if (psi.size() != n) throw DimensionError("obstacle has wrong length");
    if (!(control_weight > 0.0)) throw ArgumentError("control weight C must be positive");
    for (std::size_t i = 0; i < mesh.num_nodes(); ++i)
      if (mesh.boundary[i] && psi(static_cast<Eigen::Index>(i)) < 0.0)
        throw ArgumentError("obstacle is negative on the boundary; no admissible state");
    data_->ops = assemble_operators(mesh);
    data_->mesh = std::move(mesh);
    data_->psi = std::move(psi);
    data_->weight = control_weight;
    data_->y_d = Eigen::VectorXd::Constant(n, y_d);
    data_->u_d = Eigen::VectorXd::Constant(n, u_d);
    data_->space = make_space(data_->ops.mass);
  }

  const Mesh& mesh() const { return data_->mesh; }
  const FEMOperators& operators() const { return data_->ops; }
  const Eigen::VectorXd& psi() const { return data_->psi; }
  const Eigen::VectorXd& desired_state() const { return data_->y_d; }
  const Eigen::VectorXd& reference_control() const { return data_->u_d; }
  double control_weight() const { return data_->weight; }

  std::size_t num_objectives() const { return 2; }
  const SpaceHandle& space() const { return data_->space; }

  PrimalVector constant_control(double value) const {
    return data_->space->primal(Eigen::VectorXd::Constant(data_->space->dim(), value));
  }

  /// Primal active-set method on the energy formulation.
  ObstacleState solve_state(const PrimalVector& u) const {
    const auto& d = *data_;
    d.space->check(u);
    const auto& K = d.ops.stiffness;
    const auto ni = static_cast<Eigen::Index>(d.ops.interior.size());
    const Eigen::VectorXd mu = d.ops.mass * u.coeffs;
    Eigen::VectorXd b(ni), psi_i(ni);
    for (Eigen::Index a = 0; a < ni; ++a) {
      b(a) = mu(d.ops.interior[static_cast<std::size_t>(a)]);
      psi_i(a) = d.psi(d.ops.interior[static_cast<std::size_t>(a)]);
    }

    std::vector<char> act(static_cast<std::size_t>(ni), 0);
    Eigen::VectorXd y_i(ni);
    Eigen::VectorXd r(ni);
    const int cap = 5 * static_cast<int>(std::max<Eigen::Index>(ni, 1));
    int it = 0;
    for (;;) {
      ++it;
      y_i = solve_with_active(K, b, psi_i, act);
      r = K * y_i - b;
      bool changed = false;
      for (Eigen::Index a = 0; a < ni; ++a) {
        auto& flag = act[static_cast<std::size_t>(a)];
        if (!flag && y_i(a) > psi_i(a) + kActiveSetTol) {
          flag = 1;
          changed = true;
        } else if (flag && r(a) > kActiveSetTol) {
          flag = 0;
          changed = true;
        }
      }
      if (!changed) break;
      if (it >= cap) throw ObstacleSolverError("active-set iteration did not settle within " + std::to_string(cap) + " sweeps");
    }

    ObstacleState st;
    Eigen::VectorXd y = Eigen::VectorXd::Zero(d.space->dim());
    st.active.assign(d.mesh.num_nodes(), 0);
    for (Eigen::Index a = 0; a < ni; ++a) {
      const int node = d.ops.interior[static_cast<std::size_t>(a)];
      y(node) = y_i(a);
      st.active[static_cast<std::size_t>(node)] = act[static_cast<std::size_t>(a)];
    }
    st.y = d.space->primal(std::move(y));
    st.residual = std::move(r);
    st.control = u.coeffs;
    st.iterations = it;
    return st;
  }

  double tracking_value(const ObstacleState& st) const {
    const Eigen::VectorXd e = st.y.coeffs - data_->y_d;
    return 0.5 * e.dot(data_->ops.mass * e);
  }

  double control_value(const PrimalVector& u) const {
    data_->space->check(u);
    const Eigen::VectorXd e = u.coeffs - data_->u_d;
    return 0.5 * data_->weight * e.dot(data_->ops.mass * e);
  }

  double value(std::size_t i, const PrimalVector& u) const {
    if (i == 0) return tracking_value(solve_state(u));
    if (i == 1) return control_value(u);
    throw ArgumentError("objective index out of range");
  }

  Eigen::VectorXd values(const PrimalVector& u) const { return Eigen::Vector2d(value(0, u), value(1, u)); }

  /// Adjoint-based subderivative of J1 for a state computed from u. Nodes in
  /// contact, including weak contact, are treated as active.
  DualVector tracking_subgradient(const PrimalVector& u, const ObstacleState& st) const {
    const auto& d = *data_;
    d.space->check(u);
    d.space->check(st.y);
    if (st.control.size() != u.coeffs.size() || st.control != u.coeffs)
      throw ArgumentError("obstacle state was not computed for this control");
    const Eigen::VectorXd rhs_full = d.ops.mass * (st.y.coeffs - d.y_d);

    const auto ni = static_cast<Eigen::Index>(d.ops.interior.size());
    std::vector<char> fixed(static_cast<std::size_t>(ni), 0);
    Eigen::VectorXd rhs(ni);
    for (Eigen::Index a = 0; a < ni; ++a) {
      const int node = d.ops.interior[static_cast<std::size_t>(a)];
      rhs(a) = rhs_full(node);
      const bool inactive = !st.active[static_cast<std::size_t>(node)] && st.y.coeffs(node) < d.psi(node);
      fixed[static_cast<std::size_t>(a)] = inactive ? 0 : 1;
    }
    const Eigen::VectorXd p_i = solve_with_active(d.ops.stiffness, rhs, Eigen::VectorXd::Zero(ni), fixed);
    Eigen::VectorXd p = Eigen::VectorXd::Zero(d.space->dim());
    for (Eigen::Index a = 0; a < ni; ++a) p(d.ops.interior[static_cast<std::size_t>(a)]) = p_i(a);
    return d.space->dual(d.ops.mass * p);
  }

  /// C M (u - u_d); its L2 Riesz representative is C (u - u_d).
  DualVector control_subgradient(const PrimalVector& u) const {
    data_->space->check(u);
    return data_->space->dual(data_->weight * (data_->ops.mass * (u.coeffs - data_->u_d)));
  }

  DualVector subgradient(std::size_t i, const PrimalVector& u) const {
    if (i == 0) return tracking_subgradient(u, solve_state(u));
    if (i == 1) return control_subgradient(u);
    throw ArgumentError("objective index out of range");
  }

  /// 1/2 y^T K y - (M u)^T y over interior nodes.
  double energy(const PrimalVector& u, const Eigen::VectorXd& y_nodal) const {
    const auto& d = *data_;
    const Eigen::VectorXd mu = d.ops.mass * u.coeffs;
    const auto ni = static_cast<Eigen::Index>(d.ops.interior.size());
    Eigen::VectorXd yi(ni), bi(ni);
    for (Eigen::Index a = 0; a < ni; ++a) {
      yi(a) = y_nodal(d.ops.interior[static_cast<std::size_t>(a)]);
      bi(a) = mu(d.ops.interior[static_cast<std::size_t>(a)]);
    }
    return 0.5 * yi.dot(d.ops.stiffness * yi) - bi.dot(yi);
  }

 private:
  struct Data {
    Mesh mesh;
    FEMOperators ops;
    Eigen::VectorXd psi;
    Eigen::VectorXd y_d;
    Eigen::VectorXd u_d;
    double weight = kDefaultControlWeight;
    SpaceHandle space;
  };

  // Solves K_FF z_F = b_F - K_FA v_A with z_A = v_A, where A = {fixed}.
  static Eigen::VectorXd solve_with_active(const SparseMatrix& K, const Eigen::VectorXd& b,
                                           const Eigen::VectorXd& fixed_values, const std::vector<char>& fixed) {
    const Eigen::Index n = K.rows();
    std::vector<int> free_index(static_cast<std::size_t>(n), -1);
    int nf = 0;
    for (Eigen::Index a = 0; a < n; ++a)
      if (!fixed[static_cast<std::size_t>(a)]) free_index[static_cast<std::size_t>(a)] = nf++;

    Eigen::VectorXd z(n);
    for (Eigen::Index a = 0; a < n; ++a) z(a) = fixed[static_cast<std::size_t>(a)] ? fixed_values(a) : 0.0;
    if (nf == 0) return z;

    Eigen::VectorXd rhs(nf);
    for (Eigen::Index a = 0; a < n; ++a)
      if (free_index[static_cast<std::size_t>(a)] >= 0) rhs(free_index[static_cast<std::size_t>(a)]) = b(a);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(K.nonZeros()));
    for (Eigen::Index col = 0; col < K.outerSize(); ++col) {
      for (SparseMatrix::InnerIterator it(K, col); it; ++it) {
        const int r = free_index[static_cast<std::size_t>(it.row())];
        const int c = free_index[static_cast<std::size_t>(it.col())];
        if (r >= 0 && c >= 0)
          trip.emplace_back(r, c, it.value());
        else if (r >= 0)
          rhs(r) -= it.value() * z(it.col());
      }
    }
    SparseMatrix kff(nf, nf);
    kff.setFromTriplets(trip.begin(), trip.end());
    Eigen::SimplicialLLT<SparseMatrix> llt(kff);
    if (llt.info() != Eigen::Success) throw ObstacleSolverError("stiffness block factorization failed");
    const Eigen::VectorXd zf = llt.solve(rhs);
    for (Eigen::Index a = 0; a < n; ++a)
      if (free_index[static_cast<std::size_t>(a)] >= 0) z(a) = zf(free_index[static_cast<std::size_t>(a)]);
    return z;
  }

  std::shared_ptr<Data> data_;
};

static_assert(MultiObjectiveProblem<ObstacleControlProblem>);

/// The benchmark configuration: y_d = 2, u_d = 0 on a structured mesh.
inline ObstacleControlProblem make_benchmark(double h_max, ObstacleKind kind,
                                             double control_weight = kDefaultControlWeight) {
  Mesh mesh = build_mesh(h_max);
  Eigen::VectorXd psi = make_obstacle(kind, mesh);
  return ObstacleControlProblem(std::move(mesh), std::move(psi), control_weight);
}

// Free-function forms of the benchmark operations.

inline ObstacleState solve_obstacle(const PrimalVector& u, const ObstacleControlProblem& p) { return p.solve_state(u); }

inline std::pair<double, double> eval_objectives(const PrimalVector& u, const ObstacleControlProblem& p) {
  return {p.tracking_value(p.solve_state(u)), p.control_value(u)};
}

inline DualVector subgrad_J1(const PrimalVector& u, const ObstacleState& st, const ObstacleControlProblem& p) {
  return p.tracking_subgradient(u, st);
}

inline DualVector subgrad_J2(const PrimalVector& u, const ObstacleControlProblem& p) {
  return p.control_subgradient(u);
}

}  // namespace nsmod::fem
