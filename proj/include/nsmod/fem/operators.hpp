#pragma once

// P1 stiffness (weak -Laplacian) and mass matrices.

#include <array>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "nsmod/error.hpp"
#include "nsmod/fem/mesh.hpp"

namespace nsmod::fem {

using SparseMatrix = Eigen::SparseMatrix<double>;

class AssemblyError : public Error {
 public:
  using Error::Error;
};

struct FEMOperators {
  SparseMatrix stiffness_full;  // all nodes, before Dirichlet elimination
  SparseMatrix stiffness;       // interior rows and columns only
  SparseMatrix mass;            // all nodes
  std::vector<int> interior;        // interior position -> node id
  std::vector<int> interior_index;  // node id -> interior position, -1 on the boundary
};

inline Eigen::Matrix3d local_stiffness(const Eigen::Vector2d& p0, const Eigen::Vector2d& p1, const Eigen::Vector2d& p2) {
  const double area = signed_area(p0, p1, p2);
  if (!(area > 0.0)) throw AssemblyError("degenerate or clockwise triangle");
  // Rows: gradient of each barycentric coordinate times 2 * area.
  Eigen::Matrix<double, 3, 2> grad;
  grad << p1.y() - p2.y(), p2.x() - p1.x(),
          p2.y() - p0.y(), p0.x() - p2.x(),
          p0.y() - p1.y(), p1.x() - p0.x();
  return grad * grad.transpose() / (4.0 * area);
}

inline Eigen::Matrix3d local_mass(const Eigen::Vector2d& p0, const Eigen::Vector2d& p1, const Eigen::Vector2d& p2) {
  const double area = signed_area(p0, p1, p2);
  if (!(area > 0.0)) throw AssemblyError("degenerate or clockwise triangle");
  Eigen::Matrix3d m = Eigen::Matrix3d::Constant(1.0);
  m.diagonal().setConstant(2.0);
  return m * area / 12.0;
}

inline FEMOperators assemble_operators(const Mesh& mesh) {
  const auto n = static_cast<Eigen::Index>(mesh.num_nodes());
  std::vector<Eigen::Triplet<double>> k_trip;
  std::vector<Eigen::Triplet<double>> m_trip;
  k_trip.reserve(9 * mesh.num_triangles());
  m_trip.reserve(9 * mesh.num_triangles());
  for (const auto& t : mesh.triangles) {
    const Eigen::Matrix3d ke = local_stiffness(mesh.nodes[t[0]], mesh.nodes[t[1]], mesh.nodes[t[2]]);
    const Eigen::Matrix3d me = local_mass(mesh.nodes[t[0]], mesh.nodes[t[1]], mesh.nodes[t[2]]);
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        k_trip.emplace_back(t[a], t[b], ke(a, b));
        m_trip.emplace_back(t[a], t[b], me(a, b));
      }
    }
  }
  FEMOperators ops;
  ops.stiffness_full.resize(n, n);
  ops.stiffness_full.setFromTriplets(k_trip.begin(), k_trip.end());
  ops.mass.resize(n, n);
  ops.mass.setFromTriplets(m_trip.begin(), m_trip.end());

  ops.interior_index.assign(mesh.num_nodes(), -1);
  for (std::size_t i = 0; i < mesh.num_nodes(); ++i) {
    if (!mesh.boundary[i]) {
      ops.interior_index[i] = static_cast<int>(ops.interior.size());
      ops.interior.push_back(static_cast<int>(i));
    }
  }
  const auto ni = static_cast<Eigen::Index>(ops.interior.size());
  std::vector<Eigen::Triplet<double>> kii;
  for (Eigen::Index col = 0; col < ops.stiffness_full.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(ops.stiffness_full, col); it; ++it) {
      const int r = ops.interior_index[static_cast<std::size_t>(it.row())];
      const int c = ops.interior_index[static_cast<std::size_t>(it.col())];
      if (r >= 0 && c >= 0) kii.emplace_back(r, c, it.value());
    }
  }
  ops.stiffness.resize(ni, ni);
  ops.stiffness.setFromTriplets(kii.begin(), kii.end());
  return ops;
}

}  // namespace nsmod::fem
