#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nsmod/error.hpp"

namespace nsmod::fem {

/// Triangulation of the square (-1, 1)^2.
struct Mesh {
  std::vector<Eigen::Vector2d> nodes;
  std::vector<std::array<int, 3>> triangles;  // counterclockwise
  std::vector<char> boundary;                 // per node
  double h_max_target = 0.0;
  int cells_per_axis = 0;

  std::size_t num_nodes() const { return nodes.size(); }
  std::size_t num_triangles() const { return triangles.size(); }
  std::size_t num_boundary() const {
    std::size_t n = 0;
    for (char b : boundary) n += b ? 1 : 0;
    return n;
  }
};

inline double signed_area(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c) {
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
}

/// Cells per axis needed so that the cell diagonal 2*sqrt(2)/n is <= h_max.
inline int cells_for(double h_max) {
  const double n = 2.0 * std::sqrt(2.0) / h_max;
  return std::max(1, static_cast<int>(std::ceil(n - 1e-12)));
}

/// Structured grid: n x n square cells, each cut along its lower-left to
/// upper-right diagonal into two right triangles.
inline Mesh build_mesh(double h_max) {
  if (!(h_max > 0.0)) throw ArgumentError("h_max must be positive");
  if (h_max > 2.0 * std::sqrt(2.0) * (1.0 + 1e-12)) throw ArgumentError("h_max must not exceed 2*sqrt(2)");
  const int n = cells_for(h_max);
  Mesh mesh;
  mesh.h_max_target = h_max;
  mesh.cells_per_axis = n;
  const int side = n + 1;
  mesh.nodes.reserve(static_cast<std::size_t>(side * side));
  mesh.boundary.reserve(static_cast<std::size_t>(side * side));
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      mesh.nodes.emplace_back(-1.0 + 2.0 * i / n, -1.0 + 2.0 * j / n);
      mesh.boundary.push_back(i == 0 || j == 0 || i == n || j == n);
    }
  }
  auto id = [side](int i, int j) { return j * side + i; };
  mesh.triangles.reserve(static_cast<std::size_t>(2 * n * n));
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      mesh.triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      mesh.triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  return mesh;
}

/// Checks orientation, boundary flags and edge lengths; throws ArgumentError.
inline void validate_mesh(const Mesh& mesh) {
  if (mesh.boundary.size() != mesh.nodes.size()) throw ArgumentError("boundary mask size mismatch");
  for (const auto& t : mesh.triangles) {
    for (int v : t)
      if (v < 0 || static_cast<std::size_t>(v) >= mesh.nodes.size()) throw ArgumentError("triangle index out of range");
    const auto& a = mesh.nodes[t[0]];
    const auto& b = mesh.nodes[t[1]];
    const auto& c = mesh.nodes[t[2]];
    if (!(signed_area(a, b, c) > 0.0)) throw ArgumentError("triangle is degenerate or clockwise");
    const double limit = mesh.h_max_target * (1.0 + 1e-12);
    if ((a - b).norm() > limit || (b - c).norm() > limit || (c - a).norm() > limit)
      throw ArgumentError("edge longer than h_max");
  }
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
    const double r = mesh.nodes[i].cwiseAbs().maxCoeff();
    const bool on_edge = std::abs(r - 1.0) <= 1e-12;
    if (mesh.boundary[i] && !on_edge) throw ArgumentError("boundary node " + std::to_string(i) + " off the boundary");
  }
}

}  // namespace nsmod::fem
