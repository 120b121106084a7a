#include "demf/fem.hpp"

#include <cmath>
#include <string>

#include "demf/errors.hpp"

namespace demf {

namespace {

struct ElementGeometry {
  double area;
  // Gradients of the three barycentric basis functions.
  std::array<std::array<double, 2>, 3> grad;
};

ElementGeometry element_geometry(const Mesh2D& mesh, int t) {
  const auto& tri = mesh.triangles()[t];
  const auto& p0 = mesh.vertices()[tri[0]];
  const auto& p1 = mesh.vertices()[tri[1]];
  const auto& p2 = mesh.vertices()[tri[2]];
  const double det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
  const double area = 0.5 * std::abs(det);
  if (!(area > 0.0) || !std::isfinite(area)) {
    throw InputError("degenerate triangle " + std::to_string(t));
  }
  ElementGeometry g;
  g.area = area;
  // grad lambda_k = rot90(p_{k+2} - p_{k+1}) / det
  const std::array<const Point2*, 3> p{&p0, &p1, &p2};
  for (int k = 0; k < 3; ++k) {
    const Point2& a = *p[(k + 1) % 3];
    const Point2& b = *p[(k + 2) % 3];
    g.grad[k] = {(a[1] - b[1]) / det, (b[0] - a[0]) / det};
  }
  return g;
}

}  // namespace

SparseSymmetric assemble_mass(const Mesh2D& mesh) {
  std::vector<Triplet> triplets;
  triplets.reserve(9 * static_cast<std::size_t>(mesh.triangle_count()));
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const double area = element_geometry(mesh, t).area;
    const auto& tri = mesh.triangles()[t];
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        triplets.emplace_back(tri[a], tri[b], a == b ? area / 6.0 : area / 12.0);
      }
    }
  }
  return SparseSymmetric::from_triplets(mesh.vertex_count(), triplets);
}

SparseSymmetric assemble_stiffness(const Mesh2D& mesh) {
  std::vector<Triplet> triplets;
  triplets.reserve(9 * static_cast<std::size_t>(mesh.triangle_count()));
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const ElementGeometry g = element_geometry(mesh, t);
    const auto& tri = mesh.triangles()[t];
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        const double value = g.area * (g.grad[a][0] * g.grad[b][0] + g.grad[a][1] * g.grad[b][1]);
        triplets.emplace_back(tri[a], tri[b], value);
      }
    }
  }
  return SparseSymmetric::from_triplets(mesh.vertex_count(), triplets);
}

SparseSymmetric lumped_mass(const SparseSymmetric& mass) {
  const Eigen::VectorXd sums = mass.row_sums();
  for (Index i = 0; i < sums.size(); ++i) {
    if (!(sums[i] > 0.0)) {
      throw InputError("mass matrix row " + std::to_string(i) + " has non-positive sum");
    }
  }
  return SparseSymmetric::diagonal(sums);
}

SpatialFem assemble_spatial(const Mesh2D& mesh) {
  SparseSymmetric c = assemble_mass(mesh);
  SparseSymmetric c_lumped = lumped_mass(c);
  return {std::move(c), std::move(c_lumped), assemble_stiffness(mesh)};
}

TemporalFem temporal_matrices(const TimeGrid& grid, TemporalMass mass) {
  const int n = grid.count();
  const double h = grid.step();
  std::vector<Triplet> m0;
  std::vector<Triplet> m2;
  for (int j = 0; j < n; ++j) {
    const bool end = (j == 0 || j == n - 1);
    if (mass == TemporalMass::consistent) {
      m0.emplace_back(j, j, end ? h / 3.0 : 2.0 * h / 3.0);
    } else {
      m0.emplace_back(j, j, end ? h / 2.0 : h);
    }
    m2.emplace_back(j, j, end ? 1.0 / h : 2.0 / h);
    if (j + 1 < n) {
      if (mass == TemporalMass::consistent) {
        m0.emplace_back(j, j + 1, h / 6.0);
        m0.emplace_back(j + 1, j, h / 6.0);
      }
      m2.emplace_back(j, j + 1, -1.0 / h);
      m2.emplace_back(j + 1, j, -1.0 / h);
    }
  }
  const std::vector<Triplet> m1{{0, 0, 0.5}, {n - 1, n - 1, 0.5}};
  return {SparseSymmetric::from_triplets(n, m0), SparseSymmetric::from_triplets(n, m1),
          SparseSymmetric::from_triplets(n, m2), mass, h};
}

}  // namespace demf
