#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace demf {

using Point2 = std::array<double, 2>;
using TriangleIndices = std::array<int, 3>;

/// Piecewise-linear triangulation of a polygonal domain.
///
/// Construction validates: indices in range, strictly positive triangle areas,
/// no duplicate vertices (within 1e-12 of the diameter), every vertex used, and
/// edge-connectivity of the triangles.
class Mesh2D {
 public:
  Mesh2D(std::vector<Point2> vertices, std::vector<TriangleIndices> triangles);

  const std::vector<Point2>& vertices() const { return vertices_; }
  const std::vector<TriangleIndices>& triangles() const { return triangles_; }
  int vertex_count() const { return static_cast<int>(vertices_.size()); }
  int triangle_count() const { return static_cast<int>(triangles_.size()); }

  double triangle_area(int t) const;
  double total_area() const;
  double diameter() const { return diameter_; }

  struct Location {
    int triangle;
    std::array<double, 3> barycentric;
  };
  /// Containing triangle and barycentric weights, or nullopt outside the mesh.
  std::optional<Location> locate(const Point2& p) const;

  /// Index of the vertex closest to p.
  int nearest_vertex(const Point2& p) const;

 private:
  std::vector<Point2> vertices_;
  std::vector<TriangleIndices> triangles_;
  double diameter_ = 0.0;
  std::array<double, 4> bbox_{};  // xmin, ymin, xmax, ymax
};

/// Regular temporal grid t_j = start + j * step, j = 0..count-1.
class TimeGrid {
 public:
  TimeGrid(int count, double step, double start = 0.0);

  int count() const { return count_; }
  double step() const { return step_; }
  double start() const { return start_; }
  double time(int j) const { return start_ + j * step_; }
  double end() const { return time(count_ - 1); }

  /// True when step * kappa exceeds 0.5, where the temporal discretisation gets coarse.
  bool coarse_for(double kappa) const { return step_ * kappa > 0.5; }

 private:
  int count_;
  double step_;
  double start_;
};

enum class DiagonalPattern {
  /// Every cell split along the same diagonal.
  uniform,
  /// Split direction alternates in a checkerboard ("union jack"); interior
  /// vertices alternate between 8 and 4 mesh neighbours.
  alternating,
};

/// Regular square mesh on [lo - margin, hi + margin]^2. The region [lo, hi] is
/// divided into `cells` cells per side; the margin is padded with whole cells of
/// the same width (rounded up).
struct StructuredGridSpec {
  int cells = 10;
  double lo = 0.0;
  double hi = 1.0;
  double margin = 0.0;
  DiagonalPattern pattern = DiagonalPattern::alternating;
};

Mesh2D structured_grid(const StructuredGridSpec& spec);

/// Vertex index of grid node (ix, iy) on a mesh produced by structured_grid,
/// counted from the lower-left corner of the padded domain.
int structured_vertex(const StructuredGridSpec& spec, int ix, int iy);
int structured_points_per_side(const StructuredGridSpec& spec);
int structured_padding_cells(const StructuredGridSpec& spec);

/// Plain text: vertex count, "x y" lines, triangle count, "i j k" lines (0-based).
Mesh2D read_mesh(std::istream& is);
Mesh2D read_mesh_file(const std::string& path);
void write_mesh(std::ostream& os, const Mesh2D& mesh);

}  // namespace demf
