#include "demf/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include "demf/errors.hpp"

namespace demf {

namespace {

double signed_area(const Point2& a, const Point2& b, const Point2& c) {
  return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]));
}

int find_root(std::vector<int>& parent, int i) {
  while (parent[i] != i) {
    parent[i] = parent[parent[i]];
    i = parent[i];
  }
  return i;
}

}  // namespace

Mesh2D::Mesh2D(std::vector<Point2> vertices, std::vector<TriangleIndices> triangles)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)) {
  if (vertices_.empty() || triangles_.empty()) {
    throw InputError("mesh needs at least one triangle");
  }
  bbox_ = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
           -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const auto& v : vertices_) {
    if (!std::isfinite(v[0]) || !std::isfinite(v[1])) {
      throw InputError("mesh vertex has non-finite coordinates");
    }
    bbox_[0] = std::min(bbox_[0], v[0]);
    bbox_[1] = std::min(bbox_[1], v[1]);
    bbox_[2] = std::max(bbox_[2], v[0]);
    bbox_[3] = std::max(bbox_[3], v[1]);
  }
  diameter_ = std::hypot(bbox_[2] - bbox_[0], bbox_[3] - bbox_[1]);

  const int n = vertex_count();
  std::vector<char> used(n, 0);
  for (int t = 0; t < triangle_count(); ++t) {
    for (int k = 0; k < 3; ++k) {
      const int v = triangles_[t][k];
      if (v < 0 || v >= n) {
        throw InputError("triangle " + std::to_string(t) + " references vertex " +
                         std::to_string(v) + " out of range");
      }
      used[v] = 1;
    }
    const auto& tri = triangles_[t];
    const double area = std::abs(signed_area(vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]));
    if (!(area > 1e-14 * diameter_ * diameter_)) {
      throw InputError("triangle " + std::to_string(t) + " is degenerate (area " +
                       std::to_string(area) + ")");
    }
  }
  for (int v = 0; v < n; ++v) {
    if (!used[v]) {
      throw InputError("vertex " + std::to_string(v) + " is not part of any triangle");
    }
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return vertices_[a] < vertices_[b]; });
  const double tol = 1e-12 * diameter_;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const auto& p = vertices_[order[i]];
      const auto& q = vertices_[order[j]];
      if (q[0] - p[0] > tol) {
        break;
      }
      if (std::abs(q[1] - p[1]) <= tol) {
        throw InputError("vertices " + std::to_string(order[i]) + " and " +
                         std::to_string(order[j]) + " coincide");
      }
    }
  }

  std::vector<int> parent(triangle_count());
  std::iota(parent.begin(), parent.end(), 0);
  std::map<std::pair<int, int>, int> edge_owner;
  for (int t = 0; t < triangle_count(); ++t) {
    for (int k = 0; k < 3; ++k) {
      int a = triangles_[t][k];
      int b = triangles_[t][(k + 1) % 3];
      if (a > b) {
        std::swap(a, b);
      }
      auto [it, inserted] = edge_owner.emplace(std::make_pair(a, b), t);
      if (!inserted) {
        parent[find_root(parent, t)] = find_root(parent, it->second);
      }
    }
  }
  const int root = find_root(parent, 0);
  for (int t = 1; t < triangle_count(); ++t) {
    if (find_root(parent, t) != root) {
      throw InputError("mesh is not edge-connected (triangle " + std::to_string(t) + ")");
    }
  }
}

double Mesh2D::triangle_area(int t) const {
  const auto& tri = triangles_.at(t);
  return std::abs(signed_area(vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]));
}

double Mesh2D::total_area() const {
  double area = 0.0;
  for (int t = 0; t < triangle_count(); ++t) {
    area += triangle_area(t);
  }
  return area;
}

std::optional<Mesh2D::Location> Mesh2D::locate(const Point2& p) const {
  const double tol = 1e-12;
  const double slack = tol * diameter_;
  if (p[0] < bbox_[0] - slack || p[0] > bbox_[2] + slack || p[1] < bbox_[1] - slack ||
      p[1] > bbox_[3] + slack) {
    return std::nullopt;
  }
  for (int t = 0; t < triangle_count(); ++t) {
    const auto& tri = triangles_[t];
    const auto& a = vertices_[tri[0]];
    const auto& b = vertices_[tri[1]];
    const auto& c = vertices_[tri[2]];
    if (p[0] < std::min({a[0], b[0], c[0]}) - slack || p[0] > std::max({a[0], b[0], c[0]}) + slack ||
        p[1] < std::min({a[1], b[1], c[1]}) - slack || p[1] > std::max({a[1], b[1], c[1]}) + slack) {
      continue;
    }
    const double area = signed_area(a, b, c);
    std::array<double, 3> w{signed_area(p, b, c) / area, signed_area(a, p, c) / area,
                            signed_area(a, b, p) / area};
    if (w[0] >= -tol && w[1] >= -tol && w[2] >= -tol) {
      for (double& x : w) {
        x = std::max(x, 0.0);
      }
      const double sum = w[0] + w[1] + w[2];
      for (double& x : w) {
        x /= sum;
      }
      return Location{t, w};
    }
  }
  return std::nullopt;
}

int Mesh2D::nearest_vertex(const Point2& p) const {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int v = 0; v < vertex_count(); ++v) {
    const double d = std::hypot(vertices_[v][0] - p[0], vertices_[v][1] - p[1]);
    if (d < best_d) {
      best_d = d;
      best = v;
    }
  }
  return best;
}

TimeGrid::TimeGrid(int count, double step, double start) : count_(count), step_(step), start_(start) {
  if (count < 3) {
    throw InputError("time grid needs at least 3 points, got " + std::to_string(count));
  }
  if (!std::isfinite(step) || step <= 0.0 || !std::isfinite(start)) {
    throw InputError("time grid step must be positive and finite");
  }
}

int structured_padding_cells(const StructuredGridSpec& spec) {
  if (spec.cells < 1 || !(spec.hi > spec.lo) || !(spec.margin >= 0.0)) {
    throw InputError("invalid structured grid specification");
  }
  const double width = (spec.hi - spec.lo) / spec.cells;
  return static_cast<int>(std::ceil(spec.margin / width - 1e-9));
}

int structured_points_per_side(const StructuredGridSpec& spec) {
  return spec.cells + 2 * structured_padding_cells(spec) + 1;
}

int structured_vertex(const StructuredGridSpec& spec, int ix, int iy) {
  return iy * structured_points_per_side(spec) + ix;
}

Mesh2D structured_grid(const StructuredGridSpec& spec) {
  const int pad = structured_padding_cells(spec);
  const int side = structured_points_per_side(spec);
  const double width = (spec.hi - spec.lo) / spec.cells;
  const double origin = spec.lo - pad * width;
  std::vector<Point2> vertices;
  vertices.reserve(static_cast<std::size_t>(side) * side);
  for (int iy = 0; iy < side; ++iy) {
    for (int ix = 0; ix < side; ++ix) {
      vertices.push_back({origin + ix * width, origin + iy * width});
    }
  }
  std::vector<TriangleIndices> triangles;
  triangles.reserve(static_cast<std::size_t>(2 * (side - 1) * (side - 1)));
  for (int iy = 0; iy + 1 < side; ++iy) {
    for (int ix = 0; ix + 1 < side; ++ix) {
      const int a = iy * side + ix;
      const int b = a + 1;
      const int c = a + side + 1;
      const int d = a + side;
      const bool flip = spec.pattern == DiagonalPattern::alternating && (ix + iy) % 2 == 1;
      if (flip) {
        triangles.push_back({a, b, d});
        triangles.push_back({b, c, d});
      } else {
        triangles.push_back({a, b, c});
        triangles.push_back({a, c, d});
      }
    }
  }
  return Mesh2D(std::move(vertices), std::move(triangles));
}

Mesh2D read_mesh(std::istream& is) {
  int line_no = 0;
  std::string line;
  auto next_line = [&]() -> std::istringstream {
    while (std::getline(is, line)) {
      ++line_no;
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos || line[first] == '#') {
        continue;
      }
      return std::istringstream(line);
    }
    throw InputError("mesh file ended early after line " + std::to_string(line_no));
  };
  auto fail = [&](const std::string& what) {
    throw InputError("mesh file line " + std::to_string(line_no) + ": " + what);
  };
  auto read_count = [&](const char* what) {
    auto ls = next_line();
    long count = -1;
    if (!(ls >> count) || count < 0) {
      fail(std::string("expected ") + what + " count");
    }
    return static_cast<std::size_t>(count);
  };

  const std::size_t nv = read_count("vertex");
  std::vector<Point2> vertices(nv);
  for (auto& v : vertices) {
    auto ls = next_line();
    if (!(ls >> v[0] >> v[1])) {
      fail("expected 'x y'");
    }
  }
  const std::size_t nt = read_count("triangle");
  std::vector<TriangleIndices> triangles(nt);
  for (auto& t : triangles) {
    auto ls = next_line();
    if (!(ls >> t[0] >> t[1] >> t[2])) {
      fail("expected 'i j k'");
    }
  }
  return Mesh2D(std::move(vertices), std::move(triangles));
}

Mesh2D read_mesh_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw InputError("cannot open mesh file " + path);
  }
  return read_mesh(in);
}

void write_mesh(std::ostream& os, const Mesh2D& mesh) {
  os << mesh.vertex_count() << '\n' << std::setprecision(17);
  for (const auto& v : mesh.vertices()) {
    os << v[0] << ' ' << v[1] << '\n';
  }
  os << mesh.triangle_count() << '\n';
  for (const auto& t : mesh.triangles()) {
    os << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  }
}

}  // namespace demf
