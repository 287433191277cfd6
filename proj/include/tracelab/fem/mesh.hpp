#pragma once

// Triangulated polygons with a single closed boundary loop, built by uniform
// quadrisection from a coarse base mesh. Domain specs: `square` ([0,1]^2),
// `lshape` ([0,1]^2 minus [0.5,1]^2) and `ngon:<sides>` (regular polygon
// inscribed in the unit circle; refined boundary midpoints are pushed back
// onto the circle).

#include <array>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "tracelab/csv.hpp"
#include "tracelab/error.hpp"

namespace tracelab::fem {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct Mesh {
  std::vector<Point> vertices;
  std::vector<std::array<int, 3>> triangles;  // counterclockwise
  std::vector<int> boundary_loop;             // closed, counterclockwise

  int vertex_count() const { return static_cast<int>(vertices.size()); }
  int boundary_count() const { return static_cast<int>(boundary_loop.size()); }

  /// Vertices not on the boundary loop, ascending.
  std::vector<int> interior_vertices() const {
    std::vector<char> on_boundary(vertices.size(), 0);
    for (int b : boundary_loop) on_boundary[static_cast<std::size_t>(b)] = 1;
    std::vector<int> out;
    for (int i = 0; i < vertex_count(); ++i)
      if (!on_boundary[static_cast<std::size_t>(i)]) out.push_back(i);
    return out;
  }
};

struct DomainSpec {
  enum class Kind { square, lshape, ngon };
  Kind kind = Kind::square;
  int sides = 0;  // ngon only
  int refine = 0;

  std::string name() const {
    switch (kind) {
      case Kind::square: return "square";
      case Kind::lshape: return "lshape";
      case Kind::ngon: return "ngon:" + std::to_string(sides);
    }
    return "?";
  }
};

/// Parses `square`, `lshape` or `ngon:<sides>`.
inline DomainSpec parse_domain(const std::string& text, int refine = 0) {
  DomainSpec spec;
  spec.refine = refine;
  if (text == "square") {
    spec.kind = DomainSpec::Kind::square;
  } else if (text == "lshape") {
    spec.kind = DomainSpec::Kind::lshape;
  } else if (text.rfind("ngon:", 0) == 0) {
    const std::string digits = text.substr(5);
    int sides = 0;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), sides);
    if (ec != std::errc{} || ptr != digits.data() + digits.size() || digits.empty())
      throw Error(Errc::invalid_spec, "bad polygon side count in '" + text + "'");
    if (sides < 3) throw Error(Errc::invalid_spec, "ngon needs at least 3 sides");
    spec.kind = DomainSpec::Kind::ngon;
    spec.sides = sides;
  } else {
    throw Error(Errc::invalid_spec, "unknown domain '" + text + "'");
  }
  return spec;
}

inline double signed_area(const Mesh& mesh, const std::array<int, 3>& t) {
  const Point& a = mesh.vertices[static_cast<std::size_t>(t[0])];
  const Point& b = mesh.vertices[static_cast<std::size_t>(t[1])];
  const Point& c = mesh.vertices[static_cast<std::size_t>(t[2])];
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

inline double edge_length(const Point& a, const Point& b) { return std::hypot(b.x - a.x, b.y - a.y); }

inline double mesh_area(const Mesh& mesh) {
  double sum = 0.0;
  for (const auto& t : mesh.triangles) sum += signed_area(mesh, t);
  return sum;
}

inline double mesh_perimeter(const Mesh& mesh) {
  double sum = 0.0;
  const int nb = mesh.boundary_count();
  for (int i = 0; i < nb; ++i)
    sum += edge_length(mesh.vertices[static_cast<std::size_t>(mesh.boundary_loop[static_cast<std::size_t>(i)])],
                       mesh.vertices[static_cast<std::size_t>(mesh.boundary_loop[static_cast<std::size_t>((i + 1) % nb)])]);
  return sum;
}

namespace detail {

using Edge = std::pair<int, int>;

inline Edge edge_key(int a, int b) { return a < b ? Edge{a, b} : Edge{b, a}; }

inline std::map<Edge, int> edge_incidence(const Mesh& mesh) {
  std::map<Edge, int> count;
  for (const auto& t : mesh.triangles)
    for (int e = 0; e < 3; ++e) ++count[edge_key(t[static_cast<std::size_t>(e)], t[static_cast<std::size_t>((e + 1) % 3)])];
  return count;
}

}  // namespace detail

/// Topology and orientation checks: positive triangle areas, boundary loop
/// equal to the set of edges with one incident triangle, simple cycle.
inline void validate(const Mesh& mesh) {
  const int n = mesh.vertex_count();
  for (const auto& t : mesh.triangles) {
    for (int v : t)
      if (v < 0 || v >= n) throw Error(Errc::invalid_spec, "triangle index out of range");
    if (!(signed_area(mesh, t) > 1e-14))
      throw Error(Errc::degenerate_triangle, "triangle area " + std::to_string(signed_area(mesh, t)));
  }
  const int nb = mesh.boundary_count();
  if (nb < 3) throw Error(Errc::invalid_spec, "boundary loop shorter than 3");
  std::set<int> seen;
  for (int b : mesh.boundary_loop) {
    if (b < 0 || b >= n) throw Error(Errc::invalid_spec, "boundary index out of range");
    if (!seen.insert(b).second) throw Error(Errc::invalid_spec, "boundary loop revisits a vertex");
  }
  const auto incidence = detail::edge_incidence(mesh);
  std::set<detail::Edge> boundary_edges;
  for (const auto& [edge, count] : incidence) {
    if (count > 2) throw Error(Errc::invalid_spec, "edge shared by more than two triangles");
    if (count == 1) boundary_edges.insert(edge);
  }
  if (static_cast<int>(boundary_edges.size()) != nb)
    throw Error(Errc::invalid_spec, "boundary loop does not cover the boundary edges");
  for (int i = 0; i < nb; ++i) {
    const auto key = detail::edge_key(mesh.boundary_loop[static_cast<std::size_t>(i)],
                                      mesh.boundary_loop[static_cast<std::size_t>((i + 1) % nb)]);
    if (!boundary_edges.count(key)) throw Error(Errc::invalid_spec, "boundary loop edge is not a boundary edge");
  }
}

/// One quadrisection level. New vertices are appended in order of first
/// appearance while walking triangles; boundary midpoints are optionally
/// projected radially onto the unit circle.
inline Mesh quadrisect(const Mesh& mesh, bool project_to_circle) {
  Mesh out;
  out.vertices = mesh.vertices;
  std::set<detail::Edge> boundary_edges;
  const int nb = mesh.boundary_count();
  for (int i = 0; i < nb; ++i)
    boundary_edges.insert(detail::edge_key(mesh.boundary_loop[static_cast<std::size_t>(i)],
                                           mesh.boundary_loop[static_cast<std::size_t>((i + 1) % nb)]));
  std::map<detail::Edge, int> midpoint;
  auto mid = [&](int a, int b) {
    const auto key = detail::edge_key(a, b);
    if (auto it = midpoint.find(key); it != midpoint.end()) return it->second;
    const Point& p = out.vertices[static_cast<std::size_t>(a)];
    const Point& q = out.vertices[static_cast<std::size_t>(b)];
    Point m{0.5 * (p.x + q.x), 0.5 * (p.y + q.y)};
    if (project_to_circle && boundary_edges.count(key)) {
      const double r = std::hypot(m.x, m.y);
      m = {m.x / r, m.y / r};
    }
    out.vertices.push_back(m);
    const int index = static_cast<int>(out.vertices.size()) - 1;
    midpoint.emplace(key, index);
    return index;
  };
  out.triangles.reserve(mesh.triangles.size() * 4);
  for (const auto& t : mesh.triangles) {
    const int ab = mid(t[0], t[1]);
    const int bc = mid(t[1], t[2]);
    const int ca = mid(t[2], t[0]);
    out.triangles.push_back({t[0], ab, ca});
    out.triangles.push_back({ab, t[1], bc});
    out.triangles.push_back({ca, bc, t[2]});
    out.triangles.push_back({ab, bc, ca});
  }
  out.boundary_loop.reserve(static_cast<std::size_t>(2 * nb));
  for (int i = 0; i < nb; ++i) {
    const int a = mesh.boundary_loop[static_cast<std::size_t>(i)];
    const int b = mesh.boundary_loop[static_cast<std::size_t>((i + 1) % nb)];
    out.boundary_loop.push_back(a);
    out.boundary_loop.push_back(midpoint.at(detail::edge_key(a, b)));
  }
  return out;
}

inline Mesh base_mesh(const DomainSpec& spec) {
  Mesh m;
  switch (spec.kind) {
    case DomainSpec::Kind::square:
      m.vertices = {{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5}};
      m.triangles = {{0, 1, 4}, {1, 2, 4}, {2, 3, 4}, {3, 0, 4}};
      m.boundary_loop = {0, 1, 2, 3};
      break;
    case DomainSpec::Kind::lshape: {
      // three half-size squares, each split into four around its centre
      m.vertices = {{0, 0}, {0.5, 0}, {1, 0}, {1, 0.5}, {0.5, 0.5}, {0.5, 1}, {0, 1}, {0, 0.5},
                    {0.25, 0.25}, {0.75, 0.25}, {0.25, 0.75}};
      const std::array<std::array<int, 4>, 3> cells{{{0, 1, 4, 7}, {1, 2, 3, 4}, {7, 4, 5, 6}}};
      const std::array<int, 3> centres{8, 9, 10};
      for (std::size_t c = 0; c < cells.size(); ++c)
        for (std::size_t k = 0; k < 4; ++k) m.triangles.push_back({cells[c][k], cells[c][(k + 1) % 4], centres[c]});
      m.boundary_loop = {0, 1, 2, 3, 4, 5, 6, 7};
      break;
    }
    case DomainSpec::Kind::ngon: {
      if (spec.sides < 3) throw Error(Errc::invalid_spec, "ngon needs at least 3 sides");
      // The triangle is its own mesh (no interior vertex); larger polygons are
      // fanned around the origin.
      const int offset = spec.sides == 3 ? 0 : 1;
      if (offset) m.vertices.push_back({0, 0});
      for (int k = 0; k < spec.sides; ++k) {
        const double theta = 2.0 * std::numbers::pi * k / spec.sides;
        m.vertices.push_back({std::cos(theta), std::sin(theta)});
        m.boundary_loop.push_back(offset + k);
      }
      if (offset) {
        for (int k = 0; k < spec.sides; ++k) m.triangles.push_back({0, 1 + k, 1 + (k + 1) % spec.sides});
      } else {
        m.triangles.push_back({0, 1, 2});
      }
      break;
    }
  }
  return m;
}

inline Mesh build_mesh(const DomainSpec& spec) {
  if (spec.refine < 0) throw Error(Errc::invalid_spec, "negative refinement level");
  Mesh m = base_mesh(spec);
  for (int level = 0; level < spec.refine; ++level) m = quadrisect(m, spec.kind == DomainSpec::Kind::ngon);
  validate(m);
  return m;
}

inline Mesh build_mesh(const std::string& domain, int refine) { return build_mesh(parse_domain(domain, refine)); }

// Plain-text exchange format:
//   vertices N / N lines "x y" / triangles M / M lines "i j k" / boundary L / one line of L indices
// Coordinates use 17 significant digits, so a write/read round trip is exact.

inline void write_mesh(std::ostream& os, const Mesh& mesh) {
  os << "vertices " << mesh.vertices.size() << '\n';
  for (const Point& p : mesh.vertices) os << format_double(p.x) << ' ' << format_double(p.y) << '\n';
  os << "triangles " << mesh.triangles.size() << '\n';
  for (const auto& t : mesh.triangles) os << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  os << "boundary " << mesh.boundary_loop.size() << '\n';
  for (std::size_t i = 0; i < mesh.boundary_loop.size(); ++i) os << (i ? " " : "") << mesh.boundary_loop[i];
  os << '\n';
}

inline Mesh read_mesh(std::istream& is) {
  auto expect_header = [&](const char* word) {
    std::string token;
    std::size_t count = 0;
    if (!(is >> token >> count) || token != word)
      throw Error(Errc::io_error, std::string("mesh file: expected '") + word + " <count>'");
    return count;
  };
  Mesh mesh;
  const std::size_t nv = expect_header("vertices");
  mesh.vertices.resize(nv);
  for (auto& p : mesh.vertices) {
    std::string xs, ys;
    if (!(is >> xs >> ys)) throw Error(Errc::io_error, "mesh file: truncated vertex list");
    p = {std::stod(xs), std::stod(ys)};
  }
  const std::size_t nt = expect_header("triangles");
  mesh.triangles.resize(nt);
  for (auto& t : mesh.triangles)
    if (!(is >> t[0] >> t[1] >> t[2])) throw Error(Errc::io_error, "mesh file: truncated triangle list");
  const std::size_t nb = expect_header("boundary");
  mesh.boundary_loop.resize(nb);
  for (auto& b : mesh.boundary_loop)
    if (!(is >> b)) throw Error(Errc::io_error, "mesh file: truncated boundary list");
  validate(mesh);
  return mesh;
}

}  // namespace tracelab::fem
