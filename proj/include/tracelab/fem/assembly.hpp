#pragma once

// P1 assembly. Boundary quantities (Mb, Kb, rows of T) are indexed by
// position along the boundary loop, not by vertex number.

#include <array>
#include <string>

#include "tracelab/fem/mesh.hpp"
#include "tracelab/operator.hpp"

namespace tracelab::fem {

struct FemMatrices {
  Matrix K;   // stiffness, n x n
  Matrix M;   // domain mass, n x n
  Matrix Mb;  // boundary mass, nb x nb
  Matrix Kb;  // boundary arclength stiffness, nb x nb
  Matrix T;   // trace selection, nb x n

  /// K + T^T Mb T.
  Matrix h1_gram() const { return K + T.transpose() * Mb * T; }
};

inline FemMatrices assemble(const Mesh& mesh) {
  const Index n = mesh.vertex_count();
  const Index nb = mesh.boundary_count();
  FemMatrices f;
  f.K = Matrix::Zero(n, n);
  f.M = Matrix::Zero(n, n);
  f.Mb = Matrix::Zero(nb, nb);
  f.Kb = Matrix::Zero(nb, nb);
  f.T = Matrix::Zero(nb, n);

  for (const auto& t : mesh.triangles) {
    const double area = signed_area(mesh, t);
    if (!(area > 1e-14)) throw Error(Errc::degenerate_triangle, "triangle area " + std::to_string(area));
    const Point& p0 = mesh.vertices[static_cast<std::size_t>(t[0])];
    const Point& p1 = mesh.vertices[static_cast<std::size_t>(t[1])];
    const Point& p2 = mesh.vertices[static_cast<std::size_t>(t[2])];
    // gradients of the barycentric hats, scaled by 2*area
    const std::array<std::array<double, 2>, 3> g{{{p1.y - p2.y, p2.x - p1.x},
                                                  {p2.y - p0.y, p0.x - p2.x},
                                                  {p0.y - p1.y, p1.x - p0.x}}};
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < 3; ++j) {
        const double dot = g[i][0] * g[j][0] + g[i][1] * g[j][1];
        f.K(t[i], t[j]) += dot / (4.0 * area);
        f.M(t[i], t[j]) += area / 12.0 * (i == j ? 2.0 : 1.0);
      }
    }
  }

  for (Index k = 0; k < nb; ++k) {
    const Index next = (k + 1) % nb;
    const double len = edge_length(mesh.vertices[static_cast<std::size_t>(mesh.boundary_loop[static_cast<std::size_t>(k)])],
                                   mesh.vertices[static_cast<std::size_t>(mesh.boundary_loop[static_cast<std::size_t>(next)])]);
    f.Mb(k, k) += len / 3.0;
    f.Mb(next, next) += len / 3.0;
    f.Mb(k, next) += len / 6.0;
    f.Mb(next, k) += len / 6.0;
    f.Kb(k, k) += 1.0 / len;
    f.Kb(next, next) += 1.0 / len;
    f.Kb(k, next) -= 1.0 / len;
    f.Kb(next, k) -= 1.0 / len;
    f.T(k, mesh.boundary_loop[static_cast<std::size_t>(k)]) = 1.0;
  }
  return f;
}

struct TraceSpaces {
  WeightedSpace h1;   // gram K + T^T Mb T
  WeightedSpace l2b;  // gram Mb
  WeightedSpace l2;   // gram M
  WeightedOperator gamma;
};

inline TraceSpaces spaces_and_trace(const FemMatrices& f) {
  WeightedSpace h1(linalg::symmetrize(f.h1_gram()), "H1d");
  WeightedSpace l2b(f.Mb, "L2b");
  WeightedSpace l2(f.M, "L2");
  WeightedOperator gamma(h1, l2b, f.T);
  return {std::move(h1), std::move(l2b), std::move(l2), std::move(gamma)};
}

}  // namespace tracelab::fem
