#pragma once

#include <string>
#include <vector>

#include "tracelab/fem/assembly.hpp"
#include "tracelab/fem/mesh.hpp"

namespace tracelab::fem {

/// Mesh, assembled matrices and the trace setting, built once and shared by
/// every downstream computation.
struct Discretization {
  DomainSpec spec;
  Mesh mesh;
  FemMatrices mats;
  TraceSpaces spaces;
  std::vector<int> interior;

  Index dofs() const { return mesh.vertex_count(); }
  Index boundary_dofs() const { return mesh.boundary_count(); }
};

inline Discretization discretize(const DomainSpec& spec, Mesh mesh) {
  Discretization d;
  d.spec = spec;
  d.mesh = std::move(mesh);
  d.mats = assemble(d.mesh);
  d.spaces = spaces_and_trace(d.mats);
  d.interior = d.mesh.interior_vertices();
  return d;
}

inline Discretization discretize(const DomainSpec& spec) { return discretize(spec, build_mesh(spec)); }

inline Discretization discretize(const std::string& domain, int refine) {
  return discretize(parse_domain(domain, refine));
}

namespace detail {

inline Matrix select(const Matrix& m, const std::vector<int>& rows, const std::vector<int>& cols) {
  Matrix out(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) out(static_cast<Index>(i), static_cast<Index>(j)) = m(rows[i], cols[j]);
  return out;
}

inline Matrix select_rows(const Matrix& m, const std::vector<int>& rows) {
  Matrix out(static_cast<Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = m.row(rows[i]);
  return out;
}

/// Solves K_II X = rhs with the interior stiffness block.
inline Matrix interior_solve(const Discretization& d, const Matrix& rhs) {
  const Matrix kii = select(d.mats.K, d.interior, d.interior);
  const Matrix l = linalg::cholesky(linalg::symmetrize(kii));
  return l.transpose().triangularView<Eigen::Upper>().solve(l.triangularView<Eigen::Lower>().solve(rhs));
}

}  // namespace detail

}  // namespace tracelab::fem
