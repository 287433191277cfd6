#pragma once

// Solution operators of the Robin and Dirichlet problems and the harmonic
// part E1* = E* - E0* of the Robin solve.

#include <string>

#include "tracelab/fem/discretization.hpp"

namespace tracelab::fem {

struct PoissonOperators {
  WeightedOperator E;       // identity, H1d -> L2
  WeightedOperator Estar;   // Robin solve (K + T^T Mb T)^{-1} M, L2 -> H1d
  WeightedOperator E0star;  // zero-trace Dirichlet solve, L2 -> H1d
  WeightedOperator E1star;  // Estar - E0star
  WeightedOperator E1;      // adjoint of E1star, H1d -> L2
  WeightedOperator F1;      // pseudoinverse of E1, L2 -> H1d
  SvdFactors e1_svd;
  std::string warning;
};

inline PoissonOperators poisson_operators(const Discretization& d) {
  const WeightedSpace& h1 = d.spaces.h1;
  const WeightedSpace& l2 = d.spaces.l2;
  PoissonOperators p;
  p.E = WeightedOperator(h1, l2, Matrix::Identity(d.dofs(), d.dofs()));
  p.Estar = adjoint(p.E);

  Matrix e0 = Matrix::Zero(d.dofs(), d.dofs());
  if (d.interior.empty()) {
    p.warning = "NoInteriorVertices: Dirichlet solve is zero";
  } else {
    const Matrix x = detail::interior_solve(d, detail::select_rows(d.mats.M, d.interior));
    for (std::size_t i = 0; i < d.interior.size(); ++i) e0.row(d.interior[i]) = x.row(static_cast<Index>(i));
  }
  p.E0star = WeightedOperator(l2, h1, std::move(e0));
  p.E1star = p.Estar - p.E0star;
  p.E1 = adjoint(p.E1star);
  p.e1_svd = weighted_svd(p.E1);
  p.F1 = pseudoinverse_from(p.E1, p.e1_svd);
  return p;
}

}  // namespace tracelab::fem
