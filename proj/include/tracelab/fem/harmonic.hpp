#pragma once

// Discrete harmonic functions (interior rows of K v vanish), the Steklov
// eigensystem on them, and the spectral fractional norms on the boundary
// curve.

#include <cmath>
#include <string>

#include "tracelab/fem/discretization.hpp"

namespace tracelab::fem {

struct HarmonicBasis {
  Matrix columns;      // n x nb, orthonormal in the H1d Gram
  bool whole_space = false;
  std::string warning;
};

namespace detail {

/// Harmonic extension of each boundary unit vector, columns in boundary-loop
/// order: boundary rows are the identity, interior rows -K_II^{-1} K_IB.
inline Matrix harmonic_extensions(const Discretization& d) {
  const Index n = d.dofs();
  const Index nb = d.boundary_dofs();
  Matrix h = Matrix::Zero(n, nb);
  for (Index j = 0; j < nb; ++j) h(d.mesh.boundary_loop[static_cast<std::size_t>(j)], j) = 1.0;
  if (!d.interior.empty()) {
    const Matrix kib = select(d.mats.K, d.interior, d.mesh.boundary_loop);
    const Matrix x = interior_solve(d, -kib);
    for (std::size_t i = 0; i < d.interior.size(); ++i) h.row(d.interior[i]) = x.row(static_cast<Index>(i));
  }
  return h;
}

}  // namespace detail

inline HarmonicBasis harmonic_basis(const Discretization& d) {
  if (d.boundary_dofs() < 1) throw Error(Errc::invalid_spec, "harmonic_basis: empty boundary");
  HarmonicBasis out;
  const Matrix raw = detail::harmonic_extensions(d);
  const Matrix& g = d.spaces.h1.gram();
  const Matrix l = linalg::cholesky(linalg::symmetrize(raw.transpose() * g * raw));
  out.columns = l.triangularView<Eigen::Lower>().solve(raw.transpose()).transpose();
  if (d.interior.empty()) {
    out.whole_space = true;
    out.warning = "NoInteriorVertices: harmonic subspace is the whole space";
  }
  return out;
}

/// (lambda_k, v_k, z_k) with K v = lambda T^T Mb T v on harmonic v.
struct SteklovSystem {
  Vector lambdas;  // ascending
  Vector sigmas;   // (1 + lambda)^{-1/2}, descending
  Matrix V;        // n x nb, H1d-orthonormal
  Matrix Z;        // nb x nb, Mb-orthonormal; Gamma v_k = sigma_k z_k
};

// In harmonic-extension coordinates the pencil becomes (S, Mb) with S the
// Schur complement of K onto the boundary, so boundary values of the
// eigenvectors are already Mb-orthonormal.
inline SteklovSystem steklov(const Discretization& d) {
  const Matrix raw = detail::harmonic_extensions(d);
  const Matrix schur = linalg::symmetrize(raw.transpose() * d.mats.K * raw);
  const linalg::EigenDecomposition eig = linalg::gen_sym_eig(schur, d.mats.Mb);
  SteklovSystem out;
  out.lambdas = eig.values;
  out.sigmas = (1.0 + eig.values.array()).rsqrt().matrix();
  out.Z = eig.vectors;
  out.V = raw * eig.vectors * out.sigmas.asDiagonal();
  return out;
}

/// Spectral norms of the boundary pair (Kb, Mb):
///   G_s = Mb W diag((1 + mu)^s) W^T Mb,  (mu, W) = gen_sym_eig(Kb, Mb).
class BoundaryFractionalNorms {
 public:
  explicit BoundaryFractionalNorms(const FemMatrices& f)
      : mb_(f.Mb), eig_(linalg::gen_sym_eig(linalg::symmetrize(f.Kb), f.Mb)) {}

  const Vector& mus() const { return eig_.values; }

  Matrix gram(double s) const {
    if (!(s >= 0.0 && s <= 1.0)) throw Error(Errc::s_out_of_range, "boundary norm order " + std::to_string(s));
    Vector weights(eig_.values.size());
    for (Index k = 0; k < weights.size(); ++k) weights(k) = std::pow(1.0 + std::max(0.0, eig_.values(k)), s);
    const Matrix mw = mb_ * eig_.vectors;
    return linalg::symmetrize(mw * weights.asDiagonal() * mw.transpose());
  }

 private:
  Matrix mb_;
  linalg::EigenDecomposition eig_;
};

inline Matrix boundary_fractional_gram(const Discretization& d, double s) {
  if (!(s >= 0.0 && s <= 1.0)) throw Error(Errc::s_out_of_range, "boundary norm order " + std::to_string(s));
  return BoundaryFractionalNorms(d.mats).gram(s);
}

}  // namespace tracelab::fem
