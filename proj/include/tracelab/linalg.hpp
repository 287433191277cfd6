#pragma once

// Dense symmetric kernels: Cholesky, cyclic Jacobi eigensolver, generalized
// symmetric eigenproblems by Cholesky congruence, SPD fractional powers and a
// one-sided Jacobi SVD. Eigen supplies storage, products and triangular
// solves; every factorization here is written out explicitly.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tracelab/error.hpp"

namespace tracelab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

namespace linalg {

inline constexpr double kSymmetryTol = 1e-12;
inline constexpr double kPivotTol = 1e-14;
inline constexpr double kJacobiTol = 1e-13;
inline constexpr int kMaxSweeps = 60;

struct EigenDecomposition {
  Vector values;                // ascending
  Matrix vectors;               // columns
  std::optional<Matrix> metric; // vectors are metric-orthonormal when set
};

/// Thin singular value decomposition M = U diag(values) V^T, values descending.
struct SvdResult {
  Matrix left;
  Vector values;
  Matrix right;
};

inline void require_square(const Matrix& s, const char* what) {
  if (s.rows() != s.cols())
    throw Error(Errc::shape_mismatch, std::string(what) + ": matrix is " +
                                          std::to_string(s.rows()) + "x" +
                                          std::to_string(s.cols()));
}

inline bool is_symmetric(const Matrix& s, double tol = kSymmetryTol) {
  if (s.rows() != s.cols()) return false;
  const double scale = s.norm();
  return (s - s.transpose()).norm() <= tol * scale;
}

inline void require_symmetric(const Matrix& s, const char* what) {
  require_square(s, what);
  if (!is_symmetric(s))
    throw Error(Errc::not_symmetric, std::string(what) + ": asymmetry " +
                                         std::to_string((s - s.transpose()).norm()));
}

inline Matrix symmetrize(const Matrix& s) { return 0.5 * (s + s.transpose()); }

inline Matrix cholesky(const Matrix& s) {
  require_symmetric(s, "cholesky");
  const Index n = s.rows();
  Matrix l = Matrix::Zero(n, n);
  if (n == 0) return l;
  const double threshold = kPivotTol * s.diagonal().maxCoeff();
  for (Index j = 0; j < n; ++j) {
    const double pivot = s(j, j) - l.row(j).head(j).squaredNorm();
    if (!(pivot > threshold) || !(pivot > 0.0))
      throw Error(Errc::not_positive_definite,
                  "pivot " + std::to_string(pivot) + " at index " + std::to_string(j));
    const double ljj = std::sqrt(pivot);
    l(j, j) = ljj;
    const Index rest = n - j - 1;
    if (rest > 0) {
      l.col(j).tail(rest) =
          (s.col(j).tail(rest) - l.block(j + 1, 0, rest, j) * l.row(j).head(j).transpose()) / ljj;
    }
  }
  return l;
}

// Largest-magnitude entry (first one on ties) made positive.
inline void fix_signs(Matrix& vectors) {
  for (Index k = 0; k < vectors.cols(); ++k) {
    Index best = 0;
    double best_abs = -1.0;
    for (Index i = 0; i < vectors.rows(); ++i) {
      const double a = std::abs(vectors(i, k));
      if (a > best_abs) {
        best_abs = a;
        best = i;
      }
    }
    if (vectors.rows() > 0 && vectors(best, k) < 0.0) vectors.col(k) *= -1.0;
  }
}

namespace detail {

inline double off_diagonal_norm(const Matrix& a) {
  double sum = 0.0;
  for (Index j = 0; j < a.cols(); ++j)
    for (Index i = 0; i < a.rows(); ++i)
      if (i != j) sum += a(i, j) * a(i, j);
  return std::sqrt(sum);
}

}  // namespace detail

/// Cyclic Jacobi. Stops once the off-diagonal Frobenius norm drops below
/// kJacobiTol * ||S||_F; throws NoConvergence after kMaxSweeps sweeps.
inline EigenDecomposition sym_eig(const Matrix& s) {
  require_symmetric(s, "sym_eig");
  const Index n = s.rows();
  Matrix a = symmetrize(s);
  Matrix v = Matrix::Identity(n, n);
  const double stop = kJacobiTol * a.norm();
  // Entries below this cannot keep the off-diagonal norm above `stop`.
  const double negligible = n > 0 ? stop / (2.0 * static_cast<double>(n)) : 0.0;

  bool converged = false;
  for (int sweep = 0; sweep <= kMaxSweeps; ++sweep) {
    if (detail::off_diagonal_norm(a) <= stop) {
      converged = true;
      break;
    }
    if (sweep == kMaxSweeps) break;
    for (Index p = 0; p + 1 < n; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        const double apq = a(q, p);
        if (std::abs(apq) <= negligible) continue;
        const double app = a(p, p);
        const double aqq = a(q, q);
        const double tau = (aqq - app) / (2.0 * apq);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double sn = t * c;

        double* colp = a.col(p).data();
        double* colq = a.col(q).data();
        for (Index k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          const double akp = colp[k];
          const double akq = colq[k];
          colp[k] = c * akp - sn * akq;
          colq[k] = sn * akp + c * akq;
        }
        for (Index k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          a(p, k) = colp[k];
          a(q, k) = colq[k];
        }
        a(p, p) = app - t * apq;
        a(q, q) = aqq + t * apq;
        a(p, q) = 0.0;
        a(q, p) = 0.0;

        double* vp = v.col(p).data();
        double* vq = v.col(q).data();
        for (Index k = 0; k < n; ++k) {
          const double x = vp[k];
          const double y = vq[k];
          vp[k] = c * x - sn * y;
          vq[k] = sn * x + c * y;
        }
      }
    }
  }
  if (!converged)
    throw Error(Errc::no_convergence, "sym_eig: sweep limit reached for n=" + std::to_string(n));

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index i, Index j) { return a(i, i) < a(j, j); });
  EigenDecomposition out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Index k = 0; k < n; ++k) {
    out.values(k) = a(order[k], order[k]);
    out.vectors.col(k) = v.col(order[k]);
  }
  fix_signs(out.vectors);
  return out;
}

/// Solves S v = lambda G v through G = L L^T and the symmetric problem
/// L^{-1} S L^{-T}. Vectors come back G-orthonormal.
inline EigenDecomposition gen_sym_eig(const Matrix& s, const Matrix& g) {
  require_symmetric(s, "gen_sym_eig");
  if (s.rows() != g.rows() || g.rows() != g.cols())
    throw Error(Errc::shape_mismatch, "gen_sym_eig: S and G differ in shape");
  const Matrix l = cholesky(g);
  const auto lower = l.triangularView<Eigen::Lower>();
  Matrix c = lower.solve(s);                           // L^{-1} S
  c = lower.solve(c.transpose().eval()).transpose();   // L^{-1} S L^{-T}
  EigenDecomposition reduced = sym_eig(symmetrize(c));
  EigenDecomposition out;
  out.values = std::move(reduced.values);
  out.vectors = l.transpose().triangularView<Eigen::Upper>().solve(reduced.vectors);
  fix_signs(out.vectors);
  out.metric = g;
  return out;
}

inline Matrix spd_power(const Matrix& s, double p) {
  (void)cholesky(s);  // SPD gate
  const EigenDecomposition eig = sym_eig(s);
  if (eig.values.size() > 0 && !(eig.values.minCoeff() > 0.0))
    throw Error(Errc::not_positive_definite, "spd_power: nonpositive eigenvalue");
  const Vector powered = eig.values.array().pow(p).matrix();
  return eig.vectors * powered.asDiagonal() * eig.vectors.transpose();
}

/// One-sided (Hestenes) Jacobi SVD. Singular values are obtained without
/// squaring, so tiny ones keep full absolute accuracy relative to ||M||.
inline SvdResult thin_svd(const Matrix& m) {
  const bool transposed = m.rows() < m.cols();
  Matrix w = transposed ? Matrix(m.transpose()) : m;
  const Index rows = w.rows();
  const Index cols = w.cols();
  Matrix v = Matrix::Identity(cols, cols);
  constexpr double eps = 1e-15;

  bool converged = cols < 2;
  for (int sweep = 0; sweep < kMaxSweeps && !converged; ++sweep) {
    bool rotated = false;
    for (Index p = 0; p + 1 < cols; ++p) {
      for (Index q = p + 1; q < cols; ++q) {
        double* wp = w.col(p).data();
        double* wq = w.col(q).data();
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (Index k = 0; k < rows; ++k) {
          alpha += wp[k] * wp[k];
          beta += wq[k] * wq[k];
          gamma += wp[k] * wq[k];
        }
        if (gamma == 0.0 || std::abs(gamma) <= eps * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double sn = c * t;
        for (Index k = 0; k < rows; ++k) {
          const double x = wp[k];
          const double y = wq[k];
          wp[k] = c * x - sn * y;
          wq[k] = sn * x + c * y;
        }
        double* vp = v.col(p).data();
        double* vq = v.col(q).data();
        for (Index k = 0; k < cols; ++k) {
          const double x = vp[k];
          const double y = vq[k];
          vp[k] = c * x - sn * y;
          vq[k] = sn * x + c * y;
        }
      }
    }
    converged = !rotated;
  }
  if (!converged)
    throw Error(Errc::no_convergence, "thin_svd: sweep limit reached");

  Vector norms(cols);
  for (Index j = 0; j < cols; ++j) norms(j) = w.col(j).norm();
  std::vector<Index> order(static_cast<std::size_t>(cols));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index i, Index j) { return norms(i) > norms(j); });

  Matrix u(rows, cols);
  Matrix vv(cols, cols);
  Vector values(cols);
  for (Index k = 0; k < cols; ++k) {
    const Index j = order[k];
    values(k) = norms(j);
    if (norms(j) > 0.0)
      u.col(k) = w.col(j) / norms(j);
    else
      u.col(k).setZero();
    vv.col(k) = v.col(j);
  }
  if (transposed) return {std::move(vv), std::move(values), std::move(u)};
  return {std::move(u), std::move(values), std::move(vv)};
}

}  // namespace linalg
}  // namespace tracelab
