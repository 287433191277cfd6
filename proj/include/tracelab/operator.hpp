#pragma once

// Weighted-operator algebra. A WeightedSpace is R^n with the inner product
// (x, y) = x^T G y; every adjoint, pseudoinverse and fractional power below
// is taken relative to the Grams of the spaces involved.

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <utility>

#include "tracelab/linalg.hpp"

namespace tracelab {

class WeightedSpace {
 public:
  WeightedSpace() : WeightedSpace(Matrix(0, 0), "empty") {}

  /// Throws NotSymmetric / NotPositiveDefinite when `gram` is not SPD.
  WeightedSpace(Matrix gram, std::string label) {
    auto data = std::make_shared<Data>();
    data->chol = linalg::cholesky(gram);
    data->gram = std::move(gram);
    data->label = std::move(label);
    data_ = std::move(data);
  }

  static WeightedSpace euclidean(Index dim, std::string label = "euclidean") {
    return WeightedSpace(Matrix::Identity(dim, dim), std::move(label));
  }

  Index dim() const { return data_->gram.rows(); }
  const Matrix& gram() const { return data_->gram; }
  const Matrix& chol() const { return data_->chol; }
  const std::string& label() const { return data_->label; }

  double inner(const Vector& x, const Vector& y) const { return x.dot(data_->gram * y); }
  double norm(const Vector& x) const { return std::sqrt(std::max(0.0, inner(x, x))); }

  /// G^{-1} X through the stored Cholesky factor.
  Matrix solve(const Matrix& x) const {
    const auto lower = data_->chol.triangularView<Eigen::Lower>();
    return data_->chol.transpose().triangularView<Eigen::Upper>().solve(lower.solve(x));
  }

  bool same_as(const WeightedSpace& other) const { return data_ == other.data_; }

 private:
  struct Data {
    Matrix gram;
    Matrix chol;
    std::string label;
  };
  std::shared_ptr<const Data> data_;
};

class WeightedOperator {
 public:
  WeightedOperator() = default;

  WeightedOperator(WeightedSpace domain, WeightedSpace codomain, Matrix matrix)
      : domain_(std::move(domain)), codomain_(std::move(codomain)), matrix_(std::move(matrix)) {
    if (matrix_.rows() != codomain_.dim() || matrix_.cols() != domain_.dim())
      throw Error(Errc::shape_mismatch,
                  "operator matrix " + std::to_string(matrix_.rows()) + "x" +
                      std::to_string(matrix_.cols()) + " between spaces of dim " +
                      std::to_string(domain_.dim()) + " -> " + std::to_string(codomain_.dim()));
  }

  static WeightedOperator identity(const WeightedSpace& space) {
    return {space, space, Matrix::Identity(space.dim(), space.dim())};
  }
  static WeightedOperator zero(const WeightedSpace& domain, const WeightedSpace& codomain) {
    return {domain, codomain, Matrix::Zero(codomain.dim(), domain.dim())};
  }

  const WeightedSpace& domain() const { return domain_; }
  const WeightedSpace& codomain() const { return codomain_; }
  const Matrix& matrix() const { return matrix_; }

  Vector apply(const Vector& x) const { return matrix_ * x; }

 private:
  WeightedSpace domain_;
  WeightedSpace codomain_;
  Matrix matrix_;
};

inline void require_same_dim(const WeightedSpace& a, const WeightedSpace& b, const char* what) {
  if (a.dim() != b.dim())
    throw Error(Errc::shape_mismatch, std::string(what) + ": dimension " + std::to_string(a.dim()) +
                                          " vs " + std::to_string(b.dim()));
}

/// a ∘ b
inline WeightedOperator compose(const WeightedOperator& a, const WeightedOperator& b) {
  require_same_dim(a.domain(), b.codomain(), "compose");
  return {b.domain(), a.codomain(), a.matrix() * b.matrix()};
}

inline WeightedOperator operator*(const WeightedOperator& a, const WeightedOperator& b) {
  return compose(a, b);
}

inline WeightedOperator operator+(const WeightedOperator& a, const WeightedOperator& b) {
  require_same_dim(a.domain(), b.domain(), "sum");
  require_same_dim(a.codomain(), b.codomain(), "sum");
  return {a.domain(), a.codomain(), a.matrix() + b.matrix()};
}

inline WeightedOperator operator-(const WeightedOperator& a, const WeightedOperator& b) {
  require_same_dim(a.domain(), b.domain(), "difference");
  require_same_dim(a.codomain(), b.codomain(), "difference");
  return {a.domain(), a.codomain(), a.matrix() - b.matrix()};
}

inline WeightedOperator operator*(double c, const WeightedOperator& a) {
  return {a.domain(), a.codomain(), c * a.matrix()};
}

inline double frobenius(const WeightedOperator& a) { return a.matrix().norm(); }

/// matrix(A*) = G_dom^{-1} A^T G_cod
inline WeightedOperator adjoint(const WeightedOperator& a) {
  Matrix m = a.domain().solve(a.matrix().transpose() * a.codomain().gram());
  return {a.codomain(), a.domain(), std::move(m)};
}

/// Truncated weighted singular system: A right_k = values_k left_k, with
/// left orthonormal in the codomain Gram and right in the domain Gram.
struct SvdFactors {
  Matrix left;
  Vector values;
  Matrix right;
  Index rank = 0;
};

inline double default_rank_tol(const WeightedOperator& a, double largest) {
  return 1e-12 * static_cast<double>(std::max(a.domain().dim(), a.codomain().dim())) * largest;
}

// Works on the Euclidean image Lc^T A Ld^{-T} (G = L L^T), so the Gram weights are
// absorbed before the Jacobi SVD and no normal equations are formed.
inline SvdFactors weighted_svd(const WeightedOperator& a, std::optional<double> tol = std::nullopt) {
  if (tol && *tol < 0.0) throw Error(Errc::invalid_spec, "weighted_svd: negative tolerance");
  const Matrix& ld = a.domain().chol();
  const Matrix& lc = a.codomain().chol();
  SvdFactors out;
  if (a.matrix().size() == 0) {
    out.left.resize(a.codomain().dim(), 0);
    out.right.resize(a.domain().dim(), 0);
    return out;
  }
  const Matrix y = ld.triangularView<Eigen::Lower>().solve(Matrix(a.matrix().transpose()));
  const Matrix hat = lc.transpose() * y.transpose();
  linalg::SvdResult svd = linalg::thin_svd(hat);

  const double largest = svd.values.size() > 0 ? svd.values(0) : 0.0;
  const double cutoff = tol ? *tol : default_rank_tol(a, largest);
  Index rank = 0;
  while (rank < svd.values.size() && svd.values(rank) > cutoff && svd.values(rank) > 0.0) ++rank;

  out.rank = rank;
  out.values = svd.values.head(rank);
  out.left = lc.transpose().triangularView<Eigen::Upper>().solve(svd.left.leftCols(rank));
  out.right = ld.transpose().triangularView<Eigen::Upper>().solve(svd.right.leftCols(rank));
  return out;
}

inline double op_norm(const WeightedOperator& a) {
  const SvdFactors svd = weighted_svd(a);
  return svd.rank > 0 ? svd.values(0) : 0.0;
}

/// B = sum_k values_k^{-1} right_k left_k^T G_cod
inline WeightedOperator pseudoinverse_from(const WeightedOperator& a, const SvdFactors& svd) {
  const Vector inv = svd.values.cwiseInverse();
  Matrix m = svd.right * inv.asDiagonal() * (svd.left.transpose() * a.codomain().gram());
  return {a.codomain(), a.domain(), std::move(m)};
}

inline WeightedOperator pseudoinverse(const WeightedOperator& a, std::optional<double> tol = std::nullopt) {
  return pseudoinverse_from(a, weighted_svd(a, tol));
}

/// Singular system of A^+ read off from that of A: roles of left and right
/// swap, values invert, order reverses to stay descending.
inline SvdFactors pseudoinverse_svd(const SvdFactors& svd) {
  SvdFactors out;
  out.rank = svd.rank;
  out.values = svd.values.reverse().cwiseInverse();
  out.left = svd.right.rowwise().reverse();
  out.right = svd.left.rowwise().reverse();
  return out;
}

/// G-orthogonal projector onto span(basis) for a basis orthonormal in `space`.
inline Matrix orthogonal_projector(const WeightedSpace& space, const Matrix& basis) {
  return basis * (basis.transpose() * space.gram());
}

/// ||X - X*||_F for an endomorphism X of `space`.
inline double self_adjoint_defect(const WeightedSpace& space, const Matrix& x) {
  return (x - space.solve(x.transpose() * space.gram())).norm();
}

struct PenroseResiduals {
  double aba = 0.0;    // ||ABA - A||_F
  double bab = 0.0;    // ||BAB - B||_F
  double ab_sym = 0.0; // AB self-adjoint on the codomain of A
  double ba_sym = 0.0; // BA self-adjoint on the domain of A

  double max() const { return std::max({aba, bab, ab_sym, ba_sym}); }
};

inline PenroseResiduals penrose_residuals(const WeightedOperator& a, const WeightedOperator& b) {
  require_same_dim(b.domain(), a.codomain(), "penrose_residuals");
  require_same_dim(b.codomain(), a.domain(), "penrose_residuals");
  const Matrix ab = a.matrix() * b.matrix();
  const Matrix ba = b.matrix() * a.matrix();
  PenroseResiduals r;
  r.aba = (ab * a.matrix() - a.matrix()).norm();
  r.bab = (b.matrix() * ab - b.matrix()).norm();
  r.ab_sym = self_adjoint_defect(a.codomain(), ab);
  r.ba_sym = self_adjoint_defect(a.domain(), ba);
  return r;
}

/// Penrose residuals scaled by 1 + ||A||_F; (A, B) is accepted as a pair when
/// this stays below `tol`.
inline double penrose_defect(const WeightedOperator& a, const WeightedOperator& b) {
  return penrose_residuals(a, b).max() / (1.0 + frobenius(a));
}

inline constexpr double kPairTol = 1e-8;

inline void require_pseudoinverse_pair(const WeightedOperator& a, const WeightedOperator& b) {
  if (b.domain().dim() != a.codomain().dim() || b.codomain().dim() != a.domain().dim())
    throw Error(Errc::not_a_pseudoinverse_pair, "spaces of B are not the reverse of those of A");
  const double defect = penrose_defect(a, b);
  if (!(defect <= kPairTol))
    throw Error(Errc::not_a_pseudoinverse_pair, "Penrose residual " + std::to_string(defect));
}

enum class Side { domain, codomain };

/// Fractional powers of the graph operators I + B*B (on B's domain) and
/// I + BB* (on B's codomain), evaluated from one weighted SVD of B:
///   (I + B*B)^{-s} = I + R diag((1 + sigma^2)^{-s} - 1) R^T G_dom.
class GraphPowers {
 public:
  explicit GraphPowers(WeightedOperator b) : b_(std::move(b)), svd_(weighted_svd(b_)) {}
  GraphPowers(WeightedOperator b, SvdFactors svd) : b_(std::move(b)), svd_(std::move(svd)) {}

  const WeightedOperator& op() const { return b_; }
  const SvdFactors& svd() const { return svd_; }

  /// (I + B*B)^{-s} or (I + BB*)^{-s}.
  WeightedOperator power(double s, Side side) const {
    const WeightedSpace& space = side == Side::domain ? b_.domain() : b_.codomain();
    const Matrix& basis = side == Side::domain ? svd_.right : svd_.left;
    Vector shift(svd_.rank);
    for (Index k = 0; k < svd_.rank; ++k) {
      const double sigma = svd_.values(k);
      shift(k) = std::pow(1.0 + sigma * sigma, -s) - 1.0;
    }
    Matrix m = Matrix::Identity(space.dim(), space.dim());
    if (svd_.rank > 0) m += basis * shift.asDiagonal() * (basis.transpose() * space.gram());
    return {space, space, std::move(m)};
  }

 private:
  WeightedOperator b_;
  SvdFactors svd_;
};

/// `b` must act between the spaces of `a` in reverse.
inline WeightedOperator frac_graph_power(const WeightedOperator& a, const WeightedOperator& b, double s,
                                         Side side) {
  require_same_dim(b.domain(), a.codomain(), "frac_graph_power");
  require_same_dim(b.codomain(), a.domain(), "frac_graph_power");
  return GraphPowers(b).power(s, side);
}

struct TbPair {
  WeightedOperator tb;      // B (I+B*B)^{-1/2} + A* (I+B*B)^{-1/2}, codomain(A) -> domain(A)
  WeightedOperator tb_star; // B* (I+BB*)^{-1/2} + A (I+BB*)^{-1/2}, domain(A) -> codomain(A)
};

inline TbPair t_b(const WeightedOperator& a, const WeightedOperator& b, const GraphPowers& b_powers) {
  require_pseudoinverse_pair(a, b);
  const WeightedOperator on_b_domain = b_powers.power(0.5, Side::domain);
  const WeightedOperator on_b_codomain = b_powers.power(0.5, Side::codomain);
  const WeightedOperator a_star = adjoint(a);
  const WeightedOperator b_star = adjoint(b);
  return {b * on_b_domain + a_star * on_b_domain, b_star * on_b_codomain + a * on_b_codomain};
}

/// Throws NotAPseudoinversePair unless b is the Moore-Penrose inverse of a.
inline TbPair t_b(const WeightedOperator& a, const WeightedOperator& b) {
  return t_b(a, b, GraphPowers(b));
}

}  // namespace tracelab
