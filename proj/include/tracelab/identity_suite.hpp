#pragma once

// Residual checks for the Moore-Penrose resolvent identities, the T_B
// lemmas and the permutation equality
//   T_{B*} (I + BB*)^{-s} = (I + B*B)^{-s} T_{B*}.
// Each side of every identity is assembled on its own route (powers of A on
// one side, powers of B on the other) so a residual compares two
// independent computations.

#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "tracelab/operator.hpp"
#include "tracelab/random.hpp"

namespace tracelab {

inline constexpr double kIdentityTol = 1e-9;

struct ResidualReport {
  std::string name;
  double residual = 0.0;
  double tolerance = kIdentityTol;
  bool pass = true;
  std::string context;
  bool skipped = false;
};

inline ResidualReport make_report(std::string name, double residual, double tolerance,
                                  std::string context) {
  ResidualReport r;
  r.name = std::move(name);
  r.residual = residual;
  r.tolerance = tolerance;
  r.pass = residual <= tolerance;
  r.context = std::move(context);
  return r;
}

/// ||diff||_F / ||ref||_F, or the absolute norm when the reference vanishes.
inline double relative(const Matrix& diff, const Matrix& ref) {
  const double scale = ref.norm();
  return scale > 0.0 ? diff.norm() / scale : diff.norm();
}

struct OperatorPair {
  WeightedOperator a;
  WeightedOperator b;  // pseudoinverse(a)
};

namespace detail {

inline Matrix random_orthonormal(Rng& rng, Index rows, Index cols) {
  if (cols == 0) return Matrix(rows, 0);
  const Matrix g = rng.gaussian(rows, cols);
  Eigen::HouseholderQR<Matrix> qr(g);
  return qr.householderQ() * Matrix::Identity(rows, cols);
}

// Eigenvalues log-uniform in [1e-2, 1e2], so the condition number is at most 1e4.
inline Matrix random_gram(Rng& rng, Index n) {
  const Matrix q = random_orthonormal(rng, n, n);
  Vector d(n);
  for (Index i = 0; i < n; ++i) d(i) = std::pow(10.0, rng.uniform(-2.0, 2.0));
  return linalg::symmetrize(q * d.asDiagonal() * q.transpose());
}

inline std::string dims_context(std::uint64_t seed, Index dom, Index cod, Index rank) {
  std::ostringstream os;
  os << "seed=" << seed << " dims=" << dom << "x" << cod << " rank=" << rank;
  return os.str();
}

}  // namespace detail

/// Random weighted pair with exact rank: A = Lc^{-T} U diag(sigma) V^T Ld^T,
/// sigma uniform in [0.25, 4], so sigma are exactly the weighted singular values.
inline OperatorPair random_operator(std::uint64_t seed, Index dim_dom, Index dim_cod, Index rank) {
  if (rank > std::min(dim_dom, dim_cod) || rank < 0)
    throw Error(Errc::rank_too_large, "rank " + std::to_string(rank) + " exceeds min(" +
                                          std::to_string(dim_dom) + ", " + std::to_string(dim_cod) + ")");
  Rng rng(seed);
  const WeightedSpace domain(detail::random_gram(rng, dim_dom), "random-domain");
  const WeightedSpace codomain(detail::random_gram(rng, dim_cod), "random-codomain");
  const Matrix u = detail::random_orthonormal(rng, dim_cod, rank);
  const Matrix v = detail::random_orthonormal(rng, dim_dom, rank);
  Vector sigma(rank);
  for (Index k = 0; k < rank; ++k) sigma(k) = rng.uniform(0.25, 4.0);

  const Matrix core = u * sigma.asDiagonal() * (v.transpose() * domain.chol().transpose());
  Matrix m = codomain.chol().transpose().triangularView<Eigen::Upper>().solve(core);
  WeightedOperator a(domain, codomain, std::move(m));
  WeightedOperator b = pseudoinverse(a);
  return {std::move(a), std::move(b)};
}

/// Projector onto the null space of `op` (in its domain).
inline Matrix null_projector(const WeightedOperator& op) {
  const SvdFactors svd = weighted_svd(op);
  const Index n = op.domain().dim();
  return Matrix::Identity(n, n) - orthogonal_projector(op.domain(), svd.right);
}

/// The six resolvent identities for a Moore-Penrose pair (A, B = A†), one
/// report each. Item 5 needs A* injective and is marked skipped otherwise.
inline std::vector<ResidualReport> check_resolvent_identities(const WeightedOperator& a,
                                                              const WeightedOperator& b,
                                                              const std::string& context = {}) {
  require_pseudoinverse_pair(a, b);
  const GraphPowers pa(a);
  const GraphPowers pb(b);
  const WeightedOperator inv_aa_dom = pa.power(1.0, Side::domain);    // (I+A*A)^{-1}
  const WeightedOperator inv_aa_cod = pa.power(1.0, Side::codomain);  // (I+AA*)^{-1}
  const WeightedOperator inv_bb_dom = pb.power(1.0, Side::domain);    // (I+B*B)^{-1}
  const WeightedOperator inv_bb_cod = pb.power(1.0, Side::codomain);  // (I+BB*)^{-1}
  const WeightedOperator a_star = adjoint(a);
  const WeightedOperator b_star = adjoint(b);
  const Index n1 = a.domain().dim();
  const Index n2 = a.codomain().dim();
  const Matrix id1 = Matrix::Identity(n1, n1);
  const Matrix id2 = Matrix::Identity(n2, n2);

  std::vector<ResidualReport> out;
  {
    const Matrix lhs = (a * inv_aa_dom).matrix();
    const Matrix rhs = (b_star * inv_bb_cod).matrix();
    out.push_back(make_report("resolvent_1", relative(lhs - rhs, rhs), kIdentityTol, context));
  }
  const Matrix null_b_star = null_projector(b_star);
  {
    const Matrix lhs = inv_aa_dom.matrix() + inv_bb_cod.matrix();
    const Matrix rhs = id1 + null_b_star;
    out.push_back(make_report("resolvent_2", relative(lhs - rhs, rhs), kIdentityTol, context));
  }
  {
    const Matrix lhs = (a_star * inv_aa_cod).matrix();
    const Matrix rhs = (b * inv_bb_dom).matrix();
    out.push_back(make_report("resolvent_3", relative(lhs - rhs, rhs), kIdentityTol, context));
  }
  const Matrix null_a_star = null_projector(a_star);
  const Matrix sum_cod = inv_aa_cod.matrix() + inv_bb_dom.matrix();
  {
    const Matrix rhs = id2 + null_a_star;
    out.push_back(make_report("resolvent_4", relative(sum_cod - rhs, rhs), kIdentityTol, context));
  }
  {
    if (weighted_svd(a_star).rank == n2) {
      out.push_back(make_report("resolvent_5", relative(sum_cod - id2, id2), kIdentityTol, context));
    } else {
      ResidualReport r = make_report("resolvent_5", 0.0, kIdentityTol,
                                     context + (context.empty() ? "" : " ") + "skipped:A*_not_injective");
      r.skipped = true;
      out.push_back(std::move(r));
    }
  }
  {
    const WeightedOperator damped = a_star * pa.power(0.5, Side::codomain);
    const Matrix p1 = null_projector(damped);
    const Matrix p3 = null_projector(b);
    // projectors have Frobenius norm sqrt(rank) >= 1 unless they vanish
    const double scale = std::max(1.0, null_a_star.norm());
    const double r = std::max((p1 - null_a_star).norm(), (p3 - null_a_star).norm()) / scale;
    out.push_back(make_report("resolvent_6", r, kIdentityTol, context));
  }
  return out;
}

/// T_B against the Moore-Penrose inverse of C = B*(I+BB*)^{-1/2}: the worst
/// of the four relative Penrose residuals of (C, T_B).
inline ResidualReport check_tb_pinv(const WeightedOperator& a, const WeightedOperator& b,
                                    const std::string& context = {}) {
  const GraphPowers pb(b);
  const TbPair tb = t_b(a, b, pb);
  const WeightedOperator c = adjoint(b) * pb.power(0.5, Side::codomain);
  const Matrix& cm = c.matrix();
  const Matrix& tm = tb.tb.matrix();
  const Matrix ct = cm * tm;
  const Matrix tc = tm * cm;
  const double r = std::max({relative(ct * cm - cm, cm), relative(tm * ct - tm, tm),
                             self_adjoint_defect(c.codomain(), ct) / std::max(1.0, ct.norm()),
                             self_adjoint_defect(c.domain(), tc) / std::max(1.0, tc.norm())});
  return make_report("tb_pinv", r, kIdentityTol, context);
}

/// ||A - (I+B*B)^{-1/2} T_{B*}||_F / ||A||_F
inline ResidualReport check_decomposition(const WeightedOperator& a, const WeightedOperator& b,
                                          const std::string& context = {}) {
  const GraphPowers pb(b);
  const TbPair tb = t_b(a, b, pb);
  const Matrix rebuilt = (pb.power(0.5, Side::domain) * tb.tb_star).matrix();
  return make_report("decomposition", relative(a.matrix() - rebuilt, a.matrix()), kIdentityTol, context);
}

/// Closed-form action of either side of the permutation equality, read off
/// the singular system (s_k, v_k, z_k) of A:
///   v_k -> (s_k^2 / (1 + s_k^2))^s sqrt(1 + s_k^2) z_k,  null(A) -> 0.
inline Matrix permutation_oracle(const WeightedOperator& a, const SvdFactors& svd_a, double s) {
  Vector coeff(svd_a.rank);
  for (Index k = 0; k < svd_a.rank; ++k) {
    const double sk2 = svd_a.values(k) * svd_a.values(k);
    coeff(k) = std::pow(sk2 / (1.0 + sk2), s) * std::sqrt(1.0 + sk2);
  }
  return svd_a.left * coeff.asDiagonal() * (svd_a.right.transpose() * a.domain().gram());
}

inline std::string with_s(const std::string& context, double s) {
  std::ostringstream os;
  os.precision(17);
  os << context << (context.empty() ? "" : " ") << "s=" << s;
  return os.str();
}

/// One report per s: max of |LHS - RHS|, |LHS - oracle|, |RHS - oracle| (relative).
inline std::vector<ResidualReport> check_permutation(const WeightedOperator& a, const WeightedOperator& b,
                                                     const std::vector<double>& s_list,
                                                     const std::string& context = {}) {
  const GraphPowers pb(b);
  const TbPair tb = t_b(a, b, pb);
  const SvdFactors svd_a = weighted_svd(a);
  std::vector<ResidualReport> out;
  for (double s : s_list) {
    const Matrix lhs = (tb.tb_star * pb.power(s, Side::codomain)).matrix();
    const Matrix rhs = (pb.power(s, Side::domain) * tb.tb_star).matrix();
    const Matrix oracle = permutation_oracle(a, svd_a, s);
    const double r = std::max({relative(lhs - rhs, lhs), relative(lhs - oracle, oracle),
                               relative(rhs - oracle, oracle)});
    out.push_back(make_report("permutation", r, kIdentityTol, with_s(context, s)));
  }
  return out;
}

struct TbIsomorphism {
  double c_low = 0.0;
  double c_high = 0.0;
  double image_residual = 0.0;  // distance of T_B(R(B*)) from N(B*)^perp, relative
  bool degenerate = false;      // R(B*) = {0}
};

/// Extreme singular values of T_B restricted to R(B*), plus a check that the
/// image lies in N(B*)^perp = closure of R(B).
inline TbIsomorphism check_tb_isomorphism(const WeightedOperator& a, const WeightedOperator& b) {
  const GraphPowers pb(b);
  const TbPair tb = t_b(a, b, pb);
  const SvdFactors& svd_b = pb.svd();
  TbIsomorphism out;
  if (svd_b.rank == 0) {
    out.degenerate = true;
    return out;
  }
  const Matrix image = tb.tb.matrix() * svd_b.right;
  const WeightedOperator restricted(WeightedSpace::euclidean(svd_b.rank), tb.tb.codomain(), image);
  const SvdFactors svd_t = weighted_svd(restricted);
  out.c_high = svd_t.values(0);
  out.c_low = svd_t.rank == svd_b.rank ? svd_t.values(svd_t.rank - 1) : 0.0;
  const Matrix outside = image - orthogonal_projector(tb.tb.codomain(), svd_b.left) * image;
  out.image_residual = relative(outside, image);
  return out;
}

}  // namespace tracelab
