#pragma once

// Best constants of the trace, harmonic and Bergman-space inequalities on a
// discretization. Constants come from extreme generalized eigenvalues of the
// two Grams being compared; random vectors only probe for violations.
//
// Every comparison below is a pair of Grams (num, den) over some coordinate
// space, and the reported constants satisfy
//   c_low^2 den <= num <= c_high^2 den.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "tracelab/fem.hpp"
#include "tracelab/operator.hpp"
#include "tracelab/random.hpp"

namespace tracelab::lab {

enum class NormMode { graph, surrogate };

inline const char* to_string(NormMode m) { return m == NormMode::graph ? "graph" : "surrogate"; }

struct ConstantsRow {
  std::string theorem;
  std::string mesh;
  int refine = 0;
  Index dofs = 0;
  double s = 0.0;
  double c_low = 0.0;
  double c_high = 0.0;
  double worst_violation = 0.0;  // <= 0: held on every probe
  std::string mode;
};

struct LabOptions {
  std::uint64_t seed = 17;
  int probes = 100;
  double probe_scale = 1.0;  // outputs must not depend on it
};

namespace detail {

inline void require_order(double s, double lo, double hi, bool open, const char* what) {
  const bool inside = open ? (s > lo && s < hi) : (s >= lo && s <= hi);
  if (!inside) throw Error(Errc::s_out_of_range, std::string(what) + ": order " + std::to_string(s));
}

/// sqrt of the extreme eigenvalues of num x = theta den x.
inline std::pair<double, double> extreme_ratio(const Matrix& num, const Matrix& den) {
  const linalg::EigenDecomposition eig = linalg::gen_sym_eig(linalg::symmetrize(num), linalg::symmetrize(den));
  const Index last = eig.values.size() - 1;
  return {std::sqrt(std::max(0.0, eig.values(0))), std::sqrt(std::max(0.0, eig.values(last)))};
}

/// Coordinate unit vectors followed by `probes` Gaussian vectors, all scaled.
inline Matrix probe_vectors(Index dim, const LabOptions& opt) {
  Rng rng(opt.seed);
  Matrix out(dim, dim + opt.probes);
  out.leftCols(dim).setIdentity();
  if (opt.probes > 0) out.rightCols(opt.probes) = rng.gaussian(dim, opt.probes);
  return opt.probe_scale * out;
}

inline double gram_norm(const Matrix& gram, const Vector& a) { return std::sqrt(std::max(0.0, a.dot(gram * a))); }

/// Largest relative excess of either side of c_low^2 den <= num <= c_high^2 den
/// over the probe columns.
inline double sandwich_violation(const Matrix& num, const Matrix& den, double c_low, double c_high,
                                 const Matrix& probes) {
  double worst = -std::numeric_limits<double>::infinity();
  for (Index j = 0; j < probes.cols(); ++j) {
    const double x = gram_norm(num, probes.col(j));
    const double y = gram_norm(den, probes.col(j));
    const double scale = c_high * y;
    if (!(scale > 0.0)) continue;
    worst = std::max({worst, (c_low * y - x) / scale, (x - c_high * y) / scale});
  }
  return worst;
}

inline ConstantsRow base_row(const fem::Discretization& d, std::string theorem, double s, NormMode mode) {
  ConstantsRow row;
  row.theorem = std::move(theorem);
  row.mesh = d.spec.name();
  row.refine = d.spec.refine;
  row.dofs = d.dofs();
  row.s = s;
  row.mode = to_string(mode);
  return row;
}

}  // namespace detail

/// Trace operator, its pseudoinverse and everything the boundary-side checks
/// reuse across orders s.
struct TraceSetting {
  const fem::Discretization* disc = nullptr;
  SvdFactors gamma_svd;
  WeightedOperator lambda;  // pseudoinverse of Gamma, L2b -> H1d
  GraphPowers lambda_powers;
  fem::BoundaryFractionalNorms boundary_norms;
  Matrix harmonic;          // H1d-orthonormal harmonic basis
  fem::SteklovSystem steklov;
  WeightedOperator t_lambda_star;
  double t_lambda_star_norm = 0.0;
};

/// `d` must outlive the setting.
inline TraceSetting make_trace_setting(const fem::Discretization& d) {
  const WeightedOperator& gamma = d.spaces.gamma;
  SvdFactors svd = weighted_svd(gamma);
  WeightedOperator lambda = pseudoinverse_from(gamma, svd);
  GraphPowers powers(lambda, pseudoinverse_svd(svd));
  TbPair t = t_b(gamma, lambda, powers);
  const double t_norm = op_norm(t.tb_star);
  return TraceSetting{&d,
                      std::move(svd),
                      std::move(lambda),
                      std::move(powers),
                      fem::BoundaryFractionalNorms(d.mats),
                      fem::harmonic_basis(d).columns,
                      fem::steklov(d),
                      std::move(t.tb_star),
                      t_norm};
}

/// Gram on the boundary space of g -> ||(I + Lambda* Lambda)^s g||_Mb.
inline Matrix trace_graph_gram(const TraceSetting& ts, double s) {
  const Matrix p = ts.lambda_powers.power(-s, Side::domain).matrix();
  return linalg::symmetrize(p.transpose() * ts.disc->mats.Mb * p);
}

/// Graph mode compares the operator route with the closed Steklov form
/// Mb Z diag((2 + lambda_k)^{2s}) Z^T Mb; surrogate mode compares it with the
/// spectral boundary norm G_s.
inline ConstantsRow trace_equivalence_constants(const TraceSetting& ts, double s, NormMode mode,
                                                const LabOptions& opt = {}) {
  detail::require_order(s, 0.0, 1.0, false, "trace_equivalence_constants");
  const fem::Discretization& d = *ts.disc;
  const Matrix num = trace_graph_gram(ts, s);
  Matrix den;
  if (mode == NormMode::surrogate) {
    den = ts.boundary_norms.gram(s);
  } else {
    const fem::SteklovSystem& st = ts.steklov;
    Vector w(st.lambdas.size());
    for (Index k = 0; k < w.size(); ++k) w(k) = std::pow(2.0 + std::max(0.0, st.lambdas(k)), 2.0 * s);
    const Matrix mz = d.mats.Mb * st.Z;
    den = linalg::symmetrize(mz * w.asDiagonal() * mz.transpose());
  }
  ConstantsRow row = detail::base_row(d, "trace", s, mode);
  std::tie(row.c_low, row.c_high) = detail::extreme_ratio(num, den);
  row.worst_violation =
      detail::sandwich_violation(num, den, row.c_low, row.c_high, detail::probe_vectors(d.boundary_dofs(), opt));
  return row;
}

/// Grams over harmonic coordinates a (v = H a) of
///   lhs: ||(I + Lambda* Lambda)^{s-1/2} Gamma v||_Mb   (graph mode)
///        ||Gamma v||_{G_{s-1/2}}                       (surrogate mode)
///   rhs: ||(I + Lambda Lambda*)^{s-1} v||_H1d
struct HarmonicGrams {
  Matrix lhs;
  Matrix rhs;
  double rhs_factor = 0.0;  // RHS(v) = rhs_factor * ||a||_rhs
};

inline HarmonicGrams harmonic_grams(const TraceSetting& ts, double s, NormMode mode) {
  const fem::Discretization& d = *ts.disc;
  const Matrix trace_h = d.mats.T * ts.harmonic;
  HarmonicGrams g;
  if (mode == NormMode::graph) {
    const Matrix p = ts.lambda_powers.power(-(s - 0.5), Side::domain).matrix() * trace_h;
    g.lhs = p.transpose() * d.mats.Mb * p;
    g.rhs_factor = ts.t_lambda_star_norm;
  } else {
    g.lhs = trace_h.transpose() * ts.boundary_norms.gram(s - 0.5) * trace_h;
    // c_low of the trace comparison at order s - 1/2 converts the graph-norm
    // bound into a bound for the surrogate norm
    const Matrix num = trace_graph_gram(ts, s - 0.5);
    const double c_low = detail::extreme_ratio(num, ts.boundary_norms.gram(s - 0.5)).first;
    g.rhs_factor = ts.t_lambda_star_norm / c_low;
  }
  const Matrix q = ts.lambda_powers.power(-(s - 1.0), Side::codomain).matrix() * ts.harmonic;
  g.rhs = q.transpose() * d.spaces.h1.gram() * q;
  g.lhs = linalg::symmetrize(g.lhs);
  g.rhs = linalg::symmetrize(g.rhs);
  return g;
}

namespace detail {

// No range check: the s = 1 endpoint serves as the continuity reference.
inline ConstantsRow harmonic_row(const TraceSetting& ts, double s, NormMode mode, const LabOptions& opt) {
  const HarmonicGrams g = harmonic_grams(ts, s, mode);
  ConstantsRow row = base_row(*ts.disc, "harmonic", s, mode);
  std::tie(row.c_low, row.c_high) = extreme_ratio(g.lhs, g.rhs);
  const Matrix probes = probe_vectors(g.lhs.rows(), opt);
  double worst = -std::numeric_limits<double>::infinity();
  for (Index j = 0; j < probes.cols(); ++j) {
    const double lhs = gram_norm(g.lhs, probes.col(j));
    const double rhs = g.rhs_factor * gram_norm(g.rhs, probes.col(j));
    if (rhs > 0.0) worst = std::max(worst, (lhs - rhs) / rhs);
  }
  row.worst_violation = worst;
  return row;
}

}  // namespace detail

/// Checks ||v||_{H^s harmonic} <= ||T_{Lambda*}|| ||(I + Lambda Lambda*)^{s-1} v||
/// for 1 < s < 3/2 on harmonic basis vectors and random combinations.
/// c_low, c_high bound the ratio LHS / ||(I + Lambda Lambda*)^{s-1} v||.
inline ConstantsRow harmonic_inequality_check(const TraceSetting& ts, double s, NormMode mode,
                                              const LabOptions& opt = {}) {
  detail::require_order(s, 1.0, 1.5, true, "harmonic_inequality_check");
  return detail::harmonic_row(ts, s, mode, opt);
}

/// Robin/Dirichlet operators and the T_{F1*} machinery for the Bergman space.
struct BergmanSetting {
  const fem::Discretization* disc = nullptr;
  fem::PoissonOperators ops;
  GraphPowers f1_powers;
  WeightedOperator t_f1_star;  // H1d -> L2
  Matrix harmonic;
  bool degenerate = false;
  std::string warning;
};

/// `d` must outlive the setting.
inline BergmanSetting make_bergman_setting(const fem::Discretization& d) {
  fem::PoissonOperators ops = fem::poisson_operators(d);
  GraphPowers powers(ops.F1, pseudoinverse_svd(ops.e1_svd));
  TbPair t = t_b(ops.E1, ops.F1, powers);
  const fem::HarmonicBasis hb = fem::harmonic_basis(d);
  BergmanSetting b{&d, std::move(ops), std::move(powers), std::move(t.tb_star), hb.columns, hb.whole_space, {}};
  b.warning = hb.warning;
  return b;
}

struct BergmanReport {
  ConstantsRow row;
  double middle_identity = 0.0;  // max relative gap ||(I+F1*F1)^{1/2} E1 v|| vs ||T_{F1*} v||
  double extremal_low = 0.0;     // |middle / ||v|| - c_low| at the minimizing singular vector
  double extremal_high = 0.0;    // same at the maximizer
};

/// ||(I + F1* F1)^{1/2} E1 v||_L2 for each column of `v`.
inline Vector bergman_middle(const BergmanSetting& b, const Matrix& v) {
  const Matrix root = b.f1_powers.power(-0.5, Side::domain).matrix();
  const Matrix image = root * (b.ops.E1.matrix() * v);
  const Matrix& m = b.disc->spaces.l2.gram();
  Vector out(v.cols());
  for (Index j = 0; j < v.cols(); ++j) out(j) = detail::gram_norm(m, image.col(j));
  return out;
}

inline BergmanReport bergman_sandwich(const BergmanSetting& b, const LabOptions& opt = {}) {
  const fem::Discretization& d = *b.disc;
  BergmanReport rep;
  rep.row = detail::base_row(d, "bergman", 1.0, NormMode::graph);

  const Index nb = b.harmonic.cols();
  const WeightedOperator restricted(WeightedSpace::euclidean(nb), d.spaces.l2,
                                    b.t_f1_star.matrix() * b.harmonic);
  const SvdFactors svd = weighted_svd(restricted, 0.0);
  rep.row.c_high = svd.values(0);
  rep.row.c_low = svd.values(svd.rank - 1);

  // probes are harmonic coordinates; H is orthonormal so ||v||_H1d = |a|
  const Matrix probes = detail::probe_vectors(nb, opt);
  const Matrix v = b.harmonic * probes;
  const Vector middle = bergman_middle(b, v);
  const Matrix tv = b.t_f1_star.matrix() * v;
  double worst = -std::numeric_limits<double>::infinity();
  double identity_gap = 0.0;
  for (Index j = 0; j < probes.cols(); ++j) {
    const double norm_v = probes.col(j).norm();
    const double scale = rep.row.c_high * norm_v;
    worst = std::max({worst, (rep.row.c_low * norm_v - middle(j)) / scale, (middle(j) - scale) / scale});
    const double t_norm = detail::gram_norm(d.spaces.l2.gram(), tv.col(j));
    identity_gap = std::max(identity_gap, std::abs(middle(j) - t_norm) / t_norm);
  }
  rep.row.worst_violation = worst;
  rep.middle_identity = identity_gap;

  Matrix extremal(nb, 2);
  extremal.col(0) = svd.right.col(svd.rank - 1);
  extremal.col(1) = svd.right.col(0);
  const Vector tight = bergman_middle(b, b.harmonic * extremal);
  rep.extremal_low = std::abs(tight(0) / extremal.col(0).norm() - rep.row.c_low);
  rep.extremal_high = std::abs(tight(1) / extremal.col(1).norm() - rep.row.c_high);
  return rep;
}

/// Compares ||(I + F1* F1)^{s/2} u||_L2 on harmonic u with a reference norm.
/// Graph mode: the spectral interpolation scale between L2 and H1d restricted
/// to harmonic functions (sum mu_k^s c_k^2 with (mu, w) the eigenpairs of the
/// H1d Gram relative to the L2 Gram), which is the L2 norm at s = 0 and the
/// H1d norm at s = 1. Surrogate mode: the Steklov weighting
/// sum (1 + lambda_k)^s b_k^2 over boundary-normalized eigenfunctions v_k / s_k.
inline std::vector<ConstantsRow> interpolation_scan(const BergmanSetting& b, const std::vector<double>& s_grid,
                                                    NormMode mode, const LabOptions& opt = {}) {
  for (double s : s_grid) detail::require_order(s, 0.0, 1.0, false, "interpolation_scan");
  const fem::Discretization& d = *b.disc;
  const Matrix& m = d.spaces.l2.gram();

  Matrix basis;
  linalg::EigenDecomposition ref;
  fem::SteklovSystem st;
  if (mode == NormMode::graph) {
    basis = b.harmonic;
    const Matrix g_h = linalg::symmetrize(basis.transpose() * d.spaces.h1.gram() * basis);
    const Matrix m_h = linalg::symmetrize(basis.transpose() * m * basis);
    ref = linalg::gen_sym_eig(g_h, m_h);
  } else {
    st = fem::steklov(d);
    basis = st.V;
  }
  const Matrix probes = detail::probe_vectors(basis.cols(), opt);

  std::vector<ConstantsRow> rows;
  rows.reserve(s_grid.size());
  for (double s : s_grid) {
    const Matrix pu = b.f1_powers.power(-0.5 * s, Side::domain).matrix() * basis;
    const Matrix num = linalg::symmetrize(pu.transpose() * m * pu);
    Matrix den;
    if (mode == NormMode::graph) {
      Vector w(ref.values.size());
      for (Index k = 0; k < w.size(); ++k) w(k) = std::pow(std::max(0.0, ref.values(k)), s);
      const Matrix mw = *ref.metric * ref.vectors;
      den = linalg::symmetrize(mw * w.asDiagonal() * mw.transpose());
    } else {
      // v_k coordinates a_k = s_k b_k, so the weight is (1 + lambda_k)^{s-1}
      Vector w(st.lambdas.size());
      for (Index k = 0; k < w.size(); ++k) w(k) = std::pow(1.0 + std::max(0.0, st.lambdas(k)), s - 1.0);
      den = w.asDiagonal();
    }
    ConstantsRow row = detail::base_row(d, "interpolation", s, mode);
    std::tie(row.c_low, row.c_high) = detail::extreme_ratio(num, den);
    row.worst_violation = detail::sandwich_violation(num, den, row.c_low, row.c_high, probes);
    rows.push_back(std::move(row));
  }
  return rows;
}

/// Default order grids.
inline std::vector<double> default_scan_grid() {
  std::vector<double> g;
  for (int i = 0; i <= 10; ++i) g.push_back(i / 10.0);
  return g;
}

inline std::vector<double> default_harmonic_grid() { return {1.05, 1.1, 1.25, 1.4, 1.45}; }

}  // namespace tracelab::lab
