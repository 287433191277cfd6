#include <gtest/gtest.h>

#include <cstring>

#include "tracelab/identity_suite.hpp"

using namespace tracelab;

namespace {

bool same_bits(const Matrix& x, const Matrix& y) {
  return x.rows() == y.rows() && x.cols() == y.cols() &&
         std::memcmp(x.data(), y.data(), sizeof(double) * static_cast<std::size_t>(x.size())) == 0;
}

OperatorPair zero_pair() {
  Rng rng(3);
  const WeightedSpace h1(detail::random_gram(rng, 4), "h1");
  const WeightedSpace h2(detail::random_gram(rng, 3), "h2");
  const WeightedOperator a = WeightedOperator::zero(h1, h2);
  return {a, pseudoinverse(a)};
}

OperatorPair scalar_identity_pair() {
  const WeightedOperator a = WeightedOperator::identity(WeightedSpace::euclidean(3));
  return {a, pseudoinverse(a)};
}

}  // namespace

TEST(RandomOperator, FullRankPairIsInverse) {
  const auto [a, b] = random_operator(1, 4, 4, 4);
  EXPECT_LT((b.matrix() - a.matrix().inverse()).norm() / b.matrix().norm(), 1e-10);
}

TEST(RandomOperator, RankIsExact) {
  const auto [a, b] = random_operator(2, 6, 3, 2);
  EXPECT_EQ(weighted_svd(a).rank, 2);
  EXPECT_EQ(weighted_svd(b).rank, 2);
}

TEST(RandomOperator, Deterministic) {
  const auto p1 = random_operator(1, 7, 5, 3);
  const auto p2 = random_operator(1, 7, 5, 3);
  EXPECT_TRUE(same_bits(p1.a.matrix(), p2.a.matrix()));
  EXPECT_TRUE(same_bits(p1.b.matrix(), p2.b.matrix()));
  EXPECT_TRUE(same_bits(p1.a.domain().gram(), p2.a.domain().gram()));
}

TEST(RandomOperator, RankTooLarge) {
  try {
    random_operator(1, 3, 5, 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::rank_too_large);
  }
}

TEST(RandomOperator, GramConditionBounded) {
  const auto [a, b] = random_operator(9, 30, 20, 10);
  for (const Matrix* g : {&a.domain().gram(), &a.codomain().gram()}) {
    const auto eig = linalg::sym_eig(*g);
    EXPECT_LE(eig.values.maxCoeff() / eig.values.minCoeff(), 1e4 * (1.0 + 1e-10));
  }
}

TEST(Resolvent, FullRankSquarePair) {
  const auto [a, b] = random_operator(1, 4, 4, 4);
  const auto reports = check_resolvent_identities(a, b);
  ASSERT_EQ(reports.size(), 6u);
  for (const auto& r : reports) {
    EXPECT_FALSE(r.skipped) << r.name;
    EXPECT_LT(r.residual, 1e-9) << r.name;
  }
}

TEST(Resolvent, ZeroPairItemTwoIsExact) {
  const auto [a, b] = zero_pair();
  const auto reports = check_resolvent_identities(a, b);
  EXPECT_EQ(reports[1].name, "resolvent_2");
  EXPECT_EQ(reports[1].residual, 0.0);
  EXPECT_TRUE(reports[4].skipped);
  for (const auto& r : reports) EXPECT_TRUE(r.pass) << r.name;
}

TEST(Resolvent, ItemFiveSkippedUnlessAdjointInjective) {
  const auto [a, b] = random_operator(5, 8, 6, 4);
  EXPECT_TRUE(check_resolvent_identities(a, b)[4].skipped);
  const auto [c, d] = random_operator(5, 8, 6, 6);
  const auto reports = check_resolvent_identities(c, d);
  EXPECT_FALSE(reports[4].skipped);
  EXPECT_LT(reports[4].residual, 1e-9);
}

TEST(Resolvent, RejectsNonPair) {
  const auto [a, b] = random_operator(5, 8, 6, 4);
  EXPECT_THROW(check_resolvent_identities(a, 0.5 * b), Error);
}

TEST(TbPinv, ScalarIdentity) {
  const auto [a, b] = scalar_identity_pair();
  EXPECT_LT(check_tb_pinv(a, b).residual, 1e-15);
}

TEST(TbPinv, ZeroOperator) {
  const auto [a, b] = zero_pair();
  EXPECT_EQ(check_tb_pinv(a, b).residual, 0.0);
}

TEST(TbPinv, RankDeficientRandomPair) {
  const auto [a, b] = random_operator(9, 10, 7, 4);
  EXPECT_LT(check_tb_pinv(a, b).residual, 1e-9);
}

TEST(Decomposition, ZeroAndFullRank) {
  {
    const auto [a, b] = zero_pair();
    EXPECT_EQ(check_decomposition(a, b).residual, 0.0);
  }
  {
    const auto [a, b] = random_operator(1, 4, 4, 4);
    EXPECT_LT(check_decomposition(a, b).residual, 1e-10);
  }
}

TEST(Permutation, ZeroPowerGivesTbStarOnBothSides) {
  const auto [a, b] = random_operator(6, 7, 5, 3);
  const auto reports = check_permutation(a, b, {0.0});
  ASSERT_EQ(reports.size(), 1u);
  EXPECT_LT(reports[0].residual, 1e-12);
}

TEST(Permutation, UnitSingularValueHalvesTbStar) {
  // A = B = I on R^1 (s_1 = 1): both sides at s = 1 equal (1/2) T_{B*} = (1/2) sqrt(2)
  const WeightedOperator a = WeightedOperator::identity(WeightedSpace::euclidean(1));
  const WeightedOperator b = pseudoinverse(a);
  const GraphPowers pb(b);
  const TbPair tb = t_b(a, b, pb);
  const double lhs = (tb.tb_star * pb.power(1.0, Side::codomain)).matrix()(0, 0);
  const double rhs = (pb.power(1.0, Side::domain) * tb.tb_star).matrix()(0, 0);
  EXPECT_NEAR(lhs, 0.5 * std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(rhs, 0.5 * std::sqrt(2.0), 1e-15);
  EXPECT_LT(check_permutation(a, b, {1.0})[0].residual, 1e-12);
}

TEST(Permutation, SymmetricInSignOfS) {
  for (std::uint64_t seed = 60; seed < 70; ++seed) {
    const auto [a, b] = random_operator(seed, 12, 9, 6);
    for (double s : {0.25, 0.5, 1.0, 2.0}) {
      const auto reports = check_permutation(a, b, {s, -s});
      EXPECT_LT(reports[0].residual, 1e-9) << "seed " << seed << " s " << s;
      EXPECT_LT(reports[1].residual, 1e-9) << "seed " << seed << " s " << -s;
    }
  }
}

TEST(Permutation, OracleMatchesClosedFormOnScalars) {
  Vector d(3);
  d << 2.0, 0.5, 0.0;
  const WeightedOperator a(WeightedSpace::euclidean(3), WeightedSpace::euclidean(3), Matrix(d.asDiagonal()));
  const SvdFactors svd = weighted_svd(a);
  const Matrix oracle = permutation_oracle(a, svd, 0.5);
  for (Index k = 0; k < 2; ++k) {
    const double sk2 = d(k) * d(k);
    EXPECT_NEAR(oracle(k, k), std::sqrt(sk2 / (1 + sk2)) * std::sqrt(1 + sk2), 1e-14);
  }
  EXPECT_EQ(oracle(2, 2), 0.0);
}

TEST(TbIsomorphism, ScalarIdentity) {
  const auto [a, b] = scalar_identity_pair();
  const auto iso = check_tb_isomorphism(a, b);
  EXPECT_NEAR(iso.c_low, std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(iso.c_high, std::sqrt(2.0), 1e-14);
  EXPECT_FALSE(iso.degenerate);
}

TEST(TbIsomorphism, ZeroOperatorIsDegenerate) {
  const auto [a, b] = zero_pair();
  const auto iso = check_tb_isomorphism(a, b);
  EXPECT_TRUE(iso.degenerate);
  EXPECT_EQ(iso.c_low, 0.0);
  EXPECT_EQ(iso.c_high, 0.0);
}

TEST(TbIsomorphism, RandomPairIsInjectiveIntoRangeOfB) {
  const auto [a, b] = random_operator(4, 9, 7, 5);
  const auto iso = check_tb_isomorphism(a, b);
  EXPECT_GT(iso.c_low, 0.0);
  EXPECT_LE(iso.c_low, iso.c_high);
  EXPECT_LT(iso.image_residual, 1e-10);
}

TEST(IdentitySuite, RandomPairsPassAllChecks) {
  Rng rng(77);
  for (int trial = 0; trial < 30; ++trial) {
    const Index dom = rng.integer(1, 50);
    const Index cod = rng.integer(1, 50);
    const Index rank = rng.integer(0, static_cast<int>(std::min(dom, cod)));
    const std::uint64_t seed = 900 + static_cast<std::uint64_t>(trial);
    const auto [a, b] = random_operator(seed, dom, cod, rank);
    const std::string ctx = detail::dims_context(seed, dom, cod, rank);
    std::vector<ResidualReport> all = check_resolvent_identities(a, b, ctx);
    all.push_back(check_tb_pinv(a, b, ctx));
    all.push_back(check_decomposition(a, b, ctx));
    for (auto& r : check_permutation(a, b, {-1, 0.25, 0.5, 0.75, 1, 2}, ctx)) all.push_back(r);
    for (const auto& r : all) EXPECT_TRUE(r.pass) << r.name << " " << r.context << " residual " << r.residual;
  }
}
