#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "bandlab/metric_core.hpp"
#include "oracles.hpp"

using namespace bandlab;

namespace {

FiniteMetricSpace unit_square() {
  const double r = std::numbers::sqrt2;
  return validate_metric({{0, 1, r, 1}, {1, 0, 1, r}, {r, 1, 0, 1}, {1, r, 1, 0}});
}

// Tripod with legs 2, 3, 4 from a center; order A, B, C, center.
FiniteMetricSpace tripod() {
  const auto d = oracle::floyd_warshall(4, {{3, 0, 2.0}, {3, 1, 3.0}, {3, 2, 4.0}});
  return validate_metric(d);
}

ErrorKind kind_of(const oracle::Matrix& m) {
  try {
    validate_metric(m);
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::ParseError;
}

oracle::Matrix random_space(std::mt19937_64& rng, std::size_t n, int flavor) {
  switch (flavor % 3) {
    case 0: return oracle::euclidean_points(rng, n, 2);
    case 1: return oracle::euclidean_points(rng, n, 3);
    default: return oracle::random_graph_metric(rng, n);
  }
}

}  // namespace

TEST(Validate, AcceptsLineMetric) {
  const auto s = validate_metric({{0, 1, 2}, {1, 0, 1}, {2, 1, 0}});
  EXPECT_EQ(s.size(), 3u);
  EXPECT_EQ(s.base(), 0u);
  EXPECT_DOUBLE_EQ(s(0, 2), 2.0);
}

TEST(Validate, NegativeDistanceReportsPair) {
  try {
    validate_metric({{0, -1}, {-1, 0}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NegativeDistance);
    EXPECT_EQ(e.indices(), (std::vector<std::size_t>{0, 1}));
  }
}

TEST(Validate, TriangleViolationReportsTriple) {
  try {
    validate_metric({{0, 1, 3}, {1, 0, 1}, {3, 1, 0}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::TriangleViolation);
    EXPECT_EQ(e.indices(), (std::vector<std::size_t>{0, 1, 2}));
  }
}

TEST(Validate, RejectsMalformedMatrices) {
  EXPECT_EQ(kind_of({{0, 1}, {1}}), ErrorKind::NotSquare);
  EXPECT_EQ(kind_of({{0, NAN}, {NAN, 0}}), ErrorKind::NonFiniteDistance);
  EXPECT_EQ(kind_of({{0, INFINITY}, {INFINITY, 0}}), ErrorKind::NonFiniteDistance);
  EXPECT_EQ(kind_of({{0, 1}, {2, 0}}), ErrorKind::AsymmetricMatrix);
  EXPECT_EQ(kind_of({{1, 1}, {1, 0}}), ErrorKind::NonzeroDiagonal);
  EXPECT_EQ(kind_of({}), ErrorKind::EmptySelection);
  EXPECT_THROW(validate_metric({{0}}, {}, 1), Error);
  EXPECT_THROW(validate_metric({{0, 1}, {1, 0}}, {"a"}), Error);
}

TEST(Validate, ToleratesRoundingNoise) {
  const auto s = validate_metric({{0, 1 + 1e-12, 2}, {1, 0, 1}, {2, 1, 1e-12}});
  EXPECT_EQ(s(0, 1), s(1, 0));
  EXPECT_EQ(s(2, 2), 0.0);
}

TEST(Validate, DistanceChecksIndices) {
  const auto s = unit_square();
  EXPECT_THROW(s.distance(0, 4), Error);
}

TEST(GromovProduct, LineExample) {
  // Points 0, 5, 3 on a line: (5.3)_0 = 3.
  const auto s = validate_metric({{0, 5, 3}, {5, 0, 2}, {3, 2, 0}});
  EXPECT_DOUBLE_EQ(gromov_product(s, 1, 2, 0), 3.0);
  EXPECT_DOUBLE_EQ(gromov_product(s, 1, 2, 1), 0.0);
}

TEST(GromovProduct, TripodExample) {
  EXPECT_DOUBLE_EQ(gromov_product(tripod(), 1, 2, 0), 2.0);
}

TEST(TripleDecomposition, Examples) {
  const auto line = validate_metric({{0, 5, 3}, {5, 0, 2}, {3, 2, 0}});
  auto t = triple_decomposition(line, 0, 1, 2);
  EXPECT_DOUBLE_EQ(t.a, 3.0);
  EXPECT_DOUBLE_EQ(t.b, 2.0);
  EXPECT_DOUBLE_EQ(t.c, 0.0);

  t = triple_decomposition(validate_metric({{0, 2, 2}, {2, 0, 2}, {2, 2, 0}}), 0, 1, 2);
  EXPECT_DOUBLE_EQ(t.a, 1.0);
  EXPECT_DOUBLE_EQ(t.b, 1.0);
  EXPECT_DOUBLE_EQ(t.c, 1.0);

  t = triple_decomposition(tripod(), 0, 1, 2);
  EXPECT_DOUBLE_EQ(t.a, 2.0);
  EXPECT_DOUBLE_EQ(t.b, 3.0);
  EXPECT_DOUBLE_EQ(t.c, 4.0);
}

TEST(FourPoint, SmallSpacesAreZero) {
  EXPECT_EQ(four_point_delta(validate_metric({{0}})).delta, 0.0);
  EXPECT_EQ(four_point_delta(validate_metric({{0, 3}, {3, 0}})).delta, 0.0);
  EXPECT_EQ(four_point_delta(validate_metric({{0, 1, 1.5}, {1, 0, 1}, {1.5, 1, 0}})).delta, 0.0);
}

TEST(FourPoint, StarTreeIsZero) {
  const auto d = oracle::floyd_warshall(4, {{0, 1, 1.0}, {0, 2, 1.0}, {0, 3, 1.0}});
  EXPECT_NEAR(four_point_delta(validate_metric(d)).delta, 0.0, 1e-15);
}

TEST(FourPoint, UnitSquare) {
  const auto r = four_point_delta(unit_square());
  EXPECT_NEAR(r.delta, std::numbers::sqrt2 - 1.0, 1e-12);
  EXPECT_EQ(r.witness, (std::array<std::size_t, 4>{0, 1, 2, 3}));
  EXPECT_NEAR(r.delta, oracle::naive_four_point(oracle::rows_of(unit_square())), 1e-12);
}

TEST(ThreePoint, LineIsZero) {
  const auto s = validate_metric(oracle::floyd_warshall(4, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}}));
  EXPECT_NEAR(three_point_delta(s, 0).delta, 0.0, 1e-15);
}

TEST(ThreePoint, UnitSquareMatchesExhaustiveOracle) {
  const auto s = unit_square();
  const double d = three_point_delta(s, 0).delta;
  EXPECT_NEAR(d, oracle::naive_three_point(oracle::rows_of(s), 0), 1e-12);
  EXPECT_LE(d, std::numbers::sqrt2 - 1.0 + 1e-12);
}

TEST(ThreePoint, RejectsBadBase) { EXPECT_THROW(three_point_delta(unit_square(), 7), Error); }

TEST(Subspace, Examples) {
  const auto sq = unit_square();
  const std::vector<std::size_t> one{2};
  EXPECT_EQ(four_point_delta(subspace_restrict(sq, one)).delta, 0.0);
  const std::vector<std::size_t> three{0, 1, 3};
  EXPECT_EQ(four_point_delta(subspace_restrict(sq, three)).delta, 0.0);
  EXPECT_THROW(subspace_restrict(sq, std::vector<std::size_t>{}), Error);
  EXPECT_THROW(subspace_restrict(sq, std::vector<std::size_t>{9}), Error);
}

TEST(Subspace, BaseKeptOrReassigned) {
  const auto sq = validate_metric(unit_square().rows(), {}, 2);
  EXPECT_EQ(subspace_restrict(sq, std::vector<std::size_t>{3, 2, 0}).base(), 1u);
  EXPECT_EQ(subspace_restrict(sq, std::vector<std::size_t>{3, 1}).base(), 0u);
}

TEST(Subspace, TreeSampleStaysZero) {
  std::mt19937_64 rng(11);
  const auto t = oracle::random_tree(rng, 20);
  const auto s = validate_metric(oracle::floyd_warshall(t.nodes, t.edges));
  EXPECT_NEAR(four_point_delta(s).delta, 0.0, 1e-12);
  std::vector<std::size_t> pick(20);
  std::iota(pick.begin(), pick.end(), 0);
  std::shuffle(pick.begin(), pick.end(), rng);
  pick.resize(10);
  EXPECT_NEAR(four_point_delta(subspace_restrict(s, pick)).delta, 0.0, 1e-12);
}

TEST(Oracle, RandomEightPointSpaces) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 20; ++trial) {
    const auto m = random_space(rng, 8, trial);
    const auto s = validate_metric(m);
    EXPECT_NEAR(four_point_delta(s).delta, oracle::naive_four_point(s.rows()), 1e-12) << trial;
    for (std::size_t b = 0; b < 8; ++b) {
      EXPECT_NEAR(three_point_delta(s, b).delta, oracle::naive_three_point(s.rows(), b), 1e-12) << trial;
    }
  }
}

TEST(Properties, RandomInstances) {
  std::mt19937_64 rng(77);
  double worst_gap = -1.0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 5 + trial % 5;
    const auto s = validate_metric(random_space(rng, n, trial));
    const auto full = four_point_delta(s);

    // Relabeling invariance.
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    EXPECT_NEAR(four_point_delta(subspace_restrict(s, perm)).delta, full.delta, 1e-12);

    // Subspace monotonicity.
    std::vector<std::size_t> sub(perm.begin(), perm.begin() + static_cast<long>(n - 1));
    EXPECT_LE(four_point_delta(subspace_restrict(s, sub)).delta, full.delta + 1e-12);

    // Gromov product bounds and symmetry.
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t y = 0; y < n; ++y)
        for (std::size_t z = 0; z < n; ++z) {
          const double g = gromov_product(s, y, z, x);
          EXPECT_GE(g, 0.0);
          EXPECT_LE(g, std::min(s(y, x), s(z, x)));
          EXPECT_EQ(g, gromov_product(s, z, y, x));
        }

    // Every quadruple's defect is at most 2 delta; quadruples through z are
    // bounded by 2 delta~(z).
    double min_three = INFINITY;
    for (std::size_t z = 0; z < n; ++z) {
      const double tz = three_point_delta(s, z).delta;
      min_three = std::min(min_three, tz);
      EXPECT_LE(tz, full.delta + 1e-12);
      for_each_quadruple(s, [&](std::size_t i, std::size_t j, std::size_t k, std::size_t l, double defect) {
        EXPECT_LE(defect, 2.0 * full.delta + 1e-12);
        if (i == z || j == z || k == z || l == z) EXPECT_LE(defect, 2.0 * tz + 1e-12);
      });
    }
    // Four-point constant against twice the best base point constant.
    worst_gap = std::max(worst_gap, full.delta - 2.0 * min_three);
    EXPECT_LE(full.delta, 2.0 * min_three + 1e-9);

    // Thread count never changes the result or its witness.
    const auto par = four_point_delta(s, {3});
    EXPECT_EQ(par.delta, full.delta);
    EXPECT_EQ(par.witness, full.witness);
    const auto t1 = three_point_delta(s, 0), t3 = three_point_delta(s, 0, {3});
    EXPECT_EQ(t1.delta, t3.delta);
    EXPECT_EQ(t1.witness, t3.witness);
  }
  RecordProperty("max_delta_minus_2_min_three_point", std::to_string(worst_gap));
}

TEST(Defects, OrderedAndPairingForms) {
  const auto sq = unit_square();
  // Diagonals paired: 2 sqrt2 against 2.
  EXPECT_NEAR(ordered_defect(sq, 0, 2, 1, 3), 2.0 * std::numbers::sqrt2 - 2.0, 1e-15);
  EXPECT_EQ(ordered_defect(sq, 0, 1, 2, 3), 0.0);
  EXPECT_NEAR(quadruple_defect(sq, 3, 1, 0, 2), 2.0 * std::numbers::sqrt2 - 2.0, 1e-15);
  EXPECT_EQ(pairing_excess(1.0, 1.0, 1.0), 0.0);
  EXPECT_EQ(pairing_excess(5.0, 2.0, 3.0), 2.0);
}

TEST(FourPoint, TieBreakIsLexicographic) {
  // All quadruples of the 5-point equidistant space tie at 0.
  oracle::Matrix m(5, std::vector<double>(5, 1.0));
  for (int i = 0; i < 5; ++i) m[i][i] = 0.0;
  const auto r = four_point_delta(validate_metric(m), {4});
  EXPECT_EQ(r.witness, (std::array<std::size_t, 4>{0, 1, 2, 3}));
}
