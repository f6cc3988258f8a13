#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <vector>

#include "maxdiv/maximizer.hpp"
#include "test_support.hpp"

using namespace maxdiv;
using maxdiv::testing::matrix;
using maxdiv::testing::Rng;

namespace {

const std::vector<OrderQ> kGrid = {OrderQ::finite(0),   OrderQ::finite(0.5), OrderQ::finite(1),
                                   OrderQ::finite(2),   OrderQ::finite(3.5), OrderQ::finite(8),
                                   OrderQ::infinity()};

// Largest sum of a non-negative solution of Z_B w = 1 over nonsingular Z_B,
// with Eigen doing the solves. Fine for generic random matrices, where every
// principal submatrix is invertible.
double brute_force_dmax(const SimilarityMatrix& z) {
  const std::size_t n = z.size();
  double best = 0.0;
  for (std::uint64_t bits = 1; bits < (std::uint64_t{1} << n); ++bits) {
    std::vector<Eigen::Index> idx;
    for (std::size_t i = 0; i < n; ++i) {
      if ((bits >> i) & 1U) idx.push_back(static_cast<Eigen::Index>(i));
    }
    const auto m = static_cast<Eigen::Index>(idx.size());
    Eigen::MatrixXd zb(m, m);
    for (Eigen::Index a = 0; a < m; ++a) {
      for (Eigen::Index c = 0; c < m; ++c) {
        zb(a, c) = z(static_cast<std::size_t>(idx[a]), static_cast<std::size_t>(idx[c]));
      }
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(zb);
    if (!lu.isInvertible()) continue;
    const Eigen::VectorXd w = lu.solve(Eigen::VectorXd::Ones(m));
    if (w.minCoeff() >= -1e-9) best = std::max(best, w.sum());
  }
  return best;
}

void expect_same_report(const MaximizationReport& a, const MaximizationReport& b) {
  EXPECT_EQ(a.dmax, b.dmax);
  ASSERT_EQ(a.maximal_subsets.size(), b.maximal_subsets.size());
  for (std::size_t k = 0; k < a.maximal_subsets.size(); ++k) {
    EXPECT_EQ(a.maximal_subsets[k].mask, b.maximal_subsets[k].mask);
    EXPECT_EQ(a.maximal_subsets[k].weighting, b.maximal_subsets[k].weighting);
  }
  EXPECT_EQ(a.maximizing_distributions, b.maximizing_distributions);
  EXPECT_EQ(a.method, b.method);
  EXPECT_EQ(a.components, b.components);
  EXPECT_EQ(a.component_methods, b.component_methods);
}

std::vector<std::vector<std::size_t>> subset_members(const MaximizationReport& r) {
  std::vector<std::vector<std::size_t>> out;
  for (const auto& g : r.maximal_subsets) out.emplace_back(g.mask.begin(), g.mask.end());
  return out;
}

}  // namespace

TEST(ConnectedComponents, Examples) {
  using V = std::vector<std::vector<std::size_t>>;
  EXPECT_EQ(connected_components(SimilarityMatrix::identity(3)), (V{{0}, {1}, {2}}));
  EXPECT_EQ(connected_components(matrix({{1, 0, .2}, {0, 1, 0}, {.2, 0, 1}})), (V{{0, 2}, {1}}));
  EXPECT_EQ(connected_components(matrix({{1, .1, 0}, {.1, 1, .1}, {0, .1, 1}})), (V{{0, 1, 2}}));
}

TEST(Maximize, IdentityGivesUniform) {
  for (std::size_t n = 1; n <= 6; ++n) {
    const auto r = maximize(SimilarityMatrix::identity(n));
    EXPECT_NEAR(r.dmax, n, 1e-12);
    ASSERT_EQ(r.maximal_subsets.size(), 1U);
    EXPECT_EQ(r.maximal_subsets[0].mask, SubsetMask::full(n));
    ASSERT_EQ(r.maximizing_distributions.size(), 1U);
    for (double v : r.maximizing_distributions[0].values()) EXPECT_NEAR(v, 1.0 / n, 1e-12);
  }
}

TEST(Maximize, FourCycleHasTwoMaximizers) {
  const auto z = from_reflexive_graph(reflexive_graph(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}}));
  const auto r = maximize(z);
  EXPECT_NEAR(r.dmax, 2.0, 1e-12);
  EXPECT_EQ(r.method, Method::Exhaustive);
  EXPECT_EQ(subset_members(r), (std::vector<std::vector<std::size_t>>{{0, 2}, {1, 3}}));
  ASSERT_EQ(r.maximizing_distributions.size(), 2U);
  const std::vector<double> a = {0.5, 0, 0.5, 0}, b = {0, 0.5, 0, 0.5};
  const auto v0 = r.maximizing_distributions[0].values();
  const auto v1 = r.maximizing_distributions[1].values();
  EXPECT_TRUE((std::vector<double>(v0.begin(), v0.end()) == a &&
               std::vector<double>(v1.begin(), v1.end()) == b) ||
              (std::vector<double>(v0.begin(), v0.end()) == b &&
               std::vector<double>(v1.begin(), v1.end()) == a));
}

TEST(Maximize, ConstantTriangle) {
  const auto r = maximize(maxdiv::testing::constant_off_diagonal(3, 0.5));
  EXPECT_NEAR(r.dmax, 1.5, 1e-12);
  EXPECT_EQ(r.method, Method::UltrametricFastPath);
  for (double v : r.maximizing_distributions.at(0).values()) EXPECT_NEAR(v, 1.0 / 3, 1e-12);
}

TEST(Maximize, TaxonomyExample) {
  const auto r = maximize(matrix({{1, .8, 0}, {.8, 1, 0}, {0, 0, 1}}));
  EXPECT_NEAR(r.dmax, 19.0 / 9.0, 1e-12);
  EXPECT_EQ(r.method, Method::ComponentDecomposition);
  EXPECT_EQ(r.component_methods,
            (std::vector<Method>{Method::UltrametricFastPath, Method::UltrametricFastPath}));
  ASSERT_EQ(r.maximizing_distributions.size(), 1U);
  const auto& p = r.maximizing_distributions[0];
  EXPECT_NEAR(p[0], (1 / 1.8) / (19.0 / 9.0), 1e-12);
  EXPECT_NEAR(p[2], 1 / (19.0 / 9.0), 1e-12);
}

TEST(Maximize, IndefiniteExample) {
  const auto z = matrix({{1, .9, .2, .7}, {.9, 1, .95, .1}, {.2, .95, 1, .6}, {.7, .1, .6, 1}});
  const auto r = maximize(z);
  EXPECT_NEAR(r.dmax, 2 / 1.1, 1e-12);
  EXPECT_EQ(r.method, Method::Exhaustive);
  EXPECT_EQ(subset_members(r), (std::vector<std::vector<std::size_t>>{{1, 3}}));
  // The full set has a positive weighting but the matrix is indefinite, so
  // the full magnitude is not the answer.
  const auto full = solve_weighting(z);
  EXPECT_TRUE(full.nonneg);
  EXPECT_LT(*full.magnitude, r.dmax);
}

TEST(Maximize, NoNonNegativeWeightingOnFullSet) {
  const auto r = maximize(matrix({{1, .9, 0}, {.9, 1, .9}, {0, .9, 1}}));
  EXPECT_NEAR(r.dmax, 2.0, 1e-12);
  EXPECT_EQ(subset_members(r), (std::vector<std::vector<std::size_t>>{{0, 2}}));
}

TEST(Maximize, MetricThreePointExample) {
  const auto z = from_distance_matrix({{0, .7, 1.2}, {.7, 0, .9}, {1.2, .9, 0}});
  const auto r = maximize(z);
  EXPECT_NEAR(r.dmax, 1.6745079031471801, 1e-10);
  const auto& p = r.maximizing_distributions.at(0);
  EXPECT_NEAR(p[0], 0.34854196, 1e-8);
  EXPECT_NEAR(p[1], 0.26834908, 1e-8);
  EXPECT_NEAR(p[2], 0.38310896, 1e-8);
}

TEST(Maximize, DegenerateBlocksReportVertices) {
  const auto ones = matrix({{1, 1}, {1, 1}});
  const auto r = maximize(maxdiv::testing::block_diagonal(ones, ones));
  EXPECT_NEAR(r.dmax, 2.0, 1e-12);
  EXPECT_EQ(r.maximal_subsets.size(), 9U);
  EXPECT_EQ(r.maximizing_distributions.size(), 4U);
  for (const auto& p : r.maximizing_distributions) {
    EXPECT_NEAR(p[0] + p[1], 0.5, 1e-12);
    EXPECT_NEAR(p[2] + p[3], 0.5, 1e-12);
  }
  MaximizeOptions opt;
  opt.max_reported = 4;
  const auto cut = maximize(maxdiv::testing::block_diagonal(ones, ones), opt);
  EXPECT_TRUE(cut.truncated);
  EXPECT_EQ(cut.maximal_subsets.size(), 4U);
  EXPECT_FALSE(r.truncated);
}

TEST(Maximize, MatchesIndependentBruteForce) {
  Rng rng(2024);
  for (int trial = 0; trial < 150; ++trial) {
    const std::size_t n = maxdiv::testing::uniform_int(rng, 1, 8);
    const auto z = maxdiv::testing::random_similarity(rng, n);
    const double expect = brute_force_dmax(z);
    EXPECT_NEAR(maximize(z).dmax, expect, 1e-9 * expect);
  }
}

TEST(Maximize, GoodSubsetsCarryValidWeightings) {
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = maxdiv::testing::uniform_int(rng, 1, 8);
    const auto z = maxdiv::testing::random_similarity(rng, n);
    const auto r = maximize(z);
    for (const auto& g : r.maximal_subsets) {
      const auto zb = restrict(z, g.mask);
      for (double v : g.weighting) EXPECT_GE(v, 0.0);
      for (double v : multiply(zb, g.weighting)) EXPECT_NEAR(v, 1.0, 1e-8);
      EXPECT_NEAR(detail::sum(g.weighting), r.dmax, 1e-9 * r.dmax);
    }
  }
}

TEST(Maximize, MaximizersAreConstantInOrderAndInvariant) {
  Rng rng(17);
  for (int trial = 0; trial < 150; ++trial) {
    const std::size_t n = maxdiv::testing::uniform_int(rng, 1, 8);
    const auto z = trial % 2 ? maxdiv::testing::random_similarity(rng, n)
                             : maxdiv::testing::random_graph(rng, n, 0.4);
    const auto r = maximize(z);
    ASSERT_FALSE(r.maximizing_distributions.empty());
    for (const auto& p : r.maximizing_distributions) {
      EXPECT_TRUE(is_invariant(z, p, 1e-8));
      for (const auto& q : kGrid) {
        EXPECT_NEAR(diversity(z, p, q), r.dmax, 1e-9 * r.dmax);
        EXPECT_TRUE(check_q_maximizing(z, p, q, r));
      }
    }
  }
}

TEST(Maximize, NoDistributionBeatsTheMaximum) {
  Rng rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = maxdiv::testing::uniform_int(rng, 1, 7);
    const auto z = maxdiv::testing::random_similarity(rng, n);
    const auto r = maximize(z);
    for (int k = 0; k < 30; ++k) {
      const auto p = k % 2 ? maxdiv::testing::random_distribution(rng, n)
                           : maxdiv::testing::random_sparse_distribution(rng, n);
      for (const auto& q : kGrid) EXPECT_LE(diversity(z, p, q), r.dmax * (1 + 1e-9));
    }
    // Small moves away from a maximizer do not help either.
    const auto base = r.maximizing_distributions[0].values();
    for (int k = 0; k < 30; ++k) {
      std::vector<double> p(base.begin(), base.end());
      double total = 0.0;
      for (double& v : p) total += (v = std::max(0.0, v + maxdiv::testing::uniform(rng, -1e-3, 1e-3)));
      if (total == 0.0) continue;
      for (double& v : p) v /= total;
      const auto d = Distribution::from(p);
      EXPECT_LE(diversity(z, d, OrderQ::finite(2)), r.dmax * (1 + 1e-9));
    }
  }
}

TEST(Maximize, SupremumEntropyFollowsFromDmax) {
  const auto r = maximize(matrix({{1, .8}, {.8, 1}}));
  ASSERT_EQ(r.sup_entropy.size(), 3U);
  EXPECT_NEAR(r.sup_entropy[0].value, r.dmax - 1, 1e-12);
  EXPECT_NEAR(r.sup_entropy[1].value, std::log(r.dmax), 1e-12);
  EXPECT_NEAR(r.sup_entropy[2].value, 1 - 1 / r.dmax, 1e-12);
}

TEST(Maximize, FastPathsAgreeWithExhaustive) {
  Rng rng(31);
  MaximizeOptions slow;
  slow.fast_paths = false;
  slow.decompose = false;
  for (int trial = 0; trial < 120; ++trial) {
    const std::size_t n = maxdiv::testing::uniform_int(rng, 1, 9);
    SimilarityMatrix z = SimilarityMatrix::identity(1);
    switch (trial % 3) {
      case 0: z = maxdiv::testing::random_ultrametric(rng, n); break;
      case 1: z = maxdiv::testing::random_scattered(rng, n); break;
      default: z = maxdiv::testing::random_positive_definite(rng, n, 3.0); break;
    }
    const auto fast = maximize(z);
    const auto exhaustive = maximize(z, slow);
    // exp(-d) in the plane can still have negative weights; then no fast path.
    if (trial % 3 != 2) {
      EXPECT_NE(fast.method, Method::Exhaustive);
    }
    EXPECT_EQ(exhaustive.method, Method::Exhaustive);
    EXPECT_NEAR(fast.dmax, exhaustive.dmax, 1e-9 * fast.dmax);
    EXPECT_EQ(subset_members(fast), subset_members(exhaustive));
  }
}

TEST(Maximize, DecompositionAddsComponentMaxima) {
  Rng rng(37);
  MaximizeOptions whole;
  whole.decompose = false;
  whole.fast_paths = false;
  for (int trial = 0; trial < 60; ++trial) {
    const auto a = maxdiv::testing::random_similarity(rng, maxdiv::testing::uniform_int(rng, 1, 5));
    const auto b = maxdiv::testing::random_similarity(rng, maxdiv::testing::uniform_int(rng, 1, 5));
    const auto z = maxdiv::testing::block_diagonal(a, b);
    const auto r = maximize(z);
    EXPECT_EQ(r.components.size(), 2U);
    EXPECT_NEAR(r.dmax, maximize(a).dmax + maximize(b).dmax, 1e-12 * r.dmax);
    EXPECT_NEAR(r.dmax, maximize(z, whole).dmax, 1e-9 * r.dmax);
  }
}

TEST(Maximize, ThreadCountDoesNotChangeTheReport) {
  Rng rng(41);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = maxdiv::testing::uniform_int(rng, 1, 10);
    const auto z = trial % 2 ? maxdiv::testing::random_similarity(rng, n)
                             : maxdiv::testing::random_graph(rng, n, 0.5);
    MaximizeOptions one, many;
    many.jobs = 4;
    expect_same_report(maximize(z, one), maximize(z, many));
  }
}

TEST(Maximize, BudgetGuard) {
  Rng rng(43);
  const auto z = maxdiv::testing::random_similarity(rng, 12, 0.5, 1.0);
  MaximizeOptions opt;
  opt.fast_paths = false;
  opt.subset_budget = 1000;
  try {
    maximize(z, opt);
    FAIL() << "expected ComponentTooLarge";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ComponentTooLarge);
  }
  opt.subset_budget = 4095;
  EXPECT_NO_THROW(maximize(z, opt));
}

TEST(Maximize, InteriorMaximizersOfConnectedMatricesAreWeightDistributions) {
  Rng rng(47);
  int interior = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = maxdiv::testing::uniform_int(rng, 2, 7);
    const auto z = maxdiv::testing::random_similarity(rng, n, 0.05, 1.0);
    ASSERT_EQ(connected_components(z).size(), 1U);
    for (const auto& p : maximize(z).maximizing_distributions) {
      if (support(p).size() != n) continue;
      ++interior;
      const auto zp = multiply(z, p);
      const auto [lo, hi] = std::minmax_element(zp.begin(), zp.end());
      EXPECT_LE(*hi - *lo, 1e-8);
    }
  }
  EXPECT_GT(interior, 10);
}

TEST(CheckQMaximizing, Examples) {
  const auto id = SimilarityMatrix::identity(2);
  const auto r = maximize(id);
  const auto skew = Distribution::from({0.9, 0.1});
  EXPECT_TRUE(check_q_maximizing(id, skew, OrderQ::finite(0), r));
  EXPECT_FALSE(check_q_maximizing(id, skew, OrderQ::finite(2), r));
  EXPECT_FALSE(check_q_maximizing(id, skew, OrderQ::infinity(), r));
  EXPECT_TRUE(check_q_maximizing(id, Distribution::uniform(2), OrderQ::infinity(), r));
  const auto p64 = Distribution::from({0.6, 0.4});
  EXPECT_FALSE(check_q_maximizing(id, p64, OrderQ::finite(2), r));
  EXPECT_TRUE(check_q_maximizing(id, p64, OrderQ::finite(0), r));
}
