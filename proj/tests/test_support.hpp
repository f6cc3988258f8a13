#pragma once

// Random instance generators shared by the unit and acceptance suites.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "maxdiv/core.hpp"

namespace maxdiv::testing {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo = 0.0, double hi = 1.0) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline std::size_t uniform_int(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

/// Off-diagonal entries i.i.d. uniform on [lo, hi), symmetrized, unit diagonal.
inline SimilarityMatrix random_similarity(Rng& rng, std::size_t n, double lo = 0.0,
                                          double hi = 1.0) {
  std::vector<std::vector<double>> z(n, std::vector<double>(n, 1.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) z[i][j] = z[j][i] = uniform(rng, lo, hi);
  }
  return validate_similarity(z);
}

/// Dirichlet(1) sample.
inline Distribution random_distribution(Rng& rng, std::size_t n) {
  std::exponential_distribution<double> expo(1.0);
  std::vector<double> p(n);
  double total = 0.0;
  for (auto& v : p) total += (v = expo(rng));
  for (auto& v : p) v /= total;
  return Distribution::from(std::move(p));
}

/// Dirichlet(1) on a random nonempty subset of coordinates, zero elsewhere.
inline Distribution random_sparse_distribution(Rng& rng, std::size_t n) {
  std::vector<double> p(n, 0.0);
  std::exponential_distribution<double> expo(1.0);
  double total = 0.0;
  while (total == 0.0) {
    for (auto& v : p) {
      v = uniform(rng) < 0.5 ? 0.0 : expo(rng);
      total += v;
    }
  }
  for (auto& v : p) v /= total;
  return Distribution::from(std::move(p));
}

/// Reflexive graph with each non-loop edge present with probability `prob`.
inline SimilarityMatrix random_graph(Rng& rng, std::size_t n, double prob) {
  std::vector<std::vector<bool>> rel(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i) {
    rel[i][i] = true;
    for (std::size_t j = i + 1; j < n; ++j) rel[i][j] = rel[j][i] = uniform(rng) < prob;
  }
  return from_reflexive_graph(rel);
}

/// Taxonomic matrix from a random hierarchy: each level refines the one
/// above it, and level similarities strictly decrease going up.
inline SimilarityMatrix random_ultrametric(Rng& rng, std::size_t n) {
  const std::size_t levels = uniform_int(rng, 1, 4);
  std::vector<std::vector<int>> lineage(n, std::vector<int>(levels + 1, 0));
  for (std::size_t i = 0; i < n; ++i) {
    int label = 0;
    for (std::size_t l = levels + 1; l-- > 0;) {
      // Level `levels` is the root taxon shared by everyone.
      if (l < levels) label = label * 4 + static_cast<int>(uniform_int(rng, 0, 2));
      lineage[i][l] = label;
    }
  }
  std::vector<double> sims(levels + 1);
  double s = uniform(rng, 0.3, 0.99);
  for (std::size_t l = 0; l <= levels; ++l) {
    sims[l] = s;
    s *= uniform(rng, 0.2, 0.95);
  }
  if (uniform(rng) < 0.3) sims[levels] = 0.0;
  return from_taxonomy(taxonomy_ranks(lineage), sims);
}

/// exp(-d) for three points with random distances obeying the triangle
/// inequality.
inline SimilarityMatrix random_metric3(Rng& rng) {
  const double d12 = uniform(rng, 0.01, 2.0);
  const double d13 = uniform(rng, 0.01, 2.0);
  const double d23 = uniform(rng, std::abs(d12 - d13) + 1e-3, d12 + d13);
  return from_distance_matrix({{0, d12, d13}, {d12, 0, d23}, {d13, d23, 0}});
}

/// exp(-|x - y|) on random points of the plane; positive definite.
inline SimilarityMatrix random_positive_definite(Rng& rng, std::size_t n, double spread = 2.0) {
  std::vector<std::pair<double, double>> pts(n);
  for (auto& [x, y] : pts) {
    x = uniform(rng, 0.0, spread);
    y = uniform(rng, 0.0, spread);
  }
  std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      d[i][j] = std::hypot(pts[i].first - pts[j].first, pts[i].second - pts[j].second);
    }
  }
  return from_distance_matrix(d);
}

/// Off-diagonal entries below 1/(n-1).
inline SimilarityMatrix random_scattered(Rng& rng, std::size_t n) {
  const double bound = n > 1 ? 1.0 / static_cast<double>(n - 1) : 1.0;
  return random_similarity(rng, n, 0.0, bound * 0.999);
}

inline SimilarityMatrix block_diagonal(const SimilarityMatrix& a, const SimilarityMatrix& b) {
  const std::size_t n = a.size() + b.size();
  std::vector<std::vector<double>> z(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < a.size(); ++j) z[i][j] = a(i, j);
  }
  for (std::size_t i = 0; i < b.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) z[a.size() + i][a.size() + j] = b(i, j);
  }
  return validate_similarity(z);
}

inline SimilarityMatrix constant_off_diagonal(std::size_t n, double z) {
  std::vector<std::vector<double>> m(n, std::vector<double>(n, z));
  for (std::size_t i = 0; i < n; ++i) m[i][i] = 1.0;
  return validate_similarity(m);
}

inline SimilarityMatrix matrix(const std::vector<std::vector<double>>& rows) {
  return validate_similarity(rows);
}

}  // namespace maxdiv::testing
