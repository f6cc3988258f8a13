#pragma once

// Brute-force reference computations, independent of the subset/weighting
// machinery in maximizer.hpp. Used by the test suites and `maxdiv verify`;
// the core library headers do not include this one.
//
//  - oracle_max_d2: maximizes D_2(p) = 1/(p^t Z p) by multistart projected
//    gradient on the simplex.
//  - oracle_max_d0_grid: evaluates D_0 on a simplex lattice (n <= 4).
//  - independence_number: largest discrete vertex set of a 0/1 matrix.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <thread>
#include <vector>

#include "maxdiv/core.hpp"
#include "maxdiv/means.hpp"

namespace maxdiv {

struct OracleResult {
  double value = 0.0;
  Distribution argmax = Distribution::uniform(1);
  int restarts = 0;
  bool converged = false;
};

struct ProjectedGradientOptions {
  std::size_t max_iterations = 100000;
  double step_tol = 1e-12;
  unsigned jobs = 1;
};

namespace oracle_detail {

/// Euclidean projection onto the probability simplex (sort-based).
inline std::vector<double> project_to_simplex(std::vector<double> v) {
  std::vector<double> u = v;
  std::sort(u.begin(), u.end(), std::greater<>());
  double cum = 0.0;
  double theta = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    cum += u[k];
    const double t = (cum - 1.0) / static_cast<double>(k + 1);
    if (u[k] - t > 0.0) theta = t;
  }
  for (double& x : v) x = std::max(x - theta, 0.0);
  return v;
}

inline double quadratic_form(const SimilarityMatrix& z, std::span<const double> p) {
  const auto zp = multiply(z, p);
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += p[i] * zp[i];
  return s;
}

/// Largest eigenvalue of Z by power iteration (Z is entrywise non-negative).
inline double lambda_max(const SimilarityMatrix& z) {
  const std::size_t n = z.size();
  std::vector<double> x(n, 1.0 / std::sqrt(static_cast<double>(n)));
  double lambda = 1.0;
  for (int it = 0; it < 500; ++it) {
    auto y = multiply(z, x);
    double norm = 0.0;
    for (double v : y) norm += v * v;
    norm = std::sqrt(norm);
    if (norm == 0.0) break;
    for (double& v : y) v /= norm;
    const bool done = std::abs(norm - lambda) <= 1e-14 * norm;
    lambda = norm;
    x = std::move(y);
    if (done) break;
  }
  return lambda;
}

inline std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct RestartResult {
  std::vector<double> p;
  double objective = 0.0;
  bool converged = false;
};

inline RestartResult descend(const SimilarityMatrix& z, std::vector<double> p, double step,
                             const ProjectedGradientOptions& opt) {
  const std::size_t n = z.size();
  RestartResult r;
  for (std::size_t it = 0; it < opt.max_iterations; ++it) {
    const auto zp = multiply(z, p);
    std::vector<double> next(n);
    for (std::size_t i = 0; i < n; ++i) next[i] = p[i] - step * 2.0 * zp[i];
    next = project_to_simplex(std::move(next));
    double change = 0.0;
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      change = std::max(change, std::abs(next[i] - p[i]));
      scale = std::max(scale, std::abs(p[i]));
    }
    p = std::move(next);
    if (change <= opt.step_tol * std::max(scale, 1.0)) {
      r.converged = true;
      break;
    }
  }
  r.objective = quadratic_form(z, p);
  r.p = std::move(p);
  return r;
}

}  // namespace oracle_detail

/// Maximum of D_2 over the simplex, i.e. 1 / min p^t Z p, by projected
/// gradient descent from `restarts` Dirichlet(1) starting points.
inline OracleResult oracle_max_d2(const SimilarityMatrix& z, int restarts, std::uint64_t seed,
                                  const ProjectedGradientOptions& opt = {}) {
  using namespace oracle_detail;
  const std::size_t n = z.size();
  restarts = std::max(restarts, 1);
  const double step = 1.0 / (2.0 * lambda_max(z) * (1.0 + 1e-9));

  auto start = [&](int k) {
    std::mt19937_64 rng(splitmix(seed ^ splitmix(static_cast<std::uint64_t>(k))));
    std::exponential_distribution<double> expo(1.0);
    std::vector<double> p(n);
    double total = 0.0;
    for (double& v : p) total += (v = expo(rng));
    for (double& v : p) v /= total;
    return p;
  };

  std::vector<RestartResult> results(static_cast<std::size_t>(restarts));
  auto run = [&](int k) { results[static_cast<std::size_t>(k)] = descend(z, start(k), step, opt); };
  const unsigned jobs = std::clamp(opt.jobs, 1U, static_cast<unsigned>(restarts));
  if (jobs == 1) {
    for (int k = 0; k < restarts; ++k) run(k);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < jobs; ++w) {
      pool.emplace_back([&, w] {
        for (int k = static_cast<int>(w); k < restarts; k += static_cast<int>(jobs)) run(k);
      });
    }
  }

  std::size_t best = 0;
  for (std::size_t k = 1; k < results.size(); ++k) {
    if (results[k].objective < results[best].objective) best = k;
  }
  OracleResult out;
  out.value = 1.0 / results[best].objective;
  out.argmax = Distribution::from(results[best].p);
  out.restarts = restarts;
  out.converged = results[best].converged;
  return out;
}

/// D_0(p) = sum over supp(p) of p_i / (Zp)_i.
inline double d0(const SimilarityMatrix& z, std::span<const double> p) {
  const auto zp = multiply(z, p);
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) s += p[i] / zp[i];
  }
  return s;
}

/// Max of D_0 over {k/resolution} lattice points of the simplex, boundary
/// faces included.
inline OracleResult oracle_max_d0_grid(const SimilarityMatrix& z, int resolution) {
  const std::size_t n = z.size();
  if (n > 4) detail::fail(ErrorCode::DimensionTooLarge, "grid oracle needs n <= 4, got ", n);
  if (resolution < 1) detail::fail(ErrorCode::ParseError, "grid resolution must be positive");
  OracleResult out;
  out.value = -1.0;
  out.converged = true;
  std::vector<int> counts(n, 0);
  std::vector<double> p(n);
  const double res = resolution;
  std::function<void(std::size_t, int)> walk = [&](std::size_t i, int left) {
    if (i + 1 == n) {
      counts[i] = left;
      for (std::size_t k = 0; k < n; ++k) p[k] = counts[k] / res;
      const double v = d0(z, p);
      if (v > out.value) {
        out.value = v;
        out.argmax = Distribution::from(p);
      }
      return;
    }
    for (int c = 0; c <= left; ++c) {
      counts[i] = c;
      walk(i + 1, left - c);
    }
  };
  walk(0, resolution);
  return out;
}

/// Largest set of vertices with Z_ij = 0 for all distinct pairs, for a 0/1
/// similarity matrix (reflexive graph).
inline int independence_number(const SimilarityMatrix& z) {
  const std::size_t n = z.size();
  if (n > 25) detail::fail(ErrorCode::DimensionTooLarge, "independence number needs n <= 25");
  std::vector<std::uint32_t> neighbours(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double v = z(i, j);
      if (v != 0.0 && v != 1.0) {
        detail::fail(ErrorCode::NotAGraphMatrix, "entry (", i + 1, ",", j + 1, ") = ", v,
                     " is not 0 or 1");
      }
      if (i != j && v == 1.0) neighbours[i] |= std::uint32_t{1} << j;
    }
  }
  int best = 0;
  std::function<void(std::uint32_t, int)> grow = [&](std::uint32_t candidates, int size) {
    if (candidates == 0) {
      best = std::max(best, size);
      return;
    }
    if (size + std::popcount(candidates) <= best) return;
    const int v = std::countr_zero(candidates);
    const std::uint32_t bit = std::uint32_t{1} << v;
    grow(candidates & ~bit & ~neighbours[static_cast<std::size_t>(v)], size + 1);
    grow(candidates & ~bit, size);
  };
  const std::uint32_t all = n == 32 ? ~std::uint32_t{0} : (std::uint32_t{1} << n) - 1;
  grow(all, 0);
  return best;
}

}  // namespace maxdiv
