#pragma once

// Weightings (solutions of Zw = 1), magnitude, and structural tests that
// guarantee a positive weighting.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "maxdiv/core.hpp"
#include "maxdiv/linalg.hpp"

namespace maxdiv {

/// Weighting entries >= -kNonnegTol count as non-negative.
inline constexpr double kNonnegTol = 1e-9;
/// Largest admissible max_i |(Zw)_i - 1| for a returned weighting.
inline constexpr double kResidualTol = 1e-8;

enum class WeightingStatus {
  UniqueWeighting,
  AffineFamilyFeasible,          ///< singular; some weighting is non-negative
  AffineFamilyInfeasibleNonneg,  ///< singular; weightings exist, none non-negative
  NoWeighting,
};

inline const char* to_string(WeightingStatus s) {
  switch (s) {
    case WeightingStatus::UniqueWeighting: return "UniqueWeighting";
    case WeightingStatus::AffineFamilyFeasible: return "AffineFamilyFeasible";
    case WeightingStatus::AffineFamilyInfeasibleNonneg: return "AffineFamilyInfeasibleNonneg";
    case WeightingStatus::NoWeighting: return "NoWeighting";
  }
  return "Unknown";
}

struct WeightingResult {
  WeightingStatus status = WeightingStatus::NoWeighting;
  std::optional<std::vector<double>> representative;
  std::optional<double> magnitude;
  bool nonneg = false;
};

namespace detail {

inline linalg::Dense dense_of(const SimilarityMatrix& z) {
  linalg::Dense d(z.size(), z.size());
  std::copy(z.data().begin(), z.data().end(), d.a.begin());
  return d;
}

/// Z_B as a dense matrix, without going through validation.
inline linalg::Dense dense_of(const SimilarityMatrix& z, std::span<const std::size_t> idx) {
  const std::size_t m = idx.size();
  linalg::Dense d(m, m);
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t c = 0; c < m; ++c) d(a, c) = z(idx[a], idx[c]);
  }
  return d;
}

inline bool all_nonneg(std::span<const double> w) {
  return std::all_of(w.begin(), w.end(), [](double v) { return v >= -kNonnegTol; });
}

inline double sum(std::span<const double> w) { return std::accumulate(w.begin(), w.end(), 0.0); }

/// Unique weighting when the matrix passes the invertibility gate and the
/// solve meets the residual bound.
inline std::optional<std::vector<double>> unique_weighting(const linalg::Dense& m) {
  linalg::Lu lu(m);
  if (lu.singular()) return std::nullopt;
  const std::vector<double> ones(m.rows, 1.0);
  auto w = lu.solve(ones);
  if (linalg::residual(m, w, ones) > kResidualTol) return std::nullopt;
  return w;
}

inline WeightingResult solve_weighting(const linalg::Dense& m) {
  WeightingResult out;
  const std::vector<double> ones(m.rows, 1.0);
  if (auto w = unique_weighting(m)) {
    out.status = WeightingStatus::UniqueWeighting;
    out.nonneg = all_nonneg(*w);
    out.magnitude = sum(*w);
    out.representative = std::move(*w);
    return out;
  }
  auto any = linalg::solve_any(m, ones);
  if (!any.consistent) {
    out.status = WeightingStatus::NoWeighting;
    return out;
  }
  if (auto v = linalg::feasible_vertex(m, ones)) {
    out.status = WeightingStatus::AffineFamilyFeasible;
    out.nonneg = true;
    out.magnitude = sum(*v);
    out.representative = std::move(*v);
  } else {
    out.status = WeightingStatus::AffineFamilyInfeasibleNonneg;
    out.nonneg = all_nonneg(any.x);
    out.magnitude = sum(any.x);
    out.representative = std::move(any.x);
  }
  return out;
}

}  // namespace detail

/// Solves Zw = (1, ..., 1). Invertible Z gives the unique weighting;
/// otherwise the affine solution set is classified by LP feasibility.
inline WeightingResult solve_weighting(const SimilarityMatrix& z) {
  return detail::solve_weighting(detail::dense_of(z));
}

/// Decides whether {w : Zw = 1, w >= 0} is nonempty by phase-1 simplex and
/// returns a vertex when it is.
inline std::pair<bool, std::optional<std::vector<double>>> nonneg_weighting_exists(
    const SimilarityMatrix& z) {
  const std::vector<double> ones(z.size(), 1.0);
  auto v = linalg::feasible_vertex(detail::dense_of(z), ones);
  const bool ok = v.has_value();
  return {ok, std::move(v)};
}

/// Sum of any weighting, when one exists.
inline std::optional<double> magnitude(const SimilarityMatrix& z) {
  return solve_weighting(z).magnitude;
}

/// Magnitude of Z_B; the empty subset has magnitude 0.
inline std::optional<double> magnitude(const SimilarityMatrix& z, const SubsetMask& b) {
  if (b.empty()) return 0.0;
  return detail::solve_weighting(detail::dense_of(z, b.members())).magnitude;
}

inline bool is_positive_definite(const SimilarityMatrix& z, double pivot_tol = 1e-10) {
  return linalg::cholesky_succeeds(detail::dense_of(z), pivot_tol);
}

/// Every off-diagonal entry is below 1/(n-1).
inline bool is_scattered(const SimilarityMatrix& z) {
  const std::size_t n = z.size();
  if (n <= 1) return true;
  const double bound = 1.0 / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && !(z(i, j) < bound)) return false;
    }
  }
  return true;
}

/// w/|Z| for a non-negative weighting w; then (Zp)_i = 1/|Z| for every i.
inline std::optional<Distribution> weight_distribution(const SimilarityMatrix& z) {
  const auto r = solve_weighting(z);
  if (!r.nonneg || !r.representative) return std::nullopt;
  std::vector<double> w = *r.representative;
  for (double& v : w) v = std::max(v, 0.0);
  const double total = detail::sum(w);
  for (double& v : w) v /= total;
  return Distribution::from(std::move(w));
}

}  // namespace maxdiv
