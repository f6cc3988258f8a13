#pragma once

// Power means and the similarity-sensitive diversity D_q^Z and entropy H_q^Z.
//
// 1/D_q^Z(p) is the power mean of order q-1 of the values (Zp)_i over the
// support of p, weighted by p. Diversity and entropy are both computed from
// the logarithm of that mean so they satisfy
//   H_q = (1 - D_q^(1-q)) / (q - 1),   H_1 = log D_1.

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "maxdiv/core.hpp"

namespace maxdiv {

/// |q - 1| below this uses the geometric-mean (q = 1) formula.
inline constexpr double kUnitOrderWindow = 1e-6;

namespace detail {

/// log of the weighted power mean of order t. Inputs already validated.
/// Works relative to the geometric log-mean m, so the t -> 0 limit is smooth:
///   log M_t = m + log(sum_i w_i exp(t (log x_i - m))) / t.
inline double log_power_mean(std::span<const double> x, std::span<const double> w, double t) {
  const std::size_t k = x.size();
  std::vector<double> lx(k);
  double m = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    lx[i] = std::log(x[i]);
    m += w[i] * lx[i];
  }
  if (t == 0.0) return m;
  if (std::isinf(t)) {
    double e = t > 0 ? -std::numeric_limits<double>::infinity()
                     : std::numeric_limits<double>::infinity();
    for (double v : lx) e = t > 0 ? std::max(e, v) : std::min(e, v);
    return e;
  }
  double spread = 0.0;
  for (std::size_t i = 0; i < k; ++i) spread = std::max(spread, std::abs(t * (lx[i] - m)));
  double log_sum;
  if (spread <= 1.0) {
    double s = 0.0;
    for (std::size_t i = 0; i < k; ++i) s += w[i] * std::expm1(t * (lx[i] - m));
    log_sum = std::log1p(s);
  } else {
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < k; ++i) top = std::max(top, std::log(w[i]) + t * (lx[i] - m));
    double s = 0.0;
    for (std::size_t i = 0; i < k; ++i) s += std::exp(std::log(w[i]) + t * (lx[i] - m) - top);
    log_sum = top + std::log(s);
  }
  return m + log_sum / t;
}

/// Ordinariness values (Zp)_i and weights p_i over supp(p), weights
/// renormalized to sum to 1.
struct SupportView {
  std::vector<double> zp;
  std::vector<double> w;
};

inline SupportView support_view(const SimilarityMatrix& z, const Distribution& p) {
  if (z.size() != p.size()) {
    fail(ErrorCode::DimensionMismatch, "matrix of size ", z.size(), " with distribution of size ",
         p.size());
  }
  const auto all = multiply(z, p);
  SupportView v;
  double mass = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > kSupportTol) {
      v.zp.push_back(all[i]);
      v.w.push_back(p[i]);
      mass += p[i];
    }
  }
  for (double& wi : v.w) wi /= mass;
  return v;
}

/// log of the order-(q-1) mean of (Zp)_i, i.e. -log D_q.
inline double log_ordinariness_mean(const SimilarityMatrix& z, const Distribution& p, OrderQ q) {
  const auto v = support_view(z, p);
  if (q.is_infinite()) return std::log(*std::max_element(v.zp.begin(), v.zp.end()));
  const double t = q.value() - 1.0;
  return log_power_mean(v.zp, v.w, std::abs(t) < kUnitOrderWindow ? 0.0 : t);
}

}  // namespace detail

/// Weighted power mean of order t (t may be +-inf).
inline double power_mean(std::span<const double> x, std::span<const double> weights, double t) {
  if (x.empty() || x.size() != weights.size()) {
    detail::fail(ErrorCode::BadWeights, "need one positive weight per value");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !std::isfinite(x[i])) {
      detail::fail(ErrorCode::NonPositiveValue, "value ", i + 1, " = ", x[i]);
    }
    if (!(weights[i] > 0.0)) detail::fail(ErrorCode::BadWeights, "weight ", i + 1, " not positive");
    sum += weights[i];
  }
  if (std::abs(sum - 1.0) > kValidationTol) {
    detail::fail(ErrorCode::BadWeights, "weights sum to ", sum);
  }
  return std::exp(detail::log_power_mean(x, weights, t));
}

/// D_q^Z(p) for q in [0, inf].
inline double diversity(const SimilarityMatrix& z, const Distribution& p, OrderQ q) {
  return std::exp(-detail::log_ordinariness_mean(z, p, q));
}

/// H_q^Z(p) for finite q.
inline double entropy(const SimilarityMatrix& z, const Distribution& p, OrderQ q) {
  if (q.is_infinite()) {
    detail::fail(ErrorCode::InfiniteOrder, "entropy is not defined at q = inf");
  }
  const double log_mean = detail::log_ordinariness_mean(z, p, q);
  const double t = q.value() - 1.0;
  if (t == 0.0) return -log_mean;
  // In the unit window log_mean is the geometric mean; the formula below is
  // still the exact transform of the diversity computed from it.
  return -std::expm1(t * log_mean) / t;
}

/// Entropy from diversity via the order-q transform.
inline double entropy_from_diversity(double d, OrderQ q) {
  if (q.is_infinite()) {
    detail::fail(ErrorCode::InfiniteOrder, "entropy is not defined at q = inf");
  }
  const double t = q.value() - 1.0;
  if (t == 0.0) return std::log(d);
  return -std::expm1(-t * std::log(d)) / t;
}

struct ProfilePoint {
  OrderQ q;
  double diversity = 0.0;
  std::optional<double> entropy;  ///< absent at q = inf
};

inline std::vector<ProfilePoint> diversity_profile(const SimilarityMatrix& z,
                                                   const Distribution& p,
                                                   std::span<const OrderQ> qs) {
  if (qs.empty()) detail::fail(ErrorCode::EmptyInput, "no orders requested");
  std::vector<ProfilePoint> out;
  out.reserve(qs.size());
  for (const auto& q : qs) {
    ProfilePoint pt{q, diversity(z, p, q), std::nullopt};
    if (!q.is_infinite()) pt.entropy = entropy(z, p, q);
    out.push_back(pt);
  }
  return out;
}

/// (Zp)_i agrees across supp(p) to relative tolerance `tol`.
inline bool is_invariant(const SimilarityMatrix& z, const Distribution& p, double tol = 1e-9) {
  const auto v = detail::support_view(z, p);
  const auto [lo, hi] = std::minmax_element(v.zp.begin(), v.zp.end());
  return *hi - *lo <= tol * *hi;
}

}  // namespace maxdiv
