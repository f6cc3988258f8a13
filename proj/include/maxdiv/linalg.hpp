#pragma once

// Small dense linear algebra used by the weighting layer. Matrices here are a
// few dozen rows at most, so everything is plain row-major loops.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace maxdiv::linalg {

/// Pivots below this fraction of the largest entry count as zero.
inline constexpr double kPivotRelTol = 1e-10;

struct Dense {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> a;

  Dense() = default;
  Dense(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}

  double& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }

  double max_abs() const {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
  }
};

/// LU with partial pivoting. `singular()` is set when some pivot falls under
/// kPivotRelTol times the largest entry; `solve` is then unavailable.
class Lu {
 public:
  explicit Lu(Dense m) : lu_(std::move(m)), perm_(lu_.rows) {
    const std::size_t n = lu_.rows;
    for (std::size_t i = 0; i < n; ++i) perm_[i] = i;
    const double threshold = kPivotRelTol * std::max(lu_.max_abs(), 1e-300);
    for (std::size_t k = 0; k < n; ++k) {
      std::size_t piv = k;
      for (std::size_t i = k + 1; i < n; ++i) {
        if (std::abs(lu_(i, k)) > std::abs(lu_(piv, k))) piv = i;
      }
      if (std::abs(lu_(piv, k)) < threshold) {
        singular_ = true;
        return;
      }
      if (piv != k) {
        for (std::size_t j = 0; j < n; ++j) std::swap(lu_(k, j), lu_(piv, j));
        std::swap(perm_[k], perm_[piv]);
      }
      for (std::size_t i = k + 1; i < n; ++i) {
        const double f = lu_(i, k) / lu_(k, k);
        lu_(i, k) = f;
        if (f == 0.0) continue;
        for (std::size_t j = k + 1; j < n; ++j) lu_(i, j) -= f * lu_(k, j);
      }
    }
  }

  bool singular() const noexcept { return singular_; }

  std::vector<double> solve(std::span<const double> b) const {
    const std::size_t n = lu_.rows;
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) {
      double acc = b[perm_[i]];
      for (std::size_t j = 0; j < i; ++j) acc -= lu_(i, j) * x[j];
      x[i] = acc;
    }
    for (std::size_t ii = n; ii-- > 0;) {
      double acc = x[ii];
      for (std::size_t j = ii + 1; j < n; ++j) acc -= lu_(ii, j) * x[j];
      x[ii] = acc / lu_(ii, ii);
    }
    return x;
  }

 private:
  Dense lu_;
  std::vector<std::size_t> perm_;
  bool singular_ = false;
};

/// Cholesky succeeds iff every pivot exceeds `pivot_tol`.
inline bool cholesky_succeeds(const Dense& m, double pivot_tol) {
  const std::size_t n = m.rows;
  Dense l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = m(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > pivot_tol)) return false;
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = m(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / ljj;
    }
  }
  return true;
}

inline std::vector<double> apply(const Dense& m, std::span<const double> x) {
  std::vector<double> y(m.rows, 0.0);
  for (std::size_t i = 0; i < m.rows; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < m.cols; ++j) acc += m(i, j) * x[j];
    y[i] = acc;
  }
  return y;
}

/// max_i |(Mx)_i - b_i|
inline double residual(const Dense& m, std::span<const double> x, std::span<const double> b) {
  const auto y = apply(m, x);
  double r = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) r = std::max(r, std::abs(y[i] - b[i]));
  return r;
}

struct RankSolve {
  bool consistent = false;
  std::size_t rank = 0;
  std::vector<double> x;  ///< a particular solution (free variables 0)
};

/// Gaussian elimination with full pivoting on [M | b]. Decides whether Mx = b
/// has a solution and returns one, with the numerical rank of M.
inline RankSolve solve_any(const Dense& m, std::span<const double> b) {
  const std::size_t r = m.rows;
  const std::size_t c = m.cols;
  Dense a = m;
  std::vector<double> rhs(b.begin(), b.end());
  std::vector<std::size_t> col(c);
  for (std::size_t j = 0; j < c; ++j) col[j] = j;
  const double threshold = kPivotRelTol * std::max(a.max_abs(), 1e-300);

  std::size_t rank = 0;
  for (; rank < std::min(r, c); ++rank) {
    std::size_t pi = rank, pj = rank;
    double best = 0.0;
    for (std::size_t i = rank; i < r; ++i) {
      for (std::size_t j = rank; j < c; ++j) {
        if (std::abs(a(i, j)) > best) {
          best = std::abs(a(i, j));
          pi = i;
          pj = j;
        }
      }
    }
    if (best < threshold) break;
    if (pi != rank) {
      for (std::size_t j = 0; j < c; ++j) std::swap(a(rank, j), a(pi, j));
      std::swap(rhs[rank], rhs[pi]);
    }
    if (pj != rank) {
      for (std::size_t i = 0; i < r; ++i) std::swap(a(i, rank), a(i, pj));
      std::swap(col[rank], col[pj]);
    }
    for (std::size_t i = rank + 1; i < r; ++i) {
      const double f = a(i, rank) / a(rank, rank);
      if (f == 0.0) continue;
      for (std::size_t j = rank; j < c; ++j) a(i, j) -= f * a(rank, j);
      rhs[i] -= f * rhs[rank];
    }
  }

  RankSolve out;
  out.rank = rank;
  double scale = 1.0;
  for (double v : b) scale = std::max(scale, std::abs(v));
  for (std::size_t i = rank; i < r; ++i) {
    if (std::abs(rhs[i]) > 1e-8 * scale) return out;
  }
  std::vector<double> y(c, 0.0);
  for (std::size_t ii = rank; ii-- > 0;) {
    double acc = rhs[ii];
    for (std::size_t j = ii + 1; j < rank; ++j) acc -= a(ii, j) * y[j];
    y[ii] = acc / a(ii, ii);
  }
  out.x.assign(c, 0.0);
  for (std::size_t j = 0; j < c; ++j) out.x[col[j]] = y[j];
  out.consistent = residual(m, out.x, b) <= 1e-8 * scale;
  return out;
}

/// Phase-1 simplex for {x : Mx = b, x >= 0} with b >= 0. Dense tableau,
/// Bland's rule, so the pivot sequence is deterministic and cannot cycle.
/// Returns a basic feasible solution when the set is nonempty.
inline std::optional<std::vector<double>> feasible_vertex(const Dense& m,
                                                          std::span<const double> b,
                                                          double feas_tol = 1e-9) {
  const std::size_t r = m.rows;
  const std::size_t c = m.cols;
  const std::size_t width = c + r + 1;  // structural | artificial | rhs
  constexpr double kEps = 1e-12;

  Dense t(r + 1, width);  // last row: phase-1 reduced costs
  std::vector<std::size_t> basis(r);
  for (std::size_t i = 0; i < r; ++i) {
    const double sign = b[i] < 0.0 ? -1.0 : 1.0;
    for (std::size_t j = 0; j < c; ++j) t(i, j) = sign * m(i, j);
    t(i, c + i) = 1.0;
    t(i, width - 1) = sign * b[i];
    basis[i] = c + i;
  }
  // Objective: minimize sum of artificials, reduced costs -sum(rows).
  for (std::size_t j = 0; j < width; ++j) {
    if (j >= c && j < c + r) continue;
    double s = 0.0;
    for (std::size_t i = 0; i < r; ++i) s += t(i, j);
    t(r, j) = -s;
  }

  const std::size_t max_iter = 50 * (r + c) + 100;
  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    std::size_t enter = width;
    for (std::size_t j = 0; j + 1 < width; ++j) {
      if (t(r, j) < -kEps) {
        enter = j;
        break;
      }
    }
    if (enter == width) break;
    std::size_t leave = r;
    double best_ratio = 0.0;
    for (std::size_t i = 0; i < r; ++i) {
      if (t(i, enter) > kEps) {
        const double ratio = t(i, width - 1) / t(i, enter);
        if (leave == r || ratio < best_ratio - kEps ||
            (std::abs(ratio - best_ratio) <= kEps && basis[i] < basis[leave])) {
          leave = i;
          best_ratio = ratio;
        }
      }
    }
    if (leave == r) break;  // unbounded direction; phase-1 objective is bounded below
    const double piv = t(leave, enter);
    for (std::size_t j = 0; j < width; ++j) t(leave, j) /= piv;
    for (std::size_t i = 0; i <= r; ++i) {
      if (i == leave) continue;
      const double f = t(i, enter);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < width; ++j) t(i, j) -= f * t(leave, j);
    }
    basis[leave] = enter;
  }

  double infeasibility = 0.0;
  for (std::size_t i = 0; i < r; ++i) {
    if (basis[i] >= c) infeasibility += std::max(t(i, width - 1), 0.0);
  }
  if (infeasibility > feas_tol) return std::nullopt;

  std::vector<double> x(c, 0.0);
  for (std::size_t i = 0; i < r; ++i) {
    if (basis[i] < c) x[basis[i]] = std::max(t(i, width - 1), 0.0);
  }
  double scale = 1.0;
  for (double v : b) scale = std::max(scale, std::abs(v));
  if (residual(m, x, b) > 1e-8 * scale) return std::nullopt;
  return x;
}

}  // namespace maxdiv::linalg
