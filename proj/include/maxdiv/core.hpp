#pragma once

// Domain types shared by every part of the library: similarity matrices,
// probability distributions, index subsets and the order parameter q.
//
// Indices are 0-based in code. Text and file output uses 1-based indices.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace maxdiv {

inline constexpr double kValidationTol = 1e-9;
inline constexpr double kSupportTol = 1e-12;

enum class ErrorCode {
  EmptyInput,
  NonSquare,
  AsymmetryBeyondTol,
  EntryOutOfRange,
  BadDiagonal,
  NegativeDistance,
  NotReflexive,
  NotSymmetric,
  NotUltrametric,
  BadLevelSimilarities,
  EmptySubset,
  IndexOutOfRange,
  DimensionMismatch,
  NegativeProbability,
  BadNormalization,
  ZeroMassOnSubset,
  NonPositiveValue,
  BadWeights,
  InfiniteOrder,
  ComponentTooLarge,
  DimensionTooLarge,
  NotAGraphMatrix,
  ParseError,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::NonSquare: return "NonSquare";
    case ErrorCode::AsymmetryBeyondTol: return "AsymmetryBeyondTol";
    case ErrorCode::EntryOutOfRange: return "EntryOutOfRange";
    case ErrorCode::BadDiagonal: return "BadDiagonal";
    case ErrorCode::NegativeDistance: return "NegativeDistance";
    case ErrorCode::NotReflexive: return "NotReflexive";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::NotUltrametric: return "NotUltrametric";
    case ErrorCode::BadLevelSimilarities: return "BadLevelSimilarities";
    case ErrorCode::EmptySubset: return "EmptySubset";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NegativeProbability: return "NegativeProbability";
    case ErrorCode::BadNormalization: return "BadNormalization";
    case ErrorCode::ZeroMassOnSubset: return "ZeroMassOnSubset";
    case ErrorCode::NonPositiveValue: return "NonPositiveValue";
    case ErrorCode::BadWeights: return "BadWeights";
    case ErrorCode::InfiniteOrder: return "InfiniteOrder";
    case ErrorCode::ComponentTooLarge: return "ComponentTooLarge";
    case ErrorCode::DimensionTooLarge: return "DimensionTooLarge";
    case ErrorCode::NotAGraphMatrix: return "NotAGraphMatrix";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

namespace detail {

template <typename... Args>
[[noreturn]] void fail(ErrorCode code, const Args&... args) {
  std::ostringstream os;
  os.precision(17);
  (os << ... << args);
  throw Error(code, os.str());
}

}  // namespace detail

/// Order of a diversity or entropy: a finite q >= 0, or infinity.
class OrderQ {
 public:
  constexpr OrderQ() = default;

  static OrderQ finite(double q) {
    if (!(q >= 0.0) || !std::isfinite(q)) {
      detail::fail(ErrorCode::ParseError, "order q must be finite and >= 0, got ", q);
    }
    OrderQ o;
    o.value_ = q;
    return o;
  }
  static constexpr OrderQ infinity() {
    OrderQ o;
    o.infinite_ = true;
    return o;
  }

  constexpr bool is_infinite() const noexcept { return infinite_; }
  /// Finite value; +inf for the infinite order.
  constexpr double value() const noexcept {
    return infinite_ ? std::numeric_limits<double>::infinity() : value_;
  }

  std::string to_string() const {
    if (infinite_) return "inf";
    std::ostringstream os;
    os << value_;
    return os.str();
  }

  friend constexpr bool operator==(const OrderQ&, const OrderQ&) = default;

 private:
  double value_ = 0.0;
  bool infinite_ = false;
};

/// Square, symmetric, entries in [0, 1], unit diagonal. Immutable.
class SimilarityMatrix {
 public:
  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * n_ + j]; }
  std::span<const double> row(std::size_t i) const noexcept {
    return {data_.data() + i * n_, n_};
  }
  std::span<const double> data() const noexcept { return data_; }

  std::vector<std::vector<double>> to_rows() const {
    std::vector<std::vector<double>> rows(n_);
    for (std::size_t i = 0; i < n_; ++i) rows[i].assign(row(i).begin(), row(i).end());
    return rows;
  }

  static SimilarityMatrix identity(std::size_t n) {
    SimilarityMatrix z(n);
    for (std::size_t i = 0; i < n; ++i) z.data_[i * n + i] = 1.0;
    return z;
  }

  friend bool operator==(const SimilarityMatrix&, const SimilarityMatrix&) = default;

 private:
  explicit SimilarityMatrix(std::size_t n) : n_(n), data_(n * n, 0.0) {}

  friend SimilarityMatrix validate_similarity(std::size_t n, std::span<const double> flat,
                                              double tol);

  std::size_t n_ = 0;
  std::vector<double> data_;
};

/// Checks the similarity-matrix invariants on a row-major n*n array.
/// Off-diagonal pairs are replaced by their average and the diagonal is set
/// to exactly 1, so downstream code sees exact structure.
inline SimilarityMatrix validate_similarity(std::size_t n, std::span<const double> flat,
                                            double tol = kValidationTol) {
  if (n == 0) detail::fail(ErrorCode::EmptyInput, "similarity matrix has no rows");
  if (flat.size() != n * n) {
    detail::fail(ErrorCode::NonSquare, "expected ", n * n, " entries for a ", n, "x", n,
                 " matrix, got ", flat.size());
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double v = flat[i * n + j];
      if (!std::isfinite(v) || v < -tol || v > 1.0 + tol) {
        detail::fail(ErrorCode::EntryOutOfRange, "entry (", i + 1, ",", j + 1, ") = ", v,
                     " is outside [0, 1]");
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double d = flat[i * n + i];
    if (std::abs(d - 1.0) > tol) {
      detail::fail(ErrorCode::BadDiagonal, "diagonal entry (", i + 1, ",", i + 1, ") = ", d,
                   " is not 1");
    }
  }
  SimilarityMatrix z(n);
  for (std::size_t i = 0; i < n; ++i) {
    z.data_[i * n + i] = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double a = flat[i * n + j];
      const double b = flat[j * n + i];
      if (std::abs(a - b) > tol) {
        detail::fail(ErrorCode::AsymmetryBeyondTol, "entries (", i + 1, ",", j + 1, ") = ", a,
                     " and (", j + 1, ",", i + 1, ") = ", b, " differ");
      }
      const double avg = std::clamp(0.5 * (a + b), 0.0, 1.0);
      z.data_[i * n + j] = avg;
      z.data_[j * n + i] = avg;
    }
  }
  return z;
}

namespace detail {

inline std::vector<double> flatten_square(const std::vector<std::vector<double>>& raw) {
  const std::size_t n = raw.size();
  if (n == 0) fail(ErrorCode::EmptyInput, "matrix has no rows");
  std::vector<double> flat;
  flat.reserve(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    if (raw[i].size() != n) {
      fail(ErrorCode::NonSquare, "row ", i + 1, " has ", raw[i].size(), " entries, expected ", n);
    }
    flat.insert(flat.end(), raw[i].begin(), raw[i].end());
  }
  return flat;
}

}  // namespace detail

inline SimilarityMatrix validate_similarity(const std::vector<std::vector<double>>& raw,
                                            double tol = kValidationTol) {
  const auto flat = detail::flatten_square(raw);
  return validate_similarity(raw.size(), flat, tol);
}

/// Z_ij = exp(-d_ij). The triangle inequality is not checked.
inline SimilarityMatrix from_distance_matrix(const std::vector<std::vector<double>>& d,
                                             double tol = kValidationTol) {
  const auto flat = detail::flatten_square(d);
  const std::size_t n = d.size();
  std::vector<double> z(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double v = flat[i * n + j];
      if (std::isnan(v) || v < 0.0) {
        detail::fail(ErrorCode::NegativeDistance, "distance (", i + 1, ",", j + 1, ") = ", v,
                     " is negative");
      }
      if (i == j && v > tol) {
        detail::fail(ErrorCode::BadDiagonal, "distance (", i + 1, ",", i + 1, ") = ", v,
                     " is not 0");
      }
      if (j > i && std::abs(v - flat[j * n + i]) > tol) {
        detail::fail(ErrorCode::AsymmetryBeyondTol, "distances (", i + 1, ",", j + 1, ") and (",
                     j + 1, ",", i + 1, ") differ");
      }
      z[i * n + j] = std::exp(-v);
    }
  }
  return validate_similarity(n, z, tol);
}

/// Z_ij = 1 when (i, j) is in the relation, else 0.
inline SimilarityMatrix from_reflexive_graph(const std::vector<std::vector<bool>>& relation) {
  const std::size_t n = relation.size();
  if (n == 0) detail::fail(ErrorCode::EmptyInput, "graph has no vertices");
  std::vector<double> z(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    if (relation[i].size() != n) {
      detail::fail(ErrorCode::NonSquare, "adjacency row ", i + 1, " has ", relation[i].size(),
                   " entries, expected ", n);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!relation[i][i]) detail::fail(ErrorCode::NotReflexive, "vertex ", i + 1, " has no loop");
    for (std::size_t j = 0; j < n; ++j) {
      if (relation[i][j] != relation[j][i]) {
        detail::fail(ErrorCode::NotSymmetric, "edge (", i + 1, ",", j + 1,
                     ") present in one direction only");
      }
      z[i * n + j] = relation[i][j] ? 1.0 : 0.0;
    }
  }
  return validate_similarity(n, z);
}

/// Adjacency of the reflexive graph on n vertices with the given undirected
/// edges (0-based); loops are added.
inline std::vector<std::vector<bool>> reflexive_graph(
    std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  std::vector<std::vector<bool>> rel(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i) rel[i][i] = true;
  for (auto [a, b] : edges) {
    if (a >= n || b >= n) detail::fail(ErrorCode::IndexOutOfRange, "edge endpoint beyond ", n);
    rel[a][b] = rel[b][a] = true;
  }
  return rel;
}

/// min{Z_ij, Z_jk} <= Z_ik + tol for all triples, and Z_ij < 1 off the
/// diagonal.
inline bool is_ultrametric(const SimilarityMatrix& z, double tol = 1e-12) {
  const std::size_t n = z.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && !(z(i, j) < 1.0)) return false;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t k = 0; k < n; ++k) {
        if (std::min(z(i, j), z(j, k)) > z(i, k) + tol) return false;
      }
    }
  }
  return true;
}

/// Builds a taxonomic similarity matrix. `ranks[i][j]` is the rank at which
/// species i and j first share a taxon (0 = finest); `level_similarities[r]`
/// is the similarity assigned to rank r and must be non-increasing in r.
/// Diagonal ranks are ignored.
inline SimilarityMatrix from_taxonomy(const std::vector<std::vector<std::size_t>>& ranks,
                                      const std::vector<double>& level_similarities) {
  const std::size_t n = ranks.size();
  if (n == 0) detail::fail(ErrorCode::EmptyInput, "taxonomy has no species");
  for (std::size_t r = 0; r < level_similarities.size(); ++r) {
    const double s = level_similarities[r];
    if (!(s >= 0.0 && s < 1.0)) {
      detail::fail(ErrorCode::BadLevelSimilarities, "level ", r, " similarity ", s,
                   " is outside [0, 1)");
    }
    if (r > 0 && s > level_similarities[r - 1]) {
      detail::fail(ErrorCode::BadLevelSimilarities, "level similarities increase at rank ", r);
    }
  }
  std::vector<double> z(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    if (ranks[i].size() != n) {
      detail::fail(ErrorCode::NonSquare, "rank row ", i + 1, " has ", ranks[i].size(),
                   " entries, expected ", n);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) {
        z[i * n + j] = 1.0;
        continue;
      }
      const std::size_t r = ranks[i][j];
      if (r != ranks[j][i]) {
        detail::fail(ErrorCode::NotSymmetric, "ranks (", i + 1, ",", j + 1, ") and (", j + 1,
                     ",", i + 1, ") differ");
      }
      if (r >= level_similarities.size()) {
        detail::fail(ErrorCode::BadLevelSimilarities, "rank ", r, " of pair (", i + 1, ",", j + 1,
                     ") has no similarity");
      }
      z[i * n + j] = level_similarities[r];
    }
  }
  auto result = validate_similarity(n, z);
  if (!is_ultrametric(result, 0.0)) {
    detail::fail(ErrorCode::NotUltrametric, "taxonomy ranks do not induce an ultrametric matrix");
  }
  return result;
}

/// Per-pair ranks from lineages: `lineages[i][l]` is the label of species i's
/// taxon at level l (level 0 finest). The rank of a pair is the first level
/// whose labels agree, or the number of levels when none do.
inline std::vector<std::vector<std::size_t>> taxonomy_ranks(
    const std::vector<std::vector<int>>& lineages) {
  const std::size_t n = lineages.size();
  std::vector<std::vector<std::size_t>> ranks(n, std::vector<std::size_t>(n, 0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const std::size_t depth = std::min(lineages[i].size(), lineages[j].size());
      std::size_t r = 0;
      while (r < depth && lineages[i][r] != lineages[j][r]) ++r;
      ranks[i][j] = r;
    }
  }
  return ranks;
}

/// Sorted set of distinct indices into {0, ..., universe-1}.
class SubsetMask {
 public:
  SubsetMask() = default;
  SubsetMask(std::vector<std::size_t> members, std::size_t universe) : universe_(universe) {
    std::sort(members.begin(), members.end());
    for (std::size_t k = 0; k < members.size(); ++k) {
      if (members[k] >= universe) {
        detail::fail(ErrorCode::IndexOutOfRange, "index ", members[k] + 1, " exceeds ", universe);
      }
      if (k > 0 && members[k] == members[k - 1]) {
        detail::fail(ErrorCode::IndexOutOfRange, "index ", members[k] + 1, " repeated");
      }
    }
    members_ = std::move(members);
  }

  static SubsetMask full(std::size_t universe) {
    std::vector<std::size_t> all(universe);
    std::iota(all.begin(), all.end(), std::size_t{0});
    return {std::move(all), universe};
  }

  /// Bit k of `bits` selects `domain[k]`.
  static SubsetMask from_bits(std::uint64_t bits, std::span<const std::size_t> domain,
                              std::size_t universe) {
    std::vector<std::size_t> members;
    for (std::size_t k = 0; k < domain.size(); ++k) {
      if ((bits >> k) & 1U) members.push_back(domain[k]);
    }
    return {std::move(members), universe};
  }

  std::size_t size() const noexcept { return members_.size(); }
  bool empty() const noexcept { return members_.empty(); }
  std::size_t universe() const noexcept { return universe_; }
  std::size_t operator[](std::size_t k) const noexcept { return members_[k]; }
  std::span<const std::size_t> members() const noexcept { return members_; }
  auto begin() const noexcept { return members_.begin(); }
  auto end() const noexcept { return members_.end(); }

  bool contains(std::size_t i) const {
    return std::binary_search(members_.begin(), members_.end(), i);
  }

  /// Order by cardinality, then lexicographically on the sorted members.
  friend bool operator<(const SubsetMask& a, const SubsetMask& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a.members_ < b.members_;
  }
  friend bool operator==(const SubsetMask&, const SubsetMask&) = default;

 private:
  std::vector<std::size_t> members_;
  std::size_t universe_ = 0;
};

/// A point of the probability simplex.
class Distribution {
 public:
  /// Entries in [-tol, 0) are clamped to 0; the sum must be 1 within tol.
  static Distribution from(std::vector<double> p, double tol = kValidationTol) {
    if (p.empty()) detail::fail(ErrorCode::EmptyInput, "distribution has no entries");
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (!std::isfinite(p[i]) || p[i] < -tol) {
        detail::fail(ErrorCode::NegativeProbability, "p(", i + 1, ") = ", p[i]);
      }
      p[i] = std::max(p[i], 0.0);
      sum += p[i];
    }
    if (std::abs(sum - 1.0) > tol) {
      detail::fail(ErrorCode::BadNormalization, "probabilities sum to ", sum);
    }
    Distribution d;
    d.p_ = std::move(p);
    return d;
  }

  static Distribution uniform(std::size_t n) {
    Distribution d;
    d.p_.assign(n, 1.0 / static_cast<double>(n));
    return d;
  }

  /// Uniform on the members of `b`, zero elsewhere.
  static Distribution uniform_on(const SubsetMask& b) {
    if (b.empty()) detail::fail(ErrorCode::EmptySubset, "uniform distribution on empty subset");
    Distribution d;
    d.p_.assign(b.universe(), 0.0);
    for (auto i : b) d.p_[i] = 1.0 / static_cast<double>(b.size());
    return d;
  }

  std::size_t size() const noexcept { return p_.size(); }
  double operator[](std::size_t i) const noexcept { return p_[i]; }
  std::span<const double> values() const noexcept { return p_; }

  friend bool operator==(const Distribution&, const Distribution&) = default;

 private:
  std::vector<double> p_;
};

/// Indices with p_i > tol.
inline SubsetMask support(const Distribution& p, double tol = kSupportTol) {
  std::vector<std::size_t> s;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > tol) s.push_back(i);
  }
  return {std::move(s), p.size()};
}

/// Z restricted to rows and columns in `b`, in the sorted order of `b`.
inline SimilarityMatrix restrict(const SimilarityMatrix& z, const SubsetMask& b) {
  if (b.empty()) detail::fail(ErrorCode::EmptySubset, "cannot restrict to the empty subset");
  if (b.universe() != z.size()) {
    detail::fail(ErrorCode::DimensionMismatch, "subset of {1..", b.universe(),
                 "} applied to a matrix of size ", z.size());
  }
  const std::size_t m = b.size();
  std::vector<double> flat(m * m);
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t c = 0; c < m; ++c) flat[a * m + c] = z(b[a], b[c]);
  }
  return validate_similarity(m, flat, 0.0);
}

inline Distribution extend_by_zero(const Distribution& r, const SubsetMask& b, std::size_t n) {
  if (r.size() != b.size()) {
    detail::fail(ErrorCode::DimensionMismatch, "distribution of length ", r.size(),
                 " on a subset of size ", b.size());
  }
  if (b.universe() != n) {
    detail::fail(ErrorCode::DimensionMismatch, "subset universe ", b.universe(), " != ", n);
  }
  std::vector<double> p(n, 0.0);
  for (std::size_t k = 0; k < b.size(); ++k) p[b[k]] = r[k];
  return Distribution::from(std::move(p));
}

/// p restricted to `b` and renormalized.
inline Distribution restrict_distribution(const Distribution& p, const SubsetMask& b) {
  if (b.universe() != p.size()) {
    detail::fail(ErrorCode::DimensionMismatch, "subset universe ", b.universe(), " != ",
                 p.size());
  }
  double mass = 0.0;
  for (auto i : b) mass += p[i];
  if (!(mass > kSupportTol)) {
    detail::fail(ErrorCode::ZeroMassOnSubset, "distribution has no mass on the subset");
  }
  std::vector<double> r;
  r.reserve(b.size());
  for (auto i : b) r.push_back(p[i] / mass);
  return Distribution::from(std::move(r));
}

/// (Zx)_i for every i.
inline std::vector<double> multiply(const SimilarityMatrix& z, std::span<const double> x) {
  const std::size_t n = z.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = z.row(i);
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += r[j] * x[j];
    out[i] = acc;
  }
  return out;
}

inline std::vector<double> multiply(const SimilarityMatrix& z, const Distribution& p) {
  return multiply(z, p.values());
}

}  // namespace maxdiv
