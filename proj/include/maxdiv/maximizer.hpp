#pragma once

// Maximum diversity of a similarity matrix.
//
// The supremum of D_q^Z over all distributions is the same for every q and
// equals the largest magnitude |Z_B| over subsets B on which Z_B has a
// non-negative weighting ("good" subsets). The maximizing distributions are
// the normalized non-negative weightings on the maximal good subsets,
// extended by zero.
//
// maximize() splits Z into connected components (Z_ij > 0), solves each one
// and combines them: maximum diversities add, and the combined maximizer puts
// mass Dmax(C) / sum Dmax on component C. A component is solved by a
// structural fast path when one applies (ultrametric, scattered, or positive
// definite with non-negative weighting; all three give Dmax = |Z|), and by
// enumerating every nonempty subset otherwise.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <thread>
#include <utility>
#include <vector>

#include "maxdiv/core.hpp"
#include "maxdiv/linalg.hpp"
#include "maxdiv/means.hpp"
#include "maxdiv/weighting.hpp"

namespace maxdiv {

enum class Method {
  Exhaustive,
  ComponentDecomposition,
  PositiveDefiniteFastPath,
  ScatteredFastPath,
  UltrametricFastPath,
};

inline const char* to_string(Method m) {
  switch (m) {
    case Method::Exhaustive: return "Exhaustive";
    case Method::ComponentDecomposition: return "ComponentDecomposition";
    case Method::PositiveDefiniteFastPath: return "PositiveDefiniteFastPath";
    case Method::ScatteredFastPath: return "ScatteredFastPath";
    case Method::UltrametricFastPath: return "UltrametricFastPath";
  }
  return "Unknown";
}

struct MaximizeOptions {
  double tie_rel_tol = 1e-9;  ///< magnitudes within this relative gap of the max tie
  bool fast_paths = true;
  bool decompose = true;
  std::uint64_t subset_budget = std::uint64_t{1} << 25;  ///< per exhaustive component
  unsigned jobs = 1;
  /// Maximal subsets with a singular Z_B up to this size get all vertices of
  /// their non-negative weighting polytope enumerated.
  std::size_t vertex_enumeration_max = 12;
  /// Cap on reported subsets and distributions after combining components.
  std::size_t max_reported = std::size_t{1} << 16;
  std::vector<OrderQ> entropy_orders = {OrderQ::finite(0.0), OrderQ::finite(1.0),
                                        OrderQ::finite(2.0)};
};

struct GoodSubset {
  SubsetMask mask;
  double magnitude = 0.0;
  std::vector<double> weighting;  ///< non-negative, indexed like mask
};

struct SupEntropy {
  OrderQ q;
  double value = 0.0;
};

struct MaximizationReport {
  double dmax = 0.0;
  std::vector<GoodSubset> maximal_subsets;          ///< sorted by (size, members)
  std::vector<Distribution> maximizing_distributions;
  std::vector<SupEntropy> sup_entropy;
  Method method = Method::Exhaustive;
  std::vector<std::vector<std::size_t>> components;  ///< sorted by smallest index
  std::vector<Method> component_methods;
  bool truncated = false;  ///< max_reported was hit
};

/// Partition of {0..n-1} under the transitive closure of Z_ij > 0.
inline std::vector<std::vector<std::size_t>> connected_components(const SimilarityMatrix& z) {
  const std::size_t n = z.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (z(i, j) > 0.0) {
        const auto a = find(i), b = find(j);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
    }
  }
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> slot(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = find(i);
    if (slot[r] == n) {
      slot[r] = out.size();
      out.emplace_back();
    }
    out[slot[r]].push_back(i);
  }
  return out;
}

namespace detail {

/// Solution on one component, in the component's local indices.
struct ComponentSolution {
  double dmax = 0.0;
  std::vector<GoodSubset> subsets;  // local masks, universe = component size
  std::vector<std::vector<double>> distributions;
  Method method = Method::Exhaustive;
};

inline std::vector<double> normalized_clamped(std::span<const double> w) {
  std::vector<double> p(w.begin(), w.end());
  double total = 0.0;
  for (double& v : p) {
    v = std::max(v, 0.0);
    total += v;
  }
  for (double& v : p) v /= total;
  return p;
}

inline bool close_linf(std::span<const double> a, std::span<const double> b, double tol) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a[i] - b[i]) > tol) return false;
  }
  return true;
}

inline void push_unique(std::vector<std::vector<double>>& list, std::vector<double> p) {
  for (const auto& q : list) {
    if (close_linf(q, p, 1e-9)) return;
  }
  list.push_back(std::move(p));
}

/// Distribution on {0..universe-1} from a non-negative weighting on `mask`.
inline std::vector<double> spread_weighting(const SubsetMask& mask, std::span<const double> w) {
  const auto local = normalized_clamped(w);
  std::vector<double> p(mask.universe(), 0.0);
  for (std::size_t k = 0; k < mask.size(); ++k) p[mask[k]] = local[k];
  return p;
}

/// All vertices of {w : Z_B w = 1, w >= 0}: basic solutions on column subsets
/// with full column rank.
inline std::vector<std::vector<double>> weighting_polytope_vertices(const linalg::Dense& zb) {
  const std::size_t m = zb.rows;
  const std::vector<double> ones(m, 1.0);
  std::vector<std::vector<double>> vertices;
  for (std::size_t k = 1; k <= m; ++k) {
    std::vector<bool> pick(m, false);
    std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(k), true);
    do {
      std::vector<std::size_t> cols;
      for (std::size_t j = 0; j < m; ++j) {
        if (pick[j]) cols.push_back(j);
      }
      linalg::Dense sub(m, k);
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t c = 0; c < k; ++c) sub(i, c) = zb(i, cols[c]);
      }
      const auto sol = linalg::solve_any(sub, ones);
      if (sol.consistent && sol.rank == k && all_nonneg(sol.x)) {
        std::vector<double> w(m, 0.0);
        for (std::size_t c = 0; c < k; ++c) w[cols[c]] = std::max(sol.x[c], 0.0);
        bool seen = false;
        for (const auto& v : vertices) seen = seen || close_linf(v, w, 1e-9);
        if (!seen) vertices.push_back(std::move(w));
      }
    } while (std::prev_permutation(pick.begin(), pick.end()));
  }
  return vertices;
}

struct Candidate {
  std::uint64_t bits = 0;
  double magnitude = 0.0;
  std::vector<double> weighting;
  bool singular = false;
};

struct WorkerResult {
  double best = 0.0;
  std::vector<Candidate> candidates;
};

inline bool ties(double mag, double best, double rel) { return mag >= best - rel * best; }

inline WorkerResult scan_subsets(const SimilarityMatrix& zc, std::uint64_t first,
                                 std::uint64_t last, double rel_tol) {
  const std::size_t m = zc.size();
  WorkerResult out;
  std::vector<std::size_t> idx;
  idx.reserve(m);
  const std::vector<double> ones(m, 1.0);
  for (std::uint64_t bits = first; bits < last; ++bits) {
    idx.clear();
    for (std::size_t k = 0; k < m; ++k) {
      if ((bits >> k) & 1U) idx.push_back(k);
    }
    const auto zb = dense_of(zc, idx);
    Candidate c;
    c.bits = bits;
    if (auto w = unique_weighting(zb)) {
      if (!all_nonneg(*w)) continue;
      c.weighting = std::move(*w);
    } else {
      auto v = linalg::feasible_vertex(zb, std::span<const double>(ones.data(), idx.size()));
      if (!v) continue;
      c.weighting = std::move(*v);
      c.singular = true;
    }
    c.magnitude = sum(c.weighting);
    if (c.magnitude > out.best) {
      out.best = c.magnitude;
      std::erase_if(out.candidates,
                    [&](const Candidate& k) { return !ties(k.magnitude, out.best, rel_tol); });
    }
    if (ties(c.magnitude, out.best, rel_tol)) out.candidates.push_back(std::move(c));
  }
  return out;
}

inline ComponentSolution solve_exhaustive(const SimilarityMatrix& zc, const MaximizeOptions& opt) {
  const std::size_t m = zc.size();
  if (m >= 63 || (std::uint64_t{1} << m) - 1 > opt.subset_budget) {
    fail(ErrorCode::ComponentTooLarge, "component of ", m, " species needs 2^", m,
         " - 1 subsets, budget is ", opt.subset_budget);
  }
  const std::uint64_t total = std::uint64_t{1} << m;
  const std::uint64_t jobs = std::clamp<std::uint64_t>(opt.jobs, 1, total - 1);
  std::vector<WorkerResult> parts(jobs);
  const std::uint64_t span = (total - 1 + jobs - 1) / jobs;
  auto range = [&](std::uint64_t k) {
    const std::uint64_t lo = 1 + k * span;
    return std::pair{std::min(lo, total), std::min(lo + span, total)};
  };
  if (jobs == 1) {
    parts[0] = scan_subsets(zc, 1, total, opt.tie_rel_tol);
  } else {
    std::vector<std::jthread> workers;
    workers.reserve(jobs);
    for (std::uint64_t k = 0; k < jobs; ++k) {
      workers.emplace_back([&, k] {
        const auto [lo, hi] = range(k);
        parts[k] = scan_subsets(zc, lo, hi, opt.tie_rel_tol);
      });
    }
  }

  ComponentSolution sol;
  sol.method = Method::Exhaustive;
  for (const auto& p : parts) sol.dmax = std::max(sol.dmax, p.best);
  std::vector<Candidate> winners;
  for (auto& p : parts) {
    for (auto& c : p.candidates) {
      if (ties(c.magnitude, sol.dmax, opt.tie_rel_tol)) winners.push_back(std::move(c));
    }
  }
  std::vector<std::size_t> domain(m);
  std::iota(domain.begin(), domain.end(), std::size_t{0});
  std::vector<std::pair<SubsetMask, Candidate>> keyed;
  for (auto& c : winners) keyed.emplace_back(SubsetMask::from_bits(c.bits, domain, m), std::move(c));
  std::sort(keyed.begin(), keyed.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  for (auto& [mask, c] : keyed) {
    push_unique(sol.distributions, spread_weighting(mask, c.weighting));
    if (c.singular && mask.size() <= opt.vertex_enumeration_max) {
      for (const auto& v : weighting_polytope_vertices(dense_of(zc, mask.members()))) {
        push_unique(sol.distributions, spread_weighting(mask, v));
      }
    }
    sol.subsets.push_back({mask, c.magnitude, std::move(c.weighting)});
  }
  return sol;
}

/// Ultrametric, scattered, or positive definite with non-negative weighting.
inline std::optional<ComponentSolution> try_fast_path(const SimilarityMatrix& zc) {
  const std::size_t m = zc.size();
  std::optional<Method> method;
  if (is_ultrametric(zc)) {
    method = Method::UltrametricFastPath;
  } else if (is_scattered(zc)) {
    method = Method::ScatteredFastPath;
  } else if (is_positive_definite(zc)) {
    method = Method::PositiveDefiniteFastPath;
  }
  if (!method) return std::nullopt;
  auto w = unique_weighting(dense_of(zc));
  if (!w || !all_nonneg(*w)) return std::nullopt;
  const bool positive =
      std::all_of(w->begin(), w->end(), [](double v) { return v > kNonnegTol; });
  if (*method != Method::PositiveDefiniteFastPath && !positive) return std::nullopt;

  ComponentSolution sol;
  sol.method = *method;
  sol.dmax = sum(*w);
  // Any B containing supp(w) carries the restricted weighting with the same
  // magnitude; no other subset reaches |Z|.
  std::vector<std::size_t> zeros;
  for (std::size_t i = 0; i < m; ++i) {
    if (!((*w)[i] > kNonnegTol)) zeros.push_back(i);
  }
  if (zeros.size() >= 20) return std::nullopt;
  for (std::uint64_t extra = 0; extra < (std::uint64_t{1} << zeros.size()); ++extra) {
    std::vector<std::size_t> members;
    std::vector<double> wb;
    for (std::size_t i = 0; i < m; ++i) {
      const auto pos = std::find(zeros.begin(), zeros.end(), i);
      const bool in =
          pos == zeros.end() || ((extra >> static_cast<std::size_t>(pos - zeros.begin())) & 1U);
      if (in) {
        members.push_back(i);
        wb.push_back(std::max((*w)[i], 0.0));
      }
    }
    sol.subsets.push_back({SubsetMask(std::move(members), m), sol.dmax, std::move(wb)});
  }
  std::sort(sol.subsets.begin(), sol.subsets.end(),
            [](const auto& a, const auto& b) { return a.mask < b.mask; });
  sol.distributions.push_back(spread_weighting(SubsetMask::full(m), *w));
  return sol;
}

inline ComponentSolution solve_component(const SimilarityMatrix& zc, const MaximizeOptions& opt) {
  if (opt.fast_paths) {
    if (auto s = try_fast_path(zc)) return std::move(*s);
  }
  return solve_exhaustive(zc, opt);
}

/// Visits index tuples (i_0, ..., i_{k-1}), i_c < sizes[c], in lexicographic
/// order, stopping after `limit` tuples. Returns false if the limit cut it short.
template <typename F>
bool for_each_product(std::span<const std::size_t> sizes, std::size_t limit, F&& visit) {
  std::vector<std::size_t> pick(sizes.size(), 0);
  for (std::size_t count = 0;; ++count) {
    if (count == limit) return false;
    visit(std::span<const std::size_t>(pick));
    std::size_t c = sizes.size();
    while (c > 0) {
      --c;
      if (++pick[c] < sizes[c]) break;
      pick[c] = 0;
      if (c == 0) return true;
    }
    if (sizes.empty()) return true;
  }
}

}  // namespace detail

/// Maximum diversity, maximal good subsets and maximizing distributions of Z.
inline MaximizationReport maximize(const SimilarityMatrix& z, const MaximizeOptions& opt = {}) {
  const std::size_t n = z.size();
  MaximizationReport rep;
  if (opt.decompose) {
    rep.components = connected_components(z);
  } else {
    rep.components = {std::vector<std::size_t>(n)};
    std::iota(rep.components[0].begin(), rep.components[0].end(), std::size_t{0});
  }

  std::vector<detail::ComponentSolution> sols;
  sols.reserve(rep.components.size());
  for (const auto& comp : rep.components) {
    sols.push_back(detail::solve_component(restrict(z, SubsetMask(comp, n)), opt));
    rep.component_methods.push_back(sols.back().method);
  }
  rep.method = sols.size() == 1 ? sols[0].method : Method::ComponentDecomposition;
  for (const auto& s : sols) rep.dmax += s.dmax;

  // Maximal subsets of Z are unions of one maximal subset per component.
  std::vector<std::size_t> counts;
  for (const auto& s : sols) counts.push_back(s.subsets.size());
  const bool all_subsets = detail::for_each_product(
      counts, opt.max_reported, [&](std::span<const std::size_t> pick) {
        std::vector<std::size_t> members;
        std::vector<std::pair<std::size_t, double>> entries;
        double mag = 0.0;
        for (std::size_t c = 0; c < sols.size(); ++c) {
          const auto& g = sols[c].subsets[pick[c]];
          for (std::size_t k = 0; k < g.mask.size(); ++k) {
            entries.emplace_back(rep.components[c][g.mask[k]], g.weighting[k]);
          }
          mag += g.magnitude;
        }
        std::sort(entries.begin(), entries.end());
        std::vector<double> w;
        for (auto [i, v] : entries) {
          members.push_back(i);
          w.push_back(v);
        }
        rep.maximal_subsets.push_back({SubsetMask(std::move(members), n), mag, std::move(w)});
      });
  std::sort(rep.maximal_subsets.begin(), rep.maximal_subsets.end(),
            [](const auto& a, const auto& b) { return a.mask < b.mask; });

  counts.clear();
  for (const auto& s : sols) counts.push_back(s.distributions.size());
  const bool all_dists = detail::for_each_product(
      counts, opt.max_reported, [&](std::span<const std::size_t> pick) {
        std::vector<double> p(n, 0.0);
        for (std::size_t c = 0; c < sols.size(); ++c) {
          const double share = sols[c].dmax / rep.dmax;
          const auto& local = sols[c].distributions[pick[c]];
          for (std::size_t k = 0; k < local.size(); ++k) {
            p[rep.components[c][k]] = share * local[k];
          }
        }
        rep.maximizing_distributions.push_back(Distribution::from(std::move(p)));
      });
  rep.truncated = !all_subsets || !all_dists;

  for (const auto& q : opt.entropy_orders) {
    if (!q.is_infinite()) rep.sup_entropy.push_back({q, entropy_from_diversity(rep.dmax, q)});
  }
  return rep;
}

/// diversity(Z, p, q) >= dmax - tol. For q > 0 this makes p maximizing for
/// every order. At q = 0 it does not: for Z = I every distribution with full
/// support passes.
inline bool check_q_maximizing(const SimilarityMatrix& z, const Distribution& p, OrderQ q,
                               const MaximizationReport& report, double tol = 1e-8) {
  return diversity(z, p, q) >= report.dmax - tol;
}

}  // namespace maxdiv
