#ifndef LRCONE_PATHCOUNT_HPP
#define LRCONE_PATHCOUNT_HPP

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <climits>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "lrcone/lattice.hpp"

namespace lrcone {

using BigInt = boost::multiprecision::cpp_int;

/// Natural log of a nonnegative big integer; -inf for zero.
inline double log_of(const BigInt& x) {
  if (x.is_zero()) return -std::numeric_limits<double>::infinity();
  if (x.sign() < 0) throw std::domain_error("log of a negative integer");
  const auto bits = boost::multiprecision::msb(x);
  if (bits < 1000) return std::log(x.convert_to<double>());
  const auto shift = bits - 60;
  BigInt top = x >> shift;
  return std::log(top.convert_to<double>()) + static_cast<double>(shift) * std::log(2.0);
}

inline BigInt binomial(long n, long k) {
  if (n < 0 || k < 0 || k > n) return 0;
  if (k > n - k) k = n - k;
  BigInt r = 1;
  for (long i = 1; i <= k; ++i) {
    r *= n - k + i;
    r /= i;
  }
  return r;
}

enum class ExtentGuard {
  /// Refuse lattices on which a length-n_max walk from the origin could feel
  /// the boundary; counts then equal infinite-lattice counts.
  enforce,
  /// Count walks on the finite graph exactly as built.
  finite_graph,
};

struct DpOptions {
  ExtentGuard guard = ExtentGuard::enforce;
  /// Vertices whose counts are stored for every n. Empty stores all.
  std::vector<VertexId> targets;
  /// Maximum number of stored (n, Q) entries.
  std::size_t entry_cap = std::size_t{1} << 27;
};

/// Exact walk counts N'(n, Q) from a fixed origin, for n = 0..n_max and a set
/// of tracked endpoints.
class PathCountTable {
 public:
  const LatticeSpec& lattice_spec() const { return spec_; }
  VertexId origin() const { return origin_; }
  int n_max() const { return n_max_; }
  const std::vector<VertexId>& tracked() const { return tracked_; }
  bool tracks(VertexId q) const { return q < slot_.size() && slot_[q] != kUntracked; }

  const BigInt& count(int n, VertexId q) const {
    if (n < 0 || n > n_max_) throw std::out_of_range("walk length outside the table");
    if (!tracks(q)) throw std::out_of_range("endpoint not tracked by this table");
    return counts_[static_cast<std::size_t>(n) * tracked_.size() + slot_[q]];
  }

  /// Sum of counts(n, Q) over tracked Q.
  BigInt layer_total(int n) const {
    BigInt s = 0;
    for (auto q : tracked_) s += count(n, q);
    return s;
  }

  friend PathCountTable count_walks_dp(const DecoratedLattice&, VertexId, int, const DpOptions&);

 private:
  static constexpr std::size_t kUntracked = ~std::size_t{0};

  LatticeSpec spec_;
  VertexId origin_ = 0;
  int n_max_ = 0;
  std::vector<VertexId> tracked_;
  std::vector<std::size_t> slot_;
  std::vector<BigInt> counts_;
};

/// Throws std::domain_error when a walk of length n_max from `origin` could
/// reach a vertex whose neighbourhood differs from the infinite lattice.
inline void check_extent_guard(const DecoratedLattice& g, VertexId origin, int n_max,
                               const std::vector<std::optional<std::size_t>>& dist) {
  if (n_max == 0) return;
  if (g.spec().boundary == Boundary::periodic) {
    if (g.extent() <= n_max)
      throw std::domain_error("extent guard: periodic extent " + std::to_string(g.extent()) +
                              " must exceed n_max " + std::to_string(n_max));
    return;
  }
  for (VertexId v = 0; v < g.num_vertices(); ++v) {
    if (!dist[v] || *dist[v] + 1 > static_cast<std::size_t>(n_max)) continue;
    if (g.degree(v) != g.bulk_degree(v))
      throw std::domain_error("extent guard: walks of length " + std::to_string(n_max) + " from vertex " +
                              std::to_string(origin) + " reach the open boundary");
  }
}

/// Count walks (vertex repetition allowed) of every length up to n_max from
/// `origin` by iterating the neighbour-sum recurrence.
inline PathCountTable count_walks_dp(const DecoratedLattice& g, VertexId origin, int n_max,
                                     const DpOptions& opt = {}) {
  if (n_max < 0) throw std::invalid_argument("n_max must be nonnegative");
  const std::size_t nv = g.num_vertices();
  auto dist = distances_from(g, origin);
  if (opt.guard == ExtentGuard::enforce) check_extent_guard(g, origin, n_max, dist);

  PathCountTable t;
  t.spec_ = g.spec();
  t.origin_ = origin;
  t.n_max_ = n_max;
  if (opt.targets.empty()) {
    t.tracked_.resize(nv);
    for (std::size_t v = 0; v < nv; ++v) t.tracked_[v] = static_cast<VertexId>(v);
  } else {
    t.tracked_ = opt.targets;
  }
  t.slot_.assign(nv, PathCountTable::kUntracked);
  for (std::size_t i = 0; i < t.tracked_.size(); ++i) {
    auto q = t.tracked_[i];
    if (q >= nv) throw std::out_of_range("target vertex out of range");
    if (t.slot_[q] != PathCountTable::kUntracked) throw std::invalid_argument("duplicate target vertex");
    t.slot_[q] = i;
  }
  const std::size_t entries = (static_cast<std::size_t>(n_max) + 1) * t.tracked_.size();
  if (entries / t.tracked_.size() != static_cast<std::size_t>(n_max) + 1 || entries > opt.entry_cap)
    throw std::length_error("path-count table exceeds the entry cap");
  t.counts_.resize(entries);

  // Reachable vertices ordered by distance from the origin. At step n only
  // vertices with dist <= n and dist = n (mod 2) can be nonzero; the other
  // parity class of each buffer is never written and stays zero.
  std::vector<VertexId> by_dist;
  by_dist.reserve(nv);
  for (std::size_t v = 0; v < nv; ++v)
    if (dist[v]) by_dist.push_back(static_cast<VertexId>(v));
  std::stable_sort(by_dist.begin(), by_dist.end(), [&](VertexId a, VertexId b) { return *dist[a] < *dist[b]; });

  std::vector<BigInt> cur(nv), next(nv);
  cur[origin] = 1;
  auto record = [&](int n, const std::vector<BigInt>& layer) {
    auto* row = &t.counts_[static_cast<std::size_t>(n) * t.tracked_.size()];
    for (std::size_t i = 0; i < t.tracked_.size(); ++i) row[i] = layer[t.tracked_[i]];
  };
  record(0, cur);
  std::size_t frontier = 0;
  for (int n = 1; n <= n_max; ++n) {
    while (frontier < by_dist.size() && *dist[by_dist[frontier]] <= static_cast<std::size_t>(n)) ++frontier;
    for (std::size_t i = 0; i < frontier; ++i) {
      const auto q = by_dist[i];
      if ((*dist[q] & 1u) != (static_cast<unsigned>(n) & 1u)) continue;
      BigInt& acc = next[q];
      acc = 0;
      for (auto r : g.neighbors(q)) acc += cur[r];
    }
    std::swap(cur, next);
    record(n, cur);
  }
  return t;
}

/// Closed-form walk count as printed for the two-dimensional model:
///   sum_{k=1}^{ceil((n-d)/2 - 1)} C(n-2k, (n-2k-d)/2) C(n-2k, (n-2k)/2) C(n, 2k) 16^k
/// with binomials of non-integral or out-of-range lower index taken as zero.
inline BigInt count_walks_closed_form(int n, int d) {
  if (n < 0 || d < 0) throw std::invalid_argument("closed form needs n >= 0 and d >= 0");
  // ceil((n - d)/2 - 1); only upper >= 1 matters
  const int m = n - d;
  const int upper = m >= 2 ? (m - 1) / 2 : 0;
  BigInt sum = 0;
  for (int k = 1; k <= upper; ++k) {
    const int r = n - 2 * k;
    if ((r - d) % 2 != 0 || r % 2 != 0) continue;
    BigInt term = binomial(r, (r - d) / 2);
    if (term.is_zero()) continue;
    term *= binomial(r, r / 2);
    term *= binomial(n, 2 * k);
    term <<= 4 * k;
    sum += term;
  }
  return sum;
}

/// log of 2 (sqrt 8)^n e^{kappa (n - 2d + 4)}.
inline double log_gross_upper_bound(int n, int d, double kappa) {
  if (!(kappa > 0)) throw std::invalid_argument("kappa must be positive");
  return std::log(2.0) + 0.5 * n * std::log(8.0) + kappa * (n - 2.0 * d + 4.0);
}

/// 2 (sqrt 8)^n e^{kappa (n - 2d + 4)}: dominates every walk count N'(n, d).
inline double gross_upper_bound(int n, int d, double kappa) {
  return std::exp(log_gross_upper_bound(n, d, kappa));
}

/// Thrown when a count source is asked for a walk length beyond its range.
class CountSourceExhausted : public std::out_of_range {
 public:
  CountSourceExhausted(int requested, int available)
      : std::out_of_range("walk counts requested at n = " + std::to_string(requested) + " but available only up to " +
                          std::to_string(available)),
        requested_(requested),
        available_(available) {}
  int requested() const { return requested_; }
  int available() const { return available_; }

 private:
  int requested_;
  int available_;
};

/// N'(n, d) for axis-aligned link pairs at lattice distance d.
class WalkCountSource {
 public:
  virtual ~WalkCountSource() = default;
  virtual std::string name() const = 0;
  /// Largest walk length available.
  virtual int max_order() const = 0;
  virtual BigInt count(int n, int d) const = 0;
  virtual double log_count(int n, int d) const { return log_of(count(n, d)); }
};

/// Walk counts from the dynamic programme on a two-dimensional lattice sized
/// to satisfy the extent guard. Canonical source for the bound.
class DpWalkCounts final : public WalkCountSource {
 public:
  /// extent = 0 picks the smallest periodic extent that satisfies the guard
  /// and keeps every target's nearest image at displacement d.
  DpWalkCounts(int n_max, int d_max, int extent = 0) : n_max_(n_max), d_max_(d_max) {
    if (n_max < 0 || d_max < 0) throw std::invalid_argument("n_max and d_max must be nonnegative");
    const int needed = std::max({n_max + 1, 2 * d_max + 1, 2});
    if (extent != 0 && extent < 2 * d_max + 1)
      throw std::invalid_argument("extent too small to hold separation " + std::to_string(d_max));
    LatticeSpec spec{2, extent == 0 ? needed : extent, Boundary::periodic};
    auto g = build_decorated_lattice(spec);
    std::vector<VertexId> targets;
    VertexId origin = axis_pair(g, 0).p;
    for (int d = 0; d <= d_max; ++d) targets.push_back(axis_pair(g, d).q);
    DpOptions opt;
    opt.targets = targets;
    auto table = count_walks_dp(g, origin, n_max, opt);
    spec_ = spec;
    counts_.resize(static_cast<std::size_t>(d_max + 1));
    logs_.resize(counts_.size());
    for (int d = 0; d <= d_max; ++d) {
      for (int n = 0; n <= n_max; ++n) {
        counts_[d].push_back(table.count(n, targets[d]));
        logs_[d].push_back(log_of(counts_[d].back()));
      }
    }
  }

  std::string name() const override { return "dp"; }
  int max_order() const override { return n_max_; }
  int max_distance() const { return d_max_; }
  const LatticeSpec& lattice_spec() const { return spec_; }

  BigInt count(int n, int d) const override { return ref(n, d); }
  const BigInt& ref(int n, int d) const {
    check(n, d);
    return counts_[d][n];
  }
  double log_count(int n, int d) const override {
    check(n, d);
    return logs_[d][n];
  }

 private:
  void check(int n, int d) const {
    if (n < 0 || d < 0) throw std::invalid_argument("negative walk length or distance");
    if (n > n_max_) throw CountSourceExhausted(n, n_max_);
    if (d > d_max_) throw std::out_of_range("distance " + std::to_string(d) + " beyond tracked range");
  }

  int n_max_;
  int d_max_;
  LatticeSpec spec_;
  std::vector<std::vector<BigInt>> counts_;
  std::vector<std::vector<double>> logs_;
};

/// Walk counts from count_walks_closed_form, memoised.
class ClosedFormWalkCounts final : public WalkCountSource {
 public:
  std::string name() const override { return "closed_form"; }
  int max_order() const override { return INT_MAX; }
  BigInt count(int n, int d) const override {
    std::lock_guard lock(mutex_);
    auto key = std::pair{n, d};
    auto it = memo_.find(key);
    if (it == memo_.end()) it = memo_.emplace(key, count_walks_closed_form(n, d)).first;
    return it->second;
  }

 private:
  mutable std::mutex mutex_;
  mutable std::map<std::pair<int, int>, BigInt> memo_;
};

struct FidelityEntry {
  int n;
  int d;
  BigInt closed_form;
  BigInt oracle;
};

/// Entry-by-entry comparison of the closed form against DP counts.
struct FidelityReport {
  int n_max = 0;
  std::vector<int> distances;
  std::size_t compared = 0;
  std::vector<FidelityEntry> mismatches;

  bool ok() const { return mismatches.empty(); }
  bool matches(int n, int d) const {
    for (const auto& m : mismatches)
      if (m.n == n && m.d == d) return false;
    return true;
  }
};

inline FidelityReport compare_closed_form(const DpWalkCounts& dp, int n_max, std::span<const int> distances) {
  FidelityReport r;
  r.n_max = n_max;
  r.distances.assign(distances.begin(), distances.end());
  for (int d : distances) {
    for (int n = 0; n <= n_max; ++n) {
      BigInt cf = count_walks_closed_form(n, d);
      const BigInt& oracle = dp.ref(n, d);
      ++r.compared;
      if (cf != oracle) r.mismatches.push_back({n, d, cf, oracle});
    }
  }
  return r;
}

}  // namespace lrcone

#endif  // LRCONE_PATHCOUNT_HPP
