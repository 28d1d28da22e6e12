#ifndef LRCONE_LATTICE_HPP
#define LRCONE_LATTICE_HPP

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lrcone {

enum class Boundary { open, periodic };

inline const char* to_string(Boundary b) { return b == Boundary::open ? "open" : "periodic"; }

inline Boundary parse_boundary(const std::string& s) {
  if (s == "open") return Boundary::open;
  if (s == "periodic") return Boundary::periodic;
  throw std::invalid_argument("unknown boundary '" + s + "'");
}

struct LatticeSpec {
  int dimension = 2;
  int extent = 4;
  Boundary boundary = Boundary::periodic;

  void validate() const {
    if (dimension < 1) throw std::invalid_argument("lattice dimension must be >= 1");
    if (extent < 2) throw std::invalid_argument("lattice extent must be >= 2");
  }

  friend bool operator==(const LatticeSpec&, const LatticeSpec&) = default;
};

using VertexId = std::uint32_t;

/// Upper bound on the number of vertices a lattice may hold.
inline constexpr std::size_t kDefaultVertexCap = std::size_t{1} << 26;

/// The bipartite incidence graph G' of an hypercubic lattice: one vertex per
/// link (edge) and one per elementary square face, joined when the face
/// borders the link. Vertices are numbered links first, then plaquettes, each
/// group in lexicographic order of its coordinate key. Immutable once built.
class DecoratedLattice {
 public:
  /// Integer key of a vertex. Links: doubled midpoint (2x + e_a).
  /// Plaquettes: lowest corner x and the axis pair (a, b), a < b.
  struct LinkKey {
    std::vector<int> doubled_midpoint;
    int axis;
  };
  struct PlaquetteKey {
    std::vector<int> corner;
    int axis_a;
    int axis_b;
  };

  const LatticeSpec& spec() const { return spec_; }
  int dimension() const { return spec_.dimension; }
  int extent() const { return spec_.extent; }

  std::size_t num_links() const { return link_site_.size(); }
  std::size_t num_plaquettes() const { return plaq_site_.size(); }
  std::size_t num_vertices() const { return num_links() + num_plaquettes(); }
  std::size_t num_edges() const { return neighbors_.size() / 2; }

  bool is_link(VertexId v) const { return v < num_links(); }
  bool is_plaquette(VertexId v) const { return v >= num_links() && v < num_vertices(); }

  std::span<const VertexId> neighbors(VertexId v) const {
    check(v);
    return {neighbors_.data() + offsets_[v], neighbors_.data() + offsets_[v + 1]};
  }
  std::size_t degree(VertexId v) const {
    check(v);
    return offsets_[v + 1] - offsets_[v];
  }

  /// Link from site `site` along `axis`, if it exists.
  std::optional<VertexId> link(const std::vector<int>& site, int axis) const {
    auto s = site_index(site);
    if (!s || axis < 0 || axis >= dimension()) return std::nullopt;
    VertexId id = link_of_[*s * dimension() + axis];
    if (id == kAbsent) return std::nullopt;
    return id;
  }

  /// Plaquette with lowest corner `site` spanning axes a < b, if it exists.
  std::optional<VertexId> plaquette(const std::vector<int>& site, int a, int b) const {
    auto s = site_index(site);
    if (!s || a < 0 || b <= a || b >= dimension()) return std::nullopt;
    VertexId id = plaq_of_[*s * pairs_.size() + pair_index(a, b)];
    if (id == kAbsent) return std::nullopt;
    return num_links() + id;
  }

  LinkKey link_key(VertexId v) const {
    if (!is_link(v)) throw std::out_of_range("vertex is not a link");
    auto x = site_coords(link_site_[v]);
    int axis = link_axis_[v];
    for (auto& c : x) c *= 2;
    x[axis] += 1;
    return {x, axis};
  }

  PlaquetteKey plaquette_key(VertexId v) const {
    if (!is_plaquette(v)) throw std::out_of_range("vertex is not a plaquette");
    auto p = v - num_links();
    auto [a, b] = pairs_[plaq_pair_[p]];
    return {site_coords(plaq_site_[p]), a, b};
  }

  /// Coordinates of a vertex's geometric centre, doubled so they stay integral.
  std::vector<int> doubled_center(VertexId v) const {
    if (is_link(v)) return link_key(v).doubled_midpoint;
    auto k = plaquette_key(v);
    for (auto& c : k.corner) c *= 2;
    k.corner[k.axis_a] += 1;
    k.corner[k.axis_b] += 1;
    return k.corner;
  }

  /// Full interior degree of a vertex of this kind on the infinite lattice.
  std::size_t bulk_degree(VertexId v) const {
    return is_link(v) ? static_cast<std::size_t>(2 * (dimension() - 1)) : 4;
  }

  /// Link along `axis` at the centre of the lattice.
  VertexId central_link(int axis) const {
    std::vector<int> c(dimension(), extent() / 2);
    auto id = link(c, axis);
    if (!id) throw std::out_of_range("lattice has no central link along this axis");
    return *id;
  }

  std::vector<int> site_coords(std::size_t s) const {
    std::vector<int> x(dimension());
    for (int i = dimension() - 1; i >= 0; --i) {
      x[i] = static_cast<int>(s % extent());
      s /= extent();
    }
    return x;
  }

  std::optional<std::size_t> site_index(std::vector<int> x) const {
    if (static_cast<int>(x.size()) != dimension()) return std::nullopt;
    std::size_t s = 0;
    for (int i = 0; i < dimension(); ++i) {
      int c = x[i];
      if (spec_.boundary == Boundary::periodic) {
        c = ((c % extent()) + extent()) % extent();
      } else if (c < 0 || c >= extent()) {
        return std::nullopt;
      }
      s = s * extent() + c;
    }
    return s;
  }

  /// Adjacency as (link, plaquette) pairs, each edge once, sorted.
  std::vector<std::pair<VertexId, VertexId>> edge_list() const {
    std::vector<std::pair<VertexId, VertexId>> edges;
    edges.reserve(num_edges());
    for (VertexId l = 0; l < num_links(); ++l)
      for (auto p : neighbors(l)) edges.emplace_back(l, p);
    return edges;
  }

  friend DecoratedLattice build_decorated_lattice(const LatticeSpec&, std::size_t);

 private:
  static constexpr VertexId kAbsent = ~VertexId{0};

  void check(VertexId v) const {
    if (v >= num_vertices()) throw std::out_of_range("vertex id out of range");
  }
  std::size_t pair_index(int a, int b) const {
    auto it = std::find(pairs_.begin(), pairs_.end(), std::pair{a, b});
    return static_cast<std::size_t>(it - pairs_.begin());
  }

  LatticeSpec spec_;
  std::vector<std::pair<int, int>> pairs_;
  // link id -> (site, axis); plaquette id (relative) -> (site, pair)
  std::vector<std::size_t> link_site_;
  std::vector<int> link_axis_;
  std::vector<std::size_t> plaq_site_;
  std::vector<std::size_t> plaq_pair_;
  // (site, axis) -> link id; (site, pair) -> plaquette id (relative)
  std::vector<VertexId> link_of_;
  std::vector<VertexId> plaq_of_;
  std::vector<std::size_t> offsets_;
  std::vector<VertexId> neighbors_;
};

inline std::size_t checked_pow(std::size_t base, int exp, std::size_t cap) {
  std::size_t r = 1;
  for (int i = 0; i < exp; ++i) {
    if (r > cap / base) return cap + 1;
    r *= base;
  }
  return r;
}

/// Build G' for the given spec. Throws std::invalid_argument for an invalid
/// spec and std::length_error when the vertex count would exceed `vertex_cap`.
inline DecoratedLattice build_decorated_lattice(const LatticeSpec& spec,
                                                std::size_t vertex_cap = kDefaultVertexCap) {
  spec.validate();
  const int D = spec.dimension;
  const int L = spec.extent;
  const bool periodic = spec.boundary == Boundary::periodic;

  const std::size_t sites = checked_pow(L, D, vertex_cap);
  const std::size_t npairs = static_cast<std::size_t>(D) * (D - 1) / 2;
  if (sites > vertex_cap || sites * (D + npairs) > vertex_cap)
    throw std::length_error("lattice exceeds the vertex cap");

  DecoratedLattice g;
  g.spec_ = spec;
  for (int a = 0; a < D; ++a)
    for (int b = a + 1; b < D; ++b) g.pairs_.emplace_back(a, b);

  auto coords = [&](std::size_t s) { return g.site_coords(s); };
  auto has_step = [&](const std::vector<int>& x, int axis) { return periodic || x[axis] + 1 < L; };

  // Links sorted by doubled midpoint. Within one site the midpoints
  // 2x + e_a order by descending axis, and sites are already lexicographic,
  // but neighbouring sites interleave, so sort explicitly.
  struct Entry {
    std::vector<int> key;
    std::size_t site;
    std::size_t sub;
  };
  std::vector<Entry> links;
  for (std::size_t s = 0; s < sites; ++s) {
    auto x = coords(s);
    for (int a = 0; a < D; ++a) {
      if (!has_step(x, a)) continue;
      std::vector<int> key(x);
      for (auto& c : key) c *= 2;
      key[a] += 1;
      links.push_back({std::move(key), s, static_cast<std::size_t>(a)});
    }
  }
  std::sort(links.begin(), links.end(), [](const Entry& l, const Entry& r) { return l.key < r.key; });

  std::vector<Entry> plaqs;
  for (std::size_t s = 0; s < sites; ++s) {
    auto x = coords(s);
    for (std::size_t p = 0; p < npairs; ++p) {
      auto [a, b] = g.pairs_[p];
      if (!has_step(x, a) || !has_step(x, b)) continue;
      plaqs.push_back({x, s, p});
    }
  }
  // Sites enumerate lexicographically and pairs in order, so plaqs is sorted.

  g.link_of_.assign(sites * D, DecoratedLattice::kAbsent);
  g.plaq_of_.assign(sites * npairs, DecoratedLattice::kAbsent);
  for (std::size_t i = 0; i < links.size(); ++i) {
    g.link_site_.push_back(links[i].site);
    g.link_axis_.push_back(static_cast<int>(links[i].sub));
    g.link_of_[links[i].site * D + links[i].sub] = static_cast<VertexId>(i);
  }
  for (std::size_t i = 0; i < plaqs.size(); ++i) {
    g.plaq_site_.push_back(plaqs[i].site);
    g.plaq_pair_.push_back(plaqs[i].sub);
    g.plaq_of_[plaqs[i].site * npairs + plaqs[i].sub] = static_cast<VertexId>(i);
  }

  const std::size_t nl = links.size();
  const std::size_t nv = nl + plaqs.size();
  std::vector<std::vector<VertexId>> adj(nv);
  for (std::size_t p = 0; p < plaqs.size(); ++p) {
    auto x = coords(plaqs[p].site);
    auto [a, b] = g.pairs_[plaqs[p].sub];
    auto xa = x, xb = x;
    xa[a] += 1;
    xb[b] += 1;
    const VertexId pid = static_cast<VertexId>(nl + p);
    // The four bordering links: (x,a), (x+e_b,a), (x,b), (x+e_a,b).
    for (auto [site, axis] : {std::pair{x, a}, std::pair{xb, a}, std::pair{x, b}, std::pair{xa, b}}) {
      auto l = g.link(site, axis);
      if (!l) throw std::logic_error("plaquette border link missing");
      adj[pid].push_back(*l);
      adj[*l].push_back(pid);
    }
  }
  g.offsets_.assign(nv + 1, 0);
  for (std::size_t v = 0; v < nv; ++v) {
    auto& a = adj[v];
    std::sort(a.begin(), a.end());
    g.offsets_[v + 1] = g.offsets_[v] + a.size();
  }
  g.neighbors_.reserve(g.offsets_.back());
  for (auto& a : adj) g.neighbors_.insert(g.neighbors_.end(), a.begin(), a.end());
  return g;
}

/// Breadth-first distances from `source` to every vertex; unreachable
/// vertices get std::nullopt.
inline std::vector<std::optional<std::size_t>> distances_from(const DecoratedLattice& g, VertexId source) {
  std::vector<std::optional<std::size_t>> dist(g.num_vertices());
  g.degree(source);
  std::deque<VertexId> queue{source};
  dist[source] = 0;
  while (!queue.empty()) {
    auto v = queue.front();
    queue.pop_front();
    for (auto w : g.neighbors(v)) {
      if (dist[w]) continue;
      dist[w] = *dist[v] + 1;
      queue.push_back(w);
    }
  }
  return dist;
}

/// Shortest-path length on G'. std::nullopt means P and Q are disconnected.
inline std::optional<std::size_t> graph_distance(const DecoratedLattice& g, VertexId p, VertexId q) {
  g.degree(q);
  if (p == q) return 0;
  return distances_from(g, p)[q];
}

/// Two link-vertices perpendicular to axis 0 and `d` lattice steps apart
/// along it: the pair whose G'-distance is 2d.
struct AxisPair {
  VertexId p;
  VertexId q;
};

inline AxisPair axis_pair(const DecoratedLattice& g, int d) {
  if (g.dimension() < 2) throw std::invalid_argument("axis pairs need dimension >= 2");
  if (d < 0) throw std::invalid_argument("separation must be nonnegative");
  std::vector<int> c(g.dimension(), g.extent() / 2);
  auto p = g.link(c, 1);
  c[0] += d;
  auto q = g.link(c, 1);
  if (!p || !q) throw std::out_of_range("axis pair does not fit in the lattice");
  return {*p, *q};
}

}  // namespace lrcone

#endif  // LRCONE_LATTICE_HPP
