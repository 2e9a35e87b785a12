#ifndef QOESCAPE_TOPOLOGY_HPP
#define QOESCAPE_TOPOLOGY_HPP

#include <algorithm>
#include <charconv>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "errors.hpp"
#include "random.hpp"

namespace qoescape {

using NodeId = std::uint32_t;
using Label = std::uint64_t;

/// Undirected simple graph in compressed adjacency form.
///
/// Internal ids are 0..N-1; every node carries an external label (the
/// token it was read as, or its generator index). Neighbor lists are sorted
/// and contain neither self-loops nor duplicates.
class Topology {
 public:
  /// Builds from internal-id edges. Self-loops and duplicates must already
  /// be removed (TopologyBuilder does that); violations throw.
  static Topology from_edges(std::vector<Label> labels,
                             std::span<const std::pair<NodeId, NodeId>> edges) {
    const std::size_t n = labels.size();
    if (n < 2) {
      throw DegenerateGraphError("topology needs at least 2 nodes, got " +
                                 std::to_string(n));
    }
    Topology g;
    g.labels_ = std::move(labels);
    g.offsets_.assign(n + 1, 0);
    for (const auto& [u, v] : edges) {
      if (u >= n || v >= n) throw ParameterError("edge endpoint out of range");
      if (u == v) throw ParameterError("self-loop in edge set");
      ++g.offsets_[u + 1];
      ++g.offsets_[v + 1];
    }
    std::partial_sum(g.offsets_.begin(), g.offsets_.end(), g.offsets_.begin());
    g.targets_.resize(g.offsets_.back());
    std::vector<std::size_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
    for (const auto& [u, v] : edges) {
      g.targets_[cursor[u]++] = v;
      g.targets_[cursor[v]++] = u;
    }
    for (std::size_t u = 0; u < n; ++u) {
      auto first = g.targets_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[u]);
      auto last = g.targets_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[u + 1]);
      std::sort(first, last);
      if (std::adjacent_find(first, last) != last) {
        throw ParameterError("duplicate edge in edge set");
      }
    }
    return g;
  }

  std::size_t node_count() const noexcept { return labels_.size(); }
  std::size_t edge_count() const noexcept { return targets_.size() / 2; }

  std::span<const NodeId> neighbors(NodeId u) const {
    return {targets_.data() + offsets_[u], offsets_[u + 1] - offsets_[u]};
  }
  std::size_t degree(NodeId u) const { return offsets_[u + 1] - offsets_[u]; }

  Label label(NodeId u) const { return labels_[u]; }
  std::span<const Label> labels() const noexcept { return labels_; }

  /// Edges (u < v) in internal ids, lexicographic order.
  std::vector<std::pair<NodeId, NodeId>> edges() const {
    std::vector<std::pair<NodeId, NodeId>> out;
    out.reserve(edge_count());
    for (NodeId u = 0; u < node_count(); ++u) {
      for (NodeId v : neighbors(u)) {
        if (u < v) out.emplace_back(u, v);
      }
    }
    return out;
  }

  /// Subgraph induced by `keep` (internal ids in ascending order); ids are
  /// re-compacted in the same relative order and labels carried over.
  Topology induced(std::span<const NodeId> keep) const {
    std::vector<NodeId> remap(node_count(), kAbsent);
    std::vector<Label> labels;
    labels.reserve(keep.size());
    for (NodeId u : keep) {
      remap[u] = static_cast<NodeId>(labels.size());
      labels.push_back(labels_[u]);
    }
    std::vector<std::pair<NodeId, NodeId>> sub;
    for (NodeId u : keep) {
      for (NodeId v : neighbors(u)) {
        if (u < v && remap[v] != kAbsent) sub.emplace_back(remap[u], remap[v]);
      }
    }
    return from_edges(std::move(labels), sub);
  }

  friend bool operator==(const Topology&, const Topology&) = default;

 private:
  static constexpr NodeId kAbsent = static_cast<NodeId>(-1);

  Topology() = default;

  std::vector<Label> labels_;
  std::vector<std::size_t> offsets_;
  std::vector<NodeId> targets_;
};

/// Collects labelled edges, dropping self-loops and duplicates and
/// assigning internal ids in order of first appearance.
class TopologyBuilder {
 public:
  void add_node(Label label) { intern(label); }

  void add_edge(Label a, Label b) {
    if (a == b) {
      intern(a);
      ++self_loops_;
      return;
    }
    const NodeId u = intern(a);
    const NodeId v = intern(b);
    const auto key = u < v ? std::pair{u, v} : std::pair{v, u};
    if (!seen_.emplace(pack(key), true).second) {
      ++duplicates_;
      return;
    }
    edges_.push_back(key);
  }

  std::size_t node_count() const noexcept { return labels_.size(); }
  std::size_t duplicate_edges() const noexcept { return duplicates_; }
  std::size_t self_loops() const noexcept { return self_loops_; }

  Topology build() const { return Topology::from_edges(labels_, edges_); }

 private:
  NodeId intern(Label label) {
    auto [it, inserted] = ids_.emplace(label, static_cast<NodeId>(labels_.size()));
    if (inserted) labels_.push_back(label);
    return it->second;
  }

  static std::uint64_t pack(std::pair<NodeId, NodeId> e) {
    return (static_cast<std::uint64_t>(e.first) << 32) | e.second;
  }

  std::unordered_map<Label, NodeId> ids_;
  std::unordered_map<std::uint64_t, bool> seen_;
  std::vector<Label> labels_;
  std::vector<std::pair<NodeId, NodeId>> edges_;
  std::size_t duplicates_ = 0;
  std::size_t self_loops_ = 0;
};

// ---------------------------------------------------------------------------
// Generators

namespace spec {
struct Complete { std::size_t n; };
struct Path { std::size_t n; };
struct Star { std::size_t n; };
struct Grid { std::size_t rows; std::size_t cols; };
struct ErdosRenyi { std::size_t n; double p; };
struct BarabasiAlbert { std::size_t n; std::size_t m; };
struct WattsStrogatz { std::size_t n; std::size_t k; double beta; };
}  // namespace spec

struct TopologySpec {
  std::variant<spec::Complete, spec::Path, spec::Star, spec::Grid,
               spec::ErdosRenyi, spec::BarabasiAlbert, spec::WattsStrogatz>
      kind;
  std::uint64_t seed = 0;
};

namespace detail {

inline void require_nodes(std::size_t n) {
  if (n < 2) throw ParameterError("n must be >= 2, got " + std::to_string(n));
}

inline Topology from_index_edges(std::size_t n,
                                 std::vector<std::pair<NodeId, NodeId>> edges) {
  std::vector<Label> labels(n);
  std::iota(labels.begin(), labels.end(), Label{0});
  return Topology::from_edges(std::move(labels), edges);
}

inline Topology make(const spec::Complete& s, SplitMix64&) {
  require_nodes(s.n);
  std::vector<std::pair<NodeId, NodeId>> e;
  for (NodeId u = 0; u < s.n; ++u)
    for (NodeId v = u + 1; v < s.n; ++v) e.emplace_back(u, v);
  return from_index_edges(s.n, std::move(e));
}

inline Topology make(const spec::Path& s, SplitMix64&) {
  require_nodes(s.n);
  std::vector<std::pair<NodeId, NodeId>> e;
  for (NodeId u = 0; u + 1 < s.n; ++u) e.emplace_back(u, u + 1);
  return from_index_edges(s.n, std::move(e));
}

inline Topology make(const spec::Star& s, SplitMix64&) {
  require_nodes(s.n);
  std::vector<std::pair<NodeId, NodeId>> e;
  for (NodeId v = 1; v < s.n; ++v) e.emplace_back(0, v);
  return from_index_edges(s.n, std::move(e));
}

inline Topology make(const spec::Grid& s, SplitMix64&) {
  if (s.rows == 0 || s.cols == 0) throw ParameterError("grid dimensions must be positive");
  const std::size_t n = s.rows * s.cols;
  require_nodes(n);
  std::vector<std::pair<NodeId, NodeId>> e;
  for (std::size_t r = 0; r < s.rows; ++r) {
    for (std::size_t c = 0; c < s.cols; ++c) {
      const auto u = static_cast<NodeId>(r * s.cols + c);
      if (c + 1 < s.cols) e.emplace_back(u, u + 1);
      if (r + 1 < s.rows) e.emplace_back(u, static_cast<NodeId>(u + s.cols));
    }
  }
  return from_index_edges(n, std::move(e));
}

inline Topology make(const spec::ErdosRenyi& s, SplitMix64& rng) {
  require_nodes(s.n);
  if (!(s.p >= 0.0 && s.p <= 1.0)) throw ParameterError("er: p must lie in [0, 1]");
  std::vector<std::pair<NodeId, NodeId>> e;
  for (NodeId u = 0; u < s.n; ++u)
    for (NodeId v = u + 1; v < s.n; ++v)
      if (rng.bernoulli(s.p)) e.emplace_back(u, v);
  return from_index_edges(s.n, std::move(e));
}

// Seed: complete graph on m + 1 nodes. Each arriving node draws m distinct
// targets from the endpoint list (degree-proportional), redrawing repeats.
inline Topology make(const spec::BarabasiAlbert& s, SplitMix64& rng) {
  require_nodes(s.n);
  if (s.m < 1 || s.m >= s.n) throw ParameterError("ba: need 1 <= m < n");
  std::vector<std::pair<NodeId, NodeId>> e;
  std::vector<NodeId> endpoints;
  const auto seed_nodes = static_cast<NodeId>(s.m + 1);
  for (NodeId u = 0; u < seed_nodes; ++u) {
    for (NodeId v = u + 1; v < seed_nodes; ++v) {
      e.emplace_back(u, v);
      endpoints.push_back(u);
      endpoints.push_back(v);
    }
  }
  std::vector<NodeId> targets;
  for (auto u = seed_nodes; u < s.n; ++u) {
    targets.clear();
    while (targets.size() < s.m) {
      const NodeId t = endpoints[rng.below(endpoints.size())];
      if (std::find(targets.begin(), targets.end(), t) == targets.end()) {
        targets.push_back(t);
      }
    }
    for (NodeId t : targets) {
      e.emplace_back(t, u);
      endpoints.push_back(t);
      endpoints.push_back(u);
    }
  }
  return from_index_edges(s.n, std::move(e));
}

// Ring lattice with k/2 neighbours per side; each lattice edge (u, u+j) is
// rewired with probability beta to (u, w), w uniform among nodes that keep
// the graph simple.
inline Topology make(const spec::WattsStrogatz& s, SplitMix64& rng) {
  require_nodes(s.n);
  if (s.k % 2 != 0 || s.k < 2 || s.k >= s.n) {
    throw ParameterError("ws: k must be even with 2 <= k < n");
  }
  if (!(s.beta >= 0.0 && s.beta <= 1.0)) throw ParameterError("ws: beta must lie in [0, 1]");
  const std::size_t n = s.n;
  std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
  auto link = [&](std::size_t u, std::size_t v, bool on) { adj[u][v] = adj[v][u] = on; };
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t j = 1; j <= s.k / 2; ++j) link(u, (u + j) % n, true);
  for (std::size_t j = 1; j <= s.k / 2; ++j) {
    for (std::size_t u = 0; u < n; ++u) {
      const std::size_t v = (u + j) % n;
      if (!adj[u][v] || !rng.bernoulli(s.beta)) continue;
      std::size_t degree = 0;
      for (std::size_t w = 0; w < n; ++w) degree += adj[u][w];
      if (degree >= n - 1) continue;  // no free endpoint
      std::size_t w;
      do {
        w = rng.below(n);
      } while (w == u || adj[u][w]);
      link(u, v, false);
      link(u, w, true);
    }
  }
  std::vector<std::pair<NodeId, NodeId>> e;
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = u + 1; v < n; ++v)
      if (adj[u][v]) e.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
  return from_index_edges(n, std::move(e));
}

}  // namespace detail

/// Deterministic for complete/path/star/grid; seeded for er/ba/ws.
inline Topology generate(const TopologySpec& s) {
  SplitMix64 rng(s.seed);
  return std::visit([&](const auto& kind) { return detail::make(kind, rng); }, s.kind);
}

// ---------------------------------------------------------------------------
// Loaders

struct LoadedTopology {
  Topology graph;
  std::size_t duplicate_edges = 0;
  std::size_t self_loops = 0;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto first = s.find_first_not_of(ws);
  if (first == std::string_view::npos) return {};
  return s.substr(first, s.find_last_not_of(ws) - first + 1);
}

inline std::optional<Label> parse_label(std::string_view token) {
  Label value = 0;
  const auto* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec != std::errc{} || ptr != end || token.empty()) return std::nullopt;
  return value;
}

inline LoadedTopology finish(const TopologyBuilder& b) {
  if (b.node_count() < 2) {
    throw DegenerateGraphError("input defines " + std::to_string(b.node_count()) +
                               " node(s); at least 2 are required");
  }
  return {b.build(), b.duplicate_edges(), b.self_loops()};
}

}  // namespace detail

/// Whitespace-separated "u v" lines; '#' comments and blank lines skipped.
inline LoadedTopology load_edge_list(std::istream& in) {
  TopologyBuilder builder;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto body = detail::trim(line);
    if (body.empty() || body.front() == '#') continue;
    std::istringstream fields{std::string(body)};
    std::string a, b, extra;
    if (!(fields >> a >> b) || (fields >> extra)) {
      throw ParseError(lineno, "expected exactly two node tokens");
    }
    const auto u = detail::parse_label(a);
    const auto v = detail::parse_label(b);
    if (!u) throw ParseError(lineno, "non-numeric node token '" + a + "'");
    if (!v) throw ParseError(lineno, "non-numeric node token '" + b + "'");
    builder.add_edge(*u, *v);
  }
  return detail::finish(builder);
}

inline LoadedTopology load_edge_list(std::string_view text) {
  std::istringstream in{std::string(text)};
  return load_edge_list(in);
}

/// CAIDA AS-relationship lines "as1|as2|rel[|...]". The relationship field
/// is ignored and edges are merged as undirected.
inline LoadedTopology load_caida(std::istream& in) {
  TopologyBuilder builder;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto body = detail::trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto bar = body.find('|');
    if (bar == std::string_view::npos) {
      throw ParseError(lineno, "expected '|'-separated fields");
    }
    const auto rest = body.substr(bar + 1);
    const auto second = rest.substr(0, rest.find('|'));
    const auto u = detail::parse_label(detail::trim(body.substr(0, bar)));
    const auto v = detail::parse_label(detail::trim(second));
    if (!u || !v) throw ParseError(lineno, "malformed AS number field");
    builder.add_edge(*u, *v);
  }
  return detail::finish(builder);
}

inline LoadedTopology load_caida(std::string_view text) {
  std::istringstream in{std::string(text)};
  return load_caida(in);
}

/// Writes "u v" label lines (u < v by internal id) after a comment header.
inline void write_edge_list(std::ostream& out, const Topology& g) {
  out << "# nodes " << g.node_count() << " edges " << g.edge_count() << '\n';
  for (const auto& [u, v] : g.edges()) out << g.label(u) << ' ' << g.label(v) << '\n';
}

// ---------------------------------------------------------------------------
// Reductions

/// Component id per node, numbered in order of lowest internal id.
inline std::vector<std::size_t> component_ids(const Topology& g) {
  constexpr auto unset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> comp(g.node_count(), unset);
  std::vector<NodeId> stack;
  std::size_t next = 0;
  for (NodeId s = 0; s < g.node_count(); ++s) {
    if (comp[s] != unset) continue;
    comp[s] = next;
    stack.push_back(s);
    while (!stack.empty()) {
      const NodeId u = stack.back();
      stack.pop_back();
      for (NodeId v : g.neighbors(u)) {
        if (comp[v] == unset) {
          comp[v] = next;
          stack.push_back(v);
        }
      }
    }
    ++next;
  }
  return comp;
}

inline bool is_connected(const Topology& g) {
  const auto comp = component_ids(g);
  return std::all_of(comp.begin(), comp.end(), [](std::size_t c) { return c == 0; });
}

/// Largest connected component; ties go to the component holding the
/// smallest external label.
inline Topology largest_component(const Topology& g) {
  const auto comp = component_ids(g);
  const std::size_t count = comp.empty() ? 0 : *std::max_element(comp.begin(), comp.end()) + 1;
  if (count == 1) return g;
  std::vector<std::size_t> size(count, 0);
  std::vector<Label> min_label(count, static_cast<Label>(-1));
  for (NodeId u = 0; u < g.node_count(); ++u) {
    ++size[comp[u]];
    min_label[comp[u]] = std::min(min_label[comp[u]], g.label(u));
  }
  std::size_t best = 0;
  for (std::size_t c = 1; c < count; ++c) {
    if (size[c] > size[best] || (size[c] == size[best] && min_label[c] < min_label[best])) {
      best = c;
    }
  }
  std::vector<NodeId> keep;
  for (NodeId u = 0; u < g.node_count(); ++u)
    if (comp[u] == best) keep.push_back(u);
  return g.induced(keep);
}

/// Maximal subgraph with every internal degree >= k, by iterative peeling.
/// Returns nullopt when fewer than two nodes survive.
inline std::optional<Topology> k_core(const Topology& g, std::size_t k) {
  if (k < 1) throw ParameterError("k_core: k must be >= 1");
  std::vector<std::size_t> degree(g.node_count());
  std::vector<bool> removed(g.node_count(), false);
  std::vector<NodeId> queue;
  for (NodeId u = 0; u < g.node_count(); ++u) {
    degree[u] = g.degree(u);
    if (degree[u] < k) {
      removed[u] = true;
      queue.push_back(u);
    }
  }
  while (!queue.empty()) {
    const NodeId u = queue.back();
    queue.pop_back();
    for (NodeId v : g.neighbors(u)) {
      if (!removed[v] && --degree[v] < k) {
        removed[v] = true;
        queue.push_back(v);
      }
    }
  }
  std::vector<NodeId> keep;
  for (NodeId u = 0; u < g.node_count(); ++u)
    if (!removed[u]) keep.push_back(u);
  if (keep.size() < 2) return std::nullopt;
  return g.induced(keep);
}

}  // namespace qoescape

#endif  // QOESCAPE_TOPOLOGY_HPP
