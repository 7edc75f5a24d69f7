#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <queue>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gsim/error.hpp"
#include "gsim/matrix.hpp"

namespace gsim {

using NodeId = std::uint32_t;
using EdgeId = std::uint32_t;

inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();
inline constexpr EdgeId kNoEdge = std::numeric_limits<EdgeId>::max();

struct Edge {
  NodeId u = 0;
  NodeId v = 0;
  double length = 0.0;
};

namespace detail {

inline std::uint64_t fnv1a(std::uint64_t h, std::uint64_t word) noexcept {
  for (int i = 0; i < 8; ++i) {
    h ^= (word >> (8 * i)) & 0xffu;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ull;

}  // namespace detail

/// Undirected, connected graph with positive edge lengths. Immutable once
/// built; construct through build_graph().
class Graph {
 public:
  struct Arc {
    NodeId to;
    EdgeId edge;
  };

  Graph() = default;

  std::size_t node_count() const noexcept { return node_count_; }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const Edge& edge(EdgeId e) const noexcept { return edges_[e]; }

  /// Euclidean coordinates, either empty or one vector per node.
  const std::vector<std::vector<double>>& coords() const noexcept { return coords_; }
  std::size_t dimension() const noexcept { return coords_.empty() ? 0 : coords_.front().size(); }

  std::span<const Arc> neighbors(NodeId v) const noexcept {
    return {arcs_.data() + offsets_[v], arcs_.data() + offsets_[v + 1]};
  }

  /// Sum of all edge lengths (the length measure of the whole graph).
  double total_length() const noexcept { return total_length_; }

  /// Content hash over node count and the edge list.
  std::uint64_t fingerprint() const noexcept { return fingerprint_; }

  friend Graph build_graph(std::size_t node_count, std::vector<Edge> edges,
                           std::vector<std::vector<double>> coords);

 private:
  std::size_t node_count_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<double>> coords_;
  std::vector<std::size_t> offsets_;
  std::vector<Arc> arcs_;
  double total_length_ = 0.0;
  std::uint64_t fingerprint_ = 0;
};

inline Graph build_graph(std::size_t node_count, std::vector<Edge> edges,
                         std::vector<std::vector<double>> coords = {}) {
  if (node_count == 0) throw Error(Errc::empty_input, "graph has no nodes");
  if (node_count >= kNoNode) throw Error(Errc::invalid_argument, "too many nodes");
  if (!coords.empty()) {
    if (coords.size() != node_count)
      throw Error(Errc::invalid_argument, "coordinate count does not match node count");
    for (const auto& c : coords)
      if (c.size() != coords.front().size())
        throw Error(Errc::invalid_argument, "coordinates have inconsistent dimension");
  }

  std::set<std::pair<NodeId, NodeId>> seen;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const Edge& e = edges[i];
    if (e.u >= node_count || e.v >= node_count)
      throw Error(Errc::invalid_node, "edge " + std::to_string(i) + " references an unknown node");
    if (!(e.length > 0.0) || !std::isfinite(e.length))
      throw Error(Errc::non_positive_weight, "edge " + std::to_string(i) + " has length " +
                                                 std::to_string(e.length));
    if (e.u == e.v) throw Error(Errc::self_loop, "edge " + std::to_string(i) + " is a self-loop");
    if (!seen.emplace(std::min(e.u, e.v), std::max(e.u, e.v)).second)
      throw Error(Errc::duplicate_edge, "edge " + std::to_string(i) + " duplicates an earlier edge");
  }

  Graph g;
  g.node_count_ = node_count;
  g.coords_ = std::move(coords);

  g.offsets_.assign(node_count + 1, 0);
  for (const Edge& e : edges) {
    ++g.offsets_[e.u + 1];
    ++g.offsets_[e.v + 1];
  }
  std::partial_sum(g.offsets_.begin(), g.offsets_.end(), g.offsets_.begin());
  g.arcs_.resize(2 * edges.size());
  std::vector<std::size_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const Edge& e = edges[i];
    g.arcs_[cursor[e.u]++] = {e.v, static_cast<EdgeId>(i)};
    g.arcs_[cursor[e.v]++] = {e.u, static_cast<EdgeId>(i)};
  }

  std::vector<char> reached(node_count, 0);
  std::vector<NodeId> stack{0};
  reached[0] = 1;
  std::size_t count = 1;
  while (!stack.empty()) {
    NodeId v = stack.back();
    stack.pop_back();
    for (const auto& arc : g.neighbors(v)) {
      if (!reached[arc.to]) {
        reached[arc.to] = 1;
        ++count;
        stack.push_back(arc.to);
      }
    }
  }
  if (count != node_count)
    throw Error(Errc::disconnected_graph,
                std::to_string(node_count - count) + " node(s) unreachable from node 0");

  std::uint64_t h = detail::fnv1a(detail::kFnvOffset, node_count);
  for (const Edge& e : edges) {
    g.total_length_ += e.length;
    h = detail::fnv1a(h, e.u);
    h = detail::fnv1a(h, e.v);
    h = detail::fnv1a(h, std::bit_cast<std::uint64_t>(e.length));
  }
  g.fingerprint_ = h;
  g.edges_ = std::move(edges);
  return g;
}

/// Shortest-path tree from a root node.
struct RootedIndex {
  NodeId root = 0;
  std::vector<double> dist;
  std::vector<NodeId> parent;      // kNoNode at the root
  std::vector<EdgeId> parent_edge; // kNoEdge at the root
  std::vector<NodeId> order;       // nonincreasing dist; children precede parents
  std::uint64_t tag = 0;           // identifies (graph, root)
};

namespace detail {

// Relative window inside which two candidate distances count as a tie.
inline bool same_distance(double a, double b) noexcept {
  return std::isfinite(b) && std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b));
}

inline std::vector<double> dijkstra(const Graph& g, NodeId source, std::vector<NodeId>* parent,
                                    std::vector<EdgeId>* parent_edge,
                                    std::vector<NodeId>* settle_order) {
  const std::size_t n = g.node_count();
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  std::vector<char> done(n, 0);
  std::vector<NodeId> par(n, kNoNode);
  std::vector<EdgeId> par_edge(n, kNoEdge);
  using Item = std::pair<double, NodeId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[source] = 0.0;
  heap.emplace(0.0, source);
  while (!heap.empty()) {
    auto [d, u] = heap.top();
    heap.pop();
    if (done[u] || d > dist[u]) continue;
    done[u] = 1;
    if (settle_order) settle_order->push_back(u);
    for (const auto& arc : g.neighbors(u)) {
      const NodeId v = arc.to;
      if (done[v]) continue;
      const double cand = d + g.edge(arc.edge).length;
      if (cand < dist[v] && !same_distance(cand, dist[v])) {
        dist[v] = cand;
        par[v] = u;
        par_edge[v] = arc.edge;
        heap.emplace(cand, v);
      } else if (same_distance(cand, dist[v]) && u < par[v]) {
        par[v] = u;
        par_edge[v] = arc.edge;
      }
    }
  }
  if (parent) *parent = std::move(par);
  if (parent_edge) *parent_edge = std::move(par_edge);
  return dist;
}

}  // namespace detail

/// Dijkstra from `root`. Equal-length alternatives (within 1e-12 relative)
/// resolve to the predecessor with the smaller node id.
inline RootedIndex root_index(const Graph& g, NodeId root) {
  if (root >= g.node_count())
    throw Error(Errc::invalid_root, "root " + std::to_string(root) + " is not a node");
  RootedIndex idx;
  idx.root = root;
  std::vector<NodeId> settle;
  settle.reserve(g.node_count());
  idx.dist = detail::dijkstra(g, root, &idx.parent, &idx.parent_edge, &settle);
  idx.order.assign(settle.rbegin(), settle.rend());
  idx.tag = detail::fnv1a(g.fingerprint(), root);
  return idx;
}

/// Length-measure geometry of every shortest-path-tree edge. Arrays are
/// indexed by graph edge id; non-tree edges have far_node == kNoNode.
struct EdgeProfile {
  std::vector<double> weight;
  std::vector<double> lambda_gamma;
  std::vector<NodeId> far_node;
  double lambda_total = 0.0;
  std::uint64_t tag = 0;

  bool is_tree_edge(EdgeId e) const noexcept { return far_node[e] != kNoNode; }
};

/// Per-edge quantities the per-edge integrals consume.
struct EdgeGeometry {
  double weight = 0.0;
  double lambda_gamma = 0.0;
  double lambda_total = 0.0;
};

inline EdgeGeometry geometry(const EdgeProfile& prof, EdgeId e) noexcept {
  return {prof.weight[e], prof.lambda_gamma[e], prof.lambda_total};
}

/// Computes lambda(gamma_e) for every tree edge by splitting each graph edge at
/// the point where routing to the root switches endpoints, then summing the
/// resulting loads over subtrees.
inline EdgeProfile edge_profiles(const Graph& g, const RootedIndex& idx) {
  const std::size_t n = g.node_count();
  if (idx.dist.size() != n || idx.tag != detail::fnv1a(g.fingerprint(), idx.root))
    throw Error(Errc::mismatched_index, "rooted index was not built on this graph");

  std::vector<double> load(n, 0.0);
  for (EdgeId id = 0; id < g.edge_count(); ++id) {
    const Edge& f = g.edge(id);
    const double w = f.length;
    // Tree edges route wholly through their parent end; only non-tree edges
    // need the breakpoint, and rounding must not leak a sliver past it.
    double t;
    if (idx.parent_edge[f.v] == id)
      t = 1.0;
    else if (idx.parent_edge[f.u] == id)
      t = 0.0;
    else
      t = std::clamp((idx.dist[f.v] + w - idx.dist[f.u]) / (2.0 * w), 0.0, 1.0);
    load[f.u] += t * w;
    load[f.v] += (1.0 - t) * w;
  }
  for (NodeId v : idx.order)
    if (idx.parent[v] != kNoNode) load[idx.parent[v]] += load[v];
  // load[v] == lambda(Lambda(v)); a tree edge routes wholly via its parent.

  EdgeProfile prof;
  prof.weight.resize(g.edge_count());
  prof.lambda_gamma.assign(g.edge_count(), 0.0);
  prof.far_node.assign(g.edge_count(), kNoNode);
  prof.lambda_total = g.total_length();
  prof.tag = idx.tag;
  for (std::size_t e = 0; e < g.edge_count(); ++e) prof.weight[e] = g.edge(e).length;
  for (NodeId v = 0; v < n; ++v) {
    const EdgeId e = idx.parent_edge[v];
    if (e == kNoEdge) continue;
    prof.far_node[e] = v;
    prof.lambda_gamma[e] = std::min(load[v], prof.lambda_total - prof.weight[e]);
  }
  return prof;
}

/// Probability measure supported on graph nodes.
struct Measure {
  std::vector<NodeId> nodes;
  std::vector<double> masses;

  std::size_t size() const noexcept { return nodes.size(); }
};

/// Validates masses (nonnegative, distinct ids, total within 1e-9 of one)
/// and renormalizes to unit total.
inline Measure make_measure(std::vector<std::pair<NodeId, double>> support) {
  if (support.empty()) throw Error(Errc::invalid_measure, "measure has empty support");
  std::sort(support.begin(), support.end());
  double total = 0.0;
  for (std::size_t i = 0; i < support.size(); ++i) {
    const double m = support[i].second;
    if (!(m >= 0.0) || !std::isfinite(m))
      throw Error(Errc::invalid_measure, "mass at node " + std::to_string(support[i].first) +
                                             " is negative or not finite");
    if (i > 0 && support[i].first == support[i - 1].first)
      throw Error(Errc::invalid_measure,
                  "node " + std::to_string(support[i].first) + " listed twice");
    total += m;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw Error(Errc::invalid_measure, "masses sum to " + std::to_string(total) + ", not 1");
  Measure m;
  m.nodes.reserve(support.size());
  m.masses.reserve(support.size());
  for (const auto& [node, mass] : support) {
    m.nodes.push_back(node);
    m.masses.push_back(mass / total);
  }
  return m;
}

inline Measure dirac(NodeId node) { return make_measure({{node, 1.0}}); }

/// Sparse map keyed by tree-edge id, ascending.
using EdgeMap = std::vector<std::pair<EdgeId, double>>;

/// mu(gamma_e) for every tree edge with nonzero subtree mass.
inline EdgeMap subtree_masses(const RootedIndex& idx, const Measure& m) {
  const std::size_t n = idx.dist.size();
  std::vector<double> acc(n, 0.0);
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m.nodes[i] >= n)
      throw Error(Errc::invalid_support_node,
                  "support node " + std::to_string(m.nodes[i]) + " is not in the graph");
    acc[m.nodes[i]] += m.masses[i];
  }
  EdgeMap out;
  for (NodeId v : idx.order) {
    const NodeId p = idx.parent[v];
    if (p == kNoNode || acc[v] == 0.0) continue;
    out.emplace_back(idx.parent_edge[v], acc[v]);
    acc[p] += acc[v];
  }
  std::sort(out.begin(), out.end());
  return out;
}

struct FlowEntry {
  EdgeId edge;
  double value;
};

/// h(e) = mu(gamma_e) - nu(gamma_e) over the active edge set.
struct EdgeFlow {
  std::vector<FlowEntry> entries;
  std::uint64_t tag = 0;

  bool empty() const noexcept { return entries.empty(); }
};

inline constexpr double kFlowDropThreshold = 1e-15;

/// Difference of two precomputed subtree-mass maps.
inline EdgeFlow edge_flow_from_masses(std::uint64_t tag, const EdgeMap& a, const EdgeMap& b) {
  EdgeFlow flow;
  flow.tag = tag;
  flow.entries.reserve(std::max(a.size(), b.size()));
  auto push = [&](EdgeId e, double h) {
    if (std::abs(h) >= kFlowDropThreshold) flow.entries.push_back({e, h});
  };
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
      push(a[i].first, a[i].second);
      ++i;
    } else if (i == a.size() || b[j].first < a[i].first) {
      push(b[j].first, -b[j].second);
      ++j;
    } else {
      push(a[i].first, a[i].second - b[j].second);
      ++i;
      ++j;
    }
  }
  return flow;
}

inline EdgeFlow edge_flow(const RootedIndex& idx, const Measure& mu, const Measure& nu) {
  return edge_flow_from_masses(idx.tag, subtree_masses(idx, mu), subtree_masses(idx, nu));
}

/// Exact graph distances between the listed nodes (one Dijkstra per row).
inline DenseMatrix pairwise_distances(const Graph& g, std::span<const NodeId> nodes) {
  for (NodeId v : nodes)
    if (v >= g.node_count()) throw Error(Errc::invalid_node, "node " + std::to_string(v));
  DenseMatrix d(nodes.size(), nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto row = detail::dijkstra(g, nodes[i], nullptr, nullptr, nullptr);
    for (std::size_t j = 0; j < nodes.size(); ++j) d(i, j) = row[nodes[j]];
  }
  for (std::size_t i = 0; i < nodes.size(); ++i)
    for (std::size_t j = i + 1; j < nodes.size(); ++j) d(j, i) = d(i, j);
  return d;
}

/// Graph, shortest-path index and edge profile for one root, built together.
struct RootedGraph {
  Graph graph;
  RootedIndex index;
  EdgeProfile profile;
};

inline RootedGraph make_rooted(Graph g, NodeId root) {
  RootedGraph r;
  r.index = root_index(g, root);
  r.profile = edge_profiles(g, r.index);
  r.graph = std::move(g);
  return r;
}

}  // namespace gsim
