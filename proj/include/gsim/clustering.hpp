#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <unordered_set>
#include <vector>

#include "gsim/error.hpp"
#include "gsim/graph.hpp"

namespace gsim {

using Point = std::vector<double>;

inline double euclidean(const Point& a, const Point& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

struct Clustering {
  std::vector<std::size_t> centroids;   // indices into the point list, in pick order
  std::vector<std::size_t> assignment;  // per point: position in `centroids`
};

/// Greedy k-center: the first centroid is drawn from `seed`, each next one is
/// the point farthest from the chosen set (ties go to the lower index).
/// Stops early once every remaining point coincides with a centroid.
inline Clustering farthest_point_clustering(const std::vector<Point>& points, std::size_t count,
                                            std::uint64_t seed) {
  if (points.empty()) throw Error(Errc::empty_input, "no points to cluster");
  if (count == 0) throw Error(Errc::invalid_argument, "need at least one centroid");
  const std::size_t n = points.size();
  std::mt19937_64 rng(seed);
  Clustering out;
  out.assignment.assign(n, 0);
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());

  std::size_t next = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
  while (out.centroids.size() < count) {
    const std::size_t slot = out.centroids.size();
    out.centroids.push_back(next);
    for (std::size_t i = 0; i < n; ++i) {
      const double d = euclidean(points[i], points[next]);
      if (d < nearest[i]) {
        nearest[i] = d;
        out.assignment[i] = slot;
      }
    }
    const auto far = std::max_element(nearest.begin(), nearest.end());
    if (*far <= 0.0) break;
    next = static_cast<std::size_t>(far - nearest.begin());
  }
  return out;
}

enum class EdgeBudget { log, sqrt };

/// Number of edges sampled before the connectivity repair.
inline std::size_t sampled_edge_count(std::size_t m, EdgeBudget mode) {
  const double md = static_cast<double>(m);
  const double raw = mode == EdgeBudget::log ? md * std::log(md) : md * std::sqrt(md);
  const std::size_t all = m * (m - 1) / 2;
  return std::min(all, static_cast<std::size_t>(std::ceil(raw)));
}

struct RandomGraph {
  Graph graph;
  std::size_t sampled_edges = 0;
  std::size_t bridging_edges = 0;
};

namespace detail {

// Joins the connected components of (points, edges): the components are
// shuffled and each one after the first gets an edge between a random member
// and a random member of a random earlier component. Returns the count added.
inline std::size_t bridge_components(const std::vector<Point>& points, std::vector<Edge>& edges,
                                     std::mt19937_64& rng) {
  const std::size_t m = points.size();
  std::vector<NodeId> uf(m);
  std::iota(uf.begin(), uf.end(), NodeId{0});
  auto find = [&](NodeId x) {
    while (uf[x] != x) x = uf[x] = uf[uf[x]];
    return x;
  };
  for (const Edge& e : edges) uf[find(e.u)] = find(e.v);

  std::vector<std::vector<NodeId>> components;
  std::vector<std::size_t> slot(m, SIZE_MAX);
  for (NodeId v = 0; v < m; ++v) {
    const NodeId root = find(v);
    if (slot[root] == SIZE_MAX) {
      slot[root] = components.size();
      components.emplace_back();
    }
    components[slot[root]].push_back(v);
  }
  std::shuffle(components.begin(), components.end(), rng);
  for (std::size_t c = 1; c < components.size(); ++c) {
    const auto& here = components[c];
    const auto& there = components[std::uniform_int_distribution<std::size_t>(0, c - 1)(rng)];
    const NodeId a = here[std::uniform_int_distribution<std::size_t>(0, here.size() - 1)(rng)];
    const NodeId b = there[std::uniform_int_distribution<std::size_t>(0, there.size() - 1)(rng)];
    edges.push_back({std::min(a, b), std::max(a, b), euclidean(points[a], points[b])});
  }
  return components.empty() ? 0 : components.size() - 1;
}

}  // namespace detail

/// Random graph over `centroids`: uniformly sampled distinct node pairs (see
/// sampled_edge_count) with Euclidean lengths, then one random bridge per
/// extra connected component.
inline RandomGraph build_random_graph(const std::vector<Point>& centroids, EdgeBudget mode,
                                      std::uint64_t seed) {
  const std::size_t m = centroids.size();
  if (m < 2) throw Error(Errc::invalid_argument, "random graph needs at least two centroids");
  std::mt19937_64 rng(seed);
  const std::size_t all = m * (m - 1) / 2;
  const std::size_t want = sampled_edge_count(m, mode);

  // Floyd's sampling of `want` distinct pair indices in [0, all).
  std::unordered_set<std::size_t> chosen;
  chosen.reserve(want * 2);
  for (std::size_t j = all - want; j < all; ++j) {
    const std::size_t t = std::uniform_int_distribution<std::size_t>(0, j)(rng);
    if (!chosen.insert(t).second) chosen.insert(j);
  }
  std::vector<std::size_t> picks(chosen.begin(), chosen.end());
  std::sort(picks.begin(), picks.end());

  // Pair index r enumerates (i, j), i < j, row by row.
  std::vector<std::size_t> row_start(m, 0);
  for (std::size_t i = 1; i < m; ++i) row_start[i] = row_start[i - 1] + (m - i);
  std::vector<Edge> edges;
  edges.reserve(picks.size() + 16);
  for (std::size_t r : picks) {
    const auto it = std::upper_bound(row_start.begin(), row_start.end(), r);
    const std::size_t i = static_cast<std::size_t>(it - row_start.begin()) - 1;
    const std::size_t j = i + 1 + (r - row_start[i]);
    edges.push_back({static_cast<NodeId>(i), static_cast<NodeId>(j),
                     euclidean(centroids[i], centroids[j])});
  }

  const std::size_t bridges = detail::bridge_components(centroids, edges, rng);

  RandomGraph out;
  out.sampled_edges = picks.size();
  out.bridging_edges = bridges;
  out.graph = build_graph(m, std::move(edges), centroids);
  return out;
}

}  // namespace gsim
