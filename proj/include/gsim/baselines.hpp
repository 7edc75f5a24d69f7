#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>
#include <vector>

#include "gsim/amemiya.hpp"
#include "gsim/error.hpp"
#include "gsim/graph.hpp"
#include "gsim/gsim.hpp"
#include "gsim/nfunc.hpp"

namespace gsim {

/// Sobolev transport of order p: (sum_e w_e |h(e)|^p)^(1/p).
inline double st_distance(const EdgeProfile& prof, const EdgeFlow& flow, double p) {
  if (!(p >= 1.0)) throw Error(Errc::invalid_argument, "Sobolev transport needs p >= 1");
  detail::check_same_index(prof, flow);
  double s = 0.0;
  if (p == 1.0) {
    for (const auto& [e, h] : flow.entries) s += prof.weight[e] * std::abs(h);
    return s;
  }
  for (const auto& [e, h] : flow.entries) s += prof.weight[e] * std::pow(std::abs(h), p);
  return std::pow(s, 1.0 / p);
}

/// Generalized Sobolev transport: inf_k (1 + sum_e w_e Phi(k |h(e)|)) / k.
inline AmemiyaResult gst_distance(const EdgeProfile& prof, const EdgeFlow& flow,
                                  const NFunction& f, const AmemiyaOptions& opts = {}) {
  detail::check_same_index(prof, flow);
  if (flow.empty()) return {0.0, std::nullopt, 0, true};
  if (f.kind == NKind::linear) return {st_distance(prof, flow, 1.0), std::nullopt, 0, true};
  if (f.kind == NKind::power && !opts.force_optimizer) {
    if (f.scaled) return {st_distance(prof, flow, f.p), std::nullopt, 0, true};
    double s = 0.0;
    for (const auto& [e, h] : flow.entries) s += prof.weight[e] * std::pow(std::abs(h), f.p);
    return {detail::power_amemiya_minimum(1.0, f.p, s), std::nullopt, 0, true};
  }

  auto objective = [&](double k) -> std::optional<ObjectiveSample> {
    double m = 1.0, d1 = 0.0, d2 = 0.0;
    for (const auto& [e, h] : flow.entries) {
      const double habs = std::abs(h);
      const double x = k * habs;
      if (detail::peak_exponent(f, x, 1.0) > kExpLimit) return std::nullopt;
      const auto d = detail::phi_derivs(f, x);
      const double w = prof.weight[e];
      m += w * d.value;
      d1 += w * habs * d.d1;
      d2 += w * habs * habs * d.d2;
    }
    ObjectiveSample s{m / k, (d1 - m / k) / k, (d2 - 2.0 * (d1 - m / k) / k) / k};
    if (!std::isfinite(s.value) || !std::isfinite(s.d1) || !std::isfinite(s.d2))
      return std::nullopt;
    return s;
  };
  return minimize_amemiya(objective, opts, detail::k_hint(prof, flow));
}

/// Regularized p-order Sobolev IPM with weight 1 + lambda(Lambda(x)):
/// (sum_e |h(e)|^p * int_0^1 (1 + lambda(gamma_e) + w_e t)^(1-p) w_e dt)^(1/p).
inline double rsipm_distance(const EdgeProfile& prof, const EdgeFlow& flow, double p) {
  if (!(p > 1.0) || !std::isfinite(p))
    throw Error(Errc::invalid_argument, "regularized Sobolev IPM needs p > 1");
  detail::check_same_index(prof, flow);
  double s = 0.0;
  for (const auto& [e, h] : flow.entries)
    s += std::pow(std::abs(h), p) *
         power_segment_integral(p, 1.0 + prof.lambda_gamma[e], prof.weight[e]);
  return std::pow(s, 1.0 / p);
}

/// Spanning tree grown by a randomized traversal: repeatedly attach a
/// uniformly chosen frontier edge. Deterministic for a given seed.
inline Graph random_spanning_tree(const Graph& g, std::uint64_t seed) {
  const std::size_t n = g.node_count();
  std::mt19937_64 rng(seed);
  std::vector<char> in_tree(n, 0);
  std::vector<EdgeId> frontier;
  std::vector<EdgeId> kept;
  kept.reserve(n - 1);

  const NodeId start = static_cast<NodeId>(std::uniform_int_distribution<std::size_t>(0, n - 1)(rng));
  auto absorb = [&](NodeId v) {
    in_tree[v] = 1;
    for (const auto& arc : g.neighbors(v))
      if (!in_tree[arc.to]) frontier.push_back(arc.edge);
  };
  absorb(start);
  while (kept.size() + 1 < n) {
    if (frontier.empty()) throw Error(Errc::disconnected_graph, "graph is not connected");
    const std::size_t pick = std::uniform_int_distribution<std::size_t>(0, frontier.size() - 1)(rng);
    const EdgeId e = frontier[pick];
    frontier[pick] = frontier.back();
    frontier.pop_back();
    const Edge& edge = g.edge(e);
    const bool u_in = in_tree[edge.u], v_in = in_tree[edge.v];
    if (u_in && v_in) continue;
    kept.push_back(e);
    absorb(u_in ? edge.v : edge.u);
  }
  std::sort(kept.begin(), kept.end());
  std::vector<Edge> edges;
  edges.reserve(kept.size());
  for (EdgeId e : kept) edges.push_back(g.edge(e));
  return build_graph(n, std::move(edges), g.coords());
}

inline bool is_tree(const Graph& g) noexcept { return g.edge_count() + 1 == g.node_count(); }

/// Tree-Wasserstein distance: sum_e w_e |h(e)| on a tree.
inline double tree_wasserstein(const Graph& tree, const EdgeProfile& prof, const EdgeFlow& flow) {
  if (!is_tree(tree)) throw Error(Errc::not_a_tree, "graph has a cycle");
  if (prof.weight.size() != tree.edge_count())
    throw Error(Errc::mismatched_index, "profile was not built on this tree");
  return st_distance(prof, flow, 1.0);
}

}  // namespace gsim
