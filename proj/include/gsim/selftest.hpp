#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gsim/baselines.hpp"
#include "gsim/graph.hpp"
#include "gsim/gram.hpp"
#include "gsim/gsim.hpp"
#include "gsim/nfunc.hpp"
#include "gsim/transport.hpp"

namespace gsim {

/// Outcome of one property suite.
struct PropertyResult {
  std::string name;
  bool passed = true;
  std::size_t checks = 0;
  std::string first_failure;
};

namespace selftest {

class Suite {
 public:
  explicit Suite(std::string name) { res_.name = std::move(name); }

  void check(bool ok, const std::function<std::string()>& what) {
    ++res_.checks;
    if (!ok && res_.passed) {
      res_.passed = false;
      res_.first_failure = what();
    }
  }

  PropertyResult result() && { return std::move(res_); }

 private:
  PropertyResult res_;
};

inline Graph random_graph(std::mt19937_64& rng, std::size_t n, std::size_t extra) {
  std::uniform_real_distribution<double> w(0.1, 2.0);
  std::set<std::pair<NodeId, NodeId>> seen;
  std::vector<Edge> edges;
  for (NodeId v = 1; v < n; ++v) {
    const auto u = static_cast<NodeId>(std::uniform_int_distribution<std::size_t>(0, v - 1)(rng));
    seen.insert({u, v});
    edges.push_back({u, v, w(rng)});
  }
  extra = std::min(extra, n * (n - 1) / 2 - edges.size());
  std::uniform_int_distribution<std::size_t> node(0, n - 1);
  while (extra > 0) {
    auto a = static_cast<NodeId>(node(rng)), b = static_cast<NodeId>(node(rng));
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    if (!seen.insert({a, b}).second) continue;
    edges.push_back({a, b, w(rng)});
    --extra;
  }
  return build_graph(n, std::move(edges));
}

inline Measure random_measure(std::mt19937_64& rng, std::size_t n, std::size_t max_support) {
  const std::size_t k = std::uniform_int_distribution<std::size_t>(1, std::min(n, max_support))(rng);
  std::vector<NodeId> nodes(n);
  for (NodeId v = 0; v < n; ++v) nodes[v] = v;
  std::shuffle(nodes.begin(), nodes.end(), rng);
  std::uniform_real_distribution<double> mass(0.05, 1.0);
  std::vector<std::pair<NodeId, double>> support;
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    support.emplace_back(nodes[i], mass(rng));
    total += support.back().second;
  }
  for (auto& s : support) s.second /= total;
  return make_measure(std::move(support));
}

inline std::vector<RootedGraph> random_graphs(std::mt19937_64& rng, std::size_t count) {
  std::vector<RootedGraph> out;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(8, 64)(rng);
    Graph g = random_graph(rng, n, std::uniform_int_distribution<std::size_t>(0, 2 * n)(rng));
    const auto root = static_cast<NodeId>(std::uniform_int_distribution<std::size_t>(0, n - 1)(rng));
    out.push_back(make_rooted(std::move(g), root));
  }
  return out;
}

inline std::vector<NFunction> kinds() {
  return {NFunction::linear(), NFunction::exp_linear(), NFunction::exp_square(),
          NFunction::scaled_power(1.5), NFunction::scaled_power(2.0), NFunction::scaled_power(3.0)};
}

inline std::string str(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

inline PropertyResult index_suite(const std::vector<RootedGraph>& graphs) {
  Suite s("rooted-index");
  for (const auto& rg : graphs) {
    const auto& g = rg.graph;
    const auto& idx = rg.index;
    const auto& prof = rg.profile;
    // Tight parent edges plus no violated edge certify shortest-path distances.
    for (const auto& e : g.edges())
      s.check(std::abs(idx.dist[e.u] - idx.dist[e.v]) <= e.length * (1 + 1e-12),
              [&] { return "edge " + std::to_string(e.u) + "-" + std::to_string(e.v) + " shortens a distance"; });
    s.check(idx.dist[idx.root] == 0.0, [] { return "dist[root] != 0"; });
    for (NodeId v = 0; v < g.node_count(); ++v) {
      if (v == idx.root) continue;
      const EdgeId e = idx.parent_edge[v];
      s.check(std::abs(idx.dist[v] - idx.dist[idx.parent[v]] - g.edge(e).length) <= 1e-12 * (1 + idx.dist[v]),
              [&] { return "parent edge of " + std::to_string(v) + " is not on a shortest path"; });
      s.check(prof.lambda_gamma[e] >= 0.0 && prof.lambda_gamma[e] <= prof.lambda_total - prof.weight[e] + 1e-12,
              [&] { return "lambda(gamma) out of range on edge " + std::to_string(e); });
      const NodeId p = idx.parent[v];
      if (p != idx.root) {
        const EdgeId pe = idx.parent_edge[p];
        s.check(prof.lambda_gamma[pe] + 1e-12 >= prof.lambda_gamma[e] + prof.weight[e],
                [&] { return "lambda(gamma) not nested along edge " + std::to_string(e); });
      }
    }
    double total = 0.0;
    for (const auto& e : g.edges()) total += e.length;
    s.check(std::abs(total - prof.lambda_total) <= 1e-12 * total, [] { return "lambda(G) != sum of lengths"; });
  }
  return std::move(s).result();
}

inline PropertyResult flow_suite(const std::vector<RootedGraph>& graphs, std::mt19937_64& rng) {
  Suite s("edge-flow");
  for (const auto& rg : graphs) {
    const std::size_t n = rg.graph.node_count();
    for (int rep = 0; rep < 5; ++rep) {
      const auto mu = random_measure(rng, n, 6), nu = random_measure(rng, n, 6);
      const auto a = edge_flow(rg.index, mu, nu), b = edge_flow(rg.index, nu, mu);
      s.check(a.entries.size() == b.entries.size(), [] { return "flow support not symmetric"; });
      for (std::size_t i = 0; i < std::min(a.entries.size(), b.entries.size()); ++i) {
        s.check(a.entries[i].edge == b.entries[i].edge && a.entries[i].value == -b.entries[i].value,
                [] { return "flow(mu, nu) != -flow(nu, mu)"; });
        s.check(std::abs(a.entries[i].value) <= 1.0 + 1e-12, [] { return "|h| > 1"; });
        s.check(rg.profile.is_tree_edge(a.entries[i].edge), [] { return "flow on a non-tree edge"; });
      }
    }
  }
  return std::move(s).result();
}

inline PropertyResult nfunction_suite() {
  Suite s("n-functions");
  for (const auto& f : kinds()) {
    s.check(phi_value(f, 0.0) == 0.0, [&] { return f.descriptor() + ": Phi(0) != 0"; });
    const double top = f.kind == NKind::exp_square ? 20.0 : 50.0;
    double prev = 0.0, slope = -1.0;
    for (double t = 0.01; t <= top; t += 0.01) {
      const double v = phi_value(f, t);
      const double sl = (v - prev) / 0.01;
      s.check(v > prev, [&] { return f.descriptor() + ": not increasing at " + str(t); });
      s.check(sl >= slope * (1 - 1e-12), [&] { return f.descriptor() + ": not convex at " + str(t); });
      prev = v;
      slope = sl;
    }
  }
  for (double t = 0.0; t <= 50.0; t += 0.01)
    s.check(phi_value(NFunction::exp_linear(), t) <= phi_value(NFunction::exp_square(), t),
            [&] { return "e^t - t - 1 > e^(t^2) - 1 at " + str(t); });
  return std::move(s).result();
}

inline PropertyResult metric_suite(const std::vector<RootedGraph>& graphs, std::mt19937_64& rng) {
  Suite s("metric-axioms");
  for (const auto& f : kinds()) {
    for (std::size_t rep = 0; rep < 100; ++rep) {
      const auto& rg = graphs[rep % graphs.size()];
      const std::size_t n = rg.graph.node_count();
      const auto mu = random_measure(rng, n, 6), nu = random_measure(rng, n, 6),
                 sg = random_measure(rng, n, 6);
      auto d = [&](const Measure& a, const Measure& b) {
        return gsim_distance(rg.profile, edge_flow(rg.index, a, b), f).distance;
      };
      const double mn = d(mu, nu), nm = d(nu, mu), ms = d(mu, sg), sn = d(sg, nu);
      s.check(mn == nm, [&] { return f.descriptor() + ": asymmetric " + str(mn) + " vs " + str(nm); });
      s.check(d(mu, mu) == 0.0, [&] { return f.descriptor() + ": d(mu, mu) != 0"; });
      s.check(mn <= ms + sn + 1e-9, [&] {
        return f.descriptor() + ": triangle " + str(mn) + " > " + str(ms) + " + " + str(sn);
      });
      const NodeId u = static_cast<NodeId>(rep % n), v = static_cast<NodeId>((rep * 7 + 1) % n);
      if (u != v)
        s.check(d(dirac(u), dirac(v)) > 1e-12, [&] { return f.descriptor() + ": distinct Diracs at distance 0"; });
    }
  }
  return std::move(s).result();
}

inline PropertyResult baseline_suite(const std::vector<RootedGraph>& graphs, std::mt19937_64& rng) {
  Suite s("baselines-and-sandwiches");
  AmemiyaOptions forced;
  forced.force_optimizer = true;
  for (const auto& rg : graphs) {
    const std::size_t n = rg.graph.node_count();
    const auto flow = edge_flow(rg.index, random_measure(rng, n, 6), random_measure(rng, n, 6));
    const auto& prof = rg.profile;
    const double st1 = st_distance(prof, flow, 1.0);
    s.check(gsim_distance(prof, flow, NFunction::linear()).distance == st1 &&
                gst_distance(prof, flow, NFunction::linear()).distance == st1,
            [] { return "linear GSI-M, GST and ST_1 differ"; });
    for (double p : {1.5, 2.0, 3.0}) {
      const auto f = NFunction::scaled_power(p);
      const double stp = st_distance(prof, flow, p);
      const double closed = gsim_distance(prof, flow, f).distance;
      const double optim = gsim_distance(prof, flow, f, forced).distance;
      s.check(std::abs(closed - optim) <= 1e-6 * closed, [&] {
        return "p=" + str(p) + ": closed form " + str(closed) + " vs optimizer " + str(optim);
      });
      s.check(std::abs(gst_distance(prof, flow, f, forced).distance - stp) <= 1e-8 * stp,
              [&] { return "p=" + str(p) + ": GST != ST_p"; });
      s.check(0.5 * stp <= closed + 1e-12 && closed <= stp + 1e-9,
              [&] { return "p=" + str(p) + ": ST sandwich fails"; });
    }
    for (const auto& f : kinds()) {
      const double gst = gst_distance(prof, flow, f).distance;
      const double d = gsim_distance(prof, flow, f).distance;
      s.check(0.5 * gst <= d + 1e-12 && d <= gst + 1e-9,
              [&] { return f.descriptor() + ": GST sandwich fails"; });
    }
    const double e1 = gsim_distance(prof, flow, NFunction::exp_linear()).distance;
    const double e2 = gsim_distance(prof, flow, NFunction::exp_square()).distance;
    s.check(e1 <= e2 + 1e-9, [&] { return "monotonicity: " + str(e1) + " > " + str(e2); });
  }
  return std::move(s).result();
}

inline PropertyResult transport_suite(std::mt19937_64& rng) {
  Suite s("transport-oracles");
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t n = 2 + rep % 7;
    Graph tree = random_graph(rng, n, 0);
    const auto rg = make_rooted(tree, 0);
    const auto mu = random_measure(rng, n, 4), nu = random_measure(rng, n, 4);
    const auto cost = support_cost(tree, mu, nu);
    const auto w1 = w1_oracle(cost, mu.masses, nu.masses);
    double plan_cost = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < nu.size(); ++j) {
        row += w1.plan.coupling(i, j);
        plan_cost += w1.plan.coupling(i, j) * cost(i, j);
      }
      s.check(std::abs(row - mu.masses[i]) <= 1e-10, [] { return "plan row marginal off"; });
    }
    for (std::size_t j = 0; j < nu.size(); ++j) {
      double col = 0.0;
      for (std::size_t i = 0; i < mu.size(); ++i) col += w1.plan.coupling(i, j);
      s.check(std::abs(col - nu.masses[j]) <= 1e-10, [] { return "plan column marginal off"; });
    }
    s.check(std::abs(plan_cost - w1.value) <= 1e-12 * (1 + w1.value), [] { return "plan cost != value"; });
    const auto flow = edge_flow(rg.index, mu, nu);
    const double tw = tree_wasserstein(tree, rg.profile, flow);
    const double ow = ow_oracle(cost, mu.masses, nu.masses, NFunction::linear()).value;
    s.check(std::abs(tw - w1.value) <= 1e-8 * (1 + w1.value) && std::abs(ow - w1.value) <= 1e-8 * (1 + w1.value),
            [&] { return "tree-Wasserstein " + str(tw) + ", OW " + str(ow) + ", W1 " + str(w1.value); });
    const double d = gsim_distance(rg.profile, flow, NFunction::linear()).distance;
    s.check(0.5 * w1.value <= d + 1e-12 && d <= w1.value + 1e-9, [] { return "W1 sandwich fails"; });
  }
  return std::move(s).result();
}

inline PropertyResult gram_suite(const RootedGraph& rg, std::mt19937_64& rng) {
  Suite s("gram-pipeline");
  std::vector<Measure> ms;
  for (int i = 0; i < 12; ++i) ms.push_back(random_measure(rng, rg.graph.node_count(), 6));
  const auto one = gram_distances(rg.profile, rg.index, ms, NFunction::exp_linear(), 1);
  const auto four = gram_distances(rg.profile, rg.index, ms, NFunction::exp_linear(), 4);
  s.check(one.entries == four.entries, [] { return "gram depends on the thread count"; });
  const auto& d = one.entries;
  for (std::size_t i = 0; i < d.rows(); ++i)
    for (std::size_t j = 0; j < d.cols(); ++j) {
      s.check(d(i, j) == d(j, i), [] { return "gram not symmetric"; });
      for (std::size_t k = 0; k < d.cols(); ++k)
        s.check(d(i, j) <= d(i, k) + d(k, j) + 1e-9, [] { return "gram violates the triangle inequality"; });
    }
  std::vector<double> sample;
  for (std::size_t i = 0; i < d.rows(); ++i)
    for (std::size_t j = i + 1; j < d.cols(); ++j) sample.push_back(d(i, j));
  for (double t : quantile_bandwidths(sample)) {
    const auto k = kernel_matrix(d, t);
    for (double x : k.data()) s.check(x > 0.0 && x <= 1.0, [] { return "kernel entry outside (0, 1]"; });
    const auto reg = psd_regularize(k);
    s.check(min_eigenvalue(reg.matrix).value >= -1e-8, [] { return "regularized kernel not PSD"; });
  }
  return std::move(s).result();
}

}  // namespace selftest

/// Runs every property suite on seeded random instances plus `extra` graphs.
inline std::vector<PropertyResult> run_selftest(std::uint64_t seed,
                                                std::vector<RootedGraph> extra = {}) {
  std::mt19937_64 rng(seed);
  auto graphs = selftest::random_graphs(rng, 12);
  for (auto& g : extra) graphs.push_back(std::move(g));
  std::vector<PropertyResult> out;
  out.push_back(selftest::index_suite(graphs));
  out.push_back(selftest::flow_suite(graphs, rng));
  out.push_back(selftest::nfunction_suite());
  out.push_back(selftest::metric_suite(graphs, rng));
  out.push_back(selftest::baseline_suite(graphs, rng));
  out.push_back(selftest::transport_suite(rng));
  out.push_back(selftest::gram_suite(graphs.front(), rng));
  return out;
}

}  // namespace gsim
