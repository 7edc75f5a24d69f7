#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "gsim/error.hpp"
#include "gsim/graph.hpp"
#include "gsim/matrix.hpp"
#include "gsim/nfunc.hpp"

namespace gsim {

/// Coupling between the supports of two measures (rows: first measure).
struct TransportPlan {
  DenseMatrix coupling;
};

struct TransportResult {
  double value = 0.0;
  TransportPlan plan;
  int pivots = 0;
};

namespace detail {

// Transportation simplex (the network simplex specialised to a complete
// bipartite graph). Basis cells form a spanning tree over the m row nodes and
// n column nodes (column j is tree node m + j).
class TransportationSimplex {
 public:
  TransportationSimplex(const DenseMatrix& cost, std::span<const double> supply,
                        std::span<const double> demand)
      : cost_(cost), m_(supply.size()), n_(demand.size()), basic_(m_ * n_, 0) {
    north_west_corner(supply, demand);
  }

  TransportResult solve() {
    double cmax = 0.0;
    for (double c : cost_.data()) cmax = std::max(cmax, std::abs(c));
    const double eps = 1e-12 * std::max(1.0, cmax);
    const std::size_t cap = 200 * (m_ + n_) * (m_ + n_) + 1000;

    int degenerate_streak = 0;
    TransportResult out;
    for (std::size_t iter = 0;; ++iter) {
      if (iter > cap) throw Error(Errc::non_convergence, "transportation simplex cycled");
      build_adjacency();
      compute_potentials();
      const bool bland = degenerate_streak > 50;
      auto entering = pick_entering(eps, bland);
      if (!entering) break;
      const double theta = pivot(entering->first, entering->second, bland);
      degenerate_streak = theta == 0.0 ? degenerate_streak + 1 : 0;
      ++out.pivots;
    }

    out.plan.coupling = DenseMatrix(m_, n_);
    for (const Cell& c : cells_) {
      out.plan.coupling(c.i, c.j) += c.flow;
      out.value += c.flow * cost_(c.i, c.j);
    }
    return out;
  }

 private:
  struct Cell {
    std::size_t i;
    std::size_t j;
    double flow;
  };

  void north_west_corner(std::span<const double> supply, std::span<const double> demand) {
    std::vector<double> s(supply.begin(), supply.end());
    std::vector<double> d(demand.begin(), demand.end());
    std::size_t i = 0, j = 0;
    for (;;) {
      const double x = std::min(s[i], d[j]);
      add_cell(i, j, x);
      s[i] -= x;
      d[j] -= x;
      if (i + 1 == m_ && j + 1 == n_) break;
      if (j + 1 == n_ || (i + 1 < m_ && s[i] <= d[j]))
        ++i;
      else
        ++j;
    }
    // Mass left by rounding lands on the last cell.
    cells_.back().flow += std::max(0.0, std::min(s[m_ - 1], d[n_ - 1]));
  }

  void add_cell(std::size_t i, std::size_t j, double flow) {
    cells_.push_back({i, j, flow});
    basic_[i * n_ + j] = 1;
  }

  void build_adjacency() {
    adj_.assign(m_ + n_, {});
    for (std::size_t c = 0; c < cells_.size(); ++c) {
      adj_[cells_[c].i].push_back(c);
      adj_[m_ + cells_[c].j].push_back(c);
    }
  }

  std::size_t other_end(std::size_t cell, std::size_t node) const {
    const Cell& c = cells_[cell];
    return node == c.i ? m_ + c.j : c.i;
  }

  void compute_potentials() {
    pot_.assign(m_ + n_, 0.0);
    std::vector<char> seen(m_ + n_, 0);
    std::vector<std::size_t> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      const std::size_t v = stack.back();
      stack.pop_back();
      for (std::size_t c : adj_[v]) {
        const std::size_t w = other_end(c, v);
        if (seen[w]) continue;
        seen[w] = 1;
        pot_[w] = cost_(cells_[c].i, cells_[c].j) - pot_[v];
        stack.push_back(w);
      }
    }
  }

  std::optional<std::pair<std::size_t, std::size_t>> pick_entering(double eps, bool bland) const {
    double best = -eps;
    std::optional<std::pair<std::size_t, std::size_t>> pick;
    for (std::size_t i = 0; i < m_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) {
        if (basic_[i * n_ + j]) continue;
        const double r = cost_(i, j) - pot_[i] - pot_[m_ + j];
        if (r < best) {
          pick = {i, j};
          if (bland) return pick;
          best = r;
        }
      }
    }
    return pick;
  }

  // Returns the amount shifted around the cycle.
  double pivot(std::size_t ei, std::size_t ej, bool bland) {
    // Tree path from row node ei to column node m + ej.
    std::vector<std::size_t> via(m_ + n_, SIZE_MAX);
    std::vector<char> seen(m_ + n_, 0);
    std::vector<std::size_t> stack{ei};
    seen[ei] = 1;
    const std::size_t target = m_ + ej;
    while (!stack.empty() && !seen[target]) {
      const std::size_t v = stack.back();
      stack.pop_back();
      for (std::size_t c : adj_[v]) {
        const std::size_t w = other_end(c, v);
        if (seen[w]) continue;
        seen[w] = 1;
        via[w] = c;
        stack.push_back(w);
      }
    }
    // Walking back from the column node, cells alternate -, +, -, ...
    std::vector<std::size_t> path;
    for (std::size_t v = target; v != ei;) {
      const std::size_t c = via[v];
      path.push_back(c);
      v = other_end(c, v);
    }
    double theta = std::numeric_limits<double>::infinity();
    std::size_t leave = SIZE_MAX;
    for (std::size_t k = 0; k < path.size(); k += 2) {
      const Cell& c = cells_[path[k]];
      const bool better = c.flow < theta ||
                          (bland && c.flow == theta &&
                           c.i * n_ + c.j < cells_[leave].i * n_ + cells_[leave].j);
      if (better) {
        theta = c.flow;
        leave = path[k];
      }
    }
    for (std::size_t k = 0; k < path.size(); ++k) {
      Cell& c = cells_[path[k]];
      c.flow += (k % 2 == 0) ? -theta : theta;
      if (c.flow < 0.0) c.flow = 0.0;
    }
    Cell& out = cells_[leave];
    basic_[out.i * n_ + out.j] = 0;
    out = {ei, ej, theta};
    basic_[ei * n_ + ej] = 1;
    return theta;
  }

  const DenseMatrix& cost_;
  std::size_t m_;
  std::size_t n_;
  std::vector<char> basic_;
  std::vector<Cell> cells_;
  std::vector<std::vector<std::size_t>> adj_;
  std::vector<double> pot_;
};

}  // namespace detail

/// Exact minimum of sum_ij pi_ij c_ij over couplings of `supply` and `demand`.
inline TransportResult w1_oracle(const DenseMatrix& cost, std::span<const double> supply,
                                 std::span<const double> demand) {
  if (supply.empty() || demand.empty())
    throw Error(Errc::empty_input, "transport needs nonempty supports");
  if (cost.rows() != supply.size() || cost.cols() != demand.size())
    throw Error(Errc::invalid_argument, "cost matrix shape does not match supports");
  const double sa = std::accumulate(supply.begin(), supply.end(), 0.0);
  const double sb = std::accumulate(demand.begin(), demand.end(), 0.0);
  if (std::abs(sa - sb) > 1e-10)
    throw Error(Errc::infeasible, "supply and demand differ by " + std::to_string(sa - sb));
  for (double x : supply)
    if (!(x >= 0.0)) throw Error(Errc::infeasible, "negative supply");
  for (double x : demand)
    if (!(x >= 0.0)) throw Error(Errc::infeasible, "negative demand");
  return detail::TransportationSimplex(cost, supply, demand).solve();
}

/// Graph-metric cost matrix between the supports of two measures.
inline DenseMatrix support_cost(const Graph& g, const Measure& mu, const Measure& nu) {
  std::vector<NodeId> nodes(mu.nodes);
  nodes.insert(nodes.end(), nu.nodes.begin(), nu.nodes.end());
  const DenseMatrix all = pairwise_distances(g, nodes);
  DenseMatrix c(mu.size(), nu.size());
  for (std::size_t i = 0; i < mu.size(); ++i)
    for (std::size_t j = 0; j < nu.size(); ++j) c(i, j) = all(i, mu.size() + j);
  return c;
}

struct OrliczResult {
  double value = 0.0;
  /// (t, min_pi sum pi Phi(c / t)) for every scale probed.
  std::vector<std::pair<double, double>> trace;
};

namespace detail {

// Phi^{-1}(1) by bisection.
inline double phi_inverse_one(const NFunction& f) {
  double lo = 0.0, hi = 1.0;
  while (phi_value(f, hi) < 1.0) hi *= 2.0;
  for (int i = 0; i < 200 && hi - lo > 1e-16 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (phi_value(f, mid) < 1.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Costs above this are clipped; any coupling putting more than 1e-8 mass on
// such a cell is infeasible either way.
inline constexpr double kOrliczCostCap = 1e8;

}  // namespace detail

/// Orlicz-Wasserstein: the smallest t with min_pi sum pi_ij Phi(c_ij / t) <= 1,
/// found by bisection on t with an exact transport solve at every probe.
inline OrliczResult ow_oracle(const DenseMatrix& cost, std::span<const double> supply,
                              std::span<const double> demand, const NFunction& f) {
  OrliczResult out;
  const TransportResult w1 = w1_oracle(cost, supply, demand);
  if (f.kind == NKind::linear) {
    out.value = w1.value;
    return out;
  }
  double cmax = 0.0;
  for (double c : cost.data()) cmax = std::max(cmax, c);
  if (w1.value <= 0.0 || cmax <= 0.0) return out;

  DenseMatrix scaled(cost.rows(), cost.cols());
  auto modular = [&](double t) {
    for (std::size_t i = 0; i < cost.rows(); ++i)
      for (std::size_t j = 0; j < cost.cols(); ++j) {
        const double x = cost(i, j) / t;
        const double ex = detail::peak_exponent(f, x, 1.0);
        scaled(i, j) = ex > kExpLimit ? detail::kOrliczCostCap
                                      : std::min(phi_value(f, x), detail::kOrliczCostCap);
      }
    const double g = w1_oracle(scaled, supply, demand).value;
    out.trace.emplace_back(t, g);
    return g;
  };

  // Jensen bounds the answer below by W1 / s; the worst coupling bounds it
  // above by max c / s, with s = Phi^{-1}(1).
  const double s = detail::phi_inverse_one(f);
  double lo = w1.value / s;
  double hi = cmax / s;
  while (modular(hi) > 1.0) hi *= 2.0;
  while (lo > 0.0 && modular(lo) <= 1.0) {
    hi = lo;
    lo *= 0.5;
  }
  while (hi - lo > 1e-8 * hi) {
    const double mid = 0.5 * (lo + hi);
    (modular(mid) <= 1.0 ? hi : lo) = mid;
  }
  out.value = hi;
  return out;
}

}  // namespace gsim
