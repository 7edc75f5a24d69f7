#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "gsim/amemiya.hpp"
#include "gsim/error.hpp"
#include "gsim/graph.hpp"
#include "gsim/nfunc.hpp"

namespace gsim {

namespace detail {

inline void check_same_index(const EdgeProfile& prof, const EdgeFlow& flow) {
  if (prof.tag != flow.tag)
    throw Error(Errc::mismatched_index, "edge profile and edge flow come from different indexes");
}

// 1/k scale at which k|h| is of order one.
inline double k_hint(const EdgeProfile& prof, const EdgeFlow& flow) noexcept {
  double s = 0.0;
  for (const auto& [e, h] : flow.entries) s += prof.weight[e] * std::abs(h);
  return s > 0.0 ? 1.0 / s : 1.0;
}

// Minimum of (1 + c k^p S) / k over k > 0.
inline double power_amemiya_minimum(double c, double p, double s) noexcept {
  return p / (p - 1.0) * std::pow(c * (p - 1.0) * s, 1.0 / p);
}

}  // namespace detail

/// Generalized Sobolev IPM with Musielak regularization between the two
/// measures behind `flow`.
///
/// The limit kind and power kinds use closed forms. Everything else minimizes
/// F(k) = (1 + sum_e A(e, k)) / k where A(e, k) is the per-edge integral.
inline AmemiyaResult gsim_distance(const EdgeProfile& prof, const EdgeFlow& flow,
                                   const NFunction& f, const AmemiyaOptions& opts = {}) {
  detail::check_same_index(prof, flow);
  if (flow.empty()) return {0.0, std::nullopt, 0, true};

  if (f.kind == NKind::linear) {
    double s = 0.0;
    for (const auto& [e, h] : flow.entries) s += prof.weight[e] * std::abs(h);
    return {s, std::nullopt, 0, true};
  }
  if (f.kind == NKind::power && !opts.force_optimizer) {
    double s = 0.0;
    for (const auto& [e, h] : flow.entries)
      s += beta_e(f.p, geometry(prof, e)) * std::pow(std::abs(h), f.p);
    const double d = f.scaled ? std::pow(s, 1.0 / f.p)
                              : detail::power_amemiya_minimum(1.0, f.p, s);
    return {d, std::nullopt, 0, true};
  }

  struct Term {
    EdgeGeometry geom;
    double habs;
  };
  std::vector<Term> terms;
  terms.reserve(flow.entries.size());
  for (const auto& [e, h] : flow.entries) terms.push_back({geometry(prof, e), std::abs(h)});

  auto objective = [&](double k) -> std::optional<ObjectiveSample> {
    EdgeTerms sum;
    for (const Term& t : terms) {
      const auto a = edge_terms(f, t.geom, t.habs, k);
      if (!a) return std::nullopt;
      sum.value += a->value;
      sum.d1 += a->d1;
      sum.d2 += a->d2;
    }
    const double m = 1.0 + sum.value;
    ObjectiveSample s{m / k, (sum.d1 - m / k) / k, (sum.d2 - 2.0 * (sum.d1 - m / k) / k) / k};
    if (!std::isfinite(s.value) || !std::isfinite(s.d1) || !std::isfinite(s.d2))
      return std::nullopt;
    return s;
  };
  return minimize_amemiya(objective, opts, detail::k_hint(prof, flow));
}

}  // namespace gsim
