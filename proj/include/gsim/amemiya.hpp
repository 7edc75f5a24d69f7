#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "gsim/error.hpp"

namespace gsim {

struct AmemiyaOptions {
  double tol = 1e-10;
  int max_iter = 200;
  /// Skip closed forms and run the univariate minimizer (testing aid).
  bool force_optimizer = false;
};

/// F(k) together with F'(k) and F''(k).
struct ObjectiveSample {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

struct AmemiyaResult {
  double distance = 0.0;
  std::optional<double> k_star;
  int iterations = 0;
  bool converged = true;
};

/// Minimizes F(k) = (1 + M(k)) / k over k > 0 for a convex modular M.
///
/// Such an F is convex in 1/k, so the sign of F' splits the half line into a
/// decreasing and an increasing part. The search expands geometrically from
/// `k_hint` until F' changes sign (or the objective overflows, which counts as
/// +infinity), then runs Newton steps in log k, falling back to bisection of the
/// log-bracket whenever a step leaves the bracket or stalls.
///
/// `objective(k)` returns std::nullopt when F is not representable at k.
template <class Objective>
AmemiyaResult minimize_amemiya(Objective&& objective, const AmemiyaOptions& opts,
                               double k_hint = 1.0) {
  constexpr double kLowest = 1e-30;
  constexpr double kHighest = 1e30;
  constexpr double kGrow = 4.0;

  AmemiyaResult res;
  res.converged = false;
  if (!(k_hint > 0.0) || !std::isfinite(k_hint)) k_hint = 1.0;
  k_hint = std::clamp(k_hint, 1e-6, 1e6);

  int evals = 0;
  auto eval = [&](double k) {
    ++evals;
    return objective(k);
  };
  auto gradient_small = [&](const ObjectiveSample& s) {
    return std::abs(s.d1) <= opts.tol * std::max(1.0, std::abs(s.value));
  };

  double best_k = std::numeric_limits<double>::quiet_NaN();
  double best_f = std::numeric_limits<double>::infinity();
  auto record = [&](double k, const ObjectiveSample& s) {
    if (s.value < best_f) {
      best_f = s.value;
      best_k = k;
    }
  };
  auto finish = [&](bool converged) {
    res.distance = best_f;
    res.k_star = best_k;
    res.iterations = evals;
    res.converged = converged;
    return res;
  };

  // Find a finite starting point.
  double k = k_hint;
  std::optional<ObjectiveSample> s = eval(k);
  while (!s) {
    k /= kGrow;
    if (k < kLowest) throw Error(Errc::no_finite_bracket, "objective overflows at every probe");
    s = eval(k);
  }
  record(k, *s);
  if (gradient_small(*s)) return finish(true);

  // Bracket [lo, hi] in log space: F' <= 0 at lo, F' >= 0 (or overflow) at hi.
  double lo, hi;
  ObjectiveSample cur = *s;
  if (cur.d1 > 0.0) {
    hi = k;
    double probe = k;
    for (;;) {
      probe /= kGrow;
      if (probe < kLowest) return finish(false);
      auto ps = eval(probe);
      if (!ps) {
        hi = probe;  // cannot happen for sane objectives; keep shrinking
        continue;
      }
      record(probe, *ps);
      if (ps->d1 <= 0.0) {
        lo = probe;
        break;
      }
      hi = probe;
      k = probe;
      cur = *ps;
    }
  } else {
    lo = k;
    double probe = k;
    for (;;) {
      probe *= kGrow;
      if (probe > kHighest) return finish(false);
      auto ps = eval(probe);
      if (!ps) {
        hi = probe;
        break;
      }
      record(probe, *ps);
      if (ps->d1 >= 0.0) {
        hi = probe;
        break;
      }
      lo = probe;
      k = probe;
      cur = *ps;
    }
  }

  double xlo = std::log(lo);
  double xhi = std::log(hi);
  double x = std::log(k);
  double last_step = xhi - xlo;
  double step = last_step;

  while (evals < opts.max_iter) {
    if (xhi - xlo <= opts.tol) return finish(true);

    // Newton in x = log k: dF/dx = k F', d2F/dx2 = k F' + k^2 F''.
    const double kk = std::exp(x);
    const double g = kk * cur.d1;
    const double h = kk * cur.d1 + kk * kk * cur.d2;
    double xn = std::numeric_limits<double>::quiet_NaN();
    if (h > 0.0) xn = x - g / h;
    const bool newton_ok = std::isfinite(xn) && xn > xlo && xn < xhi &&
                           std::abs(xn - x) <= 0.5 * std::abs(last_step);
    last_step = step;
    if (newton_ok) {
      step = xn - x;
    } else {
      xn = 0.5 * (xlo + xhi);
      step = xn - x;
      last_step = xhi - xlo;
    }
    if (xn == x) return finish(true);

    auto ns = eval(std::exp(xn));
    if (!ns) {
      xhi = xn;
      continue;
    }
    record(std::exp(xn), *ns);
    x = xn;
    cur = *ns;
    if (gradient_small(cur)) return finish(true);
    if (cur.d1 < 0.0)
      xlo = x;
    else
      xhi = x;
  }
  return finish(false);
}

}  // namespace gsim
