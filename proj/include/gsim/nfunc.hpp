#pragma once

#include <charconv>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>

#include "gsim/error.hpp"
#include "gsim/graph.hpp"
#include "gsim/special.hpp"

namespace gsim {

enum class NKind {
  power,       // t^p, optionally with the (p-1)^(p-1)/p^p prefactor
  exp_linear,  // e^t - t - 1
  exp_square,  // e^(t^2) - 1
  linear,      // t (limit case)
};

/// One of the supported N-functions.
struct NFunction {
  NKind kind = NKind::linear;
  double p = 1.0;
  bool scaled = false;
  /// Evaluate per-edge integrals by Gauss-Legendre instead of closed forms.
  bool force_quadrature = false;

  static NFunction power(double p, bool scaled = false) {
    if (!(p > 1.0) || !std::isfinite(p))
      throw Error(Errc::invalid_argument, "power N-function needs finite p > 1");
    return {NKind::power, p, scaled, false};
  }
  static NFunction scaled_power(double p) { return power(p, true); }
  static NFunction exp_linear() { return {NKind::exp_linear, 1.0, false, false}; }
  static NFunction exp_square() { return {NKind::exp_square, 2.0, false, false}; }
  static NFunction linear() { return {NKind::linear, 1.0, false, false}; }

  NFunction with_quadrature(bool on = true) const {
    NFunction f = *this;
    f.force_quadrature = on;
    return f;
  }

  /// Multiplier c in c * t^p; 1 for every non-power kind.
  double prefactor() const noexcept {
    if (kind != NKind::power || !scaled) return 1.0;
    return std::pow(p - 1.0, p - 1.0) / std::pow(p, p);
  }

  /// Inverse of parse_nfunction.
  std::string descriptor() const {
    switch (kind) {
      case NKind::power: {
        std::ostringstream os;
        os.precision(17);
        os << (scaled ? "ps:" : "p:") << p;
        return os.str();
      }
      case NKind::exp_linear: return "exp";
      case NKind::exp_square: return "expsq";
      case NKind::linear: return "linear";
    }
    return "?";
  }
};

/// Parses `p:<float>`, `ps:<float>`, `exp`, `expsq` or `linear`.
inline NFunction parse_nfunction(std::string_view text) {
  if (text == "exp") return NFunction::exp_linear();
  if (text == "expsq") return NFunction::exp_square();
  if (text == "linear") return NFunction::linear();
  const bool scaled = text.starts_with("ps:");
  if (scaled || text.starts_with("p:")) {
    const std::string_view num = text.substr(scaled ? 3 : 2);
    double p = 0.0;
    const auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), p);
    if (ec != std::errc{} || ptr != num.data() + num.size() || num.empty())
      throw Error(Errc::parse_error, "bad exponent in N-function '" + std::string(text) + "'");
    return NFunction::power(p, scaled);
  }
  throw Error(Errc::parse_error, "unknown N-function '" + std::string(text) + "'");
}

namespace detail {

struct PhiDerivs {
  double value;
  double d1;
  double d2;
};

// e^x - x - 1 without cancellation near zero.
inline double exp_linear_phi(double x) noexcept {
  if (x >= 0.5) return std::expm1(x) - x;
  double term = 0.5 * x * x;
  double sum = term;
  for (int n = 3; n < 40; ++n) {
    term *= x / n;
    sum += term;
    if (term <= sum * 1e-17) break;
  }
  return sum;
}

inline PhiDerivs phi_derivs(const NFunction& f, double x) noexcept {
  switch (f.kind) {
    case NKind::linear: return {x, 1.0, 0.0};
    case NKind::power: {
      const double c = f.prefactor();
      if (x == 0.0) return {0.0, 0.0, f.p == 2.0 ? 2.0 * c : 0.0};
      const double xp2 = std::pow(x, f.p - 2.0);
      return {c * xp2 * x * x, c * f.p * xp2 * x, c * f.p * (f.p - 1.0) * xp2};
    }
    case NKind::exp_linear: {
      const double e = std::exp(x);
      return {exp_linear_phi(x), std::expm1(x), e};
    }
    case NKind::exp_square: {
      const double x2 = x * x;
      const double e = std::exp(x2);
      return {std::expm1(x2), 2.0 * x * e, (2.0 + 4.0 * x2) * e};
    }
  }
  return {0.0, 0.0, 0.0};
}

}  // namespace detail

/// Phi(t) for t >= 0.
inline double phi_value(const NFunction& f, double t) {
  if (!(t >= 0.0)) throw Error(Errc::negative_argument, "N-function argument must be >= 0");
  return detail::phi_derivs(f, t).value;
}

/// Phi'(t) for t >= 0.
inline double phi_derivative(const NFunction& f, double t) {
  if (!(t >= 0.0)) throw Error(Errc::negative_argument, "N-function argument must be >= 0");
  return detail::phi_derivs(f, t).d1;
}

/// Integral over s in [0, len] of (base + s)^(1-p), stable for small len/base
/// and across p = 2.
inline double power_segment_integral(double p, double base, double len) {
  const double r = std::log1p(len / base);
  const double q = 2.0 - p;
  // Near p = 2 expand base^q expm1(q r) / q to first order in q; the next
  // terms are O(q^2) and far below double precision here.
  if (std::abs(q) <= 1e-9) return r * (1.0 + q * (std::log(base) + 0.5 * r));
  return std::pow(base, q) * std::expm1(q * r) / q;
}

/// Closed-form weight of an edge for power N-functions:
/// the integral of (1 + lambda(Lambda(x)) / lambda(G))^(1-p) along the edge.
inline double beta_e(double p, const EdgeGeometry& e) {
  if (!(p > 1.0) || !std::isfinite(p)) throw Error(Errc::invalid_argument, "beta_e needs p > 1");
  const double lg = e.lambda_total;
  return std::pow(lg, p - 1.0) * power_segment_integral(p, lg + e.lambda_gamma, e.weight);
}

/// Value and first two k-derivatives of one per-edge integral.
struct EdgeTerms {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

/// Closed form for Phi(t) = e^t - t - 1 with beta = w_e, a = w_e / lambda(G),
/// b = 1 + lambda(gamma_e) / lambda(G), alpha = k |h|.
inline EdgeTerms exp_linear_closed_form(double beta, double a, double b, double alpha,
                                        double habs) {
  const double ab = a + b;
  const double x1 = alpha / ab;
  const double x0 = alpha / b;
  const double e1 = std::exp(x1);
  const double e0 = std::exp(x0);
  const double dei = detail::ei_unchecked(x1) - detail::ei_unchecked(x0);
  const double s = -alpha * alpha * dei + alpha * (ab * e1 - b * e0) + (ab * ab * e1 - b * b * e0) -
                   2.0 * alpha * a - (ab * ab - b * b);
  const double q = -alpha * dei + ab * e1 - b * e0 - a;
  return {beta / (2.0 * a) * s, beta * habs / a * q, -beta * habs * habs / a * dei};
}

/// Closed form for Phi(t) = e^(t^2) - 1; same parameters as above.
inline EdgeTerms exp_square_closed_form(double beta, double a, double b, double alpha,
                                        double habs) {
  const double ab = a + b;
  const double y1 = (alpha / ab) * (alpha / ab);
  const double y0 = (alpha / b) * (alpha / b);
  const double e1 = std::exp(y1);
  const double e0 = std::exp(y0);
  const double dei = detail::ei_unchecked(y1) - detail::ei_unchecked(y0);
  const double s = -alpha * alpha * dei + (ab * ab * e1 - b * b * e0) - (ab * ab - b * b);
  return {beta / (2.0 * a) * s, -beta * alpha * habs / a * dei,
          -beta * habs * habs / a * (dei + 2.0 * e1 - 2.0 * e0)};
}

inline constexpr std::size_t kQuadraturePoints = 32;

namespace detail {

// Largest tolerated cancellation factor before the closed forms give way to
// quadrature. The closed forms difference an antiderivative across an edge of
// relative width a/b, losing about log10((b/a) * max(1, (b/alpha)^2)) digits.
inline constexpr double kClosedFormMaxCondition = 1e3;

inline bool closed_form_well_conditioned(double a, double b, double alpha) noexcept {
  const double ratio = b / alpha;
  return (b / a) * std::max(1.0, ratio * ratio) <= kClosedFormMaxCondition;
}

inline EdgeTerms quadrature_terms(const NFunction& f, double beta, double a, double b,
                                  double alpha, double habs) noexcept {
  const auto& rule = gauss_legendre<kQuadraturePoints>();
  EdgeTerms acc;
  for (std::size_t i = 0; i < kQuadraturePoints; ++i) {
    const double u = a * rule.nodes[i] + b;
    const auto d = phi_derivs(f, alpha / u);
    acc.value += rule.weights[i] * u * d.value;
    acc.d1 += rule.weights[i] * d.d1;
    acc.d2 += rule.weights[i] * d.d2 / u;
  }
  return {beta * acc.value, beta * habs * acc.d1, beta * habs * habs * acc.d2};
}

// Largest exponent the integrand reaches on the edge.
inline double peak_exponent(const NFunction& f, double alpha, double b) noexcept {
  const double x = alpha / b;
  switch (f.kind) {
    case NKind::exp_linear: return x;
    case NKind::exp_square: return x * x;
    default: return 0.0;
  }
}

}  // namespace detail

/// Per-edge integral and its k-derivatives; nullopt when the integrand leaves
/// double range. Requires k > 0 and habs >= 0.
inline std::optional<EdgeTerms> edge_terms(const NFunction& f, const EdgeGeometry& e, double habs,
                                           double k) noexcept {
  if (habs == 0.0) return EdgeTerms{};
  const double alpha = k * habs;
  const double beta = e.weight;
  const double a = e.weight / e.lambda_total;
  const double b = 1.0 + e.lambda_gamma / e.lambda_total;
  EdgeTerms out;
  if (f.kind == NKind::linear && !f.force_quadrature) {
    out = {alpha * beta, habs * beta, 0.0};
  } else if (f.kind == NKind::power && !f.force_quadrature) {
    const double weight = f.prefactor() * beta_e(f.p, e);
    const double hp = std::pow(habs, f.p);
    const double kp2 = std::pow(k, f.p - 2.0);
    out = {weight * hp * kp2 * k * k, weight * hp * f.p * kp2 * k,
           weight * hp * f.p * (f.p - 1.0) * kp2};
  } else {
    if (detail::peak_exponent(f, alpha, b) > kExpLimit) return std::nullopt;
    const bool closed = !f.force_quadrature && detail::closed_form_well_conditioned(a, b, alpha);
    if (closed && f.kind == NKind::exp_linear)
      out = exp_linear_closed_form(beta, a, b, alpha, habs);
    else if (closed && f.kind == NKind::exp_square)
      out = exp_square_closed_form(beta, a, b, alpha, habs);
    else
      out = detail::quadrature_terms(f, beta, a, b, alpha, habs);
  }
  if (!std::isfinite(out.value) || !std::isfinite(out.d1) || !std::isfinite(out.d2))
    return std::nullopt;
  return out;
}

namespace detail {

inline EdgeTerms checked_edge_terms(const NFunction& f, const EdgeGeometry& e, double habs,
                                    double k) {
  if (!(k > 0.0)) throw Error(Errc::non_positive_argument, "k must be > 0");
  if (!(habs >= 0.0)) throw Error(Errc::negative_argument, "|h| must be >= 0");
  auto t = edge_terms(f, e, habs, k);
  if (!t) throw Error(Errc::overflow, "edge integral overflows at k = " + std::to_string(k));
  return *t;
}

}  // namespace detail

/// Integral over the edge of w_t * Phi(k |h| / w_t) * w_e dt.
inline double edge_integral(const NFunction& f, const EdgeGeometry& e, double habs, double k) {
  return detail::checked_edge_terms(f, e, habs, k).value;
}

inline double edge_integral_dk(const NFunction& f, const EdgeGeometry& e, double habs, double k) {
  return detail::checked_edge_terms(f, e, habs, k).d1;
}

inline double edge_integral_d2k(const NFunction& f, const EdgeGeometry& e, double habs,
                                double k) {
  return detail::checked_edge_terms(f, e, habs, k).d2;
}

}  // namespace gsim
