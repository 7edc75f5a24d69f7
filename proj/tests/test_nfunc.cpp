#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "instances.hpp"
#include "oracles.hpp"

using gsim::EdgeGeometry;
using gsim::Errc;
using gsim::Error;
using gsim::NFunction;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no gsim::Error thrown";
  return Errc::invalid_argument;
}

std::vector<NFunction> catalog() {
  return {NFunction::linear(),          NFunction::exp_linear(),     NFunction::exp_square(),
          NFunction::power(1.5),        NFunction::power(3.0),       NFunction::scaled_power(1.5),
          NFunction::scaled_power(2.0), NFunction::scaled_power(3.0)};
}

// Edge 0-1 of the unit path 0-1-2 rooted at 0, and edge 1-2.
const EdgeGeometry kPathE1{1.0, 1.0, 2.0};
const EdgeGeometry kPathE2{1.0, 0.0, 2.0};

}  // namespace

TEST(NFunction, Values) {
  EXPECT_EQ(gsim::phi_value(NFunction::exp_linear(), 0.0), 0.0);
  EXPECT_NEAR(gsim::phi_value(NFunction::exp_square(), 1.0), std::numbers::e - 1.0, 1e-15);
  EXPECT_NEAR(gsim::phi_value(NFunction::scaled_power(2.0), 2.0), 1.0, 1e-15);
  EXPECT_NEAR(gsim::phi_value(NFunction::power(3.0), 2.0), 8.0, 1e-14);
  EXPECT_EQ(gsim::phi_value(NFunction::linear(), 3.5), 3.5);
}

TEST(NFunction, NegativeArgument) {
  for (const auto& f : catalog()) {
    EXPECT_EQ(code_of([&] { gsim::phi_value(f, -1e-3); }), Errc::negative_argument);
    EXPECT_EQ(code_of([&] { gsim::phi_derivative(f, -1.0); }), Errc::negative_argument);
  }
}

TEST(NFunction, ZeroIncreasingConvex) {
  for (const auto& f : catalog()) {
    EXPECT_EQ(gsim::phi_value(f, 0.0), 0.0) << f.descriptor();
    const double top = f.kind == gsim::NKind::exp_square ? 20.0 : 50.0;
    double prev = 0.0, prev_slope = -1.0;
    for (double t = 0.01; t <= top; t += 0.01) {
      const double v = gsim::phi_value(f, t);
      EXPECT_GT(v, prev) << f.descriptor() << " t=" << t;
      const double slope = (v - prev) / 0.01;
      EXPECT_GE(slope, prev_slope * (1 - 1e-12)) << f.descriptor() << " t=" << t;
      prev = v;
      prev_slope = slope;
    }
  }
}

TEST(NFunction, GrowthAtZeroAndInfinity) {
  for (const auto& f : catalog()) {
    if (f.kind == gsim::NKind::linear) continue;
    const double r1 = gsim::phi_value(f, 1.0);
    EXPECT_LE(gsim::phi_value(f, 1e-8) / 1e-8, 1e-3 * r1) << f.descriptor();
    EXPECT_GE(gsim::phi_value(f, 50.0) / 50.0, 5.0 * r1) << f.descriptor();
  }
}

TEST(NFunction, DerivativeMatchesDifference) {
  for (const auto& f : catalog())
    for (double t : {0.3, 1.0, 2.5}) {
      const double h = 1e-6;
      const double fd = (gsim::phi_value(f, t + h) - gsim::phi_value(f, t - h)) / (2 * h);
      EXPECT_LE(rel(gsim::phi_derivative(f, t), fd), 1e-7) << f.descriptor() << " t=" << t;
    }
}

TEST(NFunction, ParseRoundTrip) {
  for (const auto& f : catalog()) {
    const auto g = gsim::parse_nfunction(f.descriptor());
    EXPECT_EQ(g.kind, f.kind);
    EXPECT_EQ(g.p, f.p);
    EXPECT_EQ(g.scaled, f.scaled);
  }
  EXPECT_EQ(gsim::parse_nfunction("ps:2.5").p, 2.5);
  EXPECT_TRUE(gsim::parse_nfunction("ps:2").scaled);
  EXPECT_FALSE(gsim::parse_nfunction("p:2").scaled);
}

TEST(NFunction, ParseErrors) {
  for (const char* bad : {"", "exp2", "p:", "ps:abc", "p:2x", "q:2", "EXP"})
    EXPECT_EQ(code_of([&] { gsim::parse_nfunction(bad); }), Errc::parse_error) << bad;
  EXPECT_EQ(code_of([] { gsim::parse_nfunction("p:1"); }), Errc::invalid_argument);
  EXPECT_EQ(code_of([] { gsim::parse_nfunction("ps:0.5"); }), Errc::invalid_argument);
}

TEST(BetaE, PathEdges) {
  EXPECT_NEAR(gsim::beta_e(2.0, kPathE1), 2 * std::log(4.0 / 3.0), 1e-15);
  EXPECT_NEAR(gsim::beta_e(2.0, kPathE2), 2 * std::log(1.5), 1e-15);
  EXPECT_NEAR(gsim::beta_e(2.0, kPathE1), 0.5753641449, 1e-10);
  EXPECT_NEAR(gsim::beta_e(2.0, kPathE2), 0.8109302162, 1e-10);
}

TEST(BetaE, ContinuousAcrossPEqualsTwo) {
  for (const auto& g : {kPathE1, kPathE2, EdgeGeometry{0.3, 4.0, 7.5}}) {
    const double at2 = gsim::beta_e(2.0, g);
    for (double d : {1e-6, -1e-6, 1e-9, -1e-9, 2e-9, -2e-9})
      EXPECT_LE(rel(gsim::beta_e(2.0 + d, g), at2), 1e-5) << d;
  }
}

TEST(BetaE, MatchesQuadratureAndBounds) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 300; ++i) {
    const double lg = 1.0 + 100.0 * u(rng);
    const double w = (0.001 + 0.999 * u(rng)) * lg;
    const EdgeGeometry g{w, u(rng) * (lg - w), lg};
    const double p = 1.01 + 4.0 * u(rng);
    const double b = gsim::beta_e(p, g);
    EXPECT_LE(rel(b, oracle::beta_e(p, g)), 1e-10) << "p=" << p;
    EXPECT_GT(b, 0.0);
    EXPECT_LE(b, w * (1 + 1e-15));
  }
}

TEST(EdgeIntegral, ZeroFlow) {
  for (const auto& f : catalog()) {
    EXPECT_EQ(gsim::edge_integral(f, kPathE1, 0.0, 3.0), 0.0);
    EXPECT_EQ(gsim::edge_integral_dk(f, kPathE1, 0.0, 3.0), 0.0);
    EXPECT_EQ(gsim::edge_integral_d2k(f, kPathE1, 0.0, 3.0), 0.0);
  }
}

TEST(EdgeIntegral, ScaledPowerOnPath) {
  const double v = gsim::edge_integral(NFunction::scaled_power(2.0), kPathE1, 1.0, 1.0);
  EXPECT_NEAR(v, 0.25 * 2 * std::log(4.0 / 3.0), 1e-15);
  EXPECT_NEAR(v, 0.143841036, 1e-9);
  const double q =
      gsim::edge_integral(NFunction::scaled_power(2.0).with_quadrature(), kPathE1, 1.0, 1.0);
  EXPECT_LE(rel(q, v), 1e-13);
}

TEST(EdgeIntegral, ExpLinearOnPathMatchesAdaptiveQuadrature) {
  const auto f = NFunction::exp_linear();
  EXPECT_LE(rel(gsim::edge_integral(f, kPathE1, 1.0, 1.0), oracle::edge_integral(f, kPathE1, 1.0, 1.0)),
            1e-10);
}

TEST(EdgeIntegral, DerivativesMatchDifferences) {
  {
    const auto f = NFunction::exp_linear();
    const double h = 1e-5;
    const double fd = (gsim::edge_integral(f, kPathE1, 1.0, 1.0 + h) -
                       gsim::edge_integral(f, kPathE1, 1.0, 1.0 - h)) / (2 * h);
    EXPECT_LE(rel(gsim::edge_integral_dk(f, kPathE1, 1.0, 1.0), fd), 1e-6);
  }
  {
    const auto f = NFunction::exp_square();
    const double k = 0.5, habs = 0.7, h = 1e-4;
    const double fd = (gsim::edge_integral(f, kPathE1, habs, k + h) -
                       2 * gsim::edge_integral(f, kPathE1, habs, k) +
                       gsim::edge_integral(f, kPathE1, habs, k - h)) / (h * h);
    EXPECT_LE(rel(gsim::edge_integral_d2k(f, kPathE1, habs, k), fd), 1e-5);
  }
}

TEST(EdgeIntegral, ClosedFormsAgreeWithGaussLegendre) {
  // Only where the closed forms are well conditioned; elsewhere the library
  // itself switches to quadrature.
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int checked = 0;
  for (const auto& f : {NFunction::exp_linear(), NFunction::exp_square()}) {
    for (int i = 0; i < 4000 && checked < 1000; ++i) {
      const double lg = 1.0 + 10.0 * u(rng);
      const double w = (0.01 + 0.99 * u(rng)) * lg;
      const EdgeGeometry g{w, u(rng) * (lg - w), lg};
      const double a = w / lg, b = 1 + g.lambda_gamma / lg;
      const double top = f.kind == gsim::NKind::exp_square ? 26.0 : 30.0;
      const double alpha = b * std::exp(std::log(1e-2) + u(rng) * std::log(top / 1e-2));
      if (!gsim::detail::closed_form_well_conditioned(a, b, alpha)) continue;
      const auto cf = f.kind == gsim::NKind::exp_linear
                          ? gsim::exp_linear_closed_form(w, a, b, alpha, 1.0)
                          : gsim::exp_square_closed_form(w, a, b, alpha, 1.0);
      const auto gl = gsim::detail::quadrature_terms(f, w, a, b, alpha, 1.0);
      EXPECT_LE(rel(cf.value, gl.value), 1e-9) << f.descriptor() << " a=" << a << " b=" << b << " alpha=" << alpha;
      EXPECT_LE(rel(cf.d1, gl.d1), 1e-9);
      EXPECT_LE(rel(cf.d2, gl.d2), 1e-9);
      ++checked;
    }
  }
  EXPECT_GT(checked, 500);
}

TEST(EdgeIntegral, IncreasingAndConvexInK) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const auto& f : catalog()) {
    for (int i = 0; i < 20; ++i) {
      const double lg = 1.0 + 10.0 * u(rng);
      const double w = (0.01 + 0.99 * u(rng)) * lg;
      const EdgeGeometry g{w, u(rng) * (lg - w), lg};
      const double habs = 0.05 + 0.95 * u(rng);
      double prev = 0.0, prev_d = 0.0;
      for (double k = 0.05; k * habs < 20.0; k *= 1.3) {
        const auto t = gsim::edge_terms(f, g, habs, k);
        if (!t) break;
        EXPECT_GT(t->value, prev);
        EXPECT_GT(t->d1, 0.0);
        EXPECT_GE(t->d2, 0.0);
        EXPECT_GE(t->d1, prev_d * (1 - 1e-12));
        prev = t->value;
        prev_d = t->d1;
      }
    }
  }
}

TEST(EdgeIntegral, Errors) {
  const auto f = NFunction::exp_linear();
  EXPECT_EQ(code_of([&] { gsim::edge_integral(f, kPathE1, 1.0, 0.0); }), Errc::non_positive_argument);
  EXPECT_EQ(code_of([&] { gsim::edge_integral(f, kPathE1, -0.5, 1.0); }), Errc::negative_argument);
  EXPECT_EQ(code_of([&] { gsim::edge_integral(f, kPathE2, 1.0, 1e4); }), Errc::overflow);
  EXPECT_EQ(code_of([&] { gsim::edge_integral(NFunction::exp_square(), kPathE2, 1.0, 40.0); }),
            Errc::overflow);
  EXPECT_FALSE(gsim::edge_terms(f, kPathE2, 1.0, 1e4).has_value());
}
