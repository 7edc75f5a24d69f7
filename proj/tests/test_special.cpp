#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"

using gsim::Errc;
using gsim::Error;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no gsim::Error thrown";
  return Errc::invalid_argument;
}

}  // namespace

TEST(Ei, KnownValues) {
  EXPECT_LE(rel(gsim::ei(1.0), 1.895117816355937), 1e-15);
  EXPECT_LE(rel(gsim::ei(10.0), 2492.228976241877), 1e-14);
}

TEST(Ei, MatchesHighPrecisionSeries) {
  for (double x : {0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 30.0, 39.9, 40.0})
    EXPECT_LE(rel(gsim::ei(x), oracle::ei(x)), 1e-13) << "x=" << x;
}

TEST(Ei, AsymptoticBranchAgreesWithSeries) {
  // Both branches at the same points beyond the switch.
  for (double x : {40.5, 45.0, 60.0, 80.0}) {
    const double s = gsim::detail::ei_series(x);
    EXPECT_LE(rel(gsim::ei(x), s), 1e-13) << "x=" << x;
  }
}

TEST(Ei, SmallArgumentLimit) {
  const double x = 1e-10;
  EXPECT_LE(std::abs(gsim::ei(x) - std::log(x) - std::numbers::egamma), 1e-10);
}

TEST(Ei, LargeArgumentsStayFinite) {
  EXPECT_TRUE(std::isfinite(gsim::ei(700.0)));
  EXPECT_GT(gsim::ei(700.0), gsim::ei(699.0));
}

TEST(Ei, DerivativeIsExpOverX) {
  for (double x = 0.1; x <= 30.0; x *= 1.37) {
    const double h = 1e-4 * x;
    const double fd = (gsim::ei(x - 2 * h) - 8 * gsim::ei(x - h) + 8 * gsim::ei(x + h) -
                       gsim::ei(x + 2 * h)) / (12 * h);
    EXPECT_LE(rel(fd, std::exp(x) / x), 1e-8) << "x=" << x;
  }
}

TEST(Ei, Errors) {
  EXPECT_EQ(code_of([] { gsim::ei(0.0); }), Errc::non_positive_argument);
  EXPECT_EQ(code_of([] { gsim::ei(-1.0); }), Errc::non_positive_argument);
  EXPECT_EQ(code_of([] { gsim::ei(700.5); }), Errc::overflow);
}

TEST(GaussLegendre, IntegratesPolynomialsExactly) {
  const auto& rule = gsim::gauss_legendre<32>();
  double w = 0.0, m63 = 0.0;
  for (std::size_t i = 0; i < 32; ++i) {
    w += rule.weights[i];
    m63 += rule.weights[i] * std::pow(rule.nodes[i], 63);
  }
  EXPECT_NEAR(w, 1.0, 1e-15);
  EXPECT_NEAR(m63, 1.0 / 64.0, 1e-15);
}
