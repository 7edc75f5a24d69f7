#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "instances.hpp"
#include "oracles.hpp"

using gsim::DenseMatrix;
using gsim::Errc;
using gsim::Error;
using gsim::NFunction;

namespace {

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no gsim::Error thrown";
  return Errc::invalid_argument;
}

struct Setup {
  gsim::RootedGraph g;
  std::vector<gsim::Measure> measures;
};

Setup setup(std::uint64_t seed, std::size_t count) {
  std::mt19937_64 rng(seed);
  Setup s{gsim::make_rooted(inst::random_graph(rng, 40, 60), 3), {}};
  for (std::size_t i = 0; i < count; ++i) s.measures.push_back(inst::random_measure(rng, 40, 6));
  return s;
}

}  // namespace

TEST(Gram, SingleMeasure) {
  auto s = setup(1, 1);
  const auto g = gsim::gram_distances(s.g.profile, s.g.index, s.measures, NFunction::exp_linear());
  ASSERT_EQ(g.n(), 1u);
  EXPECT_EQ(g.entries(0, 0), 0.0);
  EXPECT_EQ(g.phi, "exp");
  EXPECT_EQ(g.root, 3u);
}

TEST(Gram, DuplicatesGiveZero) {
  auto s = setup(2, 3);
  s.measures.push_back(s.measures[1]);
  const auto g = gsim::gram_distances(s.g.profile, s.g.index, s.measures, NFunction::exp_square());
  EXPECT_EQ(g.entries(1, 3), 0.0);
  EXPECT_GT(g.entries(0, 1), 0.0);
}

TEST(Gram, ThreadInvariantSymmetricMetric) {
  auto s = setup(3, 50);
  for (const auto& f : {NFunction::exp_linear(), NFunction::scaled_power(2)}) {
    const auto one = gsim::gram_distances(s.g.profile, s.g.index, s.measures, f, 1);
    const auto eight = gsim::gram_distances(s.g.profile, s.g.index, s.measures, f, 8);
    EXPECT_EQ(one.entries, eight.entries);
    EXPECT_EQ(one.unconverged, 0u);
    const auto& d = one.entries;
    for (std::size_t i = 0; i < d.rows(); ++i) {
      EXPECT_EQ(d(i, i), 0.0);
      for (std::size_t j = 0; j < d.cols(); ++j) {
        EXPECT_EQ(d(i, j), d(j, i));
        for (std::size_t k = 0; k < d.cols(); k += 7) EXPECT_LE(d(i, j), d(i, k) + d(k, j) + 1e-9);
      }
    }
  }
}

TEST(Gram, ErrorNamesPair) {
  auto s = setup(4, 3);
  s.measures[2] = gsim::dirac(999);
  try {
    gsim::gram_distances(s.g.profile, s.g.index, s.measures, NFunction::linear());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::invalid_support_node);
    EXPECT_NE(std::string(e.what()).find("measure 2"), std::string::npos);
  }
  EXPECT_EQ(code_of([&] {
              gsim::gram_distances(s.g.profile, s.g.index, s.measures, NFunction::linear(), 0);
            }),
            Errc::invalid_argument);
}

TEST(Kernel, Values) {
  DenseMatrix d(2, 2);
  d(0, 1) = d(1, 0) = std::log(2.0);
  const auto k = gsim::kernel_matrix(d, 1.0);
  EXPECT_EQ(k(0, 0), 1.0);
  EXPECT_NEAR(k(0, 1), 0.5, 1e-16);
  DenseMatrix e(1, 2);
  e(0, 0) = 1.0;
  e(0, 1) = 2.0;
  const auto ke = gsim::kernel_matrix(e, 0.3);
  EXPECT_GT(ke(0, 0), ke(0, 1));
  EXPECT_EQ(code_of([&] { gsim::kernel_matrix(d, 0.0); }), Errc::non_positive_argument);
}

TEST(Quantile, Examples) {
  std::vector<double> s(100);
  for (int i = 0; i < 100; ++i) s[i] = i + 1;
  const double fifty[] = {50};
  const auto b = gsim::quantile_bandwidths(s, fifty);
  ASSERT_EQ(b.size(), 3u);
  EXPECT_DOUBLE_EQ(b[0], 0.02);
  EXPECT_DOUBLE_EQ(b[1], 0.01);
  EXPECT_DOUBLE_EQ(b[2], 0.004);
  EXPECT_EQ(gsim::quantile_bandwidths(s).size(), 27u);

  const std::vector<double> c(17, 2.5);
  for (double t : gsim::quantile_bandwidths(c, std::vector<double>{10, 90})) EXPECT_TRUE(t == 0.4 || t == 0.2 || t == 0.08);

  EXPECT_EQ(code_of([] { gsim::quantile_bandwidths(std::vector<double>{}); }), Errc::empty_sample);
  EXPECT_EQ(code_of([] { gsim::quantile_bandwidths(std::vector<double>{0.0, 0.0}); }), Errc::empty_sample);
  EXPECT_EQ(code_of([] { gsim::quantile_bandwidths(std::vector<double>{-1.0}); }), Errc::invalid_argument);
}

TEST(Psd, Examples) {
  const auto id = gsim::psd_regularize(DenseMatrix::identity(4));
  EXPECT_EQ(id.eta, 0.0);
  DenseMatrix k(2, 2);
  k(0, 1) = k(1, 0) = 1.0;
  const auto r = gsim::psd_regularize(k);
  EXPECT_NEAR(r.lambda_min, -1.0, 1e-8);
  EXPECT_NEAR(r.eta, 1.0 + 1e-10, 1e-8);
  EXPECT_GE(oracle::min_eigenvalue(r.matrix), -1e-8);
}

TEST(Psd, RandomSymmetricMatrices) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = 2 + rep % 30;
    DenseMatrix k(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) k(i, j) = k(j, i) = u(rng);
    const auto r = gsim::psd_regularize(k);
    EXPECT_NEAR(r.lambda_min, oracle::min_eigenvalue(k), 1e-7) << "n=" << n;
    EXPECT_GE(gsim::min_eigenvalue(r.matrix).value, -1e-8);
    EXPECT_GE(oracle::min_eigenvalue(r.matrix), -1e-8);
    EXPECT_LE(gsim::psd_regularize(r.matrix).eta, 1e-7);
  }
}

TEST(Bench, Examples) {
  auto s = setup(5, 4);
  const auto none = gsim::benchmark_pairs(s.g.profile, s.g.index, s.measures, {}, NFunction::exp_linear());
  EXPECT_EQ(none.n_pairs, 0u);
  EXPECT_EQ(none.seconds, 0.0);
  EXPECT_EQ(none.line(), "pairs=0 seconds=0 pps=0");

  const std::vector<gsim::MeasurePair> same(10, {0, 2});
  const auto r = gsim::benchmark_pairs(s.g.profile, s.g.index, s.measures, same,
                                       NFunction::exp_linear(), 3, true);
  ASSERT_EQ(r.distances.size(), 10u);
  for (double d : r.distances) EXPECT_EQ(d, r.distances[0]);
  EXPECT_EQ(r.n_pairs, 10u);
  EXPECT_EQ(r.line().rfind("pairs=10 seconds=", 0), 0u);

  const std::vector<gsim::MeasurePair> bad{{0, 9}};
  EXPECT_EQ(code_of([&] {
              gsim::benchmark_pairs(s.g.profile, s.g.index, s.measures, bad, NFunction::linear());
            }),
            Errc::invalid_argument);
}
