#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "gsim/amemiya.hpp"
#include "gsim/error.hpp"
#include "gsim/graph.hpp"
#include "gsim/gsim.hpp"
#include "gsim/matrix.hpp"
#include "gsim/nfunc.hpp"

namespace gsim {

/// Pairwise distance matrix plus the run that produced it.
struct GramMatrix {
  DenseMatrix entries;
  std::string phi;
  std::uint64_t index_tag = 0;  // hash of (graph, root)
  NodeId root = 0;
  double seconds = 0.0;
  std::size_t unconverged = 0;  // pairs whose minimizer hit its iteration cap

  std::size_t n() const noexcept { return entries.rows(); }
};

using MeasurePair = std::pair<std::size_t, std::size_t>;

namespace detail {

// Runs body(begin, end) on `workers` contiguous slices of [0, count).
// The first failure (lowest slice) is rethrown after all workers join.
template <class Body>
void parallel_blocks(std::size_t count, std::size_t workers, Body&& body) {
  workers = std::max<std::size_t>(1, std::min(workers, count));
  if (workers == 1) {
    if (count > 0) body(std::size_t{0}, count);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = count * w / workers;
    const std::size_t end = count * (w + 1) / workers;
    pool.emplace_back([&, w, begin, end] {
      try {
        body(begin, end);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

inline std::vector<EdgeMap> all_subtree_masses(const RootedIndex& idx,
                                               std::span<const Measure> measures) {
  std::vector<EdgeMap> out;
  out.reserve(measures.size());
  for (std::size_t i = 0; i < measures.size(); ++i) {
    try {
      out.push_back(subtree_masses(idx, measures[i]));
    } catch (const Error& e) {
      throw Error(e.code(), "measure " + std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

inline AmemiyaResult pair_distance(const EdgeProfile& prof, const RootedIndex& idx,
                                   const std::vector<EdgeMap>& masses, MeasurePair p,
                                   const NFunction& f, const AmemiyaOptions& opts) {
  try {
    return gsim_distance(prof, edge_flow_from_masses(idx.tag, masses[p.first], masses[p.second]),
                         f, opts);
  } catch (const Error& e) {
    throw Error(e.code(), "pair (" + std::to_string(p.first) + ", " + std::to_string(p.second) +
                              "): " + e.what());
  }
}

inline void check_profile(const EdgeProfile& prof, const RootedIndex& idx) {
  if (prof.tag != idx.tag)
    throw Error(Errc::mismatched_index, "edge profile and rooted index do not match");
}

}  // namespace detail

/// All n(n-1)/2 pair distances, split into static blocks of the strict upper
/// triangle. Every slot is written by one worker, so the result does not
/// depend on `threads`.
inline GramMatrix gram_distances(const EdgeProfile& prof, const RootedIndex& idx,
                                 std::span<const Measure> measures, const NFunction& f,
                                 std::size_t threads = 1, const AmemiyaOptions& opts = {}) {
  if (threads == 0) throw Error(Errc::invalid_argument, "threads must be >= 1");
  detail::check_profile(prof, idx);
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = measures.size();

  GramMatrix g;
  g.entries = DenseMatrix(n, n);
  g.phi = f.descriptor();
  g.index_tag = idx.tag;
  g.root = idx.root;

  const auto masses = detail::all_subtree_masses(idx, measures);
  std::vector<MeasurePair> pairs;
  pairs.reserve(n * (n - (n > 0)) / 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);

  std::vector<char> converged(pairs.size(), 1);
  detail::parallel_blocks(pairs.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      const auto r = detail::pair_distance(prof, idx, masses, pairs[k], f, opts);
      g.entries(pairs[k].first, pairs[k].second) = r.distance;
      converged[k] = r.converged;
    }
  });
  for (const auto& [i, j] : pairs) g.entries(j, i) = g.entries(i, j);
  g.unconverged = static_cast<std::size_t>(std::count(converged.begin(), converged.end(), 0));
  g.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return g;
}

/// exp(-t d) entrywise.
inline DenseMatrix kernel_matrix(const DenseMatrix& d, double t) {
  if (!(t > 0.0) || !std::isfinite(t))
    throw Error(Errc::non_positive_argument, "kernel bandwidth must be > 0");
  DenseMatrix k(d.rows(), d.cols());
  for (std::size_t i = 0; i < d.data().size(); ++i) k.data()[i] = std::exp(-t * d.data()[i]);
  return k;
}

inline const std::vector<double>& default_quantile_levels() {
  static const std::vector<double> levels{10, 20, 30, 40, 50, 60, 70, 80, 90};
  return levels;
}

/// Nearest-rank s% quantile of a sorted sample.
inline double nearest_rank(const std::vector<double>& sorted, double s) {
  const auto n = static_cast<double>(sorted.size());
  const auto rank = static_cast<std::size_t>(std::ceil(s / 100.0 * n));
  return sorted[std::clamp<std::size_t>(rank, 1, sorted.size()) - 1];
}

/// {1/q_s, 1/(2 q_s), 1/(5 q_s)} for every level s, in level order. Zero
/// distances (diagonal entries, repeated measures) are left out of the sample.
inline std::vector<double> quantile_bandwidths(
    std::span<const double> sample, std::span<const double> levels = default_quantile_levels()) {
  if (sample.empty()) throw Error(Errc::empty_sample, "no distances to take quantiles of");
  std::vector<double> sorted;
  sorted.reserve(sample.size());
  for (double x : sample) {
    if (!(x >= 0.0) || !std::isfinite(x))
      throw Error(Errc::invalid_argument, "distances must be finite and >= 0");
    if (x > 0.0) sorted.push_back(x);
  }
  if (sorted.empty()) throw Error(Errc::empty_sample, "every distance in the sample is zero");
  std::sort(sorted.begin(), sorted.end());

  std::vector<double> out;
  out.reserve(3 * levels.size());
  for (double s : levels) {
    if (!(s > 0.0 && s <= 100.0)) throw Error(Errc::invalid_argument, "quantile level outside (0, 100]");
    const double q = nearest_rank(sorted, s);
    out.push_back(1.0 / q);
    out.push_back(1.0 / (2.0 * q));
    out.push_back(1.0 / (5.0 * q));
  }
  return out;
}

struct EigenEstimate {
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

inline constexpr double kPsdTolerance = 1e-8;
inline constexpr int kPsdMaxIterations = 10000;
inline constexpr double kPsdMargin = 1e-10;

/// Smallest eigenvalue of a symmetric matrix by power iteration on R I - K,
/// where R is the Gershgorin bound on the spectrum. Stops once the residual
/// |(R I - K) v - rho v| drops below tol * max(1, R).
inline EigenEstimate min_eigenvalue(const DenseMatrix& k, double tol = kPsdTolerance,
                                    int max_iter = kPsdMaxIterations) {
  const std::size_t n = k.rows();
  if (n != k.cols()) throw Error(Errc::invalid_argument, "matrix is not square");
  if (n == 0) return {0.0, 0, true};
  double r = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) row += std::abs(k(i, j));
    r = std::max(r, row);
  }
  if (r == 0.0) return {0.0, 0, true};

  std::mt19937_64 rng(0x9e3779b97f4a7c15ull);
  std::normal_distribution<double> normal;
  std::vector<double> v(n), bv(n);
  for (double& x : v) x = normal(rng);
  auto normalize = [](std::vector<double>& x) {
    double s = 0.0;
    for (double y : x) s += y * y;
    s = std::sqrt(s);
    for (double& y : x) y /= s;
  };
  normalize(v);

  EigenEstimate est;
  double rho = 0.0;
  for (est.iterations = 1; est.iterations <= max_iter; ++est.iterations) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = r * v[i];
      for (std::size_t j = 0; j < n; ++j) s -= k(i, j) * v[j];
      bv[i] = s;
    }
    rho = 0.0;
    for (std::size_t i = 0; i < n; ++i) rho += v[i] * bv[i];
    double res = 0.0;
    for (std::size_t i = 0; i < n; ++i) res += (bv[i] - rho * v[i]) * (bv[i] - rho * v[i]);
    v.swap(bv);
    normalize(v);
    if (std::sqrt(res) <= tol * std::max(1.0, r)) {
      est.converged = true;
      break;
    }
  }
  est.iterations = std::min(est.iterations, max_iter);
  est.value = r - rho;
  return est;
}

struct PsdResult {
  DenseMatrix matrix;
  double eta = 0.0;
  double lambda_min = 0.0;
};

/// Adds (|lambda_min| + 1e-10) I when the estimated smallest eigenvalue is negative.
inline PsdResult psd_regularize(const DenseMatrix& k) {
  PsdResult out{k, 0.0, min_eigenvalue(k).value};
  if (out.lambda_min < 0.0) {
    out.eta = std::abs(out.lambda_min) + kPsdMargin;
    for (std::size_t i = 0; i < k.rows(); ++i) out.matrix(i, i) += out.eta;
  }
  return out;
}

struct BenchReport {
  std::size_t n_pairs = 0;
  double seconds = 0.0;
  double pairs_per_second = 0.0;
  std::size_t unconverged = 0;
  std::vector<double> distances;  // empty unless retained

  /// `pairs=<n> seconds=<s> pps=<r>`
  std::string line() const {
    std::ostringstream os;
    os << "pairs=" << n_pairs << " seconds=" << seconds << " pps=" << pairs_per_second;
    return os.str();
  }
};

/// Times the listed pairs end to end (subtree masses included).
inline BenchReport benchmark_pairs(const EdgeProfile& prof, const RootedIndex& idx,
                                   std::span<const Measure> measures,
                                   std::span<const MeasurePair> pairs, const NFunction& f,
                                   std::size_t threads = 1, bool keep_distances = false,
                                   const AmemiyaOptions& opts = {}) {
  if (threads == 0) throw Error(Errc::invalid_argument, "threads must be >= 1");
  detail::check_profile(prof, idx);
  for (const auto& [i, j] : pairs)
    if (i >= measures.size() || j >= measures.size())
      throw Error(Errc::invalid_argument, "pair (" + std::to_string(i) + ", " + std::to_string(j) +
                                              ") refers to a missing measure");
  BenchReport rep;
  rep.n_pairs = pairs.size();
  if (pairs.empty()) return rep;

  const auto start = std::chrono::steady_clock::now();
  const auto masses = detail::all_subtree_masses(idx, measures);
  std::vector<double> dist(pairs.size());
  std::vector<char> converged(pairs.size(), 1);
  detail::parallel_blocks(pairs.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      const auto r = detail::pair_distance(prof, idx, masses, pairs[k], f, opts);
      dist[k] = r.distance;
      converged[k] = r.converged;
    }
  });
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  rep.pairs_per_second = rep.seconds > 0.0 ? static_cast<double>(rep.n_pairs) / rep.seconds : 0.0;
  rep.unconverged = static_cast<std::size_t>(std::count(converged.begin(), converged.end(), 0));
  if (keep_distances) rep.distances = std::move(dist);
  return rep;
}

}  // namespace gsim
