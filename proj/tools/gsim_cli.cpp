// gsim_cli: graph construction, distances, Gram matrices, benchmarks,
// transport oracles and the property self-test.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 non-convergence.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gsim.hpp"

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kNumeric = 3 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

constexpr std::size_t kOracleMaxSupport = 64;

int exit_code(gsim::Errc c) {
  switch (c) {
    case gsim::Errc::non_convergence:
    case gsim::Errc::no_finite_bracket:
    case gsim::Errc::overflow:
      return kNumeric;
    case gsim::Errc::invalid_argument:
    case gsim::Errc::non_positive_argument:
      return kUsage;
    default:
      return kData;
  }
}

gsim::NFunction phi_from(const std::string& text) {
  try {
    return gsim::parse_nfunction(text);
  } catch (const gsim::Error& e) {
    throw UsageError(std::string("--phi: ") + e.what());
  }
}

// `<id>` or `auto:<seed>` (uniform over the nodes).
gsim::NodeId root_from(const std::string& text, std::size_t nodes) {
  const std::string prefix = "auto:";
  try {
    std::size_t used = 0;
    if (text.rfind(prefix, 0) == 0) {
      const std::string seed = text.substr(prefix.size());
      const auto s = std::stoull(seed, &used);
      if (used != seed.size()) throw std::invalid_argument(text);
      std::mt19937_64 rng(s);
      return static_cast<gsim::NodeId>(std::uniform_int_distribution<std::size_t>(0, nodes - 1)(rng));
    }
    const auto id = std::stoull(text, &used);
    if (used != text.size() || text.front() == '-') throw std::invalid_argument(text);
    if (id >= nodes)
      throw gsim::Error(gsim::Errc::invalid_root, "root " + text + " is not a node");
    return static_cast<gsim::NodeId>(id);
  } catch (const std::logic_error&) {
    throw UsageError("--root: expected a node id or auto:<seed>, got '" + text + "'");
  }
}

gsim::AmemiyaOptions options_from(double tol) {
  if (!(tol > 0.0 && tol <= 1e-2)) throw UsageError("--tol must lie in (0, 1e-2]");
  gsim::AmemiyaOptions o;
  o.tol = tol;
  return o;
}

void check_threads(int threads) {
  if (threads < 1) throw UsageError("--threads must be >= 1");
}

std::vector<gsim::Measure> load_measures(const std::vector<std::string>& paths) {
  std::vector<gsim::Measure> out;
  out.reserve(paths.size());
  for (const auto& p : paths) {
    try {
      out.push_back(gsim::load_measure(p));
    } catch (const gsim::Error& e) {
      throw gsim::Error(e.code(), p + ": " + e.what());
    }
  }
  return out;
}

// Random probability measures with 1..max_support distinct nodes.
std::vector<gsim::Measure> random_measures(std::size_t count, std::size_t nodes,
                                           std::size_t max_support, std::mt19937_64& rng) {
  std::vector<gsim::Measure> out;
  out.reserve(count);
  std::vector<gsim::NodeId> pool(nodes);
  for (std::size_t v = 0; v < nodes; ++v) pool[v] = static_cast<gsim::NodeId>(v);
  std::uniform_real_distribution<double> mass(0.05, 1.0);
  const std::size_t cap = std::min(nodes, max_support);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t k = std::uniform_int_distribution<std::size_t>(1, cap)(rng);
    // Partial Fisher-Yates picks k distinct nodes.
    for (std::size_t j = 0; j < k; ++j)
      std::swap(pool[j], pool[std::uniform_int_distribution<std::size_t>(j, nodes - 1)(rng)]);
    std::vector<double> ms(k);
    double total = 0.0;
    for (double& m : ms) total += (m = mass(rng));
    std::vector<std::pair<gsim::NodeId, double>> support;
    for (std::size_t j = 0; j < k; ++j) support.emplace_back(pool[j], ms[j] / total);
    out.push_back(gsim::make_measure(std::move(support)));
  }
  return out;
}

void print_result(const gsim::AmemiyaResult& r) {
  std::cout << "distance " << gsim::format_real(r.distance) << '\n';
  if (r.k_star) {
    std::cout << "k_star " << gsim::format_real(*r.k_star) << '\n';
    std::cout << "iterations " << r.iterations << '\n';
  }
}

struct Common {
  std::string graph;
  std::string phi = "exp";
  std::string root;
  double tol = 1e-10;
  int threads = 1;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_graph_build(const std::string& points_path, std::size_t centroids, const std::string& mode,
                    std::uint64_t seed, const std::string& out) {
  const auto budget = mode == "log" ? gsim::EdgeBudget::log : gsim::EdgeBudget::sqrt;
  const auto points = gsim::load_points(points_path);
  const auto clusters = gsim::farthest_point_clustering(points, centroids, seed);
  std::vector<gsim::Point> centres;
  centres.reserve(clusters.centroids.size());
  for (std::size_t c : clusters.centroids) centres.push_back(points[c]);
  const auto rg = gsim::build_random_graph(centres, budget, seed);
  gsim::save_graph(out, rg.graph);
  std::cout << "nodes " << rg.graph.node_count() << '\n'
            << "edges " << rg.graph.edge_count() << '\n'
            << "sampled " << rg.sampled_edges << '\n'
            << "bridges " << rg.bridging_edges << '\n';
  return kOk;
}

int cmd_dist(const Common& c, const std::string& mu_path, const std::string& nu_path) {
  const auto f = phi_from(c.phi);
  const auto opts = options_from(c.tol);
  auto g = gsim::load_graph(c.graph);
  const auto root = root_from(c.root, g.node_count());
  const auto mu = load_measures({mu_path}).front();
  const auto nu = load_measures({nu_path}).front();
  const auto rg = gsim::make_rooted(std::move(g), root);
  const auto flow = gsim::edge_flow(rg.index, mu, nu);
  const auto r = gsim::gsim_distance(rg.profile, flow, f, opts);
  print_result(r);
  if (!r.converged) {
    std::cerr << "error: minimizer did not converge within " << opts.max_iter << " evaluations\n";
    return kNumeric;
  }
  return kOk;
}

int cmd_gram(const Common& c, const std::vector<std::string>& paths, const std::string& csv) {
  const auto f = phi_from(c.phi);
  const auto opts = options_from(c.tol);
  check_threads(c.threads);
  auto g = gsim::load_graph(c.graph);
  const auto root = root_from(c.root, g.node_count());
  const auto measures = load_measures(paths);
  const auto rg = gsim::make_rooted(std::move(g), root);
  const auto gm = gsim::gram_distances(rg.profile, rg.index, measures, f,
                                       static_cast<std::size_t>(c.threads), opts);
  gsim::save_matrix_binary(c.out, gm.entries);
  if (!csv.empty()) {
    std::ofstream os(csv);
    if (!os) throw gsim::Error(gsim::Errc::io_error, "cannot write '" + csv + "'");
    gsim::write_matrix_csv(os, gm.entries);
  }
  std::cout << "measures " << gm.n() << '\n' << "root " << gm.root << '\n';
  if (gm.unconverged > 0) {
    std::cerr << "error: " << gm.unconverged << " pairs did not converge\n";
    return kNumeric;
  }
  return kOk;
}

int cmd_bench(const Common& c, const std::vector<std::string>& paths, std::size_t random_count,
              std::size_t max_support, std::size_t pair_count) {
  const auto f = phi_from(c.phi);
  const auto opts = options_from(c.tol);
  check_threads(c.threads);
  if (paths.empty() == (random_count == 0))
    throw UsageError("give either --measures or --random");
  auto g = gsim::load_graph(c.graph);
  const auto root = root_from(c.root, g.node_count());
  std::mt19937_64 rng(c.seed);
  const auto measures = paths.empty()
                            ? random_measures(random_count, g.node_count(), max_support, rng)
                            : load_measures(paths);
  const auto rg = gsim::make_rooted(std::move(g), root);

  std::vector<gsim::MeasurePair> pairs;
  const std::size_t n = measures.size();
  if (pair_count == 0) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  } else {
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    for (std::size_t p = 0; p < pair_count; ++p) pairs.emplace_back(pick(rng), pick(rng));
  }
  const auto rep = gsim::benchmark_pairs(rg.profile, rg.index, measures, pairs, f,
                                         static_cast<std::size_t>(c.threads), false, opts);
  std::cout << rep.line() << '\n';
  if (rep.unconverged > 0) {
    std::cerr << "error: " << rep.unconverged << " pairs did not converge\n";
    return kNumeric;
  }
  return kOk;
}

int cmd_oracle(const Common& c, const std::string& kind, const std::string& mu_path,
               const std::string& nu_path) {
  const auto g = gsim::load_graph(c.graph);
  const auto mu = load_measures({mu_path}).front();
  const auto nu = load_measures({nu_path}).front();
  if (mu.size() > kOracleMaxSupport || nu.size() > kOracleMaxSupport)
    throw gsim::Error(gsim::Errc::invalid_measure, "oracle supports are capped at " +
                                                       std::to_string(kOracleMaxSupport) + " nodes");
  for (const auto* m : {&mu, &nu})
    for (auto v : m->nodes)
      if (v >= g.node_count())
        throw gsim::Error(gsim::Errc::invalid_support_node,
                          "node " + std::to_string(v) + " is not in the graph");
  const auto cost = gsim::support_cost(g, mu, nu);
  if (kind == "w1") {
    std::cout << "w1 " << gsim::format_real(gsim::w1_oracle(cost, mu.masses, nu.masses).value) << '\n';
  } else {
    const auto f = phi_from(c.phi);
    std::cout << "ow " << gsim::format_real(gsim::ow_oracle(cost, mu.masses, nu.masses, f).value)
              << '\n';
  }
  return kOk;
}

int cmd_selftest(const Common& c) {
  std::vector<gsim::RootedGraph> extra;
  if (!c.graph.empty()) {
    auto g = gsim::load_graph(c.graph);
    const auto root = root_from(c.root.empty() ? "0" : c.root, g.node_count());
    extra.push_back(gsim::make_rooted(std::move(g), root));
  }
  bool ok = true;
  for (const auto& r : gsim::run_selftest(c.seed, std::move(extra))) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << " checks=" << r.checks;
    if (!r.passed) std::cout << " first_failure: " << r.first_failure;
    std::cout << '\n';
    ok = ok && r.passed;
  }
  return ok ? kOk : kData;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generalized Sobolev IPM on graphs"};
  app.require_subcommand(1);
  Common c;

  auto add_graph = [&](CLI::App* s, bool required) {
    auto* o = s->add_option("--graph", c.graph, "Graph file");
    if (required) o->required();
  };
  auto add_phi = [&](CLI::App* s) {
    s->add_option("--phi", c.phi, "N-function: linear, exp, expsq, p:<p>, ps:<p>")
        ->capture_default_str();
  };
  auto add_root = [&](CLI::App* s) {
    s->add_option("--root", c.root, "Root node id or auto:<seed>")->required();
  };
  auto add_tol = [&](CLI::App* s) {
    s->add_option("--tol", c.tol, "Minimizer tolerance in (0, 1e-2]")->capture_default_str();
  };
  auto add_threads = [&](CLI::App* s) {
    s->add_option("--threads", c.threads, "Worker threads")->capture_default_str();
  };

  std::string points, mode = "log";
  std::size_t centroids = 0;
  auto* build = app.add_subcommand("graph-build", "Cluster points and sample a random graph");
  build->add_option("--points", points, "Point file")->required();
  build->add_option("--centroids,-M", centroids, "Number of centroids")->required();
  build->add_option("--mode", mode, "Edge budget: log or sqrt")
      ->check(CLI::IsMember({"log", "sqrt"}))
      ->capture_default_str();
  build->add_option("--seed", c.seed, "Random seed")->capture_default_str();
  build->add_option("--out", c.out, "Output graph file")->required();

  std::string mu, nu;
  auto* dist = app.add_subcommand("dist", "Distance between two measures");
  add_graph(dist, true);
  dist->add_option("--mu", mu, "First measure file")->required();
  dist->add_option("--nu", nu, "Second measure file")->required();
  add_phi(dist);
  add_root(dist);
  add_tol(dist);

  std::vector<std::string> measure_paths;
  std::string csv;
  auto* gram = app.add_subcommand("gram", "Pairwise distance matrix");
  add_graph(gram, true);
  gram->add_option("--measures", measure_paths, "Measure files")->required();
  add_phi(gram);
  add_root(gram);
  add_tol(gram);
  add_threads(gram);
  gram->add_option("--out", c.out, "Binary matrix output")->required();
  gram->add_option("--csv", csv, "Optional CSV copy");

  std::size_t random_count = 0, max_support = 100, pair_count = 0;
  auto* bench = app.add_subcommand("bench", "Time distance evaluations");
  add_graph(bench, true);
  bench->add_option("--measures", measure_paths, "Measure files");
  bench->add_option("--random", random_count, "Generate this many random measures instead");
  bench->add_option("--support", max_support, "Max support size of random measures")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  bench->add_option("--pairs", pair_count, "Random pairs to time (0: all pairs)")
      ->capture_default_str();
  bench->add_option("--seed", c.seed, "Random seed")->capture_default_str();
  add_phi(bench);
  add_root(bench);
  add_tol(bench);
  add_threads(bench);

  std::string kind;
  auto* oracle = app.add_subcommand("oracle", "Exact transport distances on small inputs");
  oracle->add_option("kind", kind, "w1 or ow")->required()->check(CLI::IsMember({"w1", "ow"}));
  add_graph(oracle, true);
  oracle->add_option("--mu", mu, "First measure file")->required();
  oracle->add_option("--nu", nu, "Second measure file")->required();
  add_phi(oracle);

  auto* self = app.add_subcommand("selftest", "Run the property suites");
  self->add_option("--seed", c.seed, "Random seed")->capture_default_str();
  add_graph(self, false);
  self->add_option("--root", c.root, "Root for --graph (default 0)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*build) return cmd_graph_build(points, centroids, mode, c.seed, c.out);
    if (*dist) return cmd_dist(c, mu, nu);
    if (*gram) return cmd_gram(c, measure_paths, csv);
    if (*bench) return cmd_bench(c, measure_paths, random_count, max_support, pair_count);
    if (*oracle) return cmd_oracle(c, kind, mu, nu);
    if (*self) return cmd_selftest(c);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const gsim::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.code());
  } catch (const std::bad_alloc&) {
    std::cerr << "error: out of memory\n";
    return kData;
  }
  return kUsage;
}
