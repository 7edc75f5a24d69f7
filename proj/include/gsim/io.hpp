#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "gsim/clustering.hpp"
#include "gsim/error.hpp"
#include "gsim/graph.hpp"
#include "gsim/matrix.hpp"

namespace gsim {

/// Shortest decimal text that round-trips, never fewer than 17 significant digits.
inline std::string format_real(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

namespace detail {

inline void expect_word(std::istream& in, const char* word, const char* what) {
  std::string got;
  if (!(in >> got) || got != word)
    throw Error(Errc::parse_error, std::string(what) + ": expected '" + word + "', got '" + got + "'");
}

template <class T>
T read_value(std::istream& in, const char* what) {
  T v{};
  if (!(in >> v)) throw Error(Errc::parse_error, std::string(what) + ": truncated or malformed");
  return v;
}

inline std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_error, "cannot open '" + path + "'");
  return in;
}

inline std::ofstream open_out(const std::string& path, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw Error(Errc::io_error, "cannot write '" + path + "'");
  return out;
}

}  // namespace detail

// Graph file:
//   nodes N edges M dim D
//   N lines of D coordinates
//   M lines "u v w"
inline void write_graph(std::ostream& out, const Graph& g) {
  out << "nodes " << g.node_count() << " edges " << g.edge_count() << " dim " << g.dimension()
      << '\n';
  for (const auto& c : g.coords()) {
    for (std::size_t i = 0; i < c.size(); ++i) out << (i ? " " : "") << format_real(c[i]);
    out << '\n';
  }
  if (g.dimension() == 0 && !g.coords().empty())
    for (std::size_t i = 0; i < g.node_count(); ++i) out << '\n';
  for (const Edge& e : g.edges()) out << e.u << ' ' << e.v << ' ' << format_real(e.length) << '\n';
}

inline Graph read_graph(std::istream& in) {
  detail::expect_word(in, "nodes", "graph header");
  const auto n = detail::read_value<std::size_t>(in, "graph header");
  detail::expect_word(in, "edges", "graph header");
  const auto m = detail::read_value<std::size_t>(in, "graph header");
  detail::expect_word(in, "dim", "graph header");
  const auto dim = detail::read_value<std::size_t>(in, "graph header");
  std::vector<std::vector<double>> coords;
  if (dim > 0) {
    coords.assign(n, std::vector<double>(dim));
    for (auto& c : coords)
      for (double& x : c) x = detail::read_value<double>(in, "graph coordinates");
  }
  std::vector<Edge> edges(m);
  for (Edge& e : edges) {
    const auto u = detail::read_value<long long>(in, "graph edge");
    const auto v = detail::read_value<long long>(in, "graph edge");
    e.length = detail::read_value<double>(in, "graph edge");
    if (u < 0 || v < 0) throw Error(Errc::invalid_node, "negative node id in edge list");
    e.u = static_cast<NodeId>(u);
    e.v = static_cast<NodeId>(v);
  }
  return build_graph(n, std::move(edges), std::move(coords));
}

// Measure file:
//   measure K
//   K lines "node_id mass"
inline void write_measure(std::ostream& out, const Measure& m) {
  out << "measure " << m.size() << '\n';
  for (std::size_t i = 0; i < m.size(); ++i) out << m.nodes[i] << ' ' << format_real(m.masses[i]) << '\n';
}

inline Measure read_measure(std::istream& in) {
  detail::expect_word(in, "measure", "measure header");
  const auto k = detail::read_value<std::size_t>(in, "measure header");
  std::vector<std::pair<NodeId, double>> support;
  support.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    const auto node = detail::read_value<long long>(in, "measure entry");
    const auto mass = detail::read_value<double>(in, "measure entry");
    if (node < 0) throw Error(Errc::invalid_support_node, "negative node id in measure");
    support.emplace_back(static_cast<NodeId>(node), mass);
  }
  return make_measure(std::move(support));
}

// Point file:
//   points N dim D
//   N lines of D coordinates
inline std::vector<Point> read_points(std::istream& in) {
  detail::expect_word(in, "points", "point header");
  const auto n = detail::read_value<std::size_t>(in, "point header");
  detail::expect_word(in, "dim", "point header");
  const auto dim = detail::read_value<std::size_t>(in, "point header");
  std::vector<Point> pts(n, Point(dim));
  for (auto& p : pts)
    for (double& x : p) x = detail::read_value<double>(in, "point coordinates");
  return pts;
}

inline void write_points(std::ostream& out, const std::vector<Point>& pts) {
  out << "points " << pts.size() << " dim " << (pts.empty() ? 0 : pts.front().size()) << '\n';
  for (const auto& p : pts) {
    for (std::size_t i = 0; i < p.size(); ++i) out << (i ? " " : "") << format_real(p[i]);
    out << '\n';
  }
}

inline Graph load_graph(const std::string& path) {
  auto in = detail::open_in(path);
  return read_graph(in);
}

inline Measure load_measure(const std::string& path) {
  auto in = detail::open_in(path);
  return read_measure(in);
}

inline std::vector<Point> load_points(const std::string& path) {
  auto in = detail::open_in(path);
  return read_points(in);
}

inline void save_graph(const std::string& path, const Graph& g) {
  auto out = detail::open_out(path);
  write_graph(out, g);
}

inline void save_measure(const std::string& path, const Measure& m) {
  auto out = detail::open_out(path);
  write_measure(out, m);
}

// Binary matrix: "GSBM", u32 version (1), u64 n, n*n little-endian f64 row-major.
inline constexpr char kMatrixMagic[4] = {'G', 'S', 'B', 'M'};
inline constexpr std::uint32_t kMatrixVersion = 1;

namespace detail {

template <class T>
void put_le(std::ostream& out, T value) {
  auto bits = std::bit_cast<std::array<unsigned char, sizeof(T)>>(value);
  if constexpr (std::endian::native == std::endian::big) std::reverse(bits.begin(), bits.end());
  out.write(reinterpret_cast<const char*>(bits.data()), sizeof(T));
}

template <class T>
T get_le(std::istream& in) {
  std::array<unsigned char, sizeof(T)> bits{};
  if (!in.read(reinterpret_cast<char*>(bits.data()), sizeof(T)))
    throw Error(Errc::parse_error, "matrix file truncated");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bits.begin(), bits.end());
  return std::bit_cast<T>(bits);
}

}  // namespace detail

inline void write_matrix_binary(std::ostream& out, const DenseMatrix& m) {
  if (m.rows() != m.cols()) throw Error(Errc::invalid_argument, "binary format holds square matrices");
  out.write(kMatrixMagic, 4);
  detail::put_le<std::uint32_t>(out, kMatrixVersion);
  detail::put_le<std::uint64_t>(out, m.rows());
  for (double x : m.data()) detail::put_le<double>(out, x);
}

inline DenseMatrix read_matrix_binary(std::istream& in) {
  char magic[4] = {};
  if (!in.read(magic, 4) || std::memcmp(magic, kMatrixMagic, 4) != 0)
    throw Error(Errc::parse_error, "not a GSBM matrix file");
  const auto version = detail::get_le<std::uint32_t>(in);
  if (version != kMatrixVersion)
    throw Error(Errc::parse_error, "unsupported matrix version " + std::to_string(version));
  const auto n = detail::get_le<std::uint64_t>(in);
  if (n > (1ull << 20)) throw Error(Errc::parse_error, "matrix dimension too large");
  DenseMatrix m(n, n);
  for (double& x : m.data()) x = detail::get_le<double>(in);
  return m;
}

inline void write_matrix_csv(std::ostream& out, const DenseMatrix& m) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) out << (j ? "," : "") << format_real(m(i, j));
    out << '\n';
  }
}

inline void save_matrix_binary(const std::string& path, const DenseMatrix& m) {
  auto out = detail::open_out(path, true);
  write_matrix_binary(out, m);
}

inline DenseMatrix load_matrix_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot open '" + path + "'");
  return read_matrix_binary(in);
}

}  // namespace gsim
