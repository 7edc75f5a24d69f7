#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gsim {

enum class Errc {
  disconnected_graph,
  non_positive_weight,
  duplicate_edge,
  self_loop,
  invalid_node,
  invalid_root,
  invalid_measure,
  invalid_support_node,
  negative_argument,
  non_positive_argument,
  overflow,
  mismatched_index,
  non_convergence,
  no_finite_bracket,
  not_a_tree,
  infeasible,
  empty_input,
  empty_sample,
  invalid_argument,
  parse_error,
  io_error,
};

constexpr std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::disconnected_graph: return "DisconnectedGraph";
    case Errc::non_positive_weight: return "NonPositiveWeight";
    case Errc::duplicate_edge: return "DuplicateEdge";
    case Errc::self_loop: return "SelfLoop";
    case Errc::invalid_node: return "InvalidNode";
    case Errc::invalid_root: return "InvalidRoot";
    case Errc::invalid_measure: return "InvalidMeasure";
    case Errc::invalid_support_node: return "InvalidSupportNode";
    case Errc::negative_argument: return "NegativeArgument";
    case Errc::non_positive_argument: return "NonPositiveArgument";
    case Errc::overflow: return "Overflow";
    case Errc::mismatched_index: return "MismatchedIndex";
    case Errc::non_convergence: return "NonConvergence";
    case Errc::no_finite_bracket: return "NoFiniteBracket";
    case Errc::not_a_tree: return "NotATree";
    case Errc::infeasible: return "Infeasible";
    case Errc::empty_input: return "EmptyInput";
    case Errc::empty_sample: return "EmptySample";
    case Errc::invalid_argument: return "InvalidArgument";
    case Errc::parse_error: return "ParseError";
    case Errc::io_error: return "IoError";
  }
  return "Unknown";
}

/// Exception carrying a machine-readable error code. All library failures
/// are reported through this type.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace gsim
