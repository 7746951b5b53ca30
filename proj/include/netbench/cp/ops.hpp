#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "netbench/core/action.hpp"
#include "netbench/cp/graph.hpp"

namespace netbench::cp {

enum class ResultKind { kScalar, kNameList, kRankedList, kGraph };

std::string_view to_string(ResultKind kind);

/// Typed outcome of a basic operation. Graph results are identified by the
/// digest of the resulting graph.
struct CpResult {
  ResultKind kind = ResultKind::kGraph;
  std::int64_t scalar = 0;
  std::vector<std::string> names;
  std::vector<std::pair<std::string, std::int64_t>> ranked;
  std::string graph_digest;
  friend bool operator==(const CpResult&, const CpResult&) = default;
};

/// {"kind": ..., "value": ...}; graph values serialize as {"digest": ...}.
nlohmann::json result_to_json(const CpResult& result);
/// Accepts graph values either as {"digest"} or as a full graph object.
/// Throws kParseError.
CpResult result_from_json(const nlohmann::json& j);

/// Kind mismatch is false; graphs compare by canonical digest, lists by exact
/// ordered equality, scalars by value.
bool compare_results(const CpResult& candidate, const CpResult& golden);

/// Signatures:
///   add(name, type, parent, capacity_bps)
///   remove(node)
///   count(type, node)
///   list(node)
///   rank(node)
///   update(node, attribute, value)
struct CpState {
  CpGraph graph;
  CpResult result;
};

struct CpSystem {
  using State = CpState;
  /// Throws kUnknownAction or kArityMismatch.
  static void validate(const ActionSpec& action);
  /// Throws kUnknownNode, kDuplicateName, kHierarchyViolation or kInvalidValue.
  static void apply(CpState& state, const ActionSpec& action);
};

std::pair<CpGraph, CpResult> apply_basic_op(const CpGraph& graph, const ActionSpec& op);

/// Children of `name` by capacity descending, equal capacities by name.
std::vector<std::pair<std::string, std::int64_t>> rank_children(const CpGraph& graph,
                                                                const std::string& name);

/// Number of nodes of `type` in the containment closure below `name`.
std::int64_t count_descendants(const CpGraph& graph, const std::string& type,
                               const std::string& name);

}  // namespace netbench::cp
