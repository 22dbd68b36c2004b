#pragma once

#include "error.hpp"
#include "store.hpp"
#include "values.hpp"

#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace df {

class FunctionRegistry;

struct NodeId {
  std::uint32_t value = 0;

  auto operator<=>(const NodeId&) const = default;
};

struct Node {
  NodeId id;
  std::string func;  // function or type name; constraint nodes are "T?" or "Name[T]?"
  std::vector<std::pair<std::string, NodeId>> inputs;
  std::optional<NodeId> result;
  std::optional<Value> value;  // leaf value nodes only
  bool evaluated = false;
  int turn = 0;
  bool detached_constraint = false;
  // User-facing message set by side-effecting functions on their result node.
  std::optional<std::string> note;

  std::optional<NodeId> input(std::string_view param) const;
  bool is_leaf() const { return inputs.empty() && value.has_value(); }
};

// True for the node names produced by ConstraintCall expressions.
bool is_constraint_func(std::string_view func);

enum class ExceptionKind { MissingInput, Confirmation, Disambiguation };

std::string_view exception_kind_name(ExceptionKind kind);

struct ExceptionRecord {
  ExceptionKind kind;
  NodeId node;
  std::optional<std::string> param;  // for Confirmation this is the internal "confirmed" slot
  std::string prompt;
  std::string expected_type;
  std::vector<std::string> options;  // rendered candidates for Disambiguation

  bool operator==(const ExceptionRecord&) const = default;
};

enum class OutcomeKind { Success, Pending, Failed };

std::string_view outcome_kind_name(OutcomeKind kind);

struct Outcome {
  OutcomeKind kind = OutcomeKind::Failed;
  std::optional<NodeId> result;  // Success only; absent for a declined confirmation
  std::string message;
  std::optional<ExceptionRecord> exception;  // Pending only
  std::optional<ErrorCode> error;            // Failed only

  static Outcome success(std::optional<NodeId> result, std::string message);
  static Outcome pending(ExceptionRecord rec);
  static Outcome failed(ErrorCode code, std::string message);
};

struct Turn {
  int index = 0;
  std::optional<NodeId> root;  // absent when the text did not parse or build
  std::optional<std::string> utterance;
  Outcome outcome;
};

class GraphContext {
public:
  explicit GraphContext(std::shared_ptr<const FunctionRegistry> registry = nullptr,
                        Clock clock = Clock::standard(), EventStore store = {});

  const FunctionRegistry* registry() const { return registry_.get(); }
  std::shared_ptr<const FunctionRegistry> registry_ptr() const { return registry_; }

  NodeId add_node(Node node);
  // Evaluated leaf whose result is itself.
  NodeId add_value(Value v, bool detached = false);

  Node& node(NodeId id);
  const Node& node(NodeId id) const;
  bool contains(NodeId id) const { return id.value < nodes_.size(); }
  std::size_t node_count() const { return nodes_.size(); }
  const std::vector<Node>& nodes() const { return nodes_; }
  // Drops nodes created after a checkpoint; only valid while they are unreferenced.
  void truncate(std::size_t count);

  // Follows result links to the node that holds the final value.
  std::optional<NodeId> final_result(NodeId id) const;
  const Value* final_value(NodeId id) const;

  std::vector<Turn>& turns() { return turns_; }
  const std::vector<Turn>& turns() const { return turns_; }

  // Turn index stamped on newly created nodes.
  int active_turn() const { return active_turn_; }
  void set_active_turn(int t) { active_turn_ = t; }

  std::optional<ExceptionRecord> pending;
  int pending_turn = -1;

  Clock clock;
  EventStore store;

private:
  std::shared_ptr<const FunctionRegistry> registry_;
  std::vector<Node> nodes_;
  std::vector<Turn> turns_;
  int active_turn_ = 0;
};

// Root of the computation a turn performed: below the presentational Yield
// wrapper, and through revise nodes to the graph they produced.
std::optional<NodeId> turn_graph_root(const GraphContext& ctx, const Turn& turn);

// The type name a constraint node selects and its optional parameter.
std::pair<std::string, std::optional<std::string>> split_constraint_func(std::string_view func);

bool match_constraint(const GraphContext& ctx, NodeId node, const ConstraintSpec& spec);

// Graphviz text. With a turn, renders nodes created in that turn plus the
// earlier nodes they reference (drawn as shared).
std::string export_dot(const GraphContext& ctx, std::optional<int> turn = std::nullopt);

// Versioned JSON snapshot ("v1") of nodes, turns and the pending exception.
std::string export_json(const GraphContext& ctx);
// Restores nodes, turns and pending state into ctx (registry, clock, store untouched).
void import_json(GraphContext& ctx, std::string_view text);

std::string value_to_json_text(const Value& v);
// {kind, message, result, error, exception}, as inside a snapshot turn.
std::string outcome_to_json_text(const Outcome& o);

}  // namespace df
