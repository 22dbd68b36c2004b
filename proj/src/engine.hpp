#pragma once

#include "error.hpp"
#include "expr.hpp"
#include "graph.hpp"

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace df {

struct ParamDef {
  std::string name;
  std::string type;  // "Any", "Constraint[Any]" or a concrete type name
  bool required = true;
};

class Invocation;

struct FunctionDef {
  std::string name;
  std::vector<ParamDef> params;
  std::string out_type;
  std::function<void(Invocation&)> check;
  std::function<void(Invocation&)> exec;
  // Input type -> wrapper function inserted at build time.
  std::map<std::string, std::string> coercions;
  // Accepts pos1..posN, all typed like params[0].
  bool variadic = false;
  // Output type computed from the static input types, when it depends on them.
  std::function<std::string(const std::map<std::string, std::string>&)> infer_type;
  std::string doc;

  const ParamDef* param(std::string_view name) const;
};

class FunctionRegistry {
public:
  // Throws DuplicateFunction.
  void add(FunctionDef def);
  const FunctionDef* find(std::string_view name) const;
  std::size_t size() const { return defs_.size(); }
  std::vector<std::string> names() const;

private:
  std::map<std::string, FunctionDef, std::less<>> defs_;
};

// Registry with the framework and calendar functions.
std::shared_ptr<const FunctionRegistry> standard_registry();

bool type_accepts(std::string_view expected, std::string_view actual);

// Thrown by functions to suspend evaluation; the engine turns it into ctx.pending.
struct PendingSignal {
  ExceptionRecord record;
};

class Engine;

// What a function's check and exec see: its node, inputs and the context.
class Invocation {
public:
  Invocation(Engine& engine, GraphContext& ctx, NodeId node, const FunctionDef& def);

  NodeId node_id() const { return node_; }
  const FunctionDef& def() const { return def_; }
  GraphContext& ctx() { return ctx_; }
  EventStore& store() { return ctx_.store; }
  const Clock& clock() const { return ctx_.clock; }
  Engine& engine() { return engine_; }

  bool has(std::string_view param) const;
  NodeId input(std::string_view param) const;
  // Final value of an evaluated input; TypeError when it has none.
  const Value& value(std::string_view param) const;
  template <class T>
  const T& get(std::string_view param) const {
    const Value& v = value(param);
    if (const T* p = std::get_if<T>(&v)) return *p;
    throw Error(ErrorCode::Type, def_.name + ": unexpected " + type_name(v) + " for " +
                                     std::string(param));
  }
  // The constraint an input denotes, from a constraint node or a computed value.
  ConstraintSpec spec_arg(std::string_view param);
  // Names of the variadic positional inputs actually supplied, in order.
  std::vector<std::string> positional_names() const;

  void set_result(Value v);
  void set_result_node(NodeId id);
  void note(std::string message);
  [[noreturn]] void raise(ExceptionKind kind, std::optional<std::string> param, std::string prompt,
                          std::string expected_type, std::vector<std::string> options = {});

private:
  Engine& engine_;
  GraphContext& ctx_;
  NodeId node_;
  const FunctionDef& def_;
};

class Engine {
public:
  explicit Engine(GraphContext& ctx);

  // Builds an expression into the context; rolls back created nodes on error.
  NodeId build(const Expr& expr);
  // Evaluates and converts pending signals and errors into an Outcome.
  Outcome evaluate(NodeId root);
  // Evaluates a node and everything it depends on; throws PendingSignal or Error.
  void evaluate_node(NodeId id);

  // Newest evaluated match, searching only nodes older than before when given.
  NodeId refer(const ConstraintSpec& spec, std::optional<NodeId> before = std::nullopt);
  // Duplicates the consumer chain of the newest match of old in an earlier
  // turn, wiring replacement in its place. Returns the duplicated root.
  NodeId revise(const ConstraintSpec& old, NodeId replacement);
  Outcome resume(const Expr& answer);
  Outcome run_turn(std::string_view text, Syntax syntax);

  // Wraps arg in coercion functions until its static type fits param.
  NodeId coerce_input(const ParamDef& param, NodeId arg, const FunctionDef& def);
  std::string static_type(NodeId id) const;
  // Static type of an expression without building it; "Any" when unknown.
  std::string static_type(const Expr& expr) const;
  ConstraintSpec resolve_spec(NodeId id);

  // User-facing rendering of a final result node.
  std::string message_for(NodeId result) const;

  const FunctionRegistry& registry() const { return *registry_; }

private:
  NodeId build_expr(const Expr& expr, std::map<std::string, NodeId>& env, bool detached);
  NodeId build_call(const Call& call, std::map<std::string, NodeId>& env, bool detached);
  NodeId build_constraint(const ConstraintCall& c, std::map<std::string, NodeId>& env);
  bool is_answer(const Expr& expr) const;
  void check_inputs(NodeId id, const FunctionDef& def);

  GraphContext& ctx_;
  std::shared_ptr<const FunctionRegistry> registry_;
};

// Value of a literal: Int, Float, Str or Bool. Int overflow raises DomainError.
Value literal_value(const Literal& lit);

}  // namespace df
