#include "engine.hpp"

#include "rewrite.hpp"

#include <algorithm>
#include <charconv>
#include <set>

namespace df {

const ParamDef* FunctionDef::param(std::string_view pname) const {
  for (const auto& p : params)
    if (p.name == pname) return &p;
  if (variadic && !params.empty() && pname.size() > 3 && pname.substr(0, 3) == "pos") {
    const auto digits = pname.substr(3);
    if (std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; }) &&
        digits.front() != '0')
      return &params.front();
  }
  return nullptr;
}

void FunctionRegistry::add(FunctionDef def) {
  if (defs_.count(def.name))
    throw Error(ErrorCode::DuplicateFunction, "function '" + def.name + "' already registered");
  std::set<std::string> seen;
  for (const auto& p : def.params)
    if (!seen.insert(p.name).second)
      throw Error(ErrorCode::InvalidArgument, def.name + ": duplicate parameter " + p.name);
  std::string name = def.name;
  defs_.emplace(std::move(name), std::move(def));
}

const FunctionDef* FunctionRegistry::find(std::string_view name) const {
  auto it = defs_.find(name);
  return it == defs_.end() ? nullptr : &it->second;
}

std::vector<std::string> FunctionRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : defs_) out.push_back(k);
  return out;
}

bool type_accepts(std::string_view expected, std::string_view actual) {
  if (expected == "Any" || actual == "Any" || expected == actual) return true;
  return expected == "Constraint[Any]" && actual.rfind("Constraint[", 0) == 0;
}

Value literal_value(const Literal& lit) {
  switch (lit.kind) {
    case LiteralKind::Int: {
      std::int64_t v = 0;
      const char* first = lit.text.data();
      const char* last = first + lit.text.size();
      auto [ptr, ec] = std::from_chars(first, last, v);
      if (ec != std::errc() || ptr != last)
        throw Error(ErrorCode::Domain, "integer literal out of range: " + lit.text);
      return v;
    }
    case LiteralKind::Float: return std::stod(lit.text);
    case LiteralKind::Str: return lit.text;
    case LiteralKind::Bool: return lit.text == "true";
  }
  return std::int64_t{0};
}

// ---------------------------------------------------------------------------
// Invocation

Invocation::Invocation(Engine& engine, GraphContext& ctx, NodeId node, const FunctionDef& def)
    : engine_(engine), ctx_(ctx), node_(node), def_(def) {}

bool Invocation::has(std::string_view param) const {
  return ctx_.node(node_).input(param).has_value();
}

NodeId Invocation::input(std::string_view param) const {
  auto in = ctx_.node(node_).input(param);
  if (!in) throw Error(ErrorCode::InvalidArgument, def_.name + ": no input " + std::string(param));
  return *in;
}

const Value& Invocation::value(std::string_view param) const {
  const Value* v = ctx_.final_value(input(param));
  if (!v) throw Error(ErrorCode::Type, def_.name + ": " + std::string(param) + " has no value");
  return *v;
}

ConstraintSpec Invocation::spec_arg(std::string_view param) {
  const NodeId id = input(param);
  if (is_constraint_func(ctx_.node(id).func)) return engine_.resolve_spec(id);
  const Value& v = value(param);
  if (const auto* s = std::get_if<SpecRef>(&v)) return **s;
  throw Error(ErrorCode::Type, def_.name + ": " + std::string(param) + " expects a constraint, got " +
                                   type_name(v));
}

std::vector<std::string> Invocation::positional_names() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : ctx_.node(node_).inputs)
    if (k.rfind("pos", 0) == 0) out.push_back(k);
  return out;
}

void Invocation::set_result(Value v) {
  const bool detached = ctx_.node(node_).detached_constraint;
  const NodeId id = ctx_.add_value(std::move(v), detached);
  ctx_.node(node_).result = id;
}

void Invocation::set_result_node(NodeId id) { ctx_.node(node_).result = id; }

void Invocation::note(std::string message) {
  auto r = ctx_.node(node_).result;
  if (!r) throw Error(ErrorCode::InvalidArgument, def_.name + ": note before result");
  ctx_.node(*r).note = std::move(message);
}

void Invocation::raise(ExceptionKind kind, std::optional<std::string> param, std::string prompt,
                       std::string expected_type, std::vector<std::string> options) {
  throw PendingSignal{ExceptionRecord{kind, node_, std::move(param), std::move(prompt),
                                      std::move(expected_type), std::move(options)}};
}

// ---------------------------------------------------------------------------
// Building

Engine::Engine(GraphContext& ctx) : ctx_(ctx), registry_(ctx.registry_ptr()) {
  if (!registry_) registry_ = standard_registry();
}

NodeId Engine::build(const Expr& expr) {
  const std::size_t checkpoint = ctx_.node_count();
  std::map<std::string, NodeId> env;
  try {
    return build_expr(expr, env, false);
  } catch (...) {
    ctx_.truncate(checkpoint);
    throw;
  }
}

NodeId Engine::build_expr(const Expr& expr, std::map<std::string, NodeId>& env, bool detached) {
  if (const auto* lit = expr.get_if<Literal>()) return ctx_.add_value(literal_value(*lit), detached);
  if (const auto* var = expr.get_if<VarRef>()) {
    auto it = env.find(var->name);
    if (it == env.end()) throw Error(ErrorCode::UnboundVariable, "unbound variable " + var->name);
    return it->second;
  }
  if (const auto* call = expr.get_if<Call>()) return build_call(*call, env, detached);
  if (const auto* c = expr.get_if<ConstraintCall>()) return build_constraint(*c, env);
  const auto& seq = expr.as<AssignSeq>();
  std::map<std::string, NodeId> inner = env;
  for (const auto& [name, value] : seq.bindings) {
    if (inner.count(name) && !env.count(name))
      throw Error(ErrorCode::InvalidArgument, "duplicate binding " + name);
    const NodeId id = build_expr(value, inner, detached);
    inner[name] = id;
  }
  return build_expr(*seq.body, inner, detached);
}

namespace {

bool literal_fits(const std::string& func, LiteralKind kind) {
  return (func == "Int" && kind == LiteralKind::Int) ||
         (func == "Float" && kind == LiteralKind::Float) ||
         (func == "Str" && kind == LiteralKind::Str) ||
         (func == "Bool" && kind == LiteralKind::Bool);
}

const Literal* collapsible_literal(const Call& call) {
  if (call.positional.size() != 1 || !call.named.empty()) return nullptr;
  const auto* lit = call.positional.front().get_if<Literal>();
  return lit && literal_fits(call.func, lit->kind) ? lit : nullptr;
}

std::string literal_type(LiteralKind kind) {
  switch (kind) {
    case LiteralKind::Int: return "Int";
    case LiteralKind::Float: return "Float";
    case LiteralKind::Str: return "Str";
    case LiteralKind::Bool: return "Bool";
  }
  return "Any";
}

// Parameter name for each argument of a call, in source order.
std::vector<std::pair<std::string, const Expr*>> bind_arguments(const Call& call,
                                                                 const FunctionDef& def) {
  std::vector<std::pair<std::string, const Expr*>> out;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < call.positional.size(); ++i) {
    std::string name;
    if (def.variadic) {
      name = "pos" + std::to_string(i + 1);
    } else if (i < def.params.size()) {
      name = def.params[i].name;
    } else {
      throw Error(ErrorCode::Arity, def.name + " takes at most " + std::to_string(def.params.size()) +
                                        " arguments, got " + std::to_string(call.positional.size()));
    }
    seen.insert(name);
    out.emplace_back(name, &call.positional[i]);
  }
  for (const auto& [name, value] : call.named) {
    if (!def.param(name))
      throw Error(ErrorCode::UnknownParam, def.name + " has no parameter '" + name + "'");
    if (!seen.insert(name).second)
      throw Error(ErrorCode::Arity, def.name + ": parameter '" + name + "' given twice");
    out.emplace_back(name, &value);
  }
  return out;
}

std::size_t param_rank(const FunctionDef& def, const std::string& name) {
  for (std::size_t i = 0; i < def.params.size(); ++i)
    if (def.params[i].name == name) return i;
  if (def.variadic && name.rfind("pos", 0) == 0) return 1000 + std::stoul(name.substr(3));
  return 100000;
}

void sort_inputs(std::vector<std::pair<std::string, NodeId>>& inputs, const FunctionDef& def) {
  std::stable_sort(inputs.begin(), inputs.end(), [&](const auto& a, const auto& b) {
    return param_rank(def, a.first) < param_rank(def, b.first);
  });
}

}  // namespace

NodeId Engine::build_call(const Call& call, std::map<std::string, NodeId>& env, bool detached) {
  if (const Literal* lit = collapsible_literal(call))
    return ctx_.add_value(literal_value(*lit), detached);
  const FunctionDef* def = registry_->find(call.func);
  if (!def) throw Error(ErrorCode::UnknownFunction, "unknown function '" + call.func + "'");
  Node node;
  node.func = def->name;
  node.detached_constraint = detached;
  for (const auto& [name, arg] : bind_arguments(call, *def)) {
    NodeId id = build_expr(*arg, env, detached);
    id = coerce_input(*def->param(name), id, *def);
    node.inputs.emplace_back(name, id);
  }
  sort_inputs(node.inputs, *def);
  return ctx_.add_node(std::move(node));
}

NodeId Engine::build_constraint(const ConstraintCall& c, std::map<std::string, NodeId>& env) {
  Node node;
  node.func = c.type_name + (c.type_param ? "[" + *c.type_param + "]" : std::string()) + "?";
  node.detached_constraint = true;
  for (const auto& [name, value] : c.named) node.inputs.emplace_back(name, build_expr(value, env, true));
  return ctx_.add_node(std::move(node));
}

NodeId Engine::coerce_input(const ParamDef& param, NodeId arg, const FunctionDef& def) {
  std::string t = static_type(arg);
  for (int step = 0; step < 4; ++step) {
    if (type_accepts(param.type, t)) return arg;
    auto it = def.coercions.find(t);
    if (it == def.coercions.end()) break;
    const FunctionDef* wrapper = registry_->find(it->second);
    if (!wrapper || wrapper->params.empty())
      throw Error(ErrorCode::UnknownFunction, "unknown coercion '" + it->second + "'");
    Node n;
    n.func = wrapper->name;
    n.detached_constraint = ctx_.node(arg).detached_constraint;
    n.inputs.emplace_back(wrapper->params.front().name, arg);
    arg = ctx_.add_node(std::move(n));
    t = static_type(arg);
  }
  throw Error(ErrorCode::Type,
              def.name + ": " + param.name + " expects " + param.type + ", got " + t);
}

std::string Engine::static_type(NodeId id) const {
  const Node& n = ctx_.node(id);
  if (is_constraint_func(n.func)) {
    auto [name, p] = split_constraint_func(n.func);
    return "Constraint[" + (p ? *p : name) + "]";
  }
  if (n.inputs.empty() && n.value) return type_name(*n.value);
  const FunctionDef* def = registry_->find(n.func);
  if (!def) return "Any";
  if (!def->infer_type) return def->out_type;
  std::map<std::string, std::string> types;
  for (const auto& [k, in] : n.inputs) types[k] = static_type(in);
  return def->infer_type(types);
}

std::string Engine::static_type(const Expr& expr) const {
  if (const auto* lit = expr.get_if<Literal>()) return literal_type(lit->kind);
  if (const auto* c = expr.get_if<ConstraintCall>())
    return "Constraint[" + (c->type_param ? *c->type_param : c->type_name) + "]";
  if (const auto* seq = expr.get_if<AssignSeq>()) return static_type(*seq->body);
  const auto* call = expr.get_if<Call>();
  if (!call) return "Any";
  if (const Literal* lit = collapsible_literal(*call)) return literal_type(lit->kind);
  const FunctionDef* def = registry_->find(call->func);
  if (!def) return "Any";
  if (!def->infer_type) return def->out_type;
  std::map<std::string, std::string> types;
  try {
    for (const auto& [name, arg] : bind_arguments(*call, *def)) types[name] = static_type(*arg);
  } catch (const Error&) {
    return "Any";
  }
  return def->infer_type(types);
}

// ---------------------------------------------------------------------------
// Evaluation

ConstraintSpec Engine::resolve_spec(NodeId id) {
  const auto [name, param] = split_constraint_func(ctx_.node(id).func);
  ConstraintSpec spec;
  spec.type_name = name;
  spec.type_param = param;
  const auto inputs = ctx_.node(id).inputs;
  for (const auto& [field, child] : inputs) {
    if (is_constraint_func(ctx_.node(child).func)) {
      spec.set_field(field, make_spec(resolve_spec(child)));
      continue;
    }
    evaluate_node(child);
    const Value* v = ctx_.final_value(child);
    if (!v) throw Error(ErrorCode::Type, "constraint field '" + field + "' has no value");
    spec.set_field(field, *v);
  }
  return spec;
}

void Engine::check_inputs(NodeId id, const FunctionDef& def) {
  const auto inputs = ctx_.node(id).inputs;
  for (const auto& p : def.params) {
    if (!p.required || def.variadic) continue;
    if (!ctx_.node(id).input(p.name)) {
      throw PendingSignal{ExceptionRecord{ExceptionKind::MissingInput, id, p.name,
                                          "missing " + p.name + " (" + p.type + ") for " + def.name,
                                          p.type, {}}};
    }
  }
  if (def.variadic && !def.params.empty() && def.params.front().required && inputs.empty()) {
    const auto& p = def.params.front();
    throw PendingSignal{ExceptionRecord{ExceptionKind::MissingInput, id, p.name,
                                        "missing " + p.name + " (" + p.type + ") for " + def.name,
                                        p.type, {}}};
  }
  for (const auto& [name, in] : inputs) {
    const ParamDef* p = def.param(name);
    if (!p) throw Error(ErrorCode::UnknownParam, def.name + " has no parameter '" + name + "'");
    std::string actual;
    if (is_constraint_func(ctx_.node(in).func)) {
      actual = static_type(in);
    } else {
      const Value* v = ctx_.final_value(in);
      if (!v) throw Error(ErrorCode::Type, def.name + ": " + name + " has no value");
      actual = type_name(*v);
    }
    if (!type_accepts(p->type, actual))
      throw Error(ErrorCode::Type, def.name + ": " + name + " expects " + p->type + ", got " + actual);
  }
}

void Engine::evaluate_node(NodeId id) {
  if (!ctx_.node(id).evaluated) {
    if (is_constraint_func(ctx_.node(id).func)) return;
    const FunctionDef* def = registry_->find(ctx_.node(id).func);
    if (!def) throw Error(ErrorCode::UnknownFunction, "unknown function '" + ctx_.node(id).func + "'");
    const auto inputs = ctx_.node(id).inputs;
    for (const auto& [name, in] : inputs) evaluate_node(in);
    check_inputs(id, *def);
    Invocation inv(*this, ctx_, id, *def);
    try {
      if (def->check) def->check(inv);
      def->exec(inv);
    } catch (...) {
      ctx_.node(id).result.reset();
      throw;
    }
    if (!ctx_.node(id).result)
      throw Error(ErrorCode::InvalidArgument, def->name + " produced no result");
    ctx_.node(id).evaluated = true;
  }
  const auto r = ctx_.node(id).result;
  if (r && *r != id && !ctx_.node(*r).evaluated) evaluate_node(*r);
}

std::string Engine::message_for(NodeId result) const {
  const Node& n = ctx_.node(result);
  if (n.note) return *n.note;
  if (n.value) return render(*n.value);
  return n.func;
}

Outcome Engine::evaluate(NodeId root) {
  try {
    evaluate_node(root);
    auto fr = ctx_.final_result(root);
    if (!fr) return Outcome::failed(ErrorCode::Type, "no result");
    return Outcome::success(*fr, message_for(*fr));
  } catch (const PendingSignal& p) {
    ctx_.pending = p.record;
    ctx_.pending_turn = ctx_.active_turn();
    return Outcome::pending(p.record);
  } catch (const Error& e) {
    return Outcome::failed(e.code(), e.what());
  }
}

// ---------------------------------------------------------------------------
// refer / revise

NodeId Engine::refer(const ConstraintSpec& spec, std::optional<NodeId> before) {
  const std::size_t limit = before ? before->value : ctx_.node_count();
  for (int t = ctx_.active_turn(); t >= 0; --t) {
    for (auto i = limit; i-- > 0;) {
      const Node& n = ctx_.nodes()[i];
      if (n.turn != t || n.detached_constraint || !n.evaluated || is_constraint_func(n.func)) continue;
      if (match_constraint(ctx_, n.id, spec)) return n.id;
    }
  }
  if (spec.target_type() == "Event") {
    EventList found = ctx_.store.find(spec);
    if (!found.empty()) return ctx_.add_value(found.front());
  }
  throw Error(ErrorCode::NoMatch, "no match for " + render_spec(spec));
}

NodeId Engine::revise(const ConstraintSpec& old, NodeId replacement) {
  const int current = ctx_.active_turn();
  for (int t = std::min<int>(current, int(ctx_.turns().size())) - 1; t >= 0; --t) {
    auto root = turn_graph_root(ctx_, ctx_.turns()[t]);
    if (!root) continue;
    std::set<std::uint32_t> reachable;
    std::vector<NodeId> stack{*root};
    while (!stack.empty()) {
      const NodeId cur = stack.back();
      stack.pop_back();
      if (!reachable.insert(cur.value).second) continue;
      for (const auto& [k, in] : ctx_.node(cur).inputs)
        if (!is_constraint_func(ctx_.node(in).func)) stack.push_back(in);
    }
    std::optional<NodeId> matched;
    for (auto it = reachable.rbegin(); it != reachable.rend(); ++it) {
      const Node& n = ctx_.nodes()[*it];
      if (!n.evaluated || n.detached_constraint) continue;
      if (match_constraint(ctx_, n.id, old)) {
        matched = n.id;
        break;
      }
    }
    if (!matched) continue;
    if (*matched == *root) return replacement;
    std::set<std::uint32_t> path;
    for (auto id : reachable) {
      if (id <= matched->value) continue;
      for (const auto& [k, in] : ctx_.nodes()[id].inputs) {
        if (in == *matched || path.count(in.value)) {
          path.insert(id);
          break;
        }
      }
    }
    std::map<std::uint32_t, NodeId> dup;
    for (auto id : path) {
      const Node original = ctx_.nodes()[id];
      const FunctionDef* def = registry_->find(original.func);
      if (!def) throw Error(ErrorCode::UnknownFunction, "unknown function '" + original.func + "'");
      Node copy;
      copy.func = original.func;
      for (const auto& [k, in] : original.inputs) {
        if (in == *matched) copy.inputs.emplace_back(k, coerce_input(*def->param(k), replacement, *def));
        else if (auto d = dup.find(in.value); d != dup.end()) copy.inputs.emplace_back(k, d->second);
        else copy.inputs.emplace_back(k, in);
      }
      dup[id] = ctx_.add_node(std::move(copy));
    }
    return dup.at(root->value);
  }
  throw Error(ErrorCode::NoMatch, "no match for " + render_spec(old));
}

// ---------------------------------------------------------------------------
// Turns and resume

namespace {

std::optional<bool> bool_answer(const Expr& e) {
  if (const auto* lit = e.get_if<Literal>())
    if (lit->kind == LiteralKind::Bool) return lit->text == "true";
  if (const auto* call = e.get_if<Call>()) {
    if (!call->positional.empty() || !call->named.empty()) return std::nullopt;
    if (call->func == "Confirm") return true;
    if (call->func == "Decline") return false;
  }
  return std::nullopt;
}

}  // namespace

bool Engine::is_answer(const Expr& expr) const {
  if (!ctx_.pending) return false;
  if (expr.is<Literal>() || bool_answer(expr)) return true;
  const std::string t = static_type(expr);
  const auto& rec = *ctx_.pending;
  if (t == "Any") return false;
  if (type_accepts(rec.expected_type, t)) return true;
  const FunctionDef* def = registry_->find(ctx_.node(rec.node).func);
  return def && def->coercions.count(t);
}

Outcome Engine::resume(const Expr& answer) {
  if (!ctx_.pending) throw Error(ErrorCode::NoPending, "nothing to resume");
  const ExceptionRecord rec = *ctx_.pending;
  const int t = ctx_.pending_turn;
  const int restore = int(ctx_.turns().size());
  const std::size_t checkpoint = ctx_.node_count();
  ctx_.set_active_turn(t);
  auto fail = [&](ErrorCode code, std::string message) {
    ctx_.truncate(checkpoint);
    ctx_.set_active_turn(restore);
    return Outcome::failed(code, std::move(message));
  };
  const FunctionDef* def = registry_->find(ctx_.node(rec.node).func);
  if (!def) return fail(ErrorCode::UnknownFunction, "unknown function " + ctx_.node(rec.node).func);

  NodeId answer_id;
  if (rec.kind == ExceptionKind::Confirmation) {
    auto yes = bool_answer(answer);
    if (!yes) return fail(ErrorCode::WrongAnswerType, "expected Confirm() or Decline()");
    if (!*yes) {
      ctx_.pending.reset();
      ctx_.pending_turn = -1;
      ctx_.set_active_turn(restore);
      Outcome o = Outcome::success(std::nullopt, "cancelled");
      if (t >= 0 && t < int(ctx_.turns().size())) ctx_.turns()[t].outcome = o;
      return o;
    }
    answer_id = ctx_.add_value(true);
  } else {
    const ParamDef* param = rec.param ? def->param(*rec.param) : nullptr;
    if (!param) return fail(ErrorCode::InvalidArgument, "pending exception has no parameter");
    try {
      answer_id = build(answer);
      answer_id = coerce_input(*param, answer_id, *def);
      if (static_type(answer_id) == "Any") {
        evaluate_node(answer_id);
        const Value* v = ctx_.final_value(answer_id);
        if (!v || !type_accepts(param->type, type_name(*v)))
          return fail(ErrorCode::WrongAnswerType,
                      "expected " + param->type + ", got " + (v ? type_name(*v) : "nothing"));
      }
    } catch (const PendingSignal&) {
      return fail(ErrorCode::WrongAnswerType, "answer needs more information");
    } catch (const Error& e) {
      if (e.code() == ErrorCode::Type)
        return fail(ErrorCode::WrongAnswerType,
                    "expected " + param->type + ", got " + static_type(answer) + ": " + e.what());
      return fail(e.code(), e.what());
    }
  }

  Node& target = ctx_.node(rec.node);
  const std::string slot = rec.param.value_or("confirmed");
  target.inputs.erase(std::remove_if(target.inputs.begin(), target.inputs.end(),
                                     [&](const auto& in) { return in.first == slot; }),
                      target.inputs.end());
  target.inputs.emplace_back(slot, answer_id);
  sort_inputs(target.inputs, *def);
  ctx_.pending.reset();
  ctx_.pending_turn = -1;

  Outcome o = Outcome::failed(ErrorCode::InvalidArgument, "turn has no root");
  if (t >= 0 && t < int(ctx_.turns().size()) && ctx_.turns()[t].root) {
    o = evaluate(*ctx_.turns()[t].root);
    ctx_.turns()[t].outcome = o;
  }
  ctx_.set_active_turn(restore);
  return o;
}

Outcome Engine::run_turn(std::string_view text, Syntax syntax) {
  std::optional<Expr> parsed;
  std::optional<Outcome> parse_failure;
  try {
    parsed = parse(text, syntax);
  } catch (const Error& e) {
    parse_failure = Outcome::failed(e.code(), e.what());
  }
  if (ctx_.pending && parsed && is_answer(*parsed)) return resume(*parsed);
  ctx_.pending.reset();
  ctx_.pending_turn = -1;

  Turn turn;
  turn.index = int(ctx_.turns().size());
  turn.utterance = std::string(text);
  ctx_.set_active_turn(turn.index);
  if (parse_failure) {
    turn.outcome = *parse_failure;
    ctx_.turns().push_back(turn);
    ctx_.set_active_turn(turn.index + 1);
    return turn.outcome;
  }
  try {
    turn.root = build(expand(*parsed));
  } catch (const Error& e) {
    turn.outcome = Outcome::failed(e.code(), e.what());
    ctx_.turns().push_back(turn);
    ctx_.set_active_turn(turn.index + 1);
    return turn.outcome;
  }
  ctx_.turns().push_back(turn);
  Outcome o = evaluate(*turn.root);
  ctx_.turns()[turn.index].outcome = o;
  ctx_.set_active_turn(turn.index + 1);
  return o;
}

}  // namespace df
