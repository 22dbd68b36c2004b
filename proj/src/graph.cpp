#include "graph.hpp"

#include <json.hpp>

#include <set>

namespace df {

using nlohmann::json;

std::optional<NodeId> Node::input(std::string_view param) const {
  for (const auto& [k, v] : inputs)
    if (k == param) return v;
  return std::nullopt;
}

bool is_constraint_func(std::string_view func) {
  return !func.empty() && func.back() == '?';
}

std::pair<std::string, std::optional<std::string>> split_constraint_func(std::string_view func) {
  if (!func.empty() && func.back() == '?') func.remove_suffix(1);
  const auto open = func.find('[');
  if (open == std::string_view::npos || func.back() != ']') return {std::string(func), std::nullopt};
  return {std::string(func.substr(0, open)),
          std::string(func.substr(open + 1, func.size() - open - 2))};
}

std::string_view exception_kind_name(ExceptionKind kind) {
  switch (kind) {
    case ExceptionKind::MissingInput: return "MissingInput";
    case ExceptionKind::Confirmation: return "Confirmation";
    case ExceptionKind::Disambiguation: return "Disambiguation";
  }
  return "?";
}

std::string_view outcome_kind_name(OutcomeKind kind) {
  switch (kind) {
    case OutcomeKind::Success: return "success";
    case OutcomeKind::Pending: return "pending";
    case OutcomeKind::Failed: return "failed";
  }
  return "?";
}

Outcome Outcome::success(std::optional<NodeId> result, std::string message) {
  Outcome o;
  o.kind = OutcomeKind::Success;
  o.result = result;
  o.message = std::move(message);
  return o;
}

Outcome Outcome::pending(ExceptionRecord rec) {
  Outcome o;
  o.kind = OutcomeKind::Pending;
  o.message = rec.prompt;
  o.exception = std::move(rec);
  return o;
}

Outcome Outcome::failed(ErrorCode code, std::string message) {
  Outcome o;
  o.kind = OutcomeKind::Failed;
  o.error = code;
  o.message = std::move(message);
  return o;
}

GraphContext::GraphContext(std::shared_ptr<const FunctionRegistry> registry, Clock clk,
                           EventStore st)
    : clock(clk), store(std::move(st)), registry_(std::move(registry)) {}

NodeId GraphContext::add_node(Node node) {
  node.id = NodeId{static_cast<std::uint32_t>(nodes_.size())};
  node.turn = active_turn_;
  nodes_.push_back(std::move(node));
  return nodes_.back().id;
}

NodeId GraphContext::add_value(Value v, bool detached) {
  Node n;
  n.func = type_name(v);
  n.value = std::move(v);
  n.evaluated = true;
  n.detached_constraint = detached;
  const NodeId id = add_node(std::move(n));
  nodes_[id.value].result = id;
  return id;
}

Node& GraphContext::node(NodeId id) {
  if (id.value >= nodes_.size())
    throw Error(ErrorCode::InvalidArgument, "unknown node " + std::to_string(id.value));
  return nodes_[id.value];
}

const Node& GraphContext::node(NodeId id) const {
  if (id.value >= nodes_.size())
    throw Error(ErrorCode::InvalidArgument, "unknown node " + std::to_string(id.value));
  return nodes_[id.value];
}

void GraphContext::truncate(std::size_t count) {
  if (count < nodes_.size()) nodes_.resize(count);
}

std::optional<NodeId> GraphContext::final_result(NodeId id) const {
  NodeId cur = id;
  for (std::size_t hops = 0; hops <= nodes_.size(); ++hops) {
    const Node& n = node(cur);
    if (!n.evaluated || !n.result) return std::nullopt;
    if (*n.result == cur) return cur;
    cur = *n.result;
  }
  return std::nullopt;
}

const Value* GraphContext::final_value(NodeId id) const {
  auto r = final_result(id);
  if (!r) return nullptr;
  const Node& n = node(*r);
  return n.value ? &*n.value : nullptr;
}

std::optional<NodeId> turn_graph_root(const GraphContext& ctx, const Turn& turn) {
  if (!turn.root) return std::nullopt;
  NodeId cur = *turn.root;
  const Node* n = &ctx.node(cur);
  if (n->func == "Yield") {
    if (auto in = n->input("pos1")) cur = *in;
  }
  for (n = &ctx.node(cur); n->func == "revise" && n->evaluated && n->result; n = &ctx.node(cur))
    cur = *n->result;
  return cur;
}

bool match_constraint(const GraphContext& ctx, NodeId id, const ConstraintSpec& spec) {
  const Node& n = ctx.node(id);
  if (n.func != spec.target_type()) return false;
  if (spec.fields.empty()) return true;
  if (!n.evaluated) return false;
  if (n.value) {
    if (const auto* ev = std::get_if<EventRecord>(&*n.value)) return event_matches(spec, *ev);
    for (const auto& [name, pattern] : spec.fields) {
      if (name != "value" || !value_matches(pattern, *n.value)) return false;
    }
    return true;
  }
  for (const auto& [name, pattern] : spec.fields) {
    auto in = n.input(name);
    if (!in) return false;
    if (const auto* nested = std::get_if<SpecRef>(&pattern)) {
      if (!match_constraint(ctx, *in, **nested)) return false;
      continue;
    }
    const Value* actual = ctx.final_value(*in);
    if (!actual || !value_matches(pattern, *actual)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// DOT

namespace {

std::string dot_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out += c;
  }
  return out;
}

std::string node_label(const Node& n) { return n.func + "_" + std::to_string(n.id.value); }

void emit_node(std::string& out, const Node& n, bool shared) {
  out += "  n" + std::to_string(n.id.value) + " [label=\"" + dot_escape(node_label(n)) + "\"";
  if (n.value) out += ", xlabel=\"" + dot_escape(render(*n.value)) + "\"";
  if (n.detached_constraint) out += ", style=dashed";
  if (shared) out += ", style=filled, fillcolor=lightgrey";
  out += "];\n";
}

void emit_edges(std::string& out, const Node& n) {
  const std::string self = "n" + std::to_string(n.id.value);
  for (const auto& [param, in] : n.inputs)
    out += "  n" + std::to_string(in.value) + " -> " + self + " [label=\"" + dot_escape(param) +
           "\"];\n";
  if (n.result && *n.result != n.id)
    out += "  " + self + " -> n" + std::to_string(n.result->value) +
           " [style=dashed, color=blue];\n";
}

}  // namespace

std::string export_dot(const GraphContext& ctx, std::optional<int> turn) {
  if (turn && (*turn < 0 || *turn >= int(ctx.turns().size())))
    throw Error(ErrorCode::UnknownTurn, "no turn " + std::to_string(*turn));
  std::string out = "digraph dataflow {\n";
  if (ctx.node_count() > 0) out += "  node [shape=box];\n";
  if (!turn) {
    for (const auto& n : ctx.nodes()) emit_node(out, n, false);
    for (const auto& n : ctx.nodes()) emit_edges(out, n);
    return out + "}\n";
  }
  std::set<std::uint32_t> own, referenced;
  for (const auto& n : ctx.nodes()) {
    if (n.turn != *turn) continue;
    own.insert(n.id.value);
    for (const auto& [p, in] : n.inputs) referenced.insert(in.value);
    if (n.result) referenced.insert(n.result->value);
  }
  std::set<std::uint32_t> all = own;
  all.insert(referenced.begin(), referenced.end());
  for (auto id : all) emit_node(out, ctx.nodes()[id], !own.count(id));
  for (auto id : own) emit_edges(out, ctx.nodes()[id]);
  return out + "}\n";
}

// ---------------------------------------------------------------------------
// JSON

namespace {

json value_to_json(const Value& v);

json event_to_json(const EventRecord& e) {
  json j{{"id", e.id}, {"subject", e.subject}, {"start", format_iso(e.start)},
         {"end", format_iso(e.end)}};
  j["location"] = e.location ? json(*e.location) : json(nullptr);
  return j;
}

EventRecord event_from_json(const json& j) {
  EventRecord e;
  e.id = j.at("id").get<std::int64_t>();
  e.subject = j.at("subject").get<std::string>();
  e.start = parse_iso_datetime(j.at("start").get<std::string>()).value();
  e.end = parse_iso_datetime(j.at("end").get<std::string>()).value();
  if (j.contains("location") && j["location"].is_string()) e.location = j["location"].get<std::string>();
  return e;
}

json spec_to_json(const ConstraintSpec& s) {
  json fields = json::array();
  for (const auto& [k, v] : s.fields) fields.push_back({{"name", k}, {"value", value_to_json(v)}});
  return {{"type_name", s.type_name},
          {"type_param", s.type_param ? json(*s.type_param) : json(nullptr)},
          {"fields", fields}};
}

json value_to_json(const Value& v) {
  json payload = std::visit(
      [](const auto& x) -> json {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Date>) return format_date(x);
        else if constexpr (std::is_same_v<T, Time>) return format_time(x);
        else if constexpr (std::is_same_v<T, DateTime>) return format_iso(x);
        else if constexpr (std::is_same_v<T, EventRecord>) return event_to_json(x);
        else if constexpr (std::is_same_v<T, EventList>) {
          json arr = json::array();
          for (const auto& e : x) arr.push_back(event_to_json(e));
          return arr;
        } else if constexpr (std::is_same_v<T, SpecRef>) return spec_to_json(*x);
        else return json(x);
      },
      v);
  return {{"type", type_name(v)}, {"value", payload}};
}

Value value_from_json(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  const json& p = j.at("value");
  if (type == "Int") return p.get<std::int64_t>();
  if (type == "Float") return p.get<double>();
  if (type == "Str") return p.get<std::string>();
  if (type == "Bool") return p.get<bool>();
  if (type == "Date") return parse_iso_date(p.get<std::string>()).value();
  if (type == "Time") {
    const std::string s = p.get<std::string>();
    return Time::make(std::stoi(s.substr(0, 2)), std::stoi(s.substr(3, 2))).value();
  }
  if (type == "DateTime") return parse_iso_datetime(p.get<std::string>()).value();
  if (type == "Event") return event_from_json(p);
  if (type == "List[Event]") {
    EventList list;
    for (const auto& e : p) list.push_back(event_from_json(e));
    return list;
  }
  if (type.rfind("Constraint[", 0) == 0) {
    ConstraintSpec s;
    s.type_name = p.at("type_name").get<std::string>();
    if (p.at("type_param").is_string()) s.type_param = p["type_param"].get<std::string>();
    for (const auto& f : p.at("fields"))
      s.fields.emplace_back(f.at("name").get<std::string>(), value_from_json(f.at("value")));
    return make_spec(std::move(s));
  }
  throw Error(ErrorCode::InvalidArgument, "unknown value type '" + type + "' in snapshot");
}

json opt_id(const std::optional<NodeId>& id) { return id ? json(id->value) : json(nullptr); }

json exception_to_json(const ExceptionRecord& r) {
  return {{"kind", exception_kind_name(r.kind)},
          {"node", r.node.value},
          {"param", r.param ? json(*r.param) : json(nullptr)},
          {"prompt", r.prompt},
          {"expected_type", r.expected_type},
          {"options", r.options}};
}

ExceptionRecord exception_from_json(const json& j) {
  ExceptionRecord r;
  const std::string kind = j.at("kind").get<std::string>();
  r.kind = kind == "MissingInput"   ? ExceptionKind::MissingInput
           : kind == "Confirmation" ? ExceptionKind::Confirmation
                                    : ExceptionKind::Disambiguation;
  r.node = NodeId{j.at("node").get<std::uint32_t>()};
  if (j.at("param").is_string()) r.param = j["param"].get<std::string>();
  r.prompt = j.at("prompt").get<std::string>();
  r.expected_type = j.at("expected_type").get<std::string>();
  r.options = j.at("options").get<std::vector<std::string>>();
  return r;
}

ErrorCode error_from_name(std::string_view name) {
  for (int c = 0; c <= int(ErrorCode::InvalidArgument); ++c)
    if (error_code_name(ErrorCode(c)) == name) return ErrorCode(c);
  return ErrorCode::InvalidArgument;
}

}  // namespace

std::string value_to_json_text(const Value& v) { return value_to_json(v).dump(); }

namespace {

json outcome_to_json(const Outcome& o) {
  return {{"kind", outcome_kind_name(o.kind)},
          {"message", o.message},
          {"result", opt_id(o.result)},
          {"error", o.error ? json(error_code_name(*o.error)) : json(nullptr)},
          {"exception", o.exception ? exception_to_json(*o.exception) : json(nullptr)}};
}

}  // namespace

std::string outcome_to_json_text(const Outcome& o) { return outcome_to_json(o).dump(); }

std::string export_json(const GraphContext& ctx) {
  json nodes = json::array();
  for (const auto& n : ctx.nodes()) {
    json inputs = json::array();
    for (const auto& [p, id] : n.inputs) inputs.push_back({{"param", p}, {"node", id.value}});
    nodes.push_back({{"id", n.id.value},
                     {"func", n.func},
                     {"inputs", inputs},
                     {"result", opt_id(n.result)},
                     {"value", n.value ? value_to_json(*n.value) : json(nullptr)},
                     {"evaluated", n.evaluated},
                     {"turn", n.turn},
                     {"detached", n.detached_constraint},
                     {"note", n.note ? json(*n.note) : json(nullptr)}});
  }
  json turns = json::array();
  for (const auto& t : ctx.turns()) {
    turns.push_back({{"index", t.index},
                     {"root", opt_id(t.root)},
                     {"utterance", t.utterance ? json(*t.utterance) : json(nullptr)},
                     {"outcome", outcome_to_json(t.outcome)}});
  }
  json doc{{"version", "v1"},
           {"nodes", nodes},
           {"turns", turns},
           {"pending", ctx.pending ? exception_to_json(*ctx.pending) : json(nullptr)},
           {"pending_turn", ctx.pending_turn}};
  return doc.dump();
}

void import_json(GraphContext& ctx, std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("snapshot: ") + e.what());
  }
  if (doc.value("version", "") != "v1")
    throw Error(ErrorCode::InvalidArgument, "snapshot version must be v1");
  auto opt = [](const json& j) -> std::optional<NodeId> {
    if (j.is_null()) return std::nullopt;
    return NodeId{j.get<std::uint32_t>()};
  };
  ctx.truncate(0);
  ctx.turns().clear();
  for (const auto& jn : doc.at("nodes")) {
    Node n;
    n.func = jn.at("func").get<std::string>();
    for (const auto& in : jn.at("inputs"))
      n.inputs.emplace_back(in.at("param").get<std::string>(), NodeId{in.at("node").get<std::uint32_t>()});
    n.result = opt(jn.at("result"));
    if (!jn.at("value").is_null()) n.value = value_from_json(jn["value"]);
    n.evaluated = jn.at("evaluated").get<bool>();
    n.detached_constraint = jn.at("detached").get<bool>();
    if (jn.contains("note") && jn["note"].is_string()) n.note = jn["note"].get<std::string>();
    ctx.set_active_turn(jn.at("turn").get<int>());
    const NodeId id = ctx.add_node(std::move(n));
    if (id.value != jn.at("id").get<std::uint32_t>())
      throw Error(ErrorCode::InvalidArgument, "snapshot node ids must be dense and ordered");
  }
  for (const auto& jt : doc.at("turns")) {
    Turn t;
    t.index = jt.at("index").get<int>();
    t.root = opt(jt.at("root"));
    if (jt.at("utterance").is_string()) t.utterance = jt["utterance"].get<std::string>();
    const json& jo = jt.at("outcome");
    const std::string kind = jo.at("kind").get<std::string>();
    t.outcome.kind = kind == "success" ? OutcomeKind::Success
                     : kind == "pending" ? OutcomeKind::Pending
                                         : OutcomeKind::Failed;
    t.outcome.message = jo.at("message").get<std::string>();
    t.outcome.result = opt(jo.at("result"));
    if (jo.at("error").is_string()) t.outcome.error = error_from_name(jo["error"].get<std::string>());
    if (!jo.at("exception").is_null()) t.outcome.exception = exception_from_json(jo["exception"]);
    ctx.turns().push_back(std::move(t));
  }
  ctx.pending.reset();
  if (!doc.at("pending").is_null()) ctx.pending = exception_from_json(doc["pending"]);
  ctx.pending_turn = doc.value("pending_turn", -1);
  ctx.set_active_turn(int(ctx.turns().size()));
}

}  // namespace df
