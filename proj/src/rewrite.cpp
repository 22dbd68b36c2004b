#include "rewrite.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace df {

struct Pattern {
  enum class Kind { Wild, Capture, Literal, Call, Constraint };

  struct Named {
    std::string key;
    std::shared_ptr<Pattern> pat;  // null when testing absence
    bool absent = false;
    bool optional = false;
  };

  Kind kind = Kind::Wild;
  std::string name;
  std::optional<std::string> filter;
  bool rest = false;
  Literal literal{LiteralKind::Int, ""};
  std::vector<std::string> heads;
  std::optional<std::string> type_param;
  std::vector<Pattern> positional;
  std::vector<Named> named;
  bool open = false;
};

// ---------------------------------------------------------------------------
// Pattern parser

namespace {

class PatternParser {
public:
  explicit PatternParser(std::string_view text) : s_(text) {}

  Pattern parse_all() {
    Pattern p = pattern();
    skip_ws();
    if (i_ != s_.size()) fail("end of pattern");
    return p;
  }

private:
  [[noreturn]] void fail(const std::string& expected) { throw SyntaxError(i_, expected); }

  void skip_ws() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
  }

  bool peek(char c) {
    skip_ws();
    return i_ < s_.size() && s_[i_] == c;
  }

  bool peek_str(std::string_view t) {
    skip_ws();
    return s_.substr(i_, t.size()) == t;
  }

  void expect(char c) {
    if (!peek(c)) fail(std::string("'") + c + "'");
    ++i_;
  }

  std::string ident() {
    skip_ws();
    const std::size_t start = i_;
    while (i_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[i_])) || s_[i_] == '_')) ++i_;
    if (start == i_) fail("identifier");
    return std::string(s_.substr(start, i_ - start));
  }

  std::string head_name() {
    if (peek(':')) {
      ++i_;
      return ":" + ident();
    }
    return ident();
  }

  Pattern pattern() {
    skip_ws();
    if (i_ >= s_.size()) fail("pattern");
    const char c = s_[i_];
    if (c == '?') {
      ++i_;
      Pattern p;
      p.kind = Pattern::Kind::Capture;
      p.name = ident();
      if (peek(':')) {
        ++i_;
        p.filter = ident();
      }
      if (peek_str("...")) {
        i_ += 3;
        p.rest = true;
      }
      return p;
    }
    if (c == '"') return string_literal();
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '-') return number_literal();
    std::string first = head_name();
    if (first == "_") return Pattern{};
    if ((first == "true" || first == "false") && !peek('(')) {
      Pattern p;
      p.kind = Pattern::Kind::Literal;
      p.literal = Literal{LiteralKind::Bool, first};
      return p;
    }
    Pattern p;
    p.heads.push_back(first);
    if (peek('[')) {
      ++i_;
      p.type_param = ident();
      expect(']');
    }
    if (peek('?')) {
      ++i_;
      p.kind = Pattern::Kind::Constraint;
    } else {
      p.kind = Pattern::Kind::Call;
      while (peek('|')) {
        ++i_;
        p.heads.push_back(head_name());
      }
    }
    expect('(');
    if (!peek(')')) {
      do {
        argument(p);
      } while (peek(',') && (++i_, true));
    }
    expect(')');
    return p;
  }

  void argument(Pattern& p) {
    if (peek_str("**")) {
      i_ += 2;
      p.open = true;
      return;
    }
    if (peek('!')) {
      ++i_;
      Pattern::Named n;
      n.key = ident();
      n.absent = true;
      p.named.push_back(std::move(n));
      return;
    }
    const std::size_t save = i_;
    skip_ws();
    if (i_ < s_.size() && (std::isalpha(static_cast<unsigned char>(s_[i_])) || s_[i_] == '_')) {
      std::string key = ident();
      bool optional = false;
      if (peek_str("?=")) {
        i_ += 2;
        optional = true;
      } else if (peek('=')) {
        ++i_;
      } else {
        i_ = save;
        p.positional.push_back(pattern());
        return;
      }
      Pattern::Named n;
      n.key = std::move(key);
      n.optional = optional;
      n.pat = std::make_shared<Pattern>(pattern());
      p.named.push_back(std::move(n));
      return;
    }
    p.positional.push_back(pattern());
  }

  Pattern string_literal() {
    ++i_;
    std::string out;
    while (i_ < s_.size() && s_[i_] != '"') {
      if (s_[i_] == '\\' && i_ + 1 < s_.size()) ++i_;
      out += s_[i_++];
    }
    if (i_ >= s_.size()) fail("closing quote");
    ++i_;
    Pattern p;
    p.kind = Pattern::Kind::Literal;
    p.literal = Literal{LiteralKind::Str, out};
    return p;
  }

  Pattern number_literal() {
    const std::size_t start = i_;
    if (s_[i_] == '-') ++i_;
    while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) ++i_;
    bool is_float = false;
    if (i_ < s_.size() && s_[i_] == '.' && s_.substr(i_, 3) != "...") {
      is_float = true;
      ++i_;
      while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) ++i_;
    }
    Pattern p;
    p.kind = Pattern::Kind::Literal;
    p.literal = Literal{is_float ? LiteralKind::Float : LiteralKind::Int,
                        std::string(s_.substr(start, i_ - start))};
    return p;
  }

  std::string_view s_;
  std::size_t i_ = 0;
};

bool kind_matches(const std::string& filter, const Expr& e) {
  const auto* lit = e.get_if<Literal>();
  if (filter == "Literal") return lit != nullptr;
  if (filter == "Int") return lit && lit->kind == LiteralKind::Int;
  if (filter == "Float") return lit && lit->kind == LiteralKind::Float;
  if (filter == "Str") return lit && lit->kind == LiteralKind::Str;
  if (filter == "Bool") return lit && lit->kind == LiteralKind::Bool;
  if (filter == "Call") return e.is<Call>();
  if (filter == "Var") return e.is<VarRef>();
  if (filter == "Constraint") return e.is<ConstraintCall>();
  throw Error(ErrorCode::InvalidArgument, "unknown capture kind " + filter);
}

bool bind(Captures& caps, const std::string& name, const Expr& e) {
  auto [it, inserted] = caps.one.emplace(name, e);
  return inserted || it->second == e;
}

bool match_into(const Pattern& p, const Expr& e, Captures& caps);

bool match_named(const Pattern& p, const NamedArgs& args, Captures& caps) {
  std::set<std::string> mentioned;
  for (const auto& n : p.named) {
    const Expr* v = find_named(args, n.key);
    if (n.absent) {
      if (v) return false;
      continue;
    }
    mentioned.insert(n.key);
    if (!v) {
      if (n.optional) continue;
      return false;
    }
    if (!match_into(*n.pat, *v, caps)) return false;
  }
  if (!p.open)
    for (const auto& [k, v] : args)
      if (!mentioned.count(k)) return false;
  return true;
}

bool match_into(const Pattern& p, const Expr& e, Captures& caps) {
  switch (p.kind) {
    case Pattern::Kind::Wild: return true;
    case Pattern::Kind::Capture:
      if (p.filter && !kind_matches(*p.filter, e)) return false;
      return bind(caps, p.name, e);
    case Pattern::Kind::Literal: {
      const auto* lit = e.get_if<Literal>();
      return lit && *lit == p.literal;
    }
    case Pattern::Kind::Call: {
      const auto* call = e.get_if<Call>();
      if (!call || std::find(p.heads.begin(), p.heads.end(), call->func) == p.heads.end()) return false;
      const bool has_rest = !p.positional.empty() && p.positional.back().kind == Pattern::Kind::Capture &&
                            p.positional.back().rest;
      const std::size_t fixed = p.positional.size() - (has_rest ? 1 : 0);
      if (has_rest ? call->positional.size() < fixed : call->positional.size() != fixed) return false;
      for (std::size_t i = 0; i < fixed; ++i)
        if (!match_into(p.positional[i], call->positional[i], caps)) return false;
      if (has_rest) {
        const auto& rest = p.positional.back();
        std::vector<Expr> tail(call->positional.begin() + std::ptrdiff_t(fixed), call->positional.end());
        if (rest.filter)
          for (const auto& t : tail)
            if (!kind_matches(*rest.filter, t)) return false;
        caps.many[rest.name] = std::move(tail);
      }
      return match_named(p, call->named, caps);
    }
    case Pattern::Kind::Constraint: {
      const auto* c = e.get_if<ConstraintCall>();
      if (!c || c->type_name != p.heads.front() || c->type_param != p.type_param) return false;
      return match_named(p, c->named, caps);
    }
  }
  return false;
}

NamedArgs instantiate_named(const Pattern& t, const Captures& caps) {
  NamedArgs out;
  for (const auto& n : t.named) {
    if (n.absent || !n.pat) continue;
    if (n.pat->kind == Pattern::Kind::Capture && !caps.get(n.pat->name)) continue;
    out.emplace_back(n.key, instantiate(*n.pat, caps));
  }
  return out;
}

}  // namespace

PatternPtr parse_pattern(std::string_view text) {
  return std::make_shared<const Pattern>(PatternParser(text).parse_all());
}

const Expr* Captures::get(const std::string& name) const {
  auto it = one.find(name);
  return it == one.end() ? nullptr : &it->second;
}

std::optional<Captures> match_pattern(const Pattern& pattern, const Expr& expr) {
  Captures caps;
  if (!match_into(pattern, expr, caps)) return std::nullopt;
  return caps;
}

Expr instantiate(const Pattern& t, const Captures& caps) {
  switch (t.kind) {
    case Pattern::Kind::Wild:
      throw Error(ErrorCode::InvalidArgument, "wildcard in rewrite template");
    case Pattern::Kind::Capture: {
      const Expr* e = caps.get(t.name);
      if (!e) throw Error(ErrorCode::InvalidArgument, "template capture ?" + t.name + " is unbound");
      return *e;
    }
    case Pattern::Kind::Literal: return Expr{t.literal};
    case Pattern::Kind::Call: {
      std::vector<Expr> positional;
      for (const auto& p : t.positional) {
        if (p.kind == Pattern::Kind::Capture && p.rest) {
          auto it = caps.many.find(p.name);
          if (it != caps.many.end())
            positional.insert(positional.end(), it->second.begin(), it->second.end());
          continue;
        }
        if (p.kind == Pattern::Kind::Capture && !caps.get(p.name)) continue;
        positional.push_back(instantiate(p, caps));
      }
      return make_call(t.heads.front(), std::move(positional), instantiate_named(t, caps));
    }
    case Pattern::Kind::Constraint:
      return make_constraint(t.heads.front(), instantiate_named(t, caps), t.type_param);
  }
  throw Error(ErrorCode::InvalidArgument, "bad template");
}

const Expr* RewriteEnv::lookup(std::string_view name) const {
  if (!bindings) return nullptr;
  for (const auto& [k, v] : *bindings)
    if (k == name) return &v;
  return nullptr;
}

const Expr& RewriteEnv::resolve(const Expr& e) const {
  const Expr* cur = &e;
  for (int hops = 0; hops < 64; ++hops) {
    const auto* var = cur->get_if<VarRef>();
    if (!var) break;
    const Expr* next = lookup(var->name);
    if (!next) break;
    cur = next;
  }
  return *cur;
}

RewriteRule template_rule(std::string name, Phase phase, std::string doc, std::string_view pattern,
                          std::string_view templ, bool top_only) {
  RewriteRule r;
  r.name = std::move(name);
  r.phase = phase;
  r.doc = std::move(doc);
  r.pattern = parse_pattern(pattern);
  r.templ = parse_pattern(templ);
  r.top_only = top_only;
  return r;
}

RewriteRule transform_rule(std::string name, Phase phase, std::string doc, std::string_view pattern,
                           Transform transform, bool top_only) {
  RewriteRule r;
  r.name = std::move(name);
  r.phase = phase;
  r.doc = std::move(doc);
  if (!pattern.empty()) r.pattern = parse_pattern(pattern);
  r.transform = std::move(transform);
  r.top_only = top_only;
  return r;
}

// ---------------------------------------------------------------------------
// Traversal

std::vector<const Expr*> children(const Expr& e) {
  std::vector<const Expr*> out;
  if (const auto* call = e.get_if<Call>()) {
    for (const auto& p : call->positional) out.push_back(&p);
    for (const auto& [k, v] : call->named) out.push_back(&v);
  } else if (const auto* c = e.get_if<ConstraintCall>()) {
    for (const auto& [k, v] : c->named) out.push_back(&v);
  } else if (const auto* seq = e.get_if<AssignSeq>()) {
    for (const auto& [k, v] : seq->bindings) out.push_back(&v);
    out.push_back(&*seq->body);
  }
  return out;
}

namespace {

std::vector<Expr*> mutable_children(Expr& e) {
  std::vector<Expr*> out;
  if (auto* call = e.get_if<Call>()) {
    for (auto& p : call->positional) out.push_back(&p);
    for (auto& [k, v] : call->named) out.push_back(&v);
  } else if (auto* c = e.get_if<ConstraintCall>()) {
    for (auto& [k, v] : c->named) out.push_back(&v);
  } else if (auto* seq = e.get_if<AssignSeq>()) {
    for (auto& [k, v] : seq->bindings) out.push_back(&v);
    out.push_back(&*seq->body);
  }
  return out;
}

class Rewriter {
public:
  Rewriter(const RuleSet& rules, std::vector<TraceStep>& trace) : rules_(rules), trace_(trace) {}

  bool run_pass(Expr& root, int pass) {
    pass_ = pass;
    changed_ = false;
    std::vector<std::size_t> path;
    visit(root, path, true);
    return changed_;
  }

  const std::string& last_rule() const { return last_rule_; }

private:
  void visit(Expr& e, std::vector<std::size_t>& path, bool top) {
    if (auto* seq = e.get_if<AssignSeq>()) {
      const RewriteEnv saved = env_;
      env_.bindings = &seq->bindings;
      for (std::size_t i = 0; i < seq->bindings.size(); ++i) {
        path.push_back(i);
        visit(seq->bindings[i].second, path, false);
        path.pop_back();
      }
      path.push_back(seq->bindings.size());
      visit(*seq->body, path, top);
      path.pop_back();
      env_ = saved;
    } else {
      auto kids = mutable_children(e);
      for (std::size_t i = 0; i < kids.size(); ++i) {
        path.push_back(i);
        visit(*kids[i], path, false);
        path.pop_back();
      }
    }
    try_rules(e, path, top);
  }

  void try_rules(Expr& e, const std::vector<std::size_t>& path, bool top) {
    for (const auto& rule : rules_) {
      if (rule.top_only && !top) continue;
      Captures caps;
      if (rule.pattern) {
        auto m = match_pattern(*rule.pattern, e);
        if (!m) continue;
        caps = std::move(*m);
      }
      std::optional<Expr> out;
      if (rule.transform) out = rule.transform(e, caps, env_);
      else out = instantiate(*rule.templ, caps);
      if (!out || *out == e) continue;
      trace_.push_back(TraceStep{rule.name, pass_, path, e, *out});
      e = std::move(*out);
      changed_ = true;
      last_rule_ = rule.name;
      return;
    }
  }

  const RuleSet& rules_;
  std::vector<TraceStep>& trace_;
  RewriteEnv env_;
  int pass_ = 0;
  bool changed_ = false;
  std::string last_rule_;
};

}  // namespace

RewriteResult apply_rules(const Expr& expr, const RuleSet& rules, int max_passes) {
  RewriteResult result{expr, {}, 0};
  Rewriter rw(rules, result.trace);
  for (int pass = 1; pass <= max_passes; ++pass) {
    if (!rw.run_pass(result.expr, pass)) return result;
    result.passes = pass;
  }
  throw CycleError(rw.last_rule());
}

const Expr& subtree_at(const Expr& root, const std::vector<std::size_t>& path) {
  const Expr* cur = &root;
  for (auto i : path) {
    auto kids = children(*cur);
    if (i >= kids.size()) throw Error(ErrorCode::InvalidArgument, "bad subtree path");
    cur = kids[i];
  }
  return *cur;
}

void replace_at(Expr& root, const std::vector<std::size_t>& path, Expr replacement) {
  Expr* cur = &root;
  for (auto i : path) {
    auto kids = mutable_children(*cur);
    if (i >= kids.size()) throw Error(ErrorCode::InvalidArgument, "bad subtree path");
    cur = kids[i];
  }
  *cur = std::move(replacement);
}

std::string rule_manifest(const RuleSet& rules) {
  std::string out;
  for (const auto& r : rules) out += r.name + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Assignment inlining

namespace {

std::size_t count_uses(const Expr& e, const std::string& name) {
  if (const auto* v = e.get_if<VarRef>()) return v->name == name ? 1 : 0;
  std::size_t n = 0;
  for (const Expr* c : children(e)) n += count_uses(*c, name);
  return n;
}

void substitute(Expr& e, const std::string& name, const Expr& value) {
  if (const auto* v = e.get_if<VarRef>()) {
    if (v->name == name) e = value;
    return;
  }
  for (Expr* c : mutable_children(e)) substitute(*c, name, value);
}

}  // namespace

Expr inline_single_use(const Expr& expr) {
  const auto* seq0 = expr.get_if<AssignSeq>();
  if (!seq0) return expr;
  AssignSeq seq = *seq0;
  for (bool progress = true; progress;) {
    progress = false;
    for (std::size_t i = 0; i < seq.bindings.size(); ++i) {
      const std::string name = seq.bindings[i].first;
      std::size_t uses = count_uses(*seq.body, name);
      for (std::size_t j = i + 1; j < seq.bindings.size(); ++j) uses += count_uses(seq.bindings[j].second, name);
      if (uses > 1) continue;
      const Expr value = seq.bindings[i].second;
      if (uses == 1) {
        for (std::size_t j = i + 1; j < seq.bindings.size(); ++j) substitute(seq.bindings[j].second, name, value);
        substitute(*seq.body, name, value);
      }
      seq.bindings.erase(seq.bindings.begin() + std::ptrdiff_t(i));
      progress = true;
      break;
    }
  }
  if (seq.bindings.empty()) return *seq.body;
  return Expr{std::move(seq)};
}

// ---------------------------------------------------------------------------
// Rule sets

namespace {

const char* kEventBuilders =
    "EventOnDateTime|EventOnDate|EventAtTime|EventEndsAt|EventAtLocation|EventWithSubject";

// Same call with its first positional argument replaced by a capture.
Transform replace_first_with(std::string capture) {
  return [capture](const Expr& node, const Captures& caps, const RewriteEnv&) -> std::optional<Expr> {
    Call call = node.as<Call>();
    call.positional.front() = *caps.get(capture);
    return Expr{std::move(call)};
  };
}

Expr without_named(const Expr& node, std::string_view key) {
  Call call = node.as<Call>();
  call.named.erase(std::remove_if(call.named.begin(), call.named.end(),
                                  [&](const auto& kv) { return kv.first == key; }),
                   call.named.end());
  return Expr{std::move(call)};
}

bool is_call(const Expr& e, std::string_view func) {
  const auto* c = e.get_if<Call>();
  return c && c->func == func;
}

const Expr* single_arg(const Expr& e, std::string_view func) {
  const auto* c = e.get_if<Call>();
  if (!c || c->func != func || c->positional.size() != 1 || !c->named.empty()) return nullptr;
  return &c->positional.front();
}

// The date/time expression X in starts_at(X).
const Expr* starts_at_arg(const Expr& e) { return single_arg(e, "starts_at"); }

// `:date(:start(E))` for the event E, looking through variables.
bool is_own_date(const Expr& e, const Expr& event, const RewriteEnv& env) {
  const Expr* start = single_arg(env.resolve(e), ":date");
  if (!start) return false;
  const Expr* ev = single_arg(env.resolve(*start), ":start");
  return ev && (*ev == event || env.resolve(*ev) == env.resolve(event));
}

// For X = DateAtTimeWithDefaults(date=:date(:start(E)), time=T), returns T.
const Expr* own_date_time(const Expr& x, const Expr& event, const RewriteEnv& env) {
  const auto* call = env.resolve(x).get_if<Call>();
  if (!call || call->func != "DateAtTimeWithDefaults" || !call->positional.empty() || call->named.size() != 2)
    return nullptr;
  const Expr* date = find_named(call->named, "date");
  const Expr* time = find_named(call->named, "time");
  if (!date || !time || !is_own_date(*date, event, env)) return nullptr;
  return time;
}

std::optional<Expr> reduce_own_date(const Expr& c, const Expr& event, const RewriteEnv& env) {
  const auto* call = c.get_if<Call>();
  if (!call || !call->named.empty()) return std::nullopt;
  if (call->func == "starts_at" && call->positional.size() == 1) {
    if (const Expr* t = own_date_time(call->positional[0], event, env)) return make_call("starts_at", {*t});
  }
  if (call->func == "starts_at" && call->positional.size() == 2 &&
      is_own_date(call->positional[0], event, env))
    return make_call("starts_at", {call->positional[1]});
  if (call->func == "ends_at" && call->positional.size() == 1) {
    const auto* after = env.resolve(call->positional[0]).get_if<Call>();
    if (after && after->func == "TimeAfterDateTime" && after->positional.empty() && after->named.size() == 2) {
      const Expr* dt = find_named(after->named, "dateTime");
      const Expr* t = find_named(after->named, "time");
      if (dt && t && own_date_time(*dt, event, env)) return make_call("ends_at", {*t});
    }
  }
  return std::nullopt;
}

RuleSet build_simplify_rules() {
  const Phase S = Phase::Simplify;
  RuleSet rules;
  rules.push_back(template_rule("strip_yield", S, "Yield wraps every annotation and is added back on execution",
                                "Yield(?x)", "?x", true));
  rules.push_back(template_rule("fuse_delete", S, "delete preflight and commit become DeleteEvent",
                                "DeleteCommitEventWrapper(event=DeletePreflightEventWrapper(id=?x))",
                                "DeleteEvent(?x)"));
  rules.push_back(template_rule("fuse_update", S, "update preflight and commit become UpdateEvent",
                                "UpdateCommitEventWrapper(event=UpdatePreflightEventWrapper(id=?x, update=?u))",
                                "UpdateEvent(?x, ?u)"));
  rules.push_back(template_rule("fuse_create", S, "create preflight and commit become CreateEvent",
                                "CreateCommitEventWrapper(event=CreatePreflightEventWrapper(constraint=?c))",
                                "CreateEvent(?c)"));
  rules.push_back(transform_rule("drop_id", S, "DeleteEvent and UpdateEvent take events, not ids",
                                 "DeleteEvent|UpdateEvent(:id(?e), ?rest...)", replace_first_with("e")));
  rules.push_back(transform_rule(
      "drop_search", S, "DeleteEvent and UpdateEvent search for a described event themselves",
      "DeleteEvent|UpdateEvent(singleton(:results(FindEventWrapperWithDefaults(constraint=?c))), ?rest...)",
      replace_first_with("c")));
  rules.push_back(transform_rule(
      "drop_empty_event", S, "an empty Constraint[Event] argument adds nothing",
      std::string(kEventBuilders) + "(event=Constraint[Event]?(), **)",
      [](const Expr& node, const Captures&, const RewriteEnv&) -> std::optional<Expr> {
        return without_named(node, "event");
      }));
  rules.push_back(transform_rule(
      "nested_event_to_and", S, "a builder extending another constraint becomes a conjunction",
      std::string(kEventBuilders) + "(event=?c, **)",
      [](const Expr& node, const Captures& caps, const RewriteEnv&) -> std::optional<Expr> {
        return make_call("AND", {*caps.get("c"), without_named(node, "event")});
      }));
  rules.push_back(template_rule("on_datetime", S, "start constraint", "EventOnDateTime(dateTime=?x)",
                                "starts_at(?x)"));
  rules.push_back(template_rule("on_date", S, "start date constraint", "EventOnDate(date=?x)", "starts_at(?x)"));
  rules.push_back(template_rule("at_time", S, "start time constraint", "EventAtTime(time=?x)", "starts_at(?x)"));
  rules.push_back(template_rule("ends_at", S, "end constraint", "EventEndsAt(dateTime=?x)", "ends_at(?x)"));
  rules.push_back(template_rule("at_location", S, "location constraint", "EventAtLocation(location=?x)",
                                "at_location(?x)"));
  rules.push_back(template_rule("with_subject", S, "subject constraint", "EventWithSubject(subject=?x)",
                                "has_subject(?x)"));
  rules.push_back(template_rule("and_constraint", S, "binary conjunction", "andConstraint(?a, ?b)", "AND(?a, ?b)"));
  rules.push_back(transform_rule(
      "flatten_and", S, "nested conjunctions are merged", "AND(?xs...)",
      [](const Expr& node, const Captures&, const RewriteEnv&) -> std::optional<Expr> {
        const Call& call = node.as<Call>();
        std::vector<Expr> flat;
        bool nested = false;
        for (const auto& a : call.positional) {
          const auto* inner = a.get_if<Call>();
          if (inner && inner->func == "AND" && inner->named.empty()) {
            nested = true;
            flat.insert(flat.end(), inner->positional.begin(), inner->positional.end());
          } else {
            flat.push_back(a);
          }
        }
        if (!nested) return std::nullopt;
        return make_call("AND", std::move(flat), call.named);
      }));
  rules.push_back(template_rule("drop_date_defaults_start", S, "starts_at fills in date and time itself",
                                "starts_at(DateAtTimeWithDefaults(date=?d, time=?t))", "starts_at(?d, ?t)"));
  rules.push_back(template_rule("drop_date_defaults_end", S, "ends_at fills in date and time itself",
                                "ends_at(DateAtTimeWithDefaults(date=?d, time=?t))", "ends_at(?d, ?t)"));
  rules.push_back(transform_rule(
      "drop_self_end", S, "\"start at X and end after X\" searches just start at X",
      "FindEventWrapperWithDefaults(constraint=AND(?xs...))",
      [](const Expr& node, const Captures& caps, const RewriteEnv&) -> std::optional<Expr> {
        const auto& args = caps.many.at("xs");
        std::vector<Expr> kept;
        bool dropped = false;
        for (const auto& a : args) {
          const Expr* end = single_arg(a, "ends_at");
          const auto* after = end ? end->get_if<Call>() : nullptr;
          if (after && after->func == "TimeAfterDateTime") {
            const Expr* dt = find_named(after->named, "dateTime");
            const bool redundant = dt && std::any_of(args.begin(), args.end(), [&](const Expr& other) {
                                     const Expr* x = starts_at_arg(other);
                                     return x && *x == *dt;
                                   });
            if (redundant) {
              dropped = true;
              continue;
            }
          }
          kept.push_back(a);
        }
        if (!dropped) return std::nullopt;
        Expr constraint = kept.size() == 1 ? kept.front() : make_call("AND", std::move(kept));
        return make_call("FindEventWrapperWithDefaults", {}, {{"constraint", std::move(constraint)}});
      }));
  rules.push_back(transform_rule(
      "update_own_date", S, "moving an event to its own date only changes the time", "UpdateEvent(?e, ?u)",
      [](const Expr&, const Captures& caps, const RewriteEnv& env) -> std::optional<Expr> {
        Expr event = *caps.get("e");
        if (const Expr* inner = single_arg(event, ":id")) event = *inner;
        const Expr& u = *caps.get("u");
        bool changed = false;
        Expr update = u;
        if (is_call(u, "AND")) {
          Call c = u.as<Call>();
          for (auto& a : c.positional) {
            if (auto r = reduce_own_date(a, event, env)) {
              a = *r;
              changed = true;
            }
          }
          update = Expr{std::move(c)};
        } else if (auto r = reduce_own_date(u, event, env)) {
          update = *r;
          changed = true;
        }
        if (!changed) return std::nullopt;
        return make_call("UpdateEvent", {*caps.get("e"), std::move(update)});
      }));
  rules.push_back(transform_rule(
      "inline_single_use", S, "assignments used at most once are spliced into their use", "",
      [](const Expr& node, const Captures&, const RewriteEnv&) -> std::optional<Expr> {
        if (!node.is<AssignSeq>()) return std::nullopt;
        return inline_single_use(node);
      }));
  return rules;
}

RuleSet build_expand_rules() {
  const Phase E = Phase::Expand;
  RuleSet rules;
  rules.push_back(template_rule("expand_delete", E, "DeleteEvent runs as preflight then commit", "DeleteEvent(?x)",
                                "DeleteCommitEventWrapper(event=DeletePreflightEventWrapper(id=?x))"));
  rules.push_back(template_rule("expand_update", E, "UpdateEvent runs as preflight then commit",
                                "UpdateEvent(?x, ?u)",
                                "UpdateCommitEventWrapper(event=UpdatePreflightEventWrapper(id=?x, update=?u))"));
  rules.push_back(template_rule("expand_create", E, "CreateEvent runs as preflight then commit", "CreateEvent(?c)",
                                "CreateCommitEventWrapper(event=CreatePreflightEventWrapper(constraint=?c))"));
  rules.push_back(transform_rule(
      "add_yield", E, "every executed expression is wrapped in Yield", "",
      [](const Expr& node, const Captures&, const RewriteEnv&) -> std::optional<Expr> {
        if (node.is<AssignSeq>() || is_call(node, "Yield")) return std::nullopt;
        return make_call("Yield", {node});
      },
      true));
  return rules;
}

}  // namespace

const RuleSet& simplify_rules() {
  static const RuleSet rules = build_simplify_rules();
  return rules;
}

const RuleSet& expand_rules() {
  static const RuleSet rules = build_expand_rules();
  return rules;
}

Expr simplify(const Expr& expr) { return apply_rules(expr, simplify_rules()).expr; }

Expr expand(const Expr& expr) { return apply_rules(expr, expand_rules()).expr; }

std::string simplify_text(std::string_view text, Syntax syntax) {
  return print_call(simplify(parse(text, syntax)));
}

}  // namespace df
