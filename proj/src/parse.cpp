#include "error.hpp"
#include "expr.hpp"
#include "lexer.hpp"

#include <set>

namespace df {

using detail::Token;
using detail::TokKind;

namespace {

bool is_reserved(std::string_view s) { return s == "true" || s == "false" || s == "let"; }

class TokenStream {
public:
  explicit TokenStream(std::string_view text) : toks_(detail::lex(text)) {}

  const Token& peek(std::size_t ahead = 0) const {
    const std::size_t j = i_ + ahead;
    return j < toks_.size() ? toks_[j] : toks_.back();
  }
  const Token& next() {
    const Token& t = toks_[i_];
    if (i_ + 1 < toks_.size()) ++i_;
    return t;
  }
  bool at_punct(char c, std::size_t ahead = 0) const {
    const Token& t = peek(ahead);
    return t.kind == TokKind::Punct && t.text[0] == c;
  }
  bool at_end() const { return peek().kind == TokKind::End; }
  void expect_punct(char c) {
    if (!at_punct(c)) throw SyntaxError(peek().pos, std::string("'") + c + "'");
    next();
  }
  std::string expect_ident() {
    if (peek().kind != TokKind::Ident) throw SyntaxError(peek().pos, "identifier");
    return next().text;
  }

private:
  std::vector<Token> toks_;
  std::size_t i_ = 0;
};

Expr literal_from(const Token& t) {
  switch (t.kind) {
    case TokKind::Int: return make_lit(LiteralKind::Int, t.text);
    case TokKind::Float: return make_lit(LiteralKind::Float, t.text);
    case TokKind::Str: return make_lit(LiteralKind::Str, t.text);
    default: return make_lit(LiteralKind::Bool, t.text);
  }
}

bool is_literal_token(const Token& t) {
  return t.kind == TokKind::Int || t.kind == TokKind::Float || t.kind == TokKind::Str ||
         (t.kind == TokKind::Ident && (t.text == "true" || t.text == "false"));
}

void add_named(NamedArgs& named, std::string key, Expr value, std::size_t pos) {
  if (find_named(named, key)) throw SyntaxError(pos, "unique argument name '" + key + "'");
  named.emplace_back(std::move(key), std::move(value));
}

// ---------------------------------------------------------------------------
// Call syntax

class CallParser {
public:
  explicit CallParser(std::string_view text) : ts_(text) {}

  Expr program() {
    NamedArgs bindings;
    while (ts_.peek().kind == TokKind::Ident && ts_.at_punct('=', 1)) {
      const Token& name = ts_.next();
      if (is_reserved(name.text)) throw SyntaxError(name.pos, "binding name");
      ts_.next();
      Expr value = expr();
      ts_.expect_punct(';');
      if (find_named(bindings, name.text))
        throw SyntaxError(name.pos, "unique binding name '" + name.text + "'");
      bindings.emplace_back(name.text, std::move(value));
    }
    Expr body = expr();
    if (!ts_.at_end()) throw SyntaxError(ts_.peek().pos, "end of input");
    if (bindings.empty()) return body;
    return Expr{AssignSeq{std::move(bindings), Box<Expr>(std::move(body))}};
  }

private:
  Expr expr() {
    const Token& t = ts_.peek();
    if (is_literal_token(t) && !(t.kind == TokKind::Ident && ts_.at_punct('(', 1)))
      return literal_from(ts_.next());
    if (t.kind == TokKind::Punct && t.text == ":") {
      ts_.next();
      std::string name = ":" + ts_.expect_ident();
      return call_args(std::move(name));
    }
    if (t.kind != TokKind::Ident) throw SyntaxError(t.pos, "expression");
    std::string name = ts_.next().text;
    if (ts_.at_punct('(')) return call_args(std::move(name));
    if (ts_.at_punct('[')) {
      ts_.next();
      std::string param = ts_.expect_ident();
      ts_.expect_punct(']');
      ts_.expect_punct('?');
      return constraint_args(std::move(name), std::move(param));
    }
    if (ts_.at_punct('?')) {
      ts_.next();
      return constraint_args(std::move(name), std::nullopt);
    }
    if (is_reserved(name)) throw SyntaxError(t.pos, "expression");
    return make_var(std::move(name));
  }

  Expr call_args(std::string func) {
    ts_.expect_punct('(');
    Call call{std::move(func), {}, {}};
    if (!ts_.at_punct(')')) {
      while (true) {
        const std::size_t pos = ts_.peek().pos;
        if (ts_.peek().kind == TokKind::Ident && ts_.at_punct('=', 1)) {
          std::string key = ts_.next().text;
          ts_.next();
          add_named(call.named, std::move(key), expr(), pos);
        } else {
          if (!call.named.empty()) throw SyntaxError(pos, "named argument");
          call.positional.push_back(expr());
        }
        if (ts_.at_punct(',')) {
          ts_.next();
          continue;
        }
        break;
      }
    }
    ts_.expect_punct(')');
    return Expr{std::move(call)};
  }

  Expr constraint_args(std::string type_name, std::optional<std::string> param) {
    ts_.expect_punct('(');
    ConstraintCall c{std::move(type_name), std::move(param), {}};
    bool first = true;
    if (!ts_.at_punct(')')) {
      while (true) {
        const std::size_t pos = ts_.peek().pos;
        if (ts_.peek().kind == TokKind::Ident && ts_.at_punct('=', 1)) {
          std::string key = ts_.next().text;
          ts_.next();
          add_named(c.named, std::move(key), expr(), pos);
        } else {
          // T?(v) is shorthand for T?(value=v).
          if (!first) throw SyntaxError(pos, "named field constraint");
          add_named(c.named, "value", expr(), pos);
        }
        first = false;
        if (ts_.at_punct(',')) {
          ts_.next();
          continue;
        }
        break;
      }
    }
    ts_.expect_punct(')');
    return Expr{std::move(c)};
  }

  TokenStream ts_;
};

// ---------------------------------------------------------------------------
// Prefix syntax

class PrefixParser {
public:
  explicit PrefixParser(std::string_view text) : ts_(text) {}

  Expr program() {
    Expr e = expr(true);
    if (!ts_.at_end()) {
      if (ts_.at_punct(')')) throw Error(ErrorCode::UnbalancedParens,
                                         "unbalanced ')' at " + std::to_string(ts_.peek().pos));
      throw SyntaxError(ts_.peek().pos, "end of input");
    }
    return e;
  }

private:
  void check_not_end() {
    if (ts_.at_end())
      throw Error(ErrorCode::UnbalancedParens, "unbalanced '(': input ended inside a form");
  }

  Expr expr(bool top) {
    check_not_end();
    const Token& t = ts_.peek();
    if (is_literal_token(t)) return literal_from(ts_.next());
    if (t.kind == TokKind::Ident) {
      if (is_reserved(t.text)) throw SyntaxError(t.pos, "expression");
      return make_var(ts_.next().text);
    }
    if (!ts_.at_punct('(')) {
      if (ts_.at_punct(')'))
        throw Error(ErrorCode::UnbalancedParens, "unbalanced ')' at " + std::to_string(t.pos));
      throw SyntaxError(t.pos, "expression");
    }
    ts_.next();
    check_not_end();
    const Token& head = ts_.peek();
    if (head.kind == TokKind::Ident && head.text == "let") {
      if (!top) throw SyntaxError(head.pos, "let only at top level");
      ts_.next();
      return let_form();
    }
    std::string name;
    if (ts_.at_punct(':')) {
      ts_.next();
      name = ":" + ts_.expect_ident();
      return call_rest(std::move(name));
    }
    if (head.kind != TokKind::Ident) throw SyntaxError(head.pos, "function name");
    name = ts_.next().text;
    if (ts_.at_punct('[')) {
      ts_.next();
      std::string param = ts_.expect_ident();
      ts_.expect_punct(']');
      if (ts_.at_punct('?')) ts_.next();
      return constraint_rest(std::move(name), std::move(param));
    }
    if (ts_.at_punct('?')) {
      ts_.next();
      return constraint_rest(std::move(name), std::nullopt);
    }
    return call_rest(std::move(name));
  }

  Expr let_form() {
    ts_.expect_punct('(');
    NamedArgs bindings;
    while (!ts_.at_punct(')')) {
      check_not_end();
      const Token& name = ts_.peek();
      if (name.kind != TokKind::Ident || is_reserved(name.text))
        throw SyntaxError(name.pos, "binding name");
      std::string key = ts_.next().text;
      Expr value = expr(false);
      if (find_named(bindings, key))
        throw SyntaxError(name.pos, "unique binding name '" + key + "'");
      bindings.emplace_back(std::move(key), std::move(value));
    }
    ts_.next();
    Expr body = expr(false);
    close();
    if (bindings.empty()) return body;
    return Expr{AssignSeq{std::move(bindings), Box<Expr>(std::move(body))}};
  }

  void close() {
    check_not_end();
    if (!ts_.at_punct(')')) throw SyntaxError(ts_.peek().pos, "')'");
    ts_.next();
  }

  Expr call_rest(std::string func) {
    Call call{std::move(func), {}, {}};
    while (!ts_.at_punct(')')) {
      check_not_end();
      const std::size_t pos = ts_.peek().pos;
      if (ts_.at_punct(':') && ts_.peek(1).kind == TokKind::Ident) {
        ts_.next();
        std::string key = ts_.next().text;
        add_named(call.named, std::move(key), expr(false), pos);
      } else {
        if (!call.named.empty()) throw SyntaxError(pos, "named argument");
        call.positional.push_back(expr(false));
      }
    }
    ts_.next();
    return Expr{std::move(call)};
  }

  Expr constraint_rest(std::string type_name, std::optional<std::string> param) {
    ConstraintCall c{std::move(type_name), std::move(param), {}};
    bool first = true;
    while (!ts_.at_punct(')')) {
      check_not_end();
      const std::size_t pos = ts_.peek().pos;
      if (ts_.at_punct(':') && ts_.peek(1).kind == TokKind::Ident) {
        ts_.next();
        std::string key = ts_.next().text;
        add_named(c.named, std::move(key), expr(false), pos);
      } else {
        if (!first) throw SyntaxError(pos, "named field constraint");
        add_named(c.named, "value", expr(false), pos);
      }
      first = false;
    }
    ts_.next();
    return Expr{std::move(c)};
  }

  TokenStream ts_;
};

}  // namespace

Expr parse_call(std::string_view text) {
  if (text.find_first_not_of(" \t\r\n") == std::string_view::npos)
    throw SyntaxError(0, "expression");
  Expr e = CallParser(text).program();
  check_bindings(e);
  return e;
}

Expr parse_prefix(std::string_view text) {
  if (text.find_first_not_of(" \t\r\n") == std::string_view::npos)
    throw SyntaxError(0, "expression");
  Expr e = PrefixParser(text).program();
  check_bindings(e);
  return e;
}

Expr parse(std::string_view text, Syntax syntax) {
  return syntax == Syntax::Call ? parse_call(text) : parse_prefix(text);
}

namespace {

void check_scope(const Expr& e, std::set<std::string>& bound) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, VarRef>) {
          if (!bound.count(n.name))
            throw Error(ErrorCode::UnboundVariable, "unbound variable '" + n.name + "'");
        } else if constexpr (std::is_same_v<T, Call>) {
          for (const auto& a : n.positional) check_scope(a, bound);
          for (const auto& [k, v] : n.named) check_scope(v, bound);
        } else if constexpr (std::is_same_v<T, ConstraintCall>) {
          for (const auto& [k, v] : n.named) check_scope(v, bound);
        } else if constexpr (std::is_same_v<T, AssignSeq>) {
          std::set<std::string> local = bound;
          std::set<std::string> seen;
          for (const auto& [name, value] : n.bindings) {
            if (!seen.insert(name).second)
              throw Error(ErrorCode::Syntax, "duplicate binding '" + name + "'");
            check_scope(value, local);
            local.insert(name);
          }
          check_scope(*n.body, local);
        }
      },
      e.node);
}

}  // namespace

void check_bindings(const Expr& expr) {
  std::set<std::string> bound;
  check_scope(expr, bound);
}

}  // namespace df
