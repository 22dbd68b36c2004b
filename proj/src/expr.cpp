#include "expr.hpp"

#include "error.hpp"
#include "lexer.hpp"

#include <cctype>

namespace df {

Expr make_int(long long v) { return make_lit(LiteralKind::Int, std::to_string(v)); }

Expr make_lit(LiteralKind kind, std::string text) { return Expr{Literal{kind, std::move(text)}}; }

Expr make_str(std::string s) { return make_lit(LiteralKind::Str, std::move(s)); }

Expr make_var(std::string name) { return Expr{VarRef{std::move(name)}}; }

Expr make_call(std::string func, std::vector<Expr> positional, NamedArgs named) {
  return Expr{Call{std::move(func), std::move(positional), std::move(named)}};
}

Expr make_constraint(std::string type_name, NamedArgs named,
                     std::optional<std::string> type_param) {
  return Expr{ConstraintCall{std::move(type_name), std::move(type_param), std::move(named)}};
}

const Expr* find_named(const NamedArgs& args, std::string_view name) {
  for (const auto& [k, v] : args)
    if (k == name) return &v;
  return nullptr;
}

std::optional<Syntax> parse_syntax_name(std::string_view name) {
  if (name == "call") return Syntax::Call;
  if (name == "prefix") return Syntax::Prefix;
  return std::nullopt;
}

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  if (!(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  for (char c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  return true;
}

namespace {

std::string literal_text(const Literal& lit) {
  return lit.kind == LiteralKind::Str ? detail::quote_string(lit.text) : lit.text;
}

// A constraint whose only field is `value` prints in the short T?(v) form.
bool value_shorthand(const ConstraintCall& c) {
  return c.named.size() == 1 && c.named.front().first == "value";
}

void print_call_to(const Expr& e, std::string& out) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Literal>) {
          out += literal_text(n);
        } else if constexpr (std::is_same_v<T, VarRef>) {
          out += n.name;
        } else if constexpr (std::is_same_v<T, Call>) {
          out += n.func;
          out += '(';
          bool first = true;
          for (const auto& a : n.positional) {
            if (!first) out += ',';
            first = false;
            print_call_to(a, out);
          }
          for (const auto& [k, v] : n.named) {
            if (!first) out += ',';
            first = false;
            out += k;
            out += '=';
            print_call_to(v, out);
          }
          out += ')';
        } else if constexpr (std::is_same_v<T, ConstraintCall>) {
          out += n.type_name;
          if (n.type_param) out += "[" + *n.type_param + "]";
          out += "?(";
          if (value_shorthand(n)) {
            print_call_to(n.named.front().second, out);
          } else {
            bool first = true;
            for (const auto& [k, v] : n.named) {
              if (!first) out += ',';
              first = false;
              out += k;
              out += '=';
              print_call_to(v, out);
            }
          }
          out += ')';
        } else {
          for (const auto& [k, v] : n.bindings) {
            out += k;
            out += '=';
            print_call_to(v, out);
            out += "; ";
          }
          print_call_to(*n.body, out);
        }
      },
      e.node);
}

void print_prefix_to(const Expr& e, std::string& out) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Literal>) {
          out += literal_text(n);
        } else if constexpr (std::is_same_v<T, VarRef>) {
          out += n.name;
        } else if constexpr (std::is_same_v<T, Call>) {
          out += '(';
          out += n.func;
          for (const auto& a : n.positional) {
            out += ' ';
            print_prefix_to(a, out);
          }
          for (const auto& [k, v] : n.named) {
            out += " :" + k + " ";
            print_prefix_to(v, out);
          }
          out += ')';
        } else if constexpr (std::is_same_v<T, ConstraintCall>) {
          out += '(';
          out += n.type_name;
          if (n.type_param)
            out += "[" + *n.type_param + "]";
          else
            out += '?';
          if (value_shorthand(n)) {
            out += ' ';
            print_prefix_to(n.named.front().second, out);
          } else {
            for (const auto& [k, v] : n.named) {
              out += " :" + k + " ";
              print_prefix_to(v, out);
            }
          }
          out += ')';
        } else {
          out += "(let (";
          bool first = true;
          for (const auto& [k, v] : n.bindings) {
            if (!first) out += ' ';
            first = false;
            out += k + " ";
            print_prefix_to(v, out);
          }
          out += ") ";
          print_prefix_to(*n.body, out);
          out += ')';
        }
      },
      e.node);
}

}  // namespace

std::string print_call(const Expr& expr) {
  std::string out;
  print_call_to(expr, out);
  return out;
}

std::string print_prefix(const Expr& expr) {
  std::string out;
  print_prefix_to(expr, out);
  return out;
}

std::string print(const Expr& expr, Syntax syntax) {
  return syntax == Syntax::Call ? print_call(expr) : print_prefix(expr);
}

TokenSeq lex_tokens(std::string_view text) {
  TokenSeq seq;
  for (const auto& t : detail::lex(text))
    if (t.kind != detail::TokKind::End) seq.tokens.push_back(t.raw);
  return seq;
}

TokenSeq tokenize_for_length(std::string_view text) {
  try {
    (void)parse_call(text);
  } catch (const Error&) {
    // Not call syntax; the prefix parser's error is the one reported.
    (void)parse_prefix(text);
  }
  return lex_tokens(text);
}

std::size_t count_nodes(const Expr& expr) {
  return std::visit(
      [](const auto& n) -> std::size_t {
        using T = std::decay_t<decltype(n)>;
        std::size_t total = 1;
        if constexpr (std::is_same_v<T, Call>) {
          for (const auto& a : n.positional) total += count_nodes(a);
          for (const auto& [k, v] : n.named) total += count_nodes(v);
        } else if constexpr (std::is_same_v<T, ConstraintCall>) {
          for (const auto& [k, v] : n.named) total += count_nodes(v);
        } else if constexpr (std::is_same_v<T, AssignSeq>) {
          for (const auto& [k, v] : n.bindings) total += count_nodes(v);
          total += count_nodes(*n.body);
        }
        return total;
      },
      expr.node);
}

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::Syntax: return "SyntaxError";
    case ErrorCode::UnboundVariable: return "UnboundVariable";
    case ErrorCode::UnbalancedParens: return "UnbalancedParens";
    case ErrorCode::UnknownFunction: return "UnknownFunction";
    case ErrorCode::Arity: return "ArityError";
    case ErrorCode::UnknownParam: return "UnknownParam";
    case ErrorCode::Type: return "TypeError";
    case ErrorCode::DuplicateFunction: return "DuplicateFunction";
    case ErrorCode::NoMatch: return "NoMatch";
    case ErrorCode::WrongAnswerType: return "WrongAnswerType";
    case ErrorCode::EventVanished: return "EventVanished";
    case ErrorCode::InvalidUpdate: return "InvalidUpdate";
    case ErrorCode::EmptySpec: return "EmptySpec";
    case ErrorCode::Cycle: return "CycleError";
    case ErrorCode::Io: return "IoError";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::UnknownTurn: return "UnknownTurn";
    case ErrorCode::NoPending: return "NoPending";
    case ErrorCode::Domain: return "DomainError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Error";
}

}  // namespace df
