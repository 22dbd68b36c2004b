#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace df {

// Heap box with value semantics, used to break the AssignSeq -> Expr cycle.
template <class T>
class Box {
public:
  Box(T value) : ptr_(std::make_unique<T>(std::move(value))) {}
  Box(const Box& other) : ptr_(std::make_unique<T>(*other.ptr_)) {}
  Box(Box&&) noexcept = default;
  Box& operator=(const Box& other) {
    if (this != &other) ptr_ = std::make_unique<T>(*other.ptr_);
    return *this;
  }
  Box& operator=(Box&&) noexcept = default;

  T& operator*() { return *ptr_; }
  const T& operator*() const { return *ptr_; }
  T* operator->() { return ptr_.get(); }
  const T* operator->() const { return ptr_.get(); }

  friend bool operator==(const Box& a, const Box& b) { return *a.ptr_ == *b.ptr_; }

private:
  std::unique_ptr<T> ptr_;
};

enum class LiteralKind { Int, Float, Str, Bool };

struct Expr;
using NamedArgs = std::vector<std::pair<std::string, Expr>>;

struct Literal {
  LiteralKind kind;
  // Exact lexeme for numbers and booleans; decoded contents for strings.
  std::string text;

  bool operator==(const Literal&) const = default;
};

struct VarRef {
  std::string name;

  bool operator==(const VarRef&) const = default;
};

struct Call {
  std::string func;  // identifier, or ":field" for getter calls
  std::vector<Expr> positional;
  NamedArgs named;

  bool operator==(const Call&) const;
};

struct ConstraintCall {
  std::string type_name;
  std::optional<std::string> type_param;  // Constraint[Event] -> "Event"
  NamedArgs named;

  bool operator==(const ConstraintCall&) const;
};

struct AssignSeq {
  NamedArgs bindings;
  Box<Expr> body;

  bool operator==(const AssignSeq&) const;
};

struct Expr {
  std::variant<Literal, VarRef, Call, ConstraintCall, AssignSeq> node;

  bool operator==(const Expr&) const = default;

  template <class T>
  bool is() const { return std::holds_alternative<T>(node); }
  template <class T>
  const T& as() const { return std::get<T>(node); }
  template <class T>
  T& as() { return std::get<T>(node); }
  template <class T>
  const T* get_if() const { return std::get_if<T>(&node); }
  template <class T>
  T* get_if() { return std::get_if<T>(&node); }
};

inline bool Call::operator==(const Call&) const = default;
inline bool ConstraintCall::operator==(const ConstraintCall&) const = default;
inline bool AssignSeq::operator==(const AssignSeq&) const = default;

// Builders, mostly for tests and rule templates.
Expr make_int(long long v);
Expr make_lit(LiteralKind kind, std::string text);
Expr make_str(std::string s);
Expr make_var(std::string name);
Expr make_call(std::string func, std::vector<Expr> positional = {}, NamedArgs named = {});
Expr make_constraint(std::string type_name, NamedArgs named = {},
                     std::optional<std::string> type_param = std::nullopt);

// Returns the value of a named argument, or nullptr.
const Expr* find_named(const NamedArgs& args, std::string_view name);

enum class Syntax { Call, Prefix };

std::optional<Syntax> parse_syntax_name(std::string_view name);

// Simplified (Python-like) call syntax:
//   program := (binding ';')* expr
//   expr    := call | constraint | literal | varref
Expr parse_call(std::string_view text);

// Original parenthesized prefix syntax: (Func arg ... :key val ...),
// (let (x0 e0 x1 e1) body), (Constraint[T]), (Int? :value 3).
Expr parse_prefix(std::string_view text);

Expr parse(std::string_view text, Syntax syntax);

std::string print_call(const Expr& expr);
std::string print_prefix(const Expr& expr);
std::string print(const Expr& expr, Syntax syntax);

// One token per identifier, literal and punctuation character.
struct TokenSeq {
  std::vector<std::string> tokens;

  std::size_t size() const { return tokens.size(); }
  bool operator==(const TokenSeq&) const = default;
};

// Lexes without validating; used by tokenize_for_length after a parse check.
TokenSeq lex_tokens(std::string_view text);
TokenSeq tokenize_for_length(std::string_view text);

// Verifies binding-name uniqueness and that every VarRef is bound by an
// earlier binding or, inside the body, by any binding.
void check_bindings(const Expr& expr);

std::size_t count_nodes(const Expr& expr);

bool is_identifier(std::string_view s);

}  // namespace df
