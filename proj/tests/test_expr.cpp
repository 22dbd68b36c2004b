#include "expr.hpp"
#include "error.hpp"
#include "support.hpp"

#include <doctest.h>

#include <regex>

using namespace df;

namespace {

// Independent count: identifiers, numbers, strings and single punctuation characters.
std::size_t oracle_tokens(const std::string& text) {
  static const std::regex tok(R"re([A-Za-z_][A-Za-z0-9_]*|-?[0-9]+(\.[0-9]+)?|"(\\.|[^"\\])*"|[(),=;?:\[\]])re");
  return static_cast<std::size_t>(
      std::distance(std::sregex_iterator(text.begin(), text.end(), tok), std::sregex_iterator()));
}

ErrorCode code_of(std::string_view text, Syntax syntax) {
  try {
    parse(text, syntax);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("parse did not throw");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("call syntax parses nested calls, named args and literals") {
  const Expr e = parse_call(R"(f(1, -2.5, "a\"b", true, k=g(), m=x?(3)))");
  const auto& c = e.as<Call>();
  CHECK(c.func == "f");
  REQUIRE(c.positional.size() == 4);
  CHECK(c.positional[0] == make_lit(LiteralKind::Int, "1"));
  CHECK(c.positional[1] == make_lit(LiteralKind::Float, "-2.5"));
  CHECK(c.positional[2] == make_str("a\"b"));
  CHECK(c.positional[3] == make_lit(LiteralKind::Bool, "true"));
  REQUIRE(c.named.size() == 2);
  CHECK(c.named[0].first == "k");
  CHECK(c.named[1].second == make_constraint("x", {{"value", make_int(3)}}));
}

TEST_CASE("prefix syntax matches call syntax for the same program") {
  const Expr a = parse_prefix(R"((f 1 "s" :k (g) :m (x? 3)))");
  const Expr b = parse_call(R"(f(1, "s", k=g(), m=x?(3)))");
  CHECK(a == b);
  CHECK(print_call(a) == R"(f(1,"s",k=g(),m=x?(3)))");
}

TEST_CASE("let and assignment sequences are the same tree") {
  const Expr a = parse_prefix("(let (x0 (f 1) x1 (g x0)) (h x1 x0))");
  const Expr b = parse_call("x0 = f(1); x1 = g(x0); h(x1, x0)");
  CHECK(a == b);
  REQUIRE(a.is<AssignSeq>());
  CHECK(a.as<AssignSeq>().bindings.size() == 2);
}

TEST_CASE("getter calls and typed constraints") {
  const Expr e = parse_prefix("(:id (singleton (Constraint[Event])))");
  CHECK(print_call(e) == ":id(singleton(Constraint[Event]?()))");
  CHECK(parse_call(print_call(e)) == e);
  CHECK(print_prefix(e) == "(:id (singleton (Constraint[Event])))");
}

TEST_CASE("parse errors carry codes") {
  CHECK(code_of("f(", Syntax::Call) == ErrorCode::Syntax);
  CHECK(code_of("", Syntax::Call) == ErrorCode::Syntax);
  CHECK(code_of("f(k=1, 2)", Syntax::Call) == ErrorCode::Syntax);
  CHECK(code_of("f(k=1, k=2)", Syntax::Call) == ErrorCode::Syntax);
  CHECK(code_of("\"open", Syntax::Call) == ErrorCode::Syntax);
  CHECK(code_of("f(x)", Syntax::Call) == ErrorCode::UnboundVariable);
  CHECK(code_of("x = y; f(x)", Syntax::Call) == ErrorCode::UnboundVariable);
  CHECK(code_of("(f (g)", Syntax::Prefix) == ErrorCode::UnbalancedParens);
  CHECK(code_of("(f))", Syntax::Prefix) == ErrorCode::UnbalancedParens);
  CHECK(code_of("(let (x0 1 x0 2) x0)", Syntax::Prefix) == ErrorCode::Syntax);
  CHECK(code_of("f(12ab)", Syntax::Call) == ErrorCode::Syntax);
  CHECK(code_of("f(\"\\q\")", Syntax::Call) == ErrorCode::Syntax);
}

TEST_CASE("syntax errors report an offset") {
  try {
    parse_call("f(1,,2)");
    FAIL("expected a syntax error");
  } catch (const SyntaxError& e) {
    CHECK(e.position() == 4);
  }
}

TEST_CASE("token counts agree with an independent tokenizer") {
  for (const std::string text :
       {"Add(2,Add(3,5))", "DeleteEvent(starts_at(tomorrow(),NumberAM(10)))",
        R"((Yield (:start (singleton (:results (FindEventWrapperWithDefaults :constraint (EventWithSubject :subject "Yoga" :event (Constraint[Event]))))))))",
        R"(x0 = f("a b", -3); g(x0, k=Int?(1.5)))"}) {
    CAPTURE(text);
    CHECK(tokenize_for_length(text).size() == oracle_tokens(text));
  }
  CHECK(tokenize_for_length("Add(2,Add(3,5))").size() == 11);
}

TEST_CASE("token counts reject text that does not parse") {
  CHECK_THROWS_AS(tokenize_for_length("f(("), Error);
}

TEST_CASE("count_nodes counts calls, literals and constraints") {
  CHECK(count_nodes(parse_call("Add(2,Add(3,5))")) == 5);
}

TEST_CASE("string escapes round-trip") {
  const Expr e = make_call("f", {make_str("tab\there \"q\" back\\slash\nnl")});
  CHECK(parse_call(print_call(e)) == e);
  CHECK(parse_prefix(print_prefix(e)) == e);
}
