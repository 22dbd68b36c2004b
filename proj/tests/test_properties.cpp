#include "generators.hpp"
#include "support.hpp"

#include <doctest.h>

#include <random>

using namespace df;

TEST_CASE("call syntax round-trips 10000 random programs") {
  testing::ExprGen gen(1234);
  for (int i = 0; i < 10000; ++i) {
    const Expr e = gen.program();
    const std::string text = print_call(e);
    CAPTURE(text);
    const Expr back = parse_call(text);
    REQUIRE(back == e);
    REQUIRE(print_call(back) == text);
  }
}

TEST_CASE("prefix syntax round-trips 10000 random programs") {
  testing::ExprGen gen(5678);
  for (int i = 0; i < 10000; ++i) {
    const Expr e = gen.program();
    const std::string text = print_prefix(e);
    CAPTURE(text);
    const Expr back = parse_prefix(text);
    REQUIRE(back == e);
    REQUIRE(print_prefix(back) == text);
  }
}

TEST_CASE("both syntaxes parse to the same tree") {
  testing::ExprGen gen(91011);
  for (int i = 0; i < 10000; ++i) {
    const Expr e = gen.program();
    CAPTURE(print_call(e));
    REQUIRE(parse_call(print_call(e)) == parse_prefix(print_prefix(e)));
  }
}

TEST_CASE("resuming a missing input equals the complete program") {
  testing::ExprGen gen(42);
  for (int i = 0; i < 200; ++i) {
    const testing::ResumeCase c = testing::make_resume_case(gen);
    CAPTURE(c.partial);
    CAPTURE(c.answer);
    testing::Dialogue direct;
    const Outcome whole = direct.turn(c.full);
    REQUIRE(whole.kind == OutcomeKind::Success);

    testing::Dialogue resumed;
    const Outcome p = resumed.turn(c.partial);
    REQUIRE(p.kind == OutcomeKind::Pending);
    REQUIRE(p.exception->kind == ExceptionKind::MissingInput);
    const Outcome r = resumed.turn(c.answer);
    REQUIRE(r.kind == OutcomeKind::Success);
    CHECK(r.message == whole.message);
    CHECK(r.message == std::to_string(c.sum));
  }
}

TEST_CASE("token counts ignore whitespace") {
  testing::ExprGen gen(2024);
  std::mt19937 rng(99);
  static const char* gaps[] = {"", " ", "  ", "\t", "\n", " \n "};
  for (int i = 0; i < 2000; ++i) {
    const std::string text = print_call(gen.program());
    CAPTURE(text);
    const auto tokens = tokenize_for_length(text);
    std::string spaced, perturbed;
    for (const auto& tok : tokens.tokens) {
      spaced += (spaced.empty() ? "" : " ") + tok;
      perturbed += gaps[rng() % 6] + tok;
    }
    REQUIRE(tokenize_for_length(spaced) == tokens);
    REQUIRE(tokenize_for_length(perturbed + gaps[rng() % 6]) == tokens);
  }
}
