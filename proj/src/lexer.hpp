#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace df::detail {

enum class TokKind { Ident, Int, Float, Str, Punct, End };

struct Token {
  TokKind kind;
  std::string text;  // punctuation char, identifier, number lexeme, or decoded string
  std::string raw;   // exact source lexeme
  std::size_t pos;
};

// Splits text into identifiers, numbers, double-quoted strings and the
// punctuation characters ( ) , = ; ? : [ ]. Throws SyntaxError on anything else.
std::vector<Token> lex(std::string_view text);

std::string quote_string(std::string_view s);

}  // namespace df::detail
