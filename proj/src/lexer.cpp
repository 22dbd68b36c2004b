#include "lexer.hpp"

#include "error.hpp"

#include <cctype>

namespace df::detail {

namespace {

bool is_ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}

bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

constexpr std::string_view kPunct = "(),=;?:[]";

}  // namespace

std::vector<Token> lex(std::string_view text) {
  std::vector<Token> out;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    if (is_ident_start(c)) {
      while (i < n && is_ident_char(text[i])) ++i;
      std::string s(text.substr(start, i - start));
      out.push_back({TokKind::Ident, s, s, start});
    } else if (is_digit(c) || (c == '-' && i + 1 < n && is_digit(text[i + 1]))) {
      ++i;
      while (i < n && is_digit(text[i])) ++i;
      TokKind kind = TokKind::Int;
      if (i + 1 < n && text[i] == '.' && is_digit(text[i + 1])) {
        kind = TokKind::Float;
        ++i;
        while (i < n && is_digit(text[i])) ++i;
      }
      if (i < n && is_ident_char(text[i])) throw SyntaxError(i, "end of number");
      std::string s(text.substr(start, i - start));
      out.push_back({kind, s, s, start});
    } else if (c == '"') {
      ++i;
      std::string value;
      bool closed = false;
      while (i < n) {
        const char d = text[i++];
        if (d == '"') {
          closed = true;
          break;
        }
        if (d == '\\') {
          if (i >= n) break;
          const char e = text[i++];
          switch (e) {
            case 'n': value += '\n'; break;
            case 't': value += '\t'; break;
            case '"': value += '"'; break;
            case '\\': value += '\\'; break;
            default: throw SyntaxError(i - 1, "valid escape");
          }
        } else {
          value += d;
        }
      }
      if (!closed) throw SyntaxError(start, "closing quote");
      out.push_back({TokKind::Str, value, std::string(text.substr(start, i - start)), start});
    } else if (kPunct.find(c) != std::string_view::npos) {
      ++i;
      std::string s(1, c);
      out.push_back({TokKind::Punct, s, s, start});
    } else {
      throw SyntaxError(start, "token");
    }
  }
  out.push_back({TokKind::End, "", "", n});
  return out;
}

std::string quote_string(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  out += '"';
  return out;
}

}  // namespace df::detail
