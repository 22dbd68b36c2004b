#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace df {

enum class ErrorCode {
  Syntax,
  UnboundVariable,
  UnbalancedParens,
  UnknownFunction,
  Arity,
  UnknownParam,
  Type,
  DuplicateFunction,
  NoMatch,
  WrongAnswerType,
  EventVanished,
  InvalidUpdate,
  EmptySpec,
  Cycle,
  Io,
  EmptyCorpus,
  UnknownTurn,
  NoPending,
  Domain,
  InvalidArgument,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

// Parse errors carry the byte offset where the parser gave up.
class SyntaxError : public Error {
public:
  SyntaxError(std::size_t position, std::string expected)
      : Error(ErrorCode::Syntax, "syntax error at " + std::to_string(position) +
                                     ": expected " + expected),
        position_(position), expected_(std::move(expected)) {}

  std::size_t position() const noexcept { return position_; }
  const std::string& expected() const noexcept { return expected_; }

private:
  std::size_t position_;
  std::string expected_;
};

}  // namespace df
