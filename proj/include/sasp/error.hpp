#pragma once

#include <stdexcept>
#include <string>

namespace sasp {

struct SaspError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : SaspError {
  ParseError(const std::string& msg, int line, int col)
      : SaspError(std::to_string(line) + ":" + std::to_string(col) + ": " + msg),
        line(line),
        col(col) {}
  int line;
  int col;
};

// Fatal runtime conditions; these abort the solving session.
struct FatalError : SaspError {
  using SaspError::SaspError;
};

struct IllegalDisunification : FatalError {
  explicit IllegalDisunification(const std::string& detail)
      : FatalError("illegal disunification of two negatively constrained variables: " + detail) {}
};

struct NonGroundArithmetic : FatalError {
  explicit NonGroundArithmetic(const std::string& detail)
      : FatalError("arithmetic on non-ground or non-numeric operand: " + detail) {}
};

struct DivisionByZero : FatalError {
  DivisionByZero() : FatalError("division by zero") {}
};

struct DepthLimitExceeded : FatalError {
  DepthLimitExceeded() : FatalError("call-stack depth limit exceeded") {}
};

struct UniverseTooLarge : FatalError {
  explicit UniverseTooLarge(const std::string& detail)
      : FatalError("grounding exceeds instantiation cap: " + detail) {}
};

struct AtomBoundExceeded : FatalError {
  explicit AtomBoundExceeded(const std::string& detail)
      : FatalError("stable-model enumeration bound exceeded: " + detail) {}
};

}  // namespace sasp
