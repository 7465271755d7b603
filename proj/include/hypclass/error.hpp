#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hypclass {

enum class ErrorKind {
  Parse,
  Domain,
  NotOnSigma,
  RankMismatch,
  Degenerate,
  NotTransitionPoint,
  SingularBlock,
  Convergence,
  Precondition,
  Inconsistency,
  Io,
};

const char* to_string(ErrorKind kind);

// Compact %.6g rendering for messages.
std::string num(double v);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Position is a 0-based byte offset in the parsed text; line is 1-based when
// the text came from a file, 0 otherwise.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t position, std::size_t line = 0);
  std::size_t position() const noexcept { return position_; }
  std::size_t line() const noexcept { return line_; }
  const std::string& message() const noexcept { return message_; }

 private:
  std::string message_;
  std::size_t position_;
  std::size_t line_;
};

}  // namespace hypclass
