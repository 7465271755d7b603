#include "hypclass/error.hpp"

#include <cstdio>

namespace hypclass {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::NotOnSigma: return "not-on-sigma";
    case ErrorKind::RankMismatch: return "rank-mismatch";
    case ErrorKind::Degenerate: return "degenerate";
    case ErrorKind::NotTransitionPoint: return "not-a-transition-point";
    case ErrorKind::SingularBlock: return "singular-block";
    case ErrorKind::Convergence: return "convergence";
    case ErrorKind::Precondition: return "precondition";
    case ErrorKind::Inconsistency: return "inconsistency";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(what), kind_(kind) {}

static std::string parse_what(const std::string& message, std::size_t position,
                              std::size_t line) {
  std::string out = "parse error";
  if (line > 0) out += " at line " + std::to_string(line);
  out += " at position " + std::to_string(position) + ": " + message;
  return out;
}

ParseError::ParseError(const std::string& message, std::size_t position, std::size_t line)
    : Error(ErrorKind::Parse, parse_what(message, position, line)),
      message_(message),
      position_(position),
      line_(line) {}

}  // namespace hypclass
