#pragma once

#include <stdexcept>
#include <string>

namespace avspo {

// Thrown when an input violates a documented precondition (bad reward value,
// group too small, K out of range, ...).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Thrown when an internal invariant trips during a computation (for example a
// non-finite gradient). These indicate a bug, not bad input.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Parse failures for config, environment, trace and reward-log files. The
// message names the offending key or line.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw InvalidArgument(msg);
}

}  // namespace avspo
