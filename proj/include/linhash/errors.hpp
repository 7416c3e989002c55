#pragma once

#include <stdexcept>
#include <string>

namespace linhash {

// Operand dimensions do not line up (e.g. applying a u->b map to a vector of dim != u).
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Input violates an operation's precondition (non-surjective T1, empty map family, ...).
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An exhaustive or memory-bound operation refused to run because the object count
// exceeds its guard.
class SizeGuardError : public std::length_error {
 public:
  using std::length_error::length_error;
};

}  // namespace linhash
