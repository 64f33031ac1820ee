#pragma once

#include <stdexcept>
#include <string>

namespace tfcs {

/// Raised when an operation is called outside its stated preconditions.
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Argument lies outside the domain on which a formula is defined.
class DomainError : public ContractViolation {
 public:
  using ContractViolation::ContractViolation;
};

/// A recovery theorem was asked for constants outside its hypotheses.
class TheoremInapplicable : public ContractViolation {
 public:
  using ContractViolation::ContractViolation;
};

/// Exhaustive support enumeration would exceed the configured budget.
class EnumerationTooLarge : public ContractViolation {
 public:
  using ContractViolation::ContractViolation;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw ContractViolation(what);
}

}  // namespace tfcs
