#pragma once

#include <stdexcept>
#include <string>

namespace qhit {

/// Input lies outside the mathematical domain of an operation
/// (a point outside a branch image, a ball of zero mass).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Caller broke a documented precondition (mismatched bin counts,
/// missing exponent, empty sample).
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A configured resource cap would be exceeded.
class ResourceError : public std::length_error {
 public:
  using std::length_error::length_error;
};

}  // namespace qhit
