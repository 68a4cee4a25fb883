#pragma once

#include <stdexcept>
#include <string>

namespace szm {

// Argument outside the mathematical domain of an operation (negative mean,
// probability outside [0,1), negative observation, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Invalid call or configuration: bad index, empty search range, unknown
// option, leave-one-out with a single observation.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Unreadable or malformed input files, failed writes.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace szm
