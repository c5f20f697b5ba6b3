#pragma once

#include <stdexcept>
#include <string>

namespace damperlab {

// Input outside an operation's mathematical domain (negative time, unit mismatch, ...).
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

// Invalid or inconsistent configuration.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Caller used the wrong theorem for the block shape.
struct ContractError : std::logic_error {
  using std::logic_error::logic_error;
};

// hol_decompose target outside the reachable interval.
struct InfeasibleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace damperlab
