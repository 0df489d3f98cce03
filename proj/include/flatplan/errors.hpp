#pragma once

#include <stdexcept>
#include <string>

namespace flatplan {

/// Malformed or out-of-contract configuration input.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside an operation's domain (s outside [0,1], t_f <= 0, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace flatplan
