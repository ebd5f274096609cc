#pragma once

#include <stdexcept>
#include <string>

namespace revphase {

/// A value outside the mathematical domain of an operation
/// (non-positive RT60, frequency above Nyquist, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Inconsistent configuration: mismatched sample rates, bad STFT setup,
/// conflicting CLI flags.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Failure to read or write a file; the message carries the path.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

[[noreturn]] void throw_domain(const std::string& what);
[[noreturn]] void throw_config(const std::string& what);

}  // namespace revphase
