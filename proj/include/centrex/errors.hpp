#pragma once

#include <stdexcept>
#include <string>

namespace centrex {

/// Bad caller input: dimension mismatch, out-of-range parameter, empty data.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical routine could not produce a trustworthy answer
/// (non-SPD matrix, root finder that failed to converge, ...).
class NumericError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Malformed or inconsistent external data (config files, dataset CSV).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File system failures.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace centrex
