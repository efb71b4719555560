#pragma once

#include <stdexcept>
#include <string>

namespace rcv {

// Argument outside the mathematical domain of an operation.
class DomainError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Invalid or inconsistent configuration; maps to CLI exit code 1.
class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Numerical procedure failed (fit, factorization, degenerate covariance).
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Malformed input data.
class DataError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace rcv
