#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace streamad {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller broke an operation's precondition (wrong window length, out-of-order
// timestamps, labels outside the series).
class ContractError : public Error {
 public:
  using Error::Error;
};

// Rejected configuration value (look_back < 2, predict_forward != 1, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// A forward/backward pass or a loss produced NaN or Inf.
class NumericOverflowError : public Error {
 public:
  NumericOverflowError(const std::string& what, std::size_t step)
      : Error(what + " (step " + std::to_string(step) + ")"), step_(step) {}

  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

}  // namespace streamad
