#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bangride {

// Bad user input: config files, flags, parameter ranges.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DivergenceError : std::runtime_error {
  DivergenceError(std::size_t step, const std::string& what)
      : std::runtime_error("diverged at step " + std::to_string(step) + ": " + what), step(step) {}
  std::size_t step;
};

// A potential function was evaluated outside its domain (log of a non-positive
// concentration and so on). `function` names the offender.
struct DomainError : std::runtime_error {
  DomainError(const std::string& function, const std::string& what)
      : std::runtime_error(function + ": " + what), function(function) {}
  std::string function;
};

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace bangride
