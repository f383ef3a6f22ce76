#pragma once

#include <stdexcept>
#include <string>

namespace kbal {

// Bad option values: unsupported kernel family, nu outside the closed-form
// set, level outside (0,1), malformed campaign keys.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input data: CSV parse failures, missing required columns,
// missing outcomes on observation units.
struct SchemaError : std::runtime_error {
  explicit SchemaError(const std::string& msg) : std::runtime_error(msg) {}
};

// Data that is well-formed but unusable: no observation units, no target
// units, empty estimator set.
struct DomainError : std::runtime_error {
  explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

// Linear algebra failure after all fallbacks (jitter ladder exhausted).
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace kbal
