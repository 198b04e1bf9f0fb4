#pragma once

#include <stdexcept>
#include <string>

namespace csix {

/// Bad input data, files, schemas or option combinations. The CLI maps
/// this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Numeric failure at runtime: divergence, non-convergence, failed
/// calibration. The CLI maps this to exit code 3.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace csix
