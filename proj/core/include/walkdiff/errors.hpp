#pragma once

#include <stdexcept>
#include <string>

namespace walkdiff {

// Bad user-supplied configuration or arguments (CLI exit code 2).
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// Numerical breakdown: overflow, non-finite state, quadrature failure (CLI exit code 3).
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace walkdiff
