#pragma once

#include <stdexcept>
#include <string>

namespace hanle {

/// Bad user input: configuration, CLI arguments, malformed files.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A computation that cannot produce a trustworthy number.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hanle
