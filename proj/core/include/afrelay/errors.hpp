#pragma once

#include <stdexcept>
#include <string>

namespace afrelay {

// Bad user input: parameters out of domain, malformed config, unknown model.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A numerical routine could not deliver a finite, trustworthy value.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace afrelay
