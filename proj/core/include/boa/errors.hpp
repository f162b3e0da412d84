#pragma once

#include <stdexcept>
#include <string>

namespace boa {

// Bad configuration or arguments (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unreadable or schema-violating input data (CLI exit code 3).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A model quantity was requested for an input outside its domain, e.g. a
// pattern that is not in the mined pool.
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace boa
