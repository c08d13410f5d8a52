#pragma once

#include <stdexcept>
#include <string>

namespace amod {

// Malformed or out-of-range user input (files, configs, arguments).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Structural problem in an optimization model handed to the engine.
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace amod
