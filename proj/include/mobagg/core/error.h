#pragma once

#include <stdexcept>
#include <string>

namespace mobagg {

// Bad input or violated precondition. The CLI maps this to exit code 1.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A protocol aggregate disagreed with the plaintext oracle. Exit code 2.
class OracleMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mobagg
