#pragma once

#include <stdexcept>
#include <string>

namespace bgcmeta {

/// Bad input: malformed files, out-of-range arguments, violated preconditions.
/// The CLI maps it to exit code 2.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A computation produced a non-finite or otherwise unusable result.
/// The CLI maps it to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace bgcmeta
