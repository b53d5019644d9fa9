#pragma once
#include <stdexcept>
#include <string>

namespace qiup {

/// Bad user input: invalid parameters, malformed files, unknown keys.
class InputError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A numeric procedure failed (non-convergence, singular system, missing feature).
class NumericError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace qiup
