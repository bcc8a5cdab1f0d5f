#pragma once

#include <stdexcept>

namespace hdpca {

// Bad caller input: shape mismatches, malformed files, out-of-range counts.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A numerical routine failed (non-convergence, negative spectrum beyond tolerance).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hdpca
