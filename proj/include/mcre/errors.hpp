#pragma once

#include <stdexcept>
#include <string>

namespace mcre {

// Invalid model or environment parameters (bad ranges, singular matrices).
class SpecError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed data passed to an estimator or helper.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A pair (y1, y2) outside the range where the minorization is stated.
class InvalidPair : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A chain update produced a non-finite state.
class NumericOverflow : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// eta(x) + c_bar > 1: the shipped eta or K cannot be right for this model.
class InconsistentSpec : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A rejection sampler exhausted its proposal budget.
class DegenerateDecomposition : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateFit : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mcre
