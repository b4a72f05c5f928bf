#ifndef CRASHMLE_ERRORS_HPP
#define CRASHMLE_ERRORS_HPP

#include <stdexcept>

namespace crashmle {

// Malformed or inconsistent input data (CSV cells, outcome labels, counts).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid model specification or DGP configuration.
class SpecError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Estimation could not be carried out (empty sample, bad settings, ...).
class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace crashmle

#endif  // CRASHMLE_ERRORS_HPP
