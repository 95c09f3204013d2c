#pragma once

#include <stdexcept>
#include <string>

namespace sut {

/// Malformed or unreadable input: files, config keys, out-of-order frames.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical degeneracy that survives repair (non-finite covariances,
/// singular innovation matrices).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sut
