#pragma once

#include <stdexcept>

namespace chartpulse {

/// Input data failed validation: malformed rows, inconsistent chart days,
/// unknown songs, or observations the model cannot produce.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical routine could not produce a meaningful result.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace chartpulse
