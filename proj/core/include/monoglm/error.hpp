#pragma once

#include <stdexcept>
#include <string>

namespace monoglm {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Rejected input: malformed data, inconsistent configuration, rank-deficient designs,
/// values outside a family's support.
class InputError : public Error {
  public:
    using Error::Error;
};

/// A linear system could not be solved or no improving step was found.
class NumericalError : public Error {
  public:
    using Error::Error;
};

} // namespace monoglm
