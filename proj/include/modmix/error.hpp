#pragma once

#include <stdexcept>
#include <string>

namespace modmix {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A value violates the documented precondition of an operation.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// A file or document could not be read or does not follow its format.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace modmix
