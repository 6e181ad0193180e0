#pragma once

#include <stdexcept>
#include <string>

namespace nsmod {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Vectors from different spaces, or coefficient lengths that do not match.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Gram matrix is not symmetric positive definite.
class FactorizationError : public Error {
 public:
  using Error::Error;
};

class UnsupportedError : public Error {
 public:
  using Error::Error;
};

}  // namespace nsmod
