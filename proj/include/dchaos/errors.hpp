#pragma once

#include <stdexcept>
#include <string>

namespace dchaos {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain on which an operation is defined.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Malformed input: bad text, inconsistent fields, unknown names.
class InputError : public Error {
 public:
  using Error::Error;
};

/// A finite set was required to be invariant under a map but is not.
class InvarianceError : public Error {
 public:
  using Error::Error;
};

/// A constructed object failed its own exact post-construction check.
class ConstructionError : public Error {
 public:
  using Error::Error;
};

}  // namespace dchaos
