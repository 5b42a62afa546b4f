// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace matgal {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of the operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Operand dimensions are inconsistent.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A scale matrix failed symmetric positive-definite validation.
class NotPositiveDefiniteError : public Error {
 public:
  using Error::Error;
};

/// The request is valid in principle but outside the supported range.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// A parameter file parsed but describes an invalid law; the message names
/// the offending field, e.g. "scales[1]".
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file or text.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace matgal
