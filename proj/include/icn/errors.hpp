#pragma once

#include <stdexcept>
#include <string>

namespace icn {

/// Base class for every error raised by the library. The CLI maps the
/// subclasses onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A hit-rate target that the requested configuration cannot meet, e.g. an
/// overall target below what level 1 already achieves on its own.
class InfeasibleTarget : public Error {
 public:
  using Error::Error;
};

/// Normalized cost queried at a cache size whose level-1 hit rate already
/// exceeds the overall target.
class TruncatedDomain : public Error {
 public:
  using Error::Error;
};

class NumericFailure : public Error {
 public:
  using Error::Error;
};

class ScaleLimit : public Error {
 public:
  using Error::Error;
};

class EmptyCatalogue : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace icn
