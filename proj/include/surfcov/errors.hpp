#pragma once

#include <stdexcept>
#include <string>

namespace surfcov {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller broke a documented precondition (wrong vector length, empty atlas, ...).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class DegenerateSurfaceError : public Error {
 public:
  using Error::Error;
};

class ProjectionFailure : public Error {
 public:
  using Error::Error;
};

class SingularityError : public Error {
 public:
  using Error::Error;
};

class SampleFailure : public Error {
 public:
  using Error::Error;
};

class InterpolationFailure : public Error {
 public:
  using Error::Error;
};

/// An on-manifold state whose tool axis is not (anti-)parallel to the normal.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

class InitializationError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

}  // namespace surfcov
