#pragma once

#include <stdexcept>
#include <string>

namespace wban {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Structural violation while building a topology (names the offending node).
class TopologyError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A NodeId that does not resolve in the topology.
class LookupError : public Error {
 public:
  using Error::Error;
};

/// A power matrix lacks entries required by the requested operation.
class IncompleteMatrixError : public Error {
 public:
  using Error::Error;
};

/// Malformed input to a set/schedule operation.
class InputError : public Error {
 public:
  using Error::Error;
};

/// No schedule can honour the orthogonality guarantee.
class InfeasibleScheduleError : public Error {
 public:
  using Error::Error;
};

/// Frame traces charged out of order.
class SequenceError : public Error {
 public:
  using Error::Error;
};

/// Unreadable or invalid scenario / run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace wban
