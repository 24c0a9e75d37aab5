#pragma once

#include <stdexcept>
#include <string>

namespace srosi {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter or input violates a documented precondition.
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

/// Kernel weights: every kernel value vanished, so no sample carries mass.
class NoMass : public Error {
 public:
  using Error::Error;
};

/// The requested norm has no linear robust counterpart (e.g. l2).
class UnsupportedNorm : public Error {
 public:
  using Error::Error;
};

/// Brute-force routine refused an instance beyond its enumeration limit.
class TooLarge : public Error {
 public:
  using Error::Error;
};

/// A stage-wise recourse problem has no feasible point at the scenario.
class InnerInfeasible : public Error {
 public:
  using Error::Error;
};

/// A stage-wise recourse problem is unbounded below at the scenario.
class InnerUnbounded : public Error {
 public:
  using Error::Error;
};

/// The LP backend could not produce a certified optimum.
class SolveFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace srosi
