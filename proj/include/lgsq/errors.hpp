#pragma once

#include <stdexcept>
#include <string>

namespace lgsq {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter violates a documented domain (negative r, non-positive ell, ...).
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

/// The configuration sits on the det M = 0 manifold; a limit formula is required.
class SingularConfiguration : public Error {
 public:
  using Error::Error;
};

/// A series or quadrature did not reach its tolerance within the allowed budget.
class ConvergenceFailure : public Error {
 public:
  using Error::Error;
};

/// A principal-branch function was evaluated on (or within tolerance of) its cut.
class BranchAmbiguity : public Error {
 public:
  using Error::Error;
};

/// The requested combination of evaluation path and options has no closed form.
class UnsupportedCombination : public Error {
 public:
  using Error::Error;
};

}  // namespace lgsq
