#pragma once

#include <stdexcept>
#include <string>

namespace abretard {

// Precondition violation on user-supplied geometry or parameters.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Field evaluated on a singular point (on a wire, on a solenoid axis, at a
// charge's retarded position).
class SingularPointError : public DomainError {
 public:
  using DomainError::DomainError;
};

// Root solve or quadrature refinement failed to converge.
class NonConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw DomainError(what);
}

}  // namespace detail

}  // namespace abretard
