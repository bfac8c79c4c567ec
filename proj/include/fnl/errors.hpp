#pragma once

#include <stdexcept>
#include <string>

namespace fnl {

// Operation received an empty set where a nonempty one is required.
struct EmptySetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Two objects that must share a grid do not.
struct GridMismatchError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Requested time step violates the grid CFL bound dt * speed <= spacing.
struct CflViolationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Support of a solution or a funnel slice reached the grid border, so the
// computation can no longer be trusted (outflow ghosts / clamped reads).
struct SupportOverflowError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Input violates a documented precondition (bad ranges, unnormalized data,
// sets that are not tubular enough, ...).
struct PreconditionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

}  // namespace fnl
