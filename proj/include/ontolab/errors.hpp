#pragma once

#include <stdexcept>
#include <string>

namespace ontolab {

// Failure taxonomy shared across the library.  Each class is a distinct,
// caller-actionable failure mode; the command-line tool maps them to
// distinct exit codes.

// Bad flags, bad config keys, out-of-range CLI values.
struct usage_error : std::runtime_error {
  explicit usage_error(const std::string& what) : std::runtime_error(what) {}
};

// A model cannot be tuned to reproduce the requested statistics
// (e.g. the target joint probability lies outside the attainable range).
struct calibration_error : std::runtime_error {
  explicit calibration_error(const std::string& what) : std::runtime_error(what) {}
};

// A calibrated model failed its statistical or quadrature verification.
struct verification_error : std::runtime_error {
  explicit verification_error(const std::string& what) : std::runtime_error(what) {}
};

// A constrained optimization problem has an empty feasible set
// (e.g. a variance outside the moment polytope).
struct infeasibility_error : std::runtime_error {
  explicit infeasibility_error(const std::string& what) : std::runtime_error(what) {}
};

// An internal identity that must hold by construction was violated
// (e.g. a joint probability materially below zero).  Indicates a bug,
// not bad input.
struct consistency_error : std::runtime_error {
  explicit consistency_error(const std::string& what) : std::runtime_error(what) {}
};

// Conditioning on a zero-probability event.
struct conditional_error : std::runtime_error {
  explicit conditional_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ontolab
