#pragma once

#include <stdexcept>
#include <string>

namespace gaitmirror {

/// Invalid configuration file or parameter set. Maps to CLI exit code 1.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A presumed gait cycle without the expected two maxima and two minima.
struct MalformedTrajectoryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Fewer experiences than basis dimensions; the caller should keep
/// collecting samples.
struct InsufficientDataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Regressor condition number above the configured cap even after
/// regularization; the caller should keep collecting samples.
struct IllConditionedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// The action-curvature block of the Q form is not positive definite, so the
/// greedy policy is undefined. Project the weights first.
struct SingularCurvatureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// The Riccati fixed-point iteration failed to converge (non-stabilizable
/// plant or iteration budget exhausted).
struct OracleDivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace gaitmirror
