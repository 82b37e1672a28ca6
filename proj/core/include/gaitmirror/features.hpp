#pragma once

#include <cstddef>
#include <deque>
#include <span>
#include <vector>

#include "gaitmirror/gait.hpp"
#include "gaitmirror/plant.hpp"

namespace gaitmirror {

struct FeatureExtractorConfig {
  int smoothing_window = 10;            // samples averaged for target features
  double peak_threshold_deg = 1.5;      // dead band before a target peak moves
  double duration_threshold_frac = 0.02;  // dead band for duration targets, as a
                                          // fraction of the cycle duration
  int cycles_per_update = 1;            // 1 in simulation mode, 4 in human-cadence mode
  int raw_smoothing_window = 5;         // centered moving average before extrema detection
  double raw_prominence_deg = 1.0;      // minimum swing between kept extrema

  void validate() const;  // throws ConfigError
};

/// Per-phase tracking error: prosthesis minus intact, peak in degrees and
/// duration in seconds (also carried as a fraction of the measured cycle
/// duration, the form the convergence tolerance is stated in).
struct TrackingState {
  GaitPhase phase = GaitPhase::StanceFlexion;
  double peak_error_deg = 0.0;
  double duration_error_s = 0.0;
  double duration_error_frac = 0.0;
};

/// Features of one annotated cycle: per phase, the extremal angle over the
/// phase's samples (maximum for flexion phases, minimum for extension
/// phases, boundary sample included) and the segment length times dt.
GaitFeatures extract_features(const Trajectory& traj);

/// Features of a raw, unannotated cycle (intact side). Smooths with a
/// centered moving average, locates extrema by sign changes of the first
/// difference with a prominence floor, and requires two maxima and two
/// minima; throws MalformedTrajectoryError otherwise.
GaitFeatures extract_features_raw(std::span<const double> angle_deg, double dt,
                                  const FeatureExtractorConfig& cfg);

/// Arithmetic mean of the most recent min(window, size) values.
double smooth_target(std::span<const double> history, int window);

/// Returns `candidate` if it differs from `current` by more than
/// `threshold`, else `current`.
double threshold_update(double current, double candidate, double threshold);

/// Tracking state for one phase: (P_p - P_i, D_p - D_i), with the duration
/// error also expressed relative to the prosthesis (measured) cycle
/// duration.
TrackingState compute_state(const GaitFeatures& prosthesis, const GaitFeatures& intact,
                            GaitPhase phase);

/// Smoothed, thresholded target features for the intact side. Raw intact
/// features are pushed per cycle; the current target moves only when the
/// smoothed value escapes the dead band. Owned by a single trial.
class TargetTracker {
 public:
  TargetTracker(const GaitFeatures& initial_target, const FeatureExtractorConfig& cfg);

  /// Record one cycle's intact features and refresh the target.
  void push(const GaitFeatures& measured);

  const GaitFeatures& target() const { return target_; }

 private:
  FeatureExtractorConfig cfg_;
  GaitFeatures target_;
  std::array<std::vector<double>, kNumPhases> peak_history_;
  std::array<std::vector<double>, kNumPhases> duration_history_;
};

}  // namespace gaitmirror
