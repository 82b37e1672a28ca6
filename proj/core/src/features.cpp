#include "gaitmirror/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>

#include "gaitmirror/errors.hpp"

namespace gaitmirror {

void FeatureExtractorConfig::validate() const {
  if (smoothing_window < 1) throw ConfigError("features.smoothing_window must be >= 1");
  if (!(peak_threshold_deg >= 0.0)) throw ConfigError("features.peak_threshold must be >= 0");
  if (!(duration_threshold_frac >= 0.0))
    throw ConfigError("features.duration_threshold must be >= 0");
  if (cycles_per_update < 1) throw ConfigError("features cadence must be >= 1 cycle per update");
  if (raw_smoothing_window < 1 || raw_smoothing_window % 2 == 0)
    throw ConfigError("features.raw_smoothing_window must be a positive odd sample count");
  if (!(raw_prominence_deg >= 0.0)) throw ConfigError("features.raw_prominence must be >= 0");
}

GaitFeatures extract_features(const Trajectory& traj) {
  if (traj.size() < 2) throw MalformedTrajectoryError("trajectory too short for feature extraction");
  if (traj.phase_start[0] != 0)
    throw MalformedTrajectoryError("trajectory does not start at the first phase");

  GaitFeatures features;
  for (std::size_t p = 0; p < kNumPhases; ++p) {
    const std::size_t begin = traj.phase_start[p];
    const std::size_t end = p + 1 < kNumPhases ? traj.phase_start[p + 1] : traj.size() - 1;
    if (end <= begin || end >= traj.size())
      throw MalformedTrajectoryError("empty or out-of-order phase segment");

    // The shared boundary sample (the extremum the phase ended on) counts
    // toward this phase.
    const auto first = traj.angle_deg.begin() + static_cast<long>(begin);
    const auto last = traj.angle_deg.begin() + static_cast<long>(end) + 1;
    features.peak_deg[p] = is_flexion(static_cast<GaitPhase>(p)) ? *std::max_element(first, last)
                                                                 : *std::min_element(first, last);
    features.duration_s[p] = static_cast<double>(end - begin) * traj.dt;
  }
  return features;
}

namespace {

std::vector<double> moving_average(std::span<const double> signal, int window) {
  const auto n = static_cast<long>(signal.size());
  const long half = window / 2;
  std::vector<double> smoothed(signal.size());
  for (long i = 0; i < n; ++i) {
    const long lo = std::max(0L, i - half);
    const long hi = std::min(n - 1, i + half);
    double sum = 0.0;
    for (long j = lo; j <= hi; ++j) sum += signal[static_cast<std::size_t>(j)];
    smoothed[static_cast<std::size_t>(i)] = sum / static_cast<double>(hi - lo + 1);
  }
  return smoothed;
}

struct Extremum {
  std::size_t index;
  bool is_max;
};

/// Interior extrema from sign changes of the first difference (zero runs
/// inherit the preceding sign), plus the final sample when the signal is
/// still descending into it.
std::vector<Extremum> detect_extrema(const std::vector<double>& s) {
  std::vector<Extremum> found;
  int prev_sign = 0;
  for (std::size_t i = 1; i < s.size(); ++i) {
    const double d = s[i] - s[i - 1];
    const int sign = d > 0.0 ? 1 : d < 0.0 ? -1 : 0;
    if (sign == 0) continue;
    if (prev_sign > 0 && sign < 0) found.push_back({i - 1, true});
    if (prev_sign < 0 && sign > 0) found.push_back({i - 1, false});
    prev_sign = sign;
  }
  if (prev_sign < 0) found.push_back({s.size() - 1, false});
  return found;
}

/// Drop wiggles smaller than the prominence floor: repeatedly remove the
/// adjacent extremum pair with the smallest swing, merging equal-type
/// neighbors by keeping the more extreme one.
void apply_prominence(std::vector<Extremum>& ext, const std::vector<double>& s, double prominence) {
  auto merge_same_type = [&] {
    for (std::size_t i = 0; i + 1 < ext.size();) {
      if (ext[i].is_max != ext[i + 1].is_max) {
        ++i;
        continue;
      }
      const double a = s[ext[i].index];
      const double b = s[ext[i + 1].index];
      const bool keep_first = ext[i].is_max ? a >= b : a <= b;
      ext.erase(ext.begin() + static_cast<long>(i + (keep_first ? 1 : 0)));
    }
  };

  merge_same_type();
  while (ext.size() >= 2) {
    std::size_t weakest = 0;
    double weakest_swing = std::abs(s[ext[1].index] - s[ext[0].index]);
    for (std::size_t i = 1; i + 1 < ext.size(); ++i) {
      const double swing = std::abs(s[ext[i + 1].index] - s[ext[i].index]);
      if (swing < weakest_swing) {
        weakest_swing = swing;
        weakest = i;
      }
    }
    if (weakest_swing >= prominence) break;
    ext.erase(ext.begin() + static_cast<long>(weakest),
              ext.begin() + static_cast<long>(weakest) + 2);
    merge_same_type();
  }
}

}  // namespace

GaitFeatures extract_features_raw(std::span<const double> angle_deg, double dt,
                                  const FeatureExtractorConfig& cfg) {
  if (angle_deg.size() < static_cast<std::size_t>(2 * cfg.raw_smoothing_window))
    throw MalformedTrajectoryError("raw cycle too short for extrema detection");
  if (!(dt > 0.0)) throw MalformedTrajectoryError("raw cycle needs a positive sample spacing");

  const std::vector<double> smoothed = moving_average(angle_deg, cfg.raw_smoothing_window);
  std::vector<Extremum> ext = detect_extrema(smoothed);
  apply_prominence(ext, smoothed, cfg.raw_prominence_deg);

  const long maxima = std::count_if(ext.begin(), ext.end(), [](const Extremum& e) { return e.is_max; });
  const long minima = static_cast<long>(ext.size()) - maxima;
  if (maxima != 2 || minima != 2)
    throw MalformedTrajectoryError("expected 2 maxima and 2 minima in cycle, found " +
                                   std::to_string(maxima) + " and " + std::to_string(minima));
  const bool shape_ok =
      ext[0].is_max && !ext[1].is_max && ext[2].is_max && !ext[3].is_max;
  if (!shape_ok) throw MalformedTrajectoryError("extrema do not alternate max/min/max/min");

  // Phase boundaries from the extrema: the cycle starts at sample 0 and the
  // final (swing extension) segment runs to the end of the data.
  GaitFeatures features;
  features.side = Side::Intact;
  const std::array<std::size_t, 5> boundary = {0, ext[0].index, ext[1].index, ext[2].index,
                                               angle_deg.size() - 1};
  for (std::size_t p = 0; p < kNumPhases; ++p) {
    if (boundary[p + 1] <= boundary[p])
      throw MalformedTrajectoryError("degenerate phase segment in raw cycle");
    features.duration_s[p] = static_cast<double>(boundary[p + 1] - boundary[p]) * dt;
  }
  features.peak_deg[0] = smoothed[ext[0].index];
  features.peak_deg[1] = smoothed[ext[1].index];
  features.peak_deg[2] = smoothed[ext[2].index];
  features.peak_deg[3] = smoothed[ext[3].index];
  return features;
}

double smooth_target(std::span<const double> history, int window) {
  if (history.empty()) throw InsufficientDataError("cannot smooth an empty feature history");
  const std::size_t take = std::min(history.size(), static_cast<std::size_t>(window));
  double sum = 0.0;
  for (std::size_t i = history.size() - take; i < history.size(); ++i) sum += history[i];
  return sum / static_cast<double>(take);
}

double threshold_update(double current, double candidate, double threshold) {
  return std::abs(candidate - current) > threshold ? candidate : current;
}

TrackingState compute_state(const GaitFeatures& prosthesis, const GaitFeatures& intact,
                            GaitPhase phase) {
  TrackingState state;
  state.phase = phase;
  state.peak_error_deg = prosthesis.peak(phase) - intact.peak(phase);
  state.duration_error_s = prosthesis.duration(phase) - intact.duration(phase);
  const double cycle = prosthesis.cycle_duration_s();
  state.duration_error_frac = cycle > 0.0 ? state.duration_error_s / cycle : 0.0;
  return state;
}

TargetTracker::TargetTracker(const GaitFeatures& initial_target, const FeatureExtractorConfig& cfg)
    : cfg_(cfg), target_(initial_target) {
  cfg_.validate();
  target_.side = Side::Intact;
}

void TargetTracker::push(const GaitFeatures& measured) {
  const double duration_threshold = cfg_.duration_threshold_frac * target_.cycle_duration_s();
  for (std::size_t p = 0; p < kNumPhases; ++p) {
    peak_history_[p].push_back(measured.peak_deg[p]);
    duration_history_[p].push_back(measured.duration_s[p]);
    target_.peak_deg[p] = threshold_update(
        target_.peak_deg[p], smooth_target(peak_history_[p], cfg_.smoothing_window),
        cfg_.peak_threshold_deg);
    target_.duration_s[p] = threshold_update(
        target_.duration_s[p], smooth_target(duration_history_[p], cfg_.smoothing_window),
        duration_threshold);
  }
}

}  // namespace gaitmirror
