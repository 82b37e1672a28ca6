#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "gaitmirror/gait.hpp"

namespace gaitmirror {

/// External torque applied to the knee during one phase, as a function of
/// time since phase entry: constant + amplitude * sin(2*pi*f*t + phase).
struct LoadProfile {
  double constant_nm = 0.0;
  double sin_amplitude_nm = 0.0;
  double sin_frequency_hz = 0.0;
  double sin_phase_rad = 0.0;

  double torque_at(double phase_time_s) const;
};

enum class Side { Prosthesis, Intact };

/// Per-phase peak knee angle (deg) and phase duration (s) for one side of
/// the body. For extension phases the "peak" is the trough angle.
struct GaitFeatures {
  Side side = Side::Prosthesis;
  std::array<double, kNumPhases> peak_deg{};
  std::array<double, kNumPhases> duration_s{};

  double cycle_duration_s() const {
    return duration_s[0] + duration_s[1] + duration_s[2] + duration_s[3];
  }
  double peak(GaitPhase p) const { return peak_deg[static_cast<std::size_t>(p)]; }
  double duration(GaitPhase p) const { return duration_s[static_cast<std::size_t>(p)]; }
};

/// Clamp box for feature values (used by the intact-side adaptation law).
struct FeatureBounds {
  double peak_min_deg = 0.0;
  double peak_max_deg = 90.0;
  double duration_min_s = 0.05;
  double duration_max_s = 2.0;
};

struct PlantConfig {
  double inertia = 0.05;  // effective knee inertia, N*m*s^2/deg
  std::array<LoadProfile, kNumPhases> load{};
  double dt = 0.01;                 // integration step, s (100 Hz)
  double cycle_duration_s = 1.7;    // nominal cadence, s
  double noise_stddev_deg = 0.3;    // additive measurement noise on sampled angle
  GaitFeatures intact_baseline{};   // "true" target features at trial start
  double adapt_rate = 0.05;         // alpha in [0, 1)
  std::array<double, kNumPhases> adapt_coupling_peak{1.0, 1.0, 1.0, 1.0};
  std::array<double, kNumPhases> adapt_coupling_duration{1.0, 1.0, 1.0, 1.0};
  FeatureBounds feature_bounds{};
  double angle_min_deg = 0.0;
  double angle_max_deg = 90.0;
  double max_phase_duration_s = 2.0;   // hard cap guarding divergence
  double min_phase_motion_deg = 1.0;   // motion required before the exit rule arms
  double initial_angle_deg = 2.0;      // knee pose at trial start

  /// Throws ConfigError on violated invariants (inertia, dt, adapt_rate, noise).
  void validate() const;
};

/// Uniformly sampled measured knee angle over one gait cycle, with the
/// sample index where each phase began. Sample i is at t0 + i * dt; phase p
/// spans [phase_start[p], phase_start[p+1]) with the final phase running to
/// the last sample.
struct Trajectory {
  double t0 = 0.0;
  double dt = 0.01;
  std::vector<double> angle_deg;
  std::array<std::size_t, kNumPhases> phase_start{};

  std::size_t size() const { return angle_deg.size(); }
  double time_at(std::size_t i) const { return t0 + static_cast<double>(i) * dt; }
  /// Phase owning sample i under the convention above.
  GaitPhase phase_at(std::size_t i) const;
};

/// One integrated phase: clean (noise-free) samples at cfg.dt including the
/// entry sample, and the state at exit. DurationCap means the exit rule
/// never fired within the cap; cycle-level code treats that as a failed
/// cycle.
struct PhaseResult {
  enum class Exit { Extremum, DurationCap };
  Exit exit = Exit::Extremum;
  std::vector<double> t;
  std::vector<double> angle_deg;
  std::vector<double> velocity_dps;
  KneeState exit_state{};
};

/// Integrate inertia * theta_ddot = -torque(imp, state) + load(phase, t)
/// with fixed-step RK4 from `init` until the phase exit rule fires: a
/// velocity zero crossing after at least cfg.min_phase_motion_deg of travel
/// from the entry angle. The angle is confined to the physical range with an
/// inelastic stop.
PhaseResult simulate_phase(const ImpedanceTriple& imp, GaitPhase phase, const KneeState& init,
                           const PlantConfig& cfg);

struct CycleResult {
  bool failed = false;             // some phase hit the duration cap
  GaitPhase failed_phase = GaitPhase::StanceFlexion;
  Trajectory trajectory;           // measured (noisy) samples
  GaitFeatures features{};         // prosthesis-side features of this cycle
  KneeState exit_state{};
};

/// Run the four phases in order from `entry`, add measurement noise to the
/// returned trajectory and extract prosthesis features from it. On failure
/// the trajectory holds the samples produced so far and `features` is not
/// meaningful.
CycleResult simulate_cycle(const ImpedanceSchedule& sched, const PlantConfig& cfg,
                           const KneeState& entry, double t0, std::mt19937_64& noise_rng);

/// First-order relaxation of the intact-side features toward the prosthesis
/// features: per phase, P_i += alpha * c_P * (P_p - P_i) and
/// D_i += alpha * c_D * (D_p - D_i), clamped to the feature bounds.
GaitFeatures adapt_intact(const GaitFeatures& intact, const GaitFeatures& prosthesis,
                          const PlantConfig& cfg);

/// Linear verification plant: x' = A x + B u.
Eigen::Vector2d lqr_plant_step(const Eigen::Vector2d& x, const Eigen::Vector3d& u,
                               const Eigen::Matrix2d& A, const Eigen::Matrix<double, 2, 3>& B);

/// Owns the knee state carried across cycles and the measurement-noise
/// generator for one trial. Single-threaded; one instance per trial.
class Plant {
 public:
  Plant(const PlantConfig& cfg, std::uint64_t noise_seed);

  /// Simulate the next gait cycle under `sched`, advancing the carried state
  /// on success. After a failed cycle the knee is reposed to the configured
  /// initial state so the next cycle starts clean.
  CycleResult step_cycle(const ImpedanceSchedule& sched);

  const PlantConfig& config() const { return cfg_; }
  const KneeState& state() const { return state_; }
  long cycles_run() const { return cycles_run_; }

 private:
  PlantConfig cfg_;
  KneeState state_;
  double clock_s_ = 0.0;
  long cycles_run_ = 0;
  std::mt19937_64 rng_;
};

}  // namespace gaitmirror
