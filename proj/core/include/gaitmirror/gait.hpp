#pragma once

#include <array>
#include <cstddef>
#include <string_view>

namespace gaitmirror {

/// The four phases of one gait cycle, in their fixed cyclic order.
enum class GaitPhase : int {
  StanceFlexion = 0,
  StanceExtension = 1,
  SwingFlexion = 2,
  SwingExtension = 3,
};

inline constexpr int kNumPhases = 4;
inline constexpr std::array<GaitPhase, 4> kPhaseOrder = {
    GaitPhase::StanceFlexion, GaitPhase::StanceExtension,
    GaitPhase::SwingFlexion, GaitPhase::SwingExtension};

/// Successor in the fixed cycle STF -> STE -> SWF -> SWE -> STF.
constexpr GaitPhase next_phase(GaitPhase p) {
  return static_cast<GaitPhase>((static_cast<int>(p) + 1) % kNumPhases);
}

/// True for the phases that end on a flexion peak (maximum knee angle);
/// the extension phases end on a trough (minimum).
constexpr bool is_flexion(GaitPhase p) {
  return p == GaitPhase::StanceFlexion || p == GaitPhase::SwingFlexion;
}

std::string_view phase_name(GaitPhase p);

/// Inverse of phase_name. Throws ConfigError on unrecognized names.
GaitPhase phase_from_name(std::string_view name);

/// One phase's impedance setting: stiffness K (N*m/deg), damping B
/// (N*m*s/deg) and equilibrium angle (deg).
struct ImpedanceTriple {
  double stiffness = 0.0;
  double damping = 0.0;
  double equilibrium_deg = 0.0;
};

/// Per-component [min, max] box for one phase's impedance triple.
struct ImpedanceBounds {
  double stiffness_min = 0.0;
  double stiffness_max = 10.0;
  double damping_min = 0.0;
  double damping_max = 2.0;
  double equilibrium_min_deg = 0.0;
  double equilibrium_max_deg = 80.0;

  bool contains(const ImpedanceTriple& imp) const;
  ImpedanceTriple clamp(const ImpedanceTriple& imp) const;
};

/// The 12 tunable parameters: one triple per gait phase, plus the cycle
/// index the schedule is valid for.
struct ImpedanceSchedule {
  std::array<ImpedanceTriple, kNumPhases> phases{};
  long cycle = 0;

  ImpedanceTriple& operator[](GaitPhase p) { return phases[static_cast<std::size_t>(p)]; }
  const ImpedanceTriple& operator[](GaitPhase p) const {
    return phases[static_cast<std::size_t>(p)];
  }
};

/// One impedance increment (Delta K, Delta B, Delta theta_e) for one phase.
struct Action {
  double dstiffness = 0.0;
  double ddamping = 0.0;
  double dequilibrium_deg = 0.0;
};

/// Per-update magnitude limits on each action component.
struct ActionBounds {
  double dstiffness_max = 0.5;
  double ddamping_max = 0.1;
  double dequilibrium_max_deg = 3.0;

  Action clamp(const Action& u) const;
};

/// Instantaneous knee kinematics: angle (deg), angular velocity (deg/s) and
/// elapsed time within the current phase (s).
struct KneeState {
  double angle_deg = 0.0;
  double velocity_dps = 0.0;
  double phase_time_s = 0.0;
};

/// Impedance torque law: K * (theta - theta_e) + B * omega.
double compute_torque(const ImpedanceTriple& imp, const KneeState& state);

/// Result of applying an action to a schedule. Clamping to the impedance
/// bounds is silent but reported through `saturated`.
struct ApplyResult {
  ImpedanceSchedule schedule;
  bool saturated = false;
};

/// Increment the target phase's triple component-wise, clamp to bounds,
/// leave the other phases untouched. The returned schedule's cycle index is
/// advanced by one.
ApplyResult apply_action(const ImpedanceSchedule& sched, GaitPhase phase, const Action& u,
                         const ImpedanceBounds& bounds);

}  // namespace gaitmirror
