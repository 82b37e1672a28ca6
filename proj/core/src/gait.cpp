#include "gaitmirror/gait.hpp"

#include <algorithm>
#include <string>

#include "gaitmirror/errors.hpp"

namespace gaitmirror {

std::string_view phase_name(GaitPhase p) {
  switch (p) {
    case GaitPhase::StanceFlexion:
      return "STF";
    case GaitPhase::StanceExtension:
      return "STE";
    case GaitPhase::SwingFlexion:
      return "SWF";
    case GaitPhase::SwingExtension:
      return "SWE";
  }
  return "?";
}

GaitPhase phase_from_name(std::string_view name) {
  for (GaitPhase p : kPhaseOrder) {
    if (phase_name(p) == name) return p;
  }
  throw ConfigError("unknown gait phase name: " + std::string(name));
}

bool ImpedanceBounds::contains(const ImpedanceTriple& imp) const {
  return imp.stiffness >= stiffness_min && imp.stiffness <= stiffness_max &&
         imp.damping >= damping_min && imp.damping <= damping_max &&
         imp.equilibrium_deg >= equilibrium_min_deg && imp.equilibrium_deg <= equilibrium_max_deg;
}

ImpedanceTriple ImpedanceBounds::clamp(const ImpedanceTriple& imp) const {
  return {std::clamp(imp.stiffness, stiffness_min, stiffness_max),
          std::clamp(imp.damping, damping_min, damping_max),
          std::clamp(imp.equilibrium_deg, equilibrium_min_deg, equilibrium_max_deg)};
}

Action ActionBounds::clamp(const Action& u) const {
  return {std::clamp(u.dstiffness, -dstiffness_max, dstiffness_max),
          std::clamp(u.ddamping, -ddamping_max, ddamping_max),
          std::clamp(u.dequilibrium_deg, -dequilibrium_max_deg, dequilibrium_max_deg)};
}

double compute_torque(const ImpedanceTriple& imp, const KneeState& state) {
  return imp.stiffness * (state.angle_deg - imp.equilibrium_deg) +
         imp.damping * state.velocity_dps;
}

ApplyResult apply_action(const ImpedanceSchedule& sched, GaitPhase phase, const Action& u,
                         const ImpedanceBounds& bounds) {
  ApplyResult result{sched, false};
  result.schedule.cycle = sched.cycle + 1;

  ImpedanceTriple& imp = result.schedule[phase];
  const ImpedanceTriple raw{imp.stiffness + u.dstiffness, imp.damping + u.ddamping,
                            imp.equilibrium_deg + u.dequilibrium_deg};
  imp = bounds.clamp(raw);
  result.saturated = imp.stiffness != raw.stiffness || imp.damping != raw.damping ||
                     imp.equilibrium_deg != raw.equilibrium_deg;
  return result;
}

}  // namespace gaitmirror
