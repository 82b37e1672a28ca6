#include "gaitmirror/plant.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "gaitmirror/errors.hpp"
#include "gaitmirror/features.hpp"

namespace gaitmirror {

double LoadProfile::torque_at(double phase_time_s) const {
  return constant_nm +
         sin_amplitude_nm *
             std::sin(2.0 * std::numbers::pi * sin_frequency_hz * phase_time_s + sin_phase_rad);
}

void PlantConfig::validate() const {
  if (!(inertia > 0.0)) throw ConfigError("plant.inertia must be > 0");
  if (!(dt > 0.0)) throw ConfigError("plant.dt must be > 0");
  if (!(cycle_duration_s > 0.0)) throw ConfigError("plant.cycle_duration must be > 0");
  if (!(noise_stddev_deg >= 0.0)) throw ConfigError("plant.noise_stddev must be >= 0");
  if (!(adapt_rate >= 0.0 && adapt_rate < 1.0)) throw ConfigError("plant.adapt_rate must be in [0, 1)");
  if (!(angle_max_deg > angle_min_deg)) throw ConfigError("plant.angle_max must exceed plant.angle_min");
  if (!(max_phase_duration_s > dt)) throw ConfigError("plant.max_phase_duration must exceed dt");
  if (!(min_phase_motion_deg >= 0.0)) throw ConfigError("plant.min_phase_motion must be >= 0");
  if (initial_angle_deg < angle_min_deg || initial_angle_deg > angle_max_deg)
    throw ConfigError("plant.initial_angle outside the physical range");
  if (!(feature_bounds.peak_max_deg > feature_bounds.peak_min_deg))
    throw ConfigError("plant.feature_bounds peak range is empty");
  if (!(feature_bounds.duration_max_s > feature_bounds.duration_min_s) ||
      !(feature_bounds.duration_min_s > 0.0))
    throw ConfigError("plant.feature_bounds duration range is invalid");
}

GaitPhase Trajectory::phase_at(std::size_t i) const {
  for (int p = kNumPhases - 1; p > 0; --p) {
    if (i >= phase_start[static_cast<std::size_t>(p)]) return static_cast<GaitPhase>(p);
  }
  return GaitPhase::StanceFlexion;
}

namespace {

struct Derivative {
  double dtheta;
  double domega;
};

Derivative knee_rhs(const ImpedanceTriple& imp, const LoadProfile& load, double inertia, double t,
                    double theta, double omega) {
  const KneeState s{theta, omega, t};
  const double accel = (-compute_torque(imp, s) + load.torque_at(t)) / inertia;
  return {omega, accel};
}

/// One classic RK4 step of the knee ODE, followed by the inelastic stop at
/// the physical range limits.
void rk4_step(const ImpedanceTriple& imp, const LoadProfile& load, const PlantConfig& cfg,
              double t, double& theta, double& omega) {
  const double h = cfg.dt;
  const Derivative k1 = knee_rhs(imp, load, cfg.inertia, t, theta, omega);
  const Derivative k2 =
      knee_rhs(imp, load, cfg.inertia, t + h / 2, theta + h / 2 * k1.dtheta, omega + h / 2 * k1.domega);
  const Derivative k3 =
      knee_rhs(imp, load, cfg.inertia, t + h / 2, theta + h / 2 * k2.dtheta, omega + h / 2 * k2.domega);
  const Derivative k4 =
      knee_rhs(imp, load, cfg.inertia, t + h, theta + h * k3.dtheta, omega + h * k3.domega);

  theta += h / 6 * (k1.dtheta + 2 * k2.dtheta + 2 * k3.dtheta + k4.dtheta);
  omega += h / 6 * (k1.domega + 2 * k2.domega + 2 * k3.domega + k4.domega);

  if (theta <= cfg.angle_min_deg) {
    theta = cfg.angle_min_deg;
    omega = std::max(omega, 0.0);
  } else if (theta >= cfg.angle_max_deg) {
    theta = cfg.angle_max_deg;
    omega = std::min(omega, 0.0);
  }
}

}  // namespace

PhaseResult simulate_phase(const ImpedanceTriple& imp, GaitPhase phase, const KneeState& init,
                           const PlantConfig& cfg) {
  const LoadProfile& load = cfg.load[static_cast<std::size_t>(phase)];
  const auto max_steps = static_cast<long>(std::ceil(cfg.max_phase_duration_s / cfg.dt));

  PhaseResult result;
  result.t.reserve(64);
  result.angle_deg.reserve(64);
  result.velocity_dps.reserve(64);

  double theta = init.angle_deg;
  double omega = init.velocity_dps;
  result.t.push_back(0.0);
  result.angle_deg.push_back(theta);
  result.velocity_dps.push_back(omega);

  bool armed = false;
  result.exit = PhaseResult::Exit::DurationCap;
  for (long step = 0; step < max_steps; ++step) {
    const double t = static_cast<double>(step) * cfg.dt;
    const double omega_before = omega;
    rk4_step(imp, load, cfg, t, theta, omega);
    result.t.push_back(t + cfg.dt);
    result.angle_deg.push_back(theta);
    result.velocity_dps.push_back(omega);

    armed = armed || std::abs(theta - init.angle_deg) > cfg.min_phase_motion_deg;
    const bool crossed = (omega_before > 0.0 && omega <= 0.0) || (omega_before < 0.0 && omega >= 0.0);
    if (armed && crossed) {
      result.exit = PhaseResult::Exit::Extremum;
      break;
    }
  }

  result.exit_state = KneeState{theta, omega, 0.0};
  return result;
}

CycleResult simulate_cycle(const ImpedanceSchedule& sched, const PlantConfig& cfg,
                           const KneeState& entry, double t0, std::mt19937_64& noise_rng) {
  CycleResult result;
  result.trajectory.t0 = t0;
  result.trajectory.dt = cfg.dt;

  KneeState state = entry;
  for (GaitPhase phase : kPhaseOrder) {
    const auto p = static_cast<std::size_t>(phase);
    result.trajectory.phase_start[p] =
        result.trajectory.angle_deg.empty() ? 0 : result.trajectory.angle_deg.size() - 1;

    PhaseResult seg = simulate_phase(sched[phase], phase, state, cfg);
    const std::size_t skip = result.trajectory.angle_deg.empty() ? 0 : 1;
    result.trajectory.angle_deg.insert(result.trajectory.angle_deg.end(),
                                       seg.angle_deg.begin() + static_cast<long>(skip),
                                       seg.angle_deg.end());
    state = seg.exit_state;

    if (seg.exit == PhaseResult::Exit::DurationCap) {
      result.failed = true;
      result.failed_phase = phase;
      break;
    }
  }
  result.exit_state = state;

  if (result.failed) {
    // Phases never reached get empty segments at the very end.
    for (int p = static_cast<int>(result.failed_phase) + 1; p < kNumPhases; ++p)
      result.trajectory.phase_start[static_cast<std::size_t>(p)] = result.trajectory.angle_deg.size();
  }

  if (cfg.noise_stddev_deg > 0.0) {
    std::normal_distribution<double> noise(0.0, cfg.noise_stddev_deg);
    for (double& sample : result.trajectory.angle_deg) sample += noise(noise_rng);
  }

  if (!result.failed) {
    result.features = extract_features(result.trajectory);
    result.features.side = Side::Prosthesis;
  }
  return result;
}

GaitFeatures adapt_intact(const GaitFeatures& intact, const GaitFeatures& prosthesis,
                          const PlantConfig& cfg) {
  GaitFeatures next = intact;
  next.side = Side::Intact;
  const FeatureBounds& fb = cfg.feature_bounds;
  for (std::size_t p = 0; p < kNumPhases; ++p) {
    next.peak_deg[p] += cfg.adapt_rate * cfg.adapt_coupling_peak[p] *
                        (prosthesis.peak_deg[p] - intact.peak_deg[p]);
    next.duration_s[p] += cfg.adapt_rate * cfg.adapt_coupling_duration[p] *
                          (prosthesis.duration_s[p] - intact.duration_s[p]);
    next.peak_deg[p] = std::clamp(next.peak_deg[p], fb.peak_min_deg, fb.peak_max_deg);
    next.duration_s[p] = std::clamp(next.duration_s[p], fb.duration_min_s, fb.duration_max_s);
  }
  return next;
}

Eigen::Vector2d lqr_plant_step(const Eigen::Vector2d& x, const Eigen::Vector3d& u,
                               const Eigen::Matrix2d& A, const Eigen::Matrix<double, 2, 3>& B) {
  return A * x + B * u;
}

Plant::Plant(const PlantConfig& cfg, std::uint64_t noise_seed) : cfg_(cfg), rng_(noise_seed) {
  cfg_.validate();
  state_ = KneeState{cfg_.initial_angle_deg, 0.0, 0.0};
}

CycleResult Plant::step_cycle(const ImpedanceSchedule& sched) {
  CycleResult result = simulate_cycle(sched, cfg_, state_, clock_s_, rng_);
  ++cycles_run_;
  clock_s_ +=
      result.trajectory.size() > 1 ? static_cast<double>(result.trajectory.size() - 1) * cfg_.dt : 0.0;
  if (result.failed) {
    state_ = KneeState{cfg_.initial_angle_deg, 0.0, 0.0};
  } else {
    state_ = result.exit_state;
  }
  return result;
}

}  // namespace gaitmirror
