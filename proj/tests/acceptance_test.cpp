// Acceptance gate for the tracking-controller stack. Each check prints one
// [PASS]/[FAIL] line; the process exits nonzero if any check fails. The
// thresholds here are the product's contract and must not be loosened.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gaitmirror/config.hpp"
#include "gaitmirror/features.hpp"
#include "gaitmirror/gait.hpp"
#include "gaitmirror/harness.hpp"
#include "gaitmirror/plant.hpp"
#include "gaitmirror/riccati.hpp"
#include "gaitmirror/rl.hpp"

namespace {

using namespace gaitmirror;
using Clock = std::chrono::steady_clock;

constexpr double kPi = 3.14159265358979323846;

struct Outcome {
  bool passed = false;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string format(const char* fmt, ...) {
  char buf[512];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buf, sizeof buf, fmt, args);
  va_end(args);
  return buf;
}

// --- 1. Policy iteration on the linear plant recovers the Riccati gain. ---

Outcome check_gain_recovery() {
  const ExperimentConfig cfg = default_config();
  const auto start = Clock::now();
  const LqrCheckReport report = lqr_check(cfg.lqr, cfg.master_seed);
  const double elapsed = seconds_since(start);

  const double final_err = report.gain_errors.empty()
                               ? std::numeric_limits<double>::infinity()
                               : report.gain_errors.back();
  const bool ok = report.passed && final_err < 1e-3 &&
                  report.iterations_used <= 10 && elapsed < 1.0;
  return {ok, format("rel gain error %.3e after %d iterations, %.3f s",
                     final_err, report.iterations_used, elapsed)};
}

// --- 2. Exact policy-consistent data solves the Bellman equation. ---

Outcome check_bellman_residual() {
  const ExperimentConfig cfg = default_config();
  const Eigen::Matrix2d a = cfg.lqr.a;
  const Eigen::Matrix<double, 2, 3> b = cfg.lqr.b;
  const Eigen::Matrix2d q = cfg.lqr.cost.state_weight;
  const Eigen::Matrix3d r = cfg.lqr.cost.action_weight;
  const double gamma = 1.0;

  const DareSolution oracle = solve_dare(a, b, q, r);
  const GainMatrix gain = oracle.gain;

  std::mt19937_64 rng(20240871);
  std::uniform_real_distribution<double> state_dist(-1.0, 1.0);
  std::normal_distribution<double> probe(0.0, 0.4);

  std::vector<Experience> batch;
  for (int i = 0; i < 60; ++i) {
    Experience e;
    e.state = StateVec(state_dist(rng), state_dist(rng));
    e.action = -gain * e.state + ActionVec(probe(rng), probe(rng), probe(rng));
    e.cost = instantaneous_cost(e.state, e.action, cfg.lqr.cost);
    e.next_state = lqr_plant_step(e.state, e.action, a, b);
    e.next_policy_action = -gain * e.next_state;
    batch.push_back(e);
  }

  EvaluationOptions opts;
  opts.discount = gamma;
  const EvaluationResult fit = policy_evaluation(batch, opts);

  double worst = 0.0;
  for (const Experience& e : batch) {
    const double lhs = fit.weights.w.dot(basis_phi(e.state, e.action) -
                                         gamma * basis_phi(e.next_state, e.next_policy_action));
    worst = std::max(worst, std::abs(lhs - e.cost));
  }
  return {worst <= 1e-8, format("max per-sample residual %.3e over %zu samples",
                                worst, batch.size())};
}

// --- 3. Seeded default batch: convergence rate, runtime, error reduction. ---

Outcome check_default_batch() {
  const ExperimentConfig cfg = default_config();
  const auto start = Clock::now();
  const BatchResult batch = run_batch(cfg);
  const double elapsed = seconds_since(start);

  const BatchSummary& s = batch.summary;
  bool errors_shrink = true;
  double worst_final_peak = 0.0;
  for (const PhaseErrorSummary& p : s.phases) {
    errors_shrink = errors_shrink &&
                    p.final_rmse_peak_deg < p.initial_rmse_peak_deg &&
                    p.final_rmse_duration_pct < p.initial_rmse_duration_pct;
    worst_final_peak = std::max(worst_final_peak, p.final_rmse_peak_deg);
  }

  const bool ok = s.convergence_rate >= 0.9 && elapsed < 60.0 && errors_shrink &&
                  worst_final_peak <= cfg.tol_peak_deg;
  return {ok, format("%d/%d converged in %.2f s, pooled final peak RMSE %.3f deg,"
                     " per-phase errors %s",
                     s.converged, s.trials, elapsed, worst_final_peak,
                     errors_shrink ? "all reduced" : "NOT reduced")};
}

// --- 4. Co-adapting target at human cadence: convergence plus visible drift. ---

Outcome check_coadaptation_drift() {
  ExperimentConfig cfg = default_config();
  set_cadence_mode(cfg, CadenceMode::HumanCadence);
  cfg.coadapt = true;

  const BatchResult batch = run_batch(cfg);
  double max_drift = 0.0;
  for (const TrialRecord& trial : batch.trials) {
    if (trial.intact_trace.size() < 2) continue;
    for (int p = 0; p < kNumPhases; ++p)
      max_drift = std::max(max_drift,
                           std::abs(trial.intact_trace.back().peak_deg[p] -
                                    trial.intact_trace.front().peak_deg[p]));
  }

  const bool ok = batch.summary.convergence_rate >= 0.9 && max_drift > 1.0;
  return {ok, format("%d/%d converged, max intact-target drift %.2f deg",
                     batch.summary.converged, batch.summary.trials, max_drift)};
}

// --- 5. Feature extraction against a noiseless closed-form cycle. ---

Trajectory synthetic_cycle(double t_stance, double t_swing, double dt,
                           double stance_amp, double swing_amp) {
  Trajectory traj;
  traj.t0 = 0.0;
  traj.dt = dt;
  const int n = static_cast<int>(std::llround((t_stance + t_swing) / dt)) + 1;
  for (int i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * dt;
    traj.angle_deg.push_back(t < t_stance
                                 ? stance_amp * std::sin(kPi * t / t_stance)
                                 : swing_amp * std::sin(kPi * (t - t_stance) / t_swing));
  }
  traj.phase_start[0] = 0;
  traj.phase_start[1] = static_cast<std::size_t>(std::llround(0.5 * t_stance / dt));
  traj.phase_start[2] = static_cast<std::size_t>(std::llround(t_stance / dt));
  traj.phase_start[3] = static_cast<std::size_t>(std::llround((t_stance + 0.5 * t_swing) / dt));
  return traj;
}

Outcome check_synthetic_features() {
  const double t_stance = 0.63, t_swing = 0.77, dt = 0.01;
  const double stance_amp = 20.0, swing_amp = 60.0;
  const Trajectory traj = synthetic_cycle(t_stance, t_swing, dt, stance_amp, swing_amp);
  const GaitFeatures f = extract_features(traj);

  // One sample of discretization moves a half-sine extremum by at most
  // A*sin(pi*dt/T); the peaks sit where the curvature bound is far tighter.
  const double stance_tol = stance_amp * std::sin(kPi * dt / t_stance);
  const double swing_tol = swing_amp * std::sin(kPi * dt / t_swing);
  double worst_peak = std::abs(f.peak_deg[0] - stance_amp);
  worst_peak = std::max(worst_peak, std::abs(f.peak_deg[1] - 0.0));
  worst_peak = std::max(worst_peak, std::abs(f.peak_deg[2] - swing_amp));
  worst_peak = std::max(worst_peak, std::abs(f.peak_deg[3] - 0.0));
  const bool peaks_ok =
      std::abs(f.peak_deg[0] - stance_amp) <= stance_tol &&
      std::abs(f.peak_deg[1]) <= stance_tol &&
      std::abs(f.peak_deg[2] - swing_amp) <= swing_tol &&
      std::abs(f.peak_deg[3]) <= swing_tol;

  const double durations[4] = {0.5 * t_stance, 0.5 * t_stance, 0.5 * t_swing, 0.5 * t_swing};
  bool durations_ok = true;
  for (int p = 0; p < kNumPhases; ++p)
    durations_ok = durations_ok && std::abs(f.duration_s[p] - durations[p]) <= dt + 1e-12;
  const bool sum_ok = std::abs(f.cycle_duration_s() - (t_stance + t_swing)) <= dt + 1e-12;

  return {peaks_ok && durations_ok && sum_ok,
          format("worst extremum error %.4f deg (tols %.4f / %.4f), durations within"
                 " one sample: %s, cycle sum error %.4f s",
                 worst_peak, stance_tol, swing_tol, durations_ok ? "yes" : "no",
                 std::abs(f.cycle_duration_s() - (t_stance + t_swing)))};
}

// --- 6. The 8-of-10 convergence rule, straddling the boundary. ---

Outcome check_convergence_rule() {
  const double tol_peak = 1.5, tol_dur = 0.02;
  auto inside = [] { return TrackingState{GaitPhase::StanceFlexion, 0.5, 0.01, 0.005}; };
  auto outside = [] { return TrackingState{GaitPhase::StanceFlexion, 3.0, 0.10, 0.060}; };

  std::vector<TrackingState> seven(10, inside());
  seven[1] = outside();
  seven[4] = outside();
  seven[8] = outside();
  const bool seven_fails = !check_convergence(seven, tol_peak, tol_dur);

  std::vector<TrackingState> eight(10, inside());
  eight[0] = outside();
  eight[5] = outside();
  const bool eight_passes = check_convergence(eight, tol_peak, tol_dur);

  return {seven_fails && eight_passes,
          format("7/10 in tolerance -> %s, 8/10 in tolerance -> %s",
                 seven_fails ? "no" : "YES", eight_passes ? "yes" : "NO")};
}

// --- 7. Bitwise reproducibility of a full batch under one master seed. ---

std::string read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Outcome check_reproducibility() {
  const ExperimentConfig cfg = default_config();
  const auto base = std::filesystem::temp_directory_path() / "gaitmirror_acceptance";
  std::filesystem::remove_all(base);
  const auto dir_a = base / "a";
  const auto dir_b = base / "b";

  write_batch_outputs(cfg, run_batch(cfg), dir_a.string());
  write_batch_outputs(cfg, run_batch(cfg), dir_b.string());

  std::vector<std::string> names;
  for (const auto& entry : std::filesystem::directory_iterator(dir_a))
    names.push_back(entry.path().filename().string());
  std::sort(names.begin(), names.end());

  int mismatched = 0;
  for (const std::string& name : names)
    if (read_bytes(dir_a / name) != read_bytes(dir_b / name)) ++mismatched;

  const bool ok = !names.empty() && mismatched == 0 &&
                  names.size() == static_cast<std::size_t>(cfg.trials) + 2;
  return {ok, format("%zu output files compared, %d mismatched", names.size(), mismatched)};
}

// --- 8. Integrator fidelity against conservation and closed forms. ---

Outcome check_integrator_fidelity() {
  PlantConfig plant = default_config().plant;
  plant.noise_stddev_deg = 0.0;
  for (LoadProfile& load : plant.load) load = LoadProfile{};

  // Undamped spring about 30 deg: total energy is conserved on every phase.
  double worst_energy = 0.0;
  const ImpedanceTriple spring{4.0, 0.0, 30.0};
  const KneeState swung{10.0, 0.0, 0.0};
  for (GaitPhase phase : kPhaseOrder) {
    const PhaseResult r = simulate_phase(spring, phase, swung, plant);
    const double e0 = 0.5 * spring.stiffness * (swung.angle_deg - spring.equilibrium_deg) *
                      (swung.angle_deg - spring.equilibrium_deg);
    for (std::size_t i = 0; i < r.angle_deg.size(); ++i) {
      const double e = 0.5 * plant.inertia * r.velocity_dps[i] * r.velocity_dps[i] +
                       0.5 * spring.stiffness * (r.angle_deg[i] - spring.equilibrium_deg) *
                           (r.angle_deg[i] - spring.equilibrium_deg);
      worst_energy = std::max(worst_energy, std::abs(e - e0) / e0);
    }
  }

  // Pure damping with a constant load: velocity relaxes exponentially toward
  // L/B and the angle is its integral. Compared in sup norm.
  struct FirstOrderCase {
    double damping, load_nm, v0_dps;
  };
  const FirstOrderCase cases[] = {{0.5, 1.5, 40.0}, {0.4, 0.0, 60.0}, {0.3, -0.6, 25.0}};
  double worst_first_order = 0.0;
  for (const FirstOrderCase& c : cases) {
    PlantConfig damped = plant;
    damped.load[0].constant_nm = c.load_nm;
    const ImpedanceTriple imp{0.0, c.damping, 0.0};
    const KneeState init{10.0, c.v0_dps, 0.0};
    const PhaseResult r = simulate_phase(imp, GaitPhase::StanceFlexion, init, damped);

    const double tau = damped.inertia / c.damping;
    const double v_inf = c.load_nm / c.damping;
    double max_angle = 0.0, max_velocity = 0.0, err_angle = 0.0, err_velocity = 0.0;
    for (std::size_t i = 0; i < r.t.size(); ++i) {
      const double decay = std::exp(-r.t[i] / tau);
      const double v = v_inf + (c.v0_dps - v_inf) * decay;
      const double angle =
          init.angle_deg + v_inf * r.t[i] + tau * (c.v0_dps - v_inf) * (1.0 - decay);
      max_angle = std::max(max_angle, std::abs(angle));
      max_velocity = std::max(max_velocity, std::abs(v));
      err_angle = std::max(err_angle, std::abs(angle - r.angle_deg[i]));
      err_velocity = std::max(err_velocity, std::abs(v - r.velocity_dps[i]));
    }
    worst_first_order = std::max(worst_first_order, err_angle / max_angle);
    worst_first_order = std::max(worst_first_order, err_velocity / max_velocity);
  }

  const bool ok = worst_energy <= 1e-6 && worst_first_order <= 1e-6;
  return {ok, format("worst relative energy drift %.3e, worst first-order error %.3e",
                     worst_energy, worst_first_order)};
}

}  // namespace

int main() {
  struct Check {
    const char* name;
    Outcome (*run)();
  };
  const Check checks[] = {
      {"linear-plant gain recovery", check_gain_recovery},
      {"Bellman residual on consistent data", check_bellman_residual},
      {"default batch convergence", check_default_batch},
      {"co-adaptation drift at human cadence", check_coadaptation_drift},
      {"closed-form feature extraction", check_synthetic_features},
      {"8-of-10 convergence rule", check_convergence_rule},
      {"bitwise batch reproducibility", check_reproducibility},
      {"integrator energy and closed forms", check_integrator_fidelity},
  };

  int failures = 0;
  for (const Check& check : checks) {
    Outcome outcome;
    try {
      outcome = check.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    std::printf("[%s] %s: %s\n", outcome.passed ? "PASS" : "FAIL", check.name,
                outcome.detail.c_str());
    std::fflush(stdout);
    if (!outcome.passed) ++failures;
  }

  if (failures > 0) std::printf("%d acceptance check(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
