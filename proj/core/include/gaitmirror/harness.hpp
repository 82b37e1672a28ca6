#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gaitmirror/config.hpp"
#include "gaitmirror/features.hpp"
#include "gaitmirror/gait.hpp"
#include "gaitmirror/plant.hpp"
#include "gaitmirror/rl.hpp"

namespace gaitmirror {

/// One impedance update on one phase: the tracking errors measured before
/// the update, the impedance they were measured under, and the action taken.
struct UpdateRow {
  int update = 0;
  GaitPhase phase = GaitPhase::StanceFlexion;
  TrackingState state{};
  ImpedanceTriple impedance{};
  Action action{};
  double cost = 0.0;
  bool converged = false;  // convergence flag as of this update
};

struct TrialRecord {
  int trial = 0;
  std::uint64_t seed = 0;
  std::vector<UpdateRow> rows;          // kNumPhases rows per update
  std::optional<int> converged_at;      // update index, if reached
  int updates_run = 0;
  int failed_cycles = 0;
  int gain_resamples = 0;
  bool aborted = false;                 // plant kept failing, trial abandoned
  std::vector<GaitFeatures> intact_trace;      // target per update
  std::vector<GaitFeatures> prosthesis_trace;  // measurement per update
};

struct PhaseErrorSummary {
  double initial_rmse_peak_deg = 0.0;
  double final_rmse_peak_deg = 0.0;
  double initial_rmse_duration_pct = 0.0;
  double final_rmse_duration_pct = 0.0;
};

struct BatchSummary {
  int trials = 0;
  int converged = 0;
  int aborted = 0;
  double convergence_rate = 0.0;
  double mean_updates_to_convergence = 0.0;
  double median_updates_to_convergence = 0.0;
  std::array<PhaseErrorSummary, kNumPhases> phases{};  // pooled over converged trials
};

struct BatchResult {
  BatchSummary summary;
  std::vector<TrialRecord> trials;
};

enum class ErrorWindow { First, Last };

/// RMSE over the first or last `window` entries of an error series.
/// Throws InsufficientDataError when fewer than `window` samples exist.
double compute_rmse(std::span<const double> errors, ErrorWindow window, int window_size = 10);

struct TrialHooks {
  /// Called for every simulated prosthesis cycle, failed ones included.
  std::function<void(long cycle, const Trajectory&)> trajectory_sink;
  /// Learner checkpoint directory; loaded before the trial when present,
  /// written after it when non-empty.
  std::string load_learners_dir;
  std::string save_learners_dir;
};

TrialRecord run_trial(const ExperimentConfig& cfg, int trial_index,
                      const TrialHooks& hooks = {});

BatchResult run_batch(const ExperimentConfig& cfg);

BatchSummary summarize(const ExperimentConfig& cfg, std::span<const TrialRecord> trials);

/// Per-update CSV row dump, one file per trial. Columns:
/// trial,update,phase,dP_deg,dD_s,dD_pct,K,B,theta_e,dK,dB,dtheta_e,cost,converged
void write_trial_csv(const TrialRecord& record, std::ostream& out);
void write_trial_csv_file(const TrialRecord& record, const std::string& path);

/// Minimal reader for the trial CSV, used by tests and downstream scripts.
std::vector<UpdateRow> read_trial_csv(std::istream& in, int* trial = nullptr);

std::string batch_summary_to_json(const BatchSummary& summary);

/// Write per-trial CSVs, summary.json and config_echo.json under `dir`.
void write_batch_outputs(const ExperimentConfig& cfg, const BatchResult& result,
                         const std::string& dir);

struct LqrCheckReport {
  bool passed = false;
  GainMatrix oracle_gain{};
  GainMatrix learned_gain{};
  std::vector<double> gain_errors;  // relative error after each iteration
  int iterations_used = 0;
  int dare_iterations = 0;
};

/// Train policy iteration on the linear plant and compare the learned gain
/// with the Riccati solution. The oracle is computed first, from the model
/// alone; learning sees only sampled transitions.
LqrCheckReport lqr_check(const LqrCheckConfig& cfg, std::uint64_t master_seed);

std::string lqr_report_to_json(const LqrCheckReport& report);

}  // namespace gaitmirror
