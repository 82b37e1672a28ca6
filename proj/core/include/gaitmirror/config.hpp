#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>

#include "gaitmirror/features.hpp"
#include "gaitmirror/gait.hpp"
#include "gaitmirror/plant.hpp"
#include "gaitmirror/riccati.hpp"
#include "gaitmirror/rl.hpp"

namespace gaitmirror {

enum class CadenceMode { Simulation, HumanCadence };
enum class TuningMode { Simultaneous, Sequential };
enum class InitialGainMode { Fixed, Random };

/// Configuration of the `lqr-check` verification run: a linear plant with
/// quadratic cost on which policy iteration is compared against the Riccati
/// oracle.
struct LqrCheckConfig {
  Eigen::Matrix2d a;
  Eigen::Matrix<double, 2, 3> b;
  CostMatrices cost;
  double discount = 1.0;
  int batch_size = 40;
  double state_scale = 1.0;        // states sampled uniformly in [-s, s]^2
  double exploration_stddev = 0.5;
  int max_iterations = 10;
  double gain_tolerance = 1e-3;    // relative gain error declared a pass
  DareOptions dare{};

  void validate() const;
};

struct ExperimentConfig {
  PlantConfig plant{};
  FeatureExtractorConfig features{};
  LearnerConfig learner{};
  std::array<ImpedanceBounds, kNumPhases> impedance_bounds{};
  ImpedanceSchedule reference_schedule{};
  std::array<GainMatrix, kNumPhases> initial_gains{};
  InitialGainMode gain_mode = InitialGainMode::Fixed;
  double random_gain_scale = 0.5;  // entries of random gains, scaled per column
  int trials = 30;
  /// Half-width of the uniform initial-impedance perturbation as a fraction
  /// of the reference value; 0.2 * sqrt(3) makes the standard deviation 0.2
  /// of the reference.
  double initial_spread = 0.34641016151377546;
  int max_updates = 50;
  double tol_peak_deg = 1.5;
  double tol_duration_frac = 0.02;
  CadenceMode cadence_mode = CadenceMode::Simulation;
  bool coadapt = false;
  TuningMode tuning_mode = TuningMode::Simultaneous;
  int abort_after_failed_cycles = 3;
  int max_gain_resamples = 5;      // random-gain mode: rejections before aborting
  std::uint64_t master_seed = 12345;
  std::string out_dir = "out";
  LqrCheckConfig lqr{};

  void validate() const;  // throws ConfigError
};

/// Built-in defaults: the reference impedance schedule, its steady-cycle
/// intact baseline and hand-tuned initial gains. configs/default.cfg in the
/// repository mirrors these values.
ExperimentConfig default_config();

/// Parse the `key = value` config format (see README). Keys not in the
/// schema are errors; keys omitted keep their defaults.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(std::istream& in, const std::string& origin);

/// Set the cadence mode together with its derived feature-aggregation
/// cadence: one cycle per update in simulation mode, four in human-cadence
/// mode.
void set_cadence_mode(ExperimentConfig& cfg, CadenceMode mode);

/// Machine-readable echo of every effective config value, written next to
/// experiment outputs for provenance.
std::string config_to_json(const ExperimentConfig& cfg);

}  // namespace gaitmirror
