#include "gaitmirror/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gaitmirror/errors.hpp"
#include "gaitmirror/riccati.hpp"
#include "gaitmirror/rng.hpp"
#include "gaitmirror/trajectory_io.hpp"

namespace gaitmirror {

namespace {

constexpr char kTrialHeader[] =
    "trial,update,phase,dP_deg,dD_s,dD_pct,K,B,theta_e,dK,dB,dtheta_e,cost,converged";

/// Representative error magnitudes used to scale random initial gains:
/// a few degrees of peak error, a tenth of a second of duration error.
constexpr std::array<double, 2> kStateScale = {3.0, 0.1};

std::string format_double(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.17g", v);
  return buffer;
}

SeedStream exploration_stream(GaitPhase p) {
  return static_cast<SeedStream>(static_cast<std::uint64_t>(SeedStream::ExplorationStf) +
                                 static_cast<std::uint64_t>(p));
}

GainMatrix random_gain(std::mt19937_64& rng, const ExperimentConfig& cfg) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const std::array<double, 3> bound = {cfg.learner.action_bounds.dstiffness_max,
                                       cfg.learner.action_bounds.ddamping_max,
                                       cfg.learner.action_bounds.dequilibrium_max_deg};
  GainMatrix gain;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 2; ++c)
      gain(r, c) = unit(rng) * cfg.random_gain_scale * bound[static_cast<std::size_t>(r)] /
                   kStateScale[static_cast<std::size_t>(c)];
  return gain;
}

std::string learner_checkpoint_path(const std::string& dir, GaitPhase p) {
  std::string lower(phase_name(p));
  for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return (std::filesystem::path(dir) / ("learner_" + lower + ".json")).string();
}

std::vector<PhaseLearner> make_learners(const ExperimentConfig& cfg, std::uint64_t trial_seed,
                                        std::mt19937_64& gain_rng, const std::string& load_dir) {
  std::vector<PhaseLearner> learners;
  learners.reserve(kNumPhases);
  for (GaitPhase p : kPhaseOrder) {
    const std::uint64_t seed = derive_seed(trial_seed, static_cast<std::uint64_t>(exploration_stream(p)));
    if (!load_dir.empty()) {
      std::ifstream in(learner_checkpoint_path(load_dir, p));
      if (!in) throw ConfigError("cannot open learner checkpoint: " + learner_checkpoint_path(load_dir, p));
      std::stringstream text;
      text << in.rdbuf();
      learners.push_back(PhaseLearner::from_json(text.str(), cfg.learner, seed));
      if (learners.back().phase() != p)
        throw ConfigError("learner checkpoint phase mismatch in " +
                          learner_checkpoint_path(load_dir, p));
    } else if (cfg.gain_mode == InitialGainMode::Random) {
      learners.emplace_back(p, random_gain(gain_rng, cfg), cfg.learner, seed);
    } else {
      learners.emplace_back(p, cfg.initial_gains[static_cast<std::size_t>(p)], cfg.learner, seed);
    }
  }
  return learners;
}

GaitFeatures noisy_intact(const GaitFeatures& truth, double angle_sigma_deg, double duration_sigma_s,
                          std::mt19937_64& rng) {
  GaitFeatures measured = truth;
  if (angle_sigma_deg > 0.0) {
    std::normal_distribution<double> noise(0.0, angle_sigma_deg);
    for (double& peak : measured.peak_deg) peak += noise(rng);
  }
  if (duration_sigma_s > 0.0) {
    std::normal_distribution<double> noise(0.0, duration_sigma_s);
    for (double& d : measured.duration_s) d = std::max(1e-3, d + noise(rng));
  }
  return measured;
}

GaitFeatures mean_features(const std::vector<GaitFeatures>& cycles) {
  GaitFeatures mean = cycles.front();
  for (std::size_t p = 0; p < kNumPhases; ++p) {
    double peak = 0.0;
    double duration = 0.0;
    for (const GaitFeatures& f : cycles) {
      peak += f.peak_deg[p];
      duration += f.duration_s[p];
    }
    mean.peak_deg[p] = peak / static_cast<double>(cycles.size());
    mean.duration_s[p] = duration / static_cast<double>(cycles.size());
  }
  return mean;
}

}  // namespace

double compute_rmse(std::span<const double> errors, ErrorWindow window, int window_size) {
  if (window_size < 1) throw ConfigError("RMSE window size must be >= 1");
  const auto n = static_cast<std::size_t>(window_size);
  if (errors.size() < n)
    throw InsufficientDataError("need " + std::to_string(n) + " errors for the RMSE window, have " +
                                std::to_string(errors.size()));
  const std::size_t begin = window == ErrorWindow::First ? 0 : errors.size() - n;
  double sum_sq = 0.0;
  for (std::size_t i = begin; i < begin + n; ++i) sum_sq += errors[i] * errors[i];
  return std::sqrt(sum_sq / static_cast<double>(n));
}

TrialRecord run_trial(const ExperimentConfig& cfg, int trial_index, const TrialHooks& hooks) {
  cfg.validate();

  TrialRecord record;
  record.trial = trial_index;
  record.seed = derive_seed(cfg.master_seed, static_cast<std::uint64_t>(trial_index));

  auto init_rng = make_generator(record.seed, SeedStream::InitialImpedance);
  auto gain_rng = make_generator(record.seed, SeedStream::RandomGains);
  auto intact_rng = make_generator(record.seed, SeedStream::IntactNoise);

  ImpedanceSchedule initial_schedule = cfg.reference_schedule;
  initial_schedule.cycle = 0;
  std::uniform_real_distribution<double> spread(-cfg.initial_spread, cfg.initial_spread);
  for (GaitPhase p : kPhaseOrder) {
    const auto i = static_cast<std::size_t>(p);
    const ImpedanceTriple& ref = cfg.reference_schedule[p];
    const ImpedanceTriple sampled{ref.stiffness * (1.0 + spread(init_rng)),
                                  ref.damping * (1.0 + spread(init_rng)),
                                  ref.equilibrium_deg * (1.0 + spread(init_rng))};
    initial_schedule.phases[i] = cfg.impedance_bounds[i].clamp(sampled);
  }
  ImpedanceSchedule schedule = initial_schedule;

  Plant plant(cfg.plant, derive_seed(record.seed, static_cast<std::uint64_t>(SeedStream::PlantNoise)));
  std::vector<PhaseLearner> learners =
      make_learners(cfg, record.seed, gain_rng, hooks.load_learners_dir);

  GaitFeatures intact_truth = cfg.plant.intact_baseline;
  intact_truth.side = Side::Intact;
  TargetTracker tracker(intact_truth, cfg.features);

  std::array<std::vector<TrackingState>, kNumPhases> history;
  int consecutive_fails = 0;

  for (int update = 0; update < cfg.max_updates && !record.aborted; ++update) {
    std::vector<GaitFeatures> measured_cycles;
    measured_cycles.reserve(static_cast<std::size_t>(cfg.features.cycles_per_update));
    while (static_cast<int>(measured_cycles.size()) < cfg.features.cycles_per_update) {
      const CycleResult cycle = plant.step_cycle(schedule);
      if (hooks.trajectory_sink) hooks.trajectory_sink(plant.cycles_run() - 1, cycle.trajectory);

      if (cycle.failed) {
        ++record.failed_cycles;
        ++consecutive_fails;
        for (PhaseLearner& learner : learners) learner.invalidate_pending();
        if (consecutive_fails >= cfg.abort_after_failed_cycles) {
          if (cfg.gain_mode == InitialGainMode::Random &&
              record.gain_resamples < cfg.max_gain_resamples) {
            ++record.gain_resamples;
            consecutive_fails = 0;
            schedule = initial_schedule;
            learners = make_learners(cfg, record.seed, gain_rng, hooks.load_learners_dir);
          } else {
            record.aborted = true;
            break;
          }
        }
        continue;
      }
      consecutive_fails = 0;

      if (cfg.coadapt) intact_truth = adapt_intact(intact_truth, cycle.features, cfg.plant);
      tracker.push(noisy_intact(intact_truth, cfg.plant.noise_stddev_deg, cfg.plant.dt, intact_rng));
      measured_cycles.push_back(cycle.features);
    }
    if (record.aborted) break;

    const GaitFeatures measured = mean_features(measured_cycles);
    record.intact_trace.push_back(intact_truth);
    record.prosthesis_trace.push_back(measured);

    std::array<TrackingState, kNumPhases> states;
    bool all_converged = true;
    for (GaitPhase p : kPhaseOrder) {
      const auto i = static_cast<std::size_t>(p);
      states[i] = compute_state(measured, tracker.target(), p);
      history[i].push_back(states[i]);
      all_converged = all_converged &&
                      check_convergence(history[i], cfg.tol_peak_deg, cfg.tol_duration_frac);
    }

    const std::size_t base = record.rows.size();
    for (GaitPhase p : kPhaseOrder) {
      const auto i = static_cast<std::size_t>(p);
      UpdateRow row;
      row.update = update;
      row.phase = p;
      row.state = states[i];
      row.impedance = schedule[p];
      row.cost = instantaneous_cost(
          StateVec(states[i].peak_error_deg, states[i].duration_error_s), ActionVec::Zero(),
          cfg.learner.cost);
      row.converged = all_converged;
      record.rows.push_back(row);
    }
    record.updates_run = update + 1;

    if (all_converged) {
      record.converged_at = update;
      break;
    }

    GaitPhase active = kPhaseOrder[0];
    if (cfg.tuning_mode == TuningMode::Sequential) {
      for (GaitPhase p : kPhaseOrder) {
        active = p;
        if (!check_convergence(history[static_cast<std::size_t>(p)], cfg.tol_peak_deg,
                               cfg.tol_duration_frac))
          break;
      }
      for (GaitPhase p : kPhaseOrder)
        if (p != active) learners[static_cast<std::size_t>(p)].invalidate_pending();
    }

    for (GaitPhase p : kPhaseOrder) {
      const auto i = static_cast<std::size_t>(p);
      if (cfg.tuning_mode == TuningMode::Sequential && p != active) continue;
      const StateVec x(states[i].peak_error_deg, states[i].duration_error_s);
      const PhaseLearner::StepResult step = learners[i].step(x);
      record.rows[base + i].action = step.action;
      record.rows[base + i].cost = step.cost;
      schedule = apply_action(schedule, p, step.action, cfg.impedance_bounds[i]).schedule;
    }
  }

  if (!hooks.save_learners_dir.empty()) {
    std::filesystem::create_directories(hooks.save_learners_dir);
    for (const PhaseLearner& learner : learners) {
      std::ofstream out(learner_checkpoint_path(hooks.save_learners_dir, learner.phase()));
      if (!out)
        throw ConfigError("cannot write learner checkpoint under " + hooks.save_learners_dir);
      out << learner.to_json();
    }
  }
  return record;
}

BatchResult run_batch(const ExperimentConfig& cfg) {
  cfg.validate();
  BatchResult result;
  result.trials.reserve(static_cast<std::size_t>(cfg.trials));
  for (int i = 0; i < cfg.trials; ++i) result.trials.push_back(run_trial(cfg, i));
  result.summary = summarize(cfg, result.trials);
  return result;
}

BatchSummary summarize(const ExperimentConfig& cfg, std::span<const TrialRecord> trials) {
  BatchSummary summary;
  summary.trials = static_cast<int>(trials.size());

  std::vector<double> updates_to_convergence;
  std::array<std::vector<double>, kNumPhases> first_peak, last_peak, first_duration, last_duration;

  for (const TrialRecord& trial : trials) {
    if (trial.aborted) ++summary.aborted;
    if (!trial.converged_at || trial.aborted) continue;
    ++summary.converged;
    updates_to_convergence.push_back(static_cast<double>(*trial.converged_at + 1));

    for (GaitPhase p : kPhaseOrder) {
      const auto i = static_cast<std::size_t>(p);
      std::vector<double> peaks, durations;
      for (const UpdateRow& row : trial.rows) {
        if (row.phase != p) continue;
        peaks.push_back(row.state.peak_error_deg);
        durations.push_back(100.0 * row.state.duration_error_frac);
      }
      for (std::size_t k = 0; k < 10; ++k) {
        first_peak[i].push_back(peaks[k]);
        last_peak[i].push_back(peaks[peaks.size() - 10 + k]);
        first_duration[i].push_back(durations[k]);
        last_duration[i].push_back(durations[durations.size() - 10 + k]);
      }
    }
  }

  summary.convergence_rate =
      summary.trials > 0 ? static_cast<double>(summary.converged) / summary.trials : 0.0;
  if (!updates_to_convergence.empty()) {
    summary.mean_updates_to_convergence =
        std::accumulate(updates_to_convergence.begin(), updates_to_convergence.end(), 0.0) /
        static_cast<double>(updates_to_convergence.size());
    std::vector<double> sorted = updates_to_convergence;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t mid = sorted.size() / 2;
    summary.median_updates_to_convergence =
        sorted.size() % 2 == 1 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
  }

  auto pooled_rmse = [](const std::vector<double>& values) {
    if (values.empty()) return 0.0;
    double sum_sq = 0.0;
    for (double v : values) sum_sq += v * v;
    return std::sqrt(sum_sq / static_cast<double>(values.size()));
  };
  for (std::size_t i = 0; i < kNumPhases; ++i) {
    summary.phases[i].initial_rmse_peak_deg = pooled_rmse(first_peak[i]);
    summary.phases[i].final_rmse_peak_deg = pooled_rmse(last_peak[i]);
    summary.phases[i].initial_rmse_duration_pct = pooled_rmse(first_duration[i]);
    summary.phases[i].final_rmse_duration_pct = pooled_rmse(last_duration[i]);
  }
  (void)cfg;
  return summary;
}

void write_trial_csv(const TrialRecord& record, std::ostream& out) {
  out << kTrialHeader << "\n";
  for (const UpdateRow& row : record.rows) {
    out << record.trial << ',' << row.update << ',' << phase_name(row.phase) << ','
        << format_double(row.state.peak_error_deg) << ','
        << format_double(row.state.duration_error_s) << ','
        << format_double(100.0 * row.state.duration_error_frac) << ','
        << format_double(row.impedance.stiffness) << ',' << format_double(row.impedance.damping)
        << ',' << format_double(row.impedance.equilibrium_deg) << ','
        << format_double(row.action.dstiffness) << ',' << format_double(row.action.ddamping)
        << ',' << format_double(row.action.dequilibrium_deg) << ',' << format_double(row.cost)
        << ',' << (row.converged ? 1 : 0) << "\n";
  }
}

void write_trial_csv_file(const TrialRecord& record, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write trial CSV: " + path);
  write_trial_csv(record, out);
}

std::vector<UpdateRow> read_trial_csv(std::istream& in, int* trial) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty trial CSV");
  if (line.ends_with("\r")) line.pop_back();
  if (line != kTrialHeader) throw ConfigError("bad trial CSV header");

  std::vector<UpdateRow> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.ends_with("\r")) line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::string field;
    std::istringstream fields_in(line);
    while (std::getline(fields_in, field, ',')) fields.push_back(field);
    if (fields.size() != 14)
      throw ConfigError("trial CSV line " + std::to_string(line_no) + ": expected 14 columns");

    auto number = [&](std::size_t idx) {
      try {
        std::size_t used = 0;
        const double v = std::stod(fields[idx], &used);
        if (used != fields[idx].size()) throw std::invalid_argument(fields[idx]);
        return v;
      } catch (const std::logic_error&) {
        throw ConfigError("trial CSV line " + std::to_string(line_no) + ": bad number '" +
                          fields[idx] + "'");
      }
    };

    if (trial) *trial = static_cast<int>(number(0));
    UpdateRow row;
    row.update = static_cast<int>(number(1));
    row.phase = phase_from_name(fields[2]);
    row.state.phase = row.phase;
    row.state.peak_error_deg = number(3);
    row.state.duration_error_s = number(4);
    row.state.duration_error_frac = number(5) / 100.0;
    row.impedance = ImpedanceTriple{number(6), number(7), number(8)};
    row.action = Action{number(9), number(10), number(11)};
    row.cost = number(12);
    row.converged = fields[13] == "1";
    rows.push_back(row);
  }
  return rows;
}

std::string batch_summary_to_json(const BatchSummary& summary) {
  nlohmann::json j;
  j["trials"] = summary.trials;
  j["converged"] = summary.converged;
  j["aborted"] = summary.aborted;
  j["convergence_rate"] = summary.convergence_rate;
  j["mean_updates_to_convergence"] = summary.mean_updates_to_convergence;
  j["median_updates_to_convergence"] = summary.median_updates_to_convergence;
  for (GaitPhase p : kPhaseOrder) {
    const PhaseErrorSummary& phase = summary.phases[static_cast<std::size_t>(p)];
    j["phases"][std::string(phase_name(p))] = {
        {"initial_rmse_peak_deg", phase.initial_rmse_peak_deg},
        {"final_rmse_peak_deg", phase.final_rmse_peak_deg},
        {"initial_rmse_duration_pct", phase.initial_rmse_duration_pct},
        {"final_rmse_duration_pct", phase.final_rmse_duration_pct}};
  }
  return j.dump(2) + "\n";
}

void write_batch_outputs(const ExperimentConfig& cfg, const BatchResult& result,
                         const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path base(dir);
  for (const TrialRecord& trial : result.trials) {
    char name[32];
    std::snprintf(name, sizeof(name), "trial_%03d.csv", trial.trial);
    write_trial_csv_file(trial, (base / name).string());
  }
  {
    std::ofstream out(base / "summary.json");
    if (!out) throw ConfigError("cannot write summary.json under " + dir);
    out << batch_summary_to_json(result.summary);
  }
  {
    std::ofstream out(base / "config_echo.json");
    if (!out) throw ConfigError("cannot write config_echo.json under " + dir);
    out << config_to_json(cfg);
  }
}

LqrCheckReport lqr_check(const LqrCheckConfig& cfg, std::uint64_t master_seed) {
  cfg.validate();

  LqrCheckReport report;
  // The discounted problem is equivalent to an undiscounted one with the
  // dynamics scaled by sqrt(gamma); the oracle gain comes from that plant.
  const double scale = std::sqrt(cfg.discount);
  const DareSolution oracle =
      solve_dare(scale * cfg.a, scale * cfg.b, cfg.cost.state_weight, cfg.cost.action_weight,
                 cfg.dare);
  report.oracle_gain = oracle.gain;
  report.dare_iterations = oracle.iterations;

  std::mt19937_64 rng(derive_seed(master_seed, 0));
  std::uniform_real_distribution<double> state_dist(-cfg.state_scale, cfg.state_scale);
  std::normal_distribution<double> exploration(0.0, cfg.exploration_stddev);

  EvaluationOptions opts;
  opts.discount = cfg.discount;

  GainMatrix gain = GainMatrix::Zero();
  const double oracle_norm = std::max(report.oracle_gain.norm(), 1e-6);
  for (int iter = 1; iter <= cfg.max_iterations; ++iter) {
    std::vector<Experience> batch;
    batch.reserve(static_cast<std::size_t>(cfg.batch_size));
    for (int k = 0; k < cfg.batch_size; ++k) {
      const StateVec x(state_dist(rng), state_dist(rng));
      ActionVec u = -gain * x;
      for (int j = 0; j < 3; ++j) u(j) += exploration(rng);
      const StateVec next = lqr_plant_step(x, u, cfg.a, cfg.b);
      batch.push_back(Experience{x, u, instantaneous_cost(x, u, cfg.cost), next, -gain * next});
    }

    const EvaluationResult evaluated = policy_evaluation(batch, opts);
    gain = policy_improvement(project_q(evaluated.weights, 1e-9)).gain;

    report.iterations_used = iter;
    report.gain_errors.push_back((gain - report.oracle_gain).norm() / oracle_norm);
    if (report.gain_errors.back() < cfg.gain_tolerance) {
      report.passed = true;
      break;
    }
  }
  report.learned_gain = gain;
  return report;
}

std::string lqr_report_to_json(const LqrCheckReport& report) {
  nlohmann::json j;
  j["passed"] = report.passed;
  j["iterations_used"] = report.iterations_used;
  j["dare_iterations"] = report.dare_iterations;
  j["gain_errors"] = report.gain_errors;
  auto gain_json = [](const GainMatrix& g) {
    nlohmann::json rows = nlohmann::json::array();
    for (int r = 0; r < 3; ++r) rows.push_back({g(r, 0), g(r, 1)});
    return rows;
  };
  j["oracle_gain"] = gain_json(report.oracle_gain);
  j["learned_gain"] = gain_json(report.learned_gain);
  return j.dump(2) + "\n";
}

}  // namespace gaitmirror
