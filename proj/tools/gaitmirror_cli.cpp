#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "gaitmirror/config.hpp"
#include "gaitmirror/errors.hpp"
#include "gaitmirror/features.hpp"
#include "gaitmirror/harness.hpp"
#include "gaitmirror/trajectory_io.hpp"

namespace {

using namespace gaitmirror;

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 1;
constexpr int kExitCheckFailed = 2;

struct CommonOptions {
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int trials = 0;
  bool trials_set = false;
  std::string out_dir;
  std::string mode;
  std::string coadapt;
};

void add_common(CLI::App& cmd, CommonOptions& opt) {
  cmd.add_option("--config", opt.config_path, "Config file (key = value)")
      ->check(CLI::ExistingFile);
  cmd.add_option("--seed", opt.seed, "Master seed")->each([&opt](const std::string&) {
    opt.seed_set = true;
  });
  cmd.add_option("--trials", opt.trials, "Number of trials")
      ->check(CLI::PositiveNumber)
      ->each([&opt](const std::string&) { opt.trials_set = true; });
  cmd.add_option("--out", opt.out_dir, "Output directory");
  cmd.add_option("--mode", opt.mode, "Update cadence")
      ->check(CLI::IsMember({"sim", "human-cadence"}));
  cmd.add_option("--coadapt", opt.coadapt, "Intact-side adaptation")
      ->check(CLI::IsMember({"on", "off"}));
}

ExperimentConfig resolve_config(const CommonOptions& opt) {
  ExperimentConfig cfg = opt.config_path.empty() ? default_config() : load_config(opt.config_path);
  if (opt.seed_set) cfg.master_seed = opt.seed;
  if (opt.trials_set) cfg.trials = opt.trials;
  if (!opt.out_dir.empty()) cfg.out_dir = opt.out_dir;
  if (!opt.mode.empty())
    set_cadence_mode(cfg, opt.mode == "sim" ? CadenceMode::Simulation : CadenceMode::HumanCadence);
  if (!opt.coadapt.empty()) cfg.coadapt = opt.coadapt == "on";
  cfg.validate();
  return cfg;
}

void print_trial_outcome(const TrialRecord& t) {
  if (t.aborted)
    std::printf("trial %d aborted after %d failed cycles\n", t.trial, t.failed_cycles);
  else if (t.converged_at)
    std::printf("trial %d converged at update %d (%d updates run)\n", t.trial, *t.converged_at,
                t.updates_run);
  else
    std::printf("trial %d did not converge in %d updates\n", t.trial, t.updates_run);
}

int cmd_run(const CommonOptions& opt, int trial_index, bool dump_trajectories,
            const std::string& load_learners, const std::string& save_learners) {
  const ExperimentConfig cfg = resolve_config(opt);
  std::filesystem::create_directories(cfg.out_dir);

  TrialHooks hooks;
  hooks.load_learners_dir = load_learners;
  hooks.save_learners_dir = save_learners;
  std::ofstream trajectory_file;
  std::optional<TrajectoryCsvWriter> writer;
  if (dump_trajectories) {
    const auto path = std::filesystem::path(cfg.out_dir) / "trajectories.csv";
    trajectory_file.open(path);
    if (!trajectory_file) throw ConfigError("cannot write " + path.string());
    writer.emplace(trajectory_file, trial_index);
    hooks.trajectory_sink = [&writer](long cycle, const Trajectory& traj) {
      writer->write_cycle(cycle, traj);
    };
  }

  const TrialRecord record = run_trial(cfg, trial_index, hooks);
  char name[32];
  std::snprintf(name, sizeof name, "trial_%03d.csv", trial_index);
  write_trial_csv_file(record, (std::filesystem::path(cfg.out_dir) / name).string());
  print_trial_outcome(record);
  return kExitOk;
}

int cmd_batch(const CommonOptions& opt) {
  const ExperimentConfig cfg = resolve_config(opt);
  const BatchResult result = run_batch(cfg);
  write_batch_outputs(cfg, result, cfg.out_dir);
  const BatchSummary& s = result.summary;
  std::printf("%d/%d trials converged (rate %.3f, mean %.1f updates, median %.1f)\n", s.converged,
              s.trials, s.convergence_rate, s.mean_updates_to_convergence,
              s.median_updates_to_convergence);
  std::printf("outputs written to %s\n", cfg.out_dir.c_str());
  return kExitOk;
}

int cmd_lqr_check(const CommonOptions& opt) {
  const ExperimentConfig cfg = resolve_config(opt);
  const LqrCheckReport report = lqr_check(cfg.lqr, cfg.master_seed);
  std::cout << lqr_report_to_json(report);
  if (!opt.out_dir.empty()) {
    std::filesystem::create_directories(opt.out_dir);
    std::ofstream out(std::filesystem::path(opt.out_dir) / "lqr_check.json");
    out << lqr_report_to_json(report);
  }
  return report.passed ? kExitOk : kExitCheckFailed;
}

int cmd_extract_features(const CommonOptions& opt, const std::string& input) {
  const ExperimentConfig cfg = resolve_config(opt);
  const std::vector<LoadedCycle> cycles = read_trajectory_csv_file(input);
  if (cycles.empty()) throw ConfigError(input + ": no cycles found");

  std::printf(
      "trial,cycle,source,peak_stf_deg,peak_ste_deg,peak_swf_deg,peak_swe_deg,"
      "dur_stf_s,dur_ste_s,dur_swf_s,dur_swe_s\n");
  for (const LoadedCycle& c : cycles) {
    const GaitFeatures f =
        c.annotated ? extract_features(c.trajectory)
                    : extract_features_raw(c.trajectory.angle_deg, c.trajectory.dt, cfg.features);
    std::printf("%ld,%ld,%s", c.trial, c.cycle, c.annotated ? "annotated" : "raw");
    for (double peak : f.peak_deg) std::printf(",%.6g", peak);
    for (double duration : f.duration_s) std::printf(",%.6g", duration);
    std::printf("\n");
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Impedance-tuning experiment runner"};
  app.require_subcommand(1);

  CommonOptions opt;

  CLI::App* run = app.add_subcommand("run", "Run a single tuning trial");
  int trial_index = 0;
  bool dump_trajectories = false;
  std::string load_learners;
  std::string save_learners;
  add_common(*run, opt);
  run->add_option("--trial", trial_index, "Trial index (selects the per-trial seed)")
      ->check(CLI::NonNegativeNumber);
  run->add_flag("--trajectories", dump_trajectories, "Also dump per-cycle knee trajectories");
  run->add_option("--load-learners", load_learners, "Load learner checkpoints from this directory")
      ->check(CLI::ExistingDirectory);
  run->add_option("--save-learners", save_learners, "Write learner checkpoints to this directory");

  CLI::App* batch = app.add_subcommand("batch", "Run the full multi-trial protocol");
  add_common(*batch, opt);

  CLI::App* lqr = app.add_subcommand("lqr-check", "Verify policy iteration against the Riccati oracle");
  add_common(*lqr, opt);

  CLI::App* extract = app.add_subcommand("extract-features", "Extract gait features from a trajectory CSV");
  std::string input;
  add_common(*extract, opt);
  extract->add_option("--input", input, "Trajectory CSV")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfigError;
  }

  try {
    if (run->parsed()) return cmd_run(opt, trial_index, dump_trajectories, load_learners, save_learners);
    if (batch->parsed()) return cmd_batch(opt);
    if (lqr->parsed()) return cmd_lqr_check(opt);
    if (extract->parsed()) return cmd_extract_features(opt, input);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const MalformedTrajectoryError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
  return kExitOk;
}
