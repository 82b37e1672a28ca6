#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "gaitmirror/config.hpp"
#include "gaitmirror/harness.hpp"
#include "gaitmirror/plant.hpp"
#include "gaitmirror/rl.hpp"

namespace {

using namespace gaitmirror;

void BM_basis_phi(benchmark::State& state) {
  const StateVec x(0.7, -0.02);
  const ActionVec u(0.3, -0.05, 1.2);
  for (auto _ : state) benchmark::DoNotOptimize(basis_phi(x, u));
}
BENCHMARK(BM_basis_phi);

void BM_simulate_cycle(benchmark::State& state) {
  const ExperimentConfig cfg = default_config();
  ImpedanceSchedule sched;
  for (GaitPhase p : kPhaseOrder) sched[p] = cfg.reference_schedule[p];
  const KneeState entry{cfg.plant.initial_angle_deg, 0.0, 0.0};
  std::mt19937_64 rng(7);
  for (auto _ : state)
    benchmark::DoNotOptimize(simulate_cycle(sched, cfg.plant, entry, 0.0, rng));
}
BENCHMARK(BM_simulate_cycle);

void BM_policy_evaluation(benchmark::State& state) {
  const ExperimentConfig cfg = default_config();
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> span(-1.0, 1.0);
  std::vector<Experience> batch;
  for (int i = 0; i < 60; ++i) {
    Experience e;
    e.state = StateVec(span(rng), span(rng));
    e.action = ActionVec(span(rng), span(rng), span(rng));
    e.cost = instantaneous_cost(e.state, e.action, cfg.lqr.cost);
    e.next_state = lqr_plant_step(e.state, e.action, cfg.lqr.a, cfg.lqr.b);
    e.next_policy_action = ActionVec::Zero();
    batch.push_back(e);
  }
  const EvaluationOptions opts;
  for (auto _ : state) benchmark::DoNotOptimize(policy_evaluation(batch, opts));
}
BENCHMARK(BM_policy_evaluation);

void BM_lqr_check(benchmark::State& state) {
  const ExperimentConfig cfg = default_config();
  for (auto _ : state) benchmark::DoNotOptimize(lqr_check(cfg.lqr, cfg.master_seed));
}
BENCHMARK(BM_lqr_check)->Unit(benchmark::kMillisecond);

void BM_run_trial(benchmark::State& state) {
  const ExperimentConfig cfg = default_config();
  for (auto _ : state) benchmark::DoNotOptimize(run_trial(cfg, 0));
}
BENCHMARK(BM_run_trial)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
