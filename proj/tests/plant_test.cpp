#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "gaitmirror/config.hpp"
#include "gaitmirror/features.hpp"
#include "gaitmirror/plant.hpp"

using namespace gaitmirror;

namespace {

PlantConfig quiet_plant() {
  PlantConfig cfg = default_config().plant;
  cfg.noise_stddev_deg = 0.0;
  for (auto& load : cfg.load) load = LoadProfile{};
  return cfg;
}

ImpedanceSchedule reference_schedule() {
  const ExperimentConfig cfg = default_config();
  ImpedanceSchedule sched;
  for (GaitPhase p : kPhaseOrder) sched[p] = cfg.reference_schedule[p];
  return sched;
}

}  // namespace

TEST_CASE("starting at the equilibrium never arms the exit rule") {
  PlantConfig cfg = quiet_plant();
  const ImpedanceTriple imp{10.0, 0.5, 30.0};
  const PhaseResult r = simulate_phase(imp, GaitPhase::StanceFlexion, {30.0, 0.0, 0.0}, cfg);
  CHECK(r.exit == PhaseResult::Exit::DurationCap);
  for (double angle : r.angle_deg) CHECK(angle == doctest::Approx(30.0).epsilon(1e-12));
}

TEST_CASE("undamped unforced phases conserve the oscillator energy") {
  PlantConfig cfg = quiet_plant();
  const double inertia = cfg.inertia;
  const struct {
    ImpedanceTriple imp;
    double start_deg;
  } cases[] = {
      // swings stay inside the physical range so the stop never intervenes
      {{4.0, 0.0, 30.0}, 10.0},
      {{2.5, 0.0, 35.0}, 60.0},
      {{6.0, 0.0, 50.0}, 20.0},
      {{5.0, 0.0, 40.0}, 70.0},
  };
  int phase_index = 0;
  for (const auto& c : cases) {
    const GaitPhase phase = kPhaseOrder[static_cast<std::size_t>(phase_index++)];
    const PhaseResult r = simulate_phase(c.imp, phase, {c.start_deg, 0.0, 0.0}, cfg);
    REQUIRE(r.exit == PhaseResult::Exit::Extremum);
    const double offset0 = c.start_deg - c.imp.equilibrium_deg;
    const double e0 = 0.5 * c.imp.stiffness * offset0 * offset0;
    for (std::size_t i = 0; i < r.angle_deg.size(); ++i) {
      const double offset = r.angle_deg[i] - c.imp.equilibrium_deg;
      const double energy = 0.5 * inertia * r.velocity_dps[i] * r.velocity_dps[i] +
                            0.5 * c.imp.stiffness * offset * offset;
      CHECK(std::abs(energy - e0) / e0 < 1e-6);
    }
  }
}

TEST_CASE("damped stiffness-free phases follow the first-order closed form") {
  // inertia * w' = -B w + L has w(t) = L/B + (w0 - L/B) exp(-B t / inertia)
  // and the integrated angle in closed form as well.
  PlantConfig cfg = quiet_plant();
  const struct {
    double damping;
    double load;
    double w0;
  } cases[] = {{0.5, 1.5, 40.0}, {0.4, 0.0, 60.0}, {0.3, -0.6, 25.0}};
  for (const auto& c : cases) {
    cfg.load[0] = LoadProfile{c.load, 0.0, 0.0, 0.0};
    const ImpedanceTriple imp{0.0, c.damping, 0.0};
    const PhaseResult r = simulate_phase(imp, GaitPhase::StanceFlexion, {10.0, c.w0, 0.0}, cfg);
    const double winf = c.load / c.damping;
    const double tau = cfg.inertia / c.damping;
    double worst_angle = 0.0, worst_velocity = 0.0, scale_angle = 0.0, scale_velocity = 0.0;
    for (std::size_t i = 0; i < r.t.size(); ++i) {
      const double decay = std::exp(-r.t[i] / tau);
      const double w = winf + (c.w0 - winf) * decay;
      const double angle = 10.0 + winf * r.t[i] + tau * (c.w0 - winf) * (1.0 - decay);
      worst_velocity = std::max(worst_velocity, std::abs(w - r.velocity_dps[i]));
      worst_angle = std::max(worst_angle, std::abs(angle - r.angle_deg[i]));
      scale_velocity = std::max(scale_velocity, std::abs(w));
      scale_angle = std::max(scale_angle, std::abs(angle));
    }
    CHECK(worst_velocity / scale_velocity < 1e-6);
    CHECK(worst_angle / scale_angle < 1e-6);
  }
}

TEST_CASE("stiffer springs finish a phase sooner") {
  PlantConfig cfg = quiet_plant();
  double previous = 1e9;
  for (double stiffness : {2.0, 3.0, 4.5, 6.0, 8.0}) {
    const PhaseResult r =
        simulate_phase({stiffness, 0.2, 30.0}, GaitPhase::StanceFlexion, {10.0, 0.0, 0.0}, cfg);
    REQUIRE(r.exit == PhaseResult::Exit::Extremum);
    CHECK(r.t.back() < previous);
    previous = r.t.back();
  }
}

TEST_CASE("heavier damping stretches a phase") {
  PlantConfig cfg = quiet_plant();
  double previous = 0.0;
  for (double damping : {0.05, 0.3, 0.6, 0.8}) {
    const PhaseResult r =
        simulate_phase({4.0, damping, 30.0}, GaitPhase::StanceFlexion, {10.0, 0.0, 0.0}, cfg);
    REQUIRE(r.exit == PhaseResult::Exit::Extremum);
    CHECK(r.t.back() > previous);
    previous = r.t.back();
  }
}

TEST_CASE("the knee never leaves the physical range") {
  PlantConfig cfg = quiet_plant();
  cfg.load[0] = LoadProfile{200.0, 0.0, 0.0, 0.0};  // slams into the upper stop
  const PhaseResult up = simulate_phase({0.5, 0.1, 45.0}, GaitPhase::StanceFlexion,
                                        {80.0, 300.0, 0.0}, cfg);
  for (double angle : up.angle_deg) {
    CHECK(angle >= cfg.angle_min_deg);
    CHECK(angle <= cfg.angle_max_deg);
  }
  cfg.load[0].constant_nm = -200.0;
  const PhaseResult down = simulate_phase({0.5, 0.1, 45.0}, GaitPhase::StanceFlexion,
                                          {5.0, -300.0, 0.0}, cfg);
  for (double angle : down.angle_deg) {
    CHECK(angle >= cfg.angle_min_deg);
    CHECK(angle <= cfg.angle_max_deg);
  }
}

TEST_CASE("an overdamped phase hits the duration cap and fails the cycle") {
  PlantConfig cfg = default_config().plant;
  cfg.noise_stddev_deg = 0.0;
  ImpedanceSchedule sched = reference_schedule();
  sched[GaitPhase::StanceFlexion] = {0.02, 2.0, 80.0};  // creeps far slower than the cap
  std::mt19937_64 rng(7);
  const CycleResult cycle =
      simulate_cycle(sched, cfg, {cfg.initial_angle_deg, 0.0, 0.0}, 0.0, rng);
  CHECK(cycle.failed);
  CHECK(cycle.failed_phase == GaitPhase::StanceFlexion);
}

TEST_CASE("zero-noise cycles are bit-identical") {
  PlantConfig cfg = default_config().plant;
  cfg.noise_stddev_deg = 0.0;
  const ImpedanceSchedule sched = reference_schedule();
  std::mt19937_64 rng_a(1), rng_b(99);
  const CycleResult a = simulate_cycle(sched, cfg, {cfg.initial_angle_deg, 0.0, 0.0}, 0.0, rng_a);
  const CycleResult b = simulate_cycle(sched, cfg, {cfg.initial_angle_deg, 0.0, 0.0}, 0.0, rng_b);
  REQUIRE(a.trajectory.size() == b.trajectory.size());
  for (std::size_t i = 0; i < a.trajectory.size(); ++i)
    CHECK(a.trajectory.angle_deg[i] == b.trajectory.angle_deg[i]);
}

TEST_CASE("noisy cycles reproduce under the same seed and differ across seeds") {
  const PlantConfig cfg = default_config().plant;
  const ImpedanceSchedule sched = reference_schedule();
  const KneeState entry{cfg.initial_angle_deg, 0.0, 0.0};
  std::mt19937_64 rng_a(42), rng_b(42), rng_c(43);
  const CycleResult a = simulate_cycle(sched, cfg, entry, 0.0, rng_a);
  const CycleResult b = simulate_cycle(sched, cfg, entry, 0.0, rng_b);
  const CycleResult c = simulate_cycle(sched, cfg, entry, 0.0, rng_c);
  REQUIRE(a.trajectory.size() == b.trajectory.size());
  for (std::size_t i = 0; i < a.trajectory.size(); ++i)
    CHECK(a.trajectory.angle_deg[i] == b.trajectory.angle_deg[i]);
  bool any_difference = false;
  for (std::size_t i = 0; i < std::min(a.trajectory.size(), c.trajectory.size()); ++i)
    any_difference = any_difference || a.trajectory.angle_deg[i] != c.trajectory.angle_deg[i];
  CHECK(any_difference);
}

TEST_CASE("the reference schedule walks inside the physiological envelope") {
  const PlantConfig cfg = default_config().plant;
  const ImpedanceSchedule sched = reference_schedule();
  Plant plant(cfg, 2024);
  for (int cycle = 0; cycle < 6; ++cycle) {
    const CycleResult r = plant.step_cycle(sched);
    REQUIRE_FALSE(r.failed);
    CHECK(r.features.peak(GaitPhase::StanceFlexion) > 10.0);
    CHECK(r.features.peak(GaitPhase::StanceFlexion) < 25.0);
    CHECK(r.features.peak(GaitPhase::SwingFlexion) > 50.0);
    CHECK(r.features.peak(GaitPhase::SwingFlexion) < 70.0);
  }
}

TEST_CASE("phase annotations cover the cycle in order") {
  PlantConfig cfg = default_config().plant;
  cfg.noise_stddev_deg = 0.0;
  std::mt19937_64 rng(5);
  const CycleResult cycle =
      simulate_cycle(reference_schedule(), cfg, {cfg.initial_angle_deg, 0.0, 0.0}, 0.0, rng);
  REQUIRE_FALSE(cycle.failed);
  const Trajectory& traj = cycle.trajectory;
  CHECK(traj.phase_start[0] == 0);
  for (int p = 1; p < kNumPhases; ++p) CHECK(traj.phase_start[p] > traj.phase_start[p - 1]);
  CHECK(traj.phase_start[3] < traj.size());
  CHECK(traj.phase_at(0) == GaitPhase::StanceFlexion);
  CHECK(traj.phase_at(traj.size() - 1) == GaitPhase::SwingExtension);
}

TEST_CASE("intact adaptation relaxes toward the prosthesis features") {
  PlantConfig cfg = default_config().plant;
  GaitFeatures intact;
  intact.side = Side::Intact;
  intact.peak_deg = {60.0, 5.0, 65.0, 3.0};
  intact.duration_s = {0.4, 0.4, 0.4, 0.4};
  GaitFeatures prosthesis;
  prosthesis.peak_deg = {50.0, 4.0, 60.0, 2.0};
  prosthesis.duration_s = {0.3, 0.5, 0.35, 0.45};

  SUBCASE("disabled adaptation is the identity") {
    cfg.adapt_rate = 0.0;
    const GaitFeatures next = adapt_intact(intact, prosthesis, cfg);
    for (int p = 0; p < kNumPhases; ++p) {
      CHECK(next.peak_deg[p] == intact.peak_deg[p]);
      CHECK(next.duration_s[p] == intact.duration_s[p]);
    }
  }
  SUBCASE("full coupling reaches the prosthesis in one step") {
    cfg.adapt_rate = 1.0;
    cfg.adapt_coupling_peak = {1.0, 1.0, 1.0, 1.0};
    cfg.adapt_coupling_duration = {1.0, 1.0, 1.0, 1.0};
    const GaitFeatures next = adapt_intact(intact, prosthesis, cfg);
    for (int p = 0; p < kNumPhases; ++p) {
      CHECK(next.peak_deg[p] == doctest::Approx(prosthesis.peak_deg[p]));
      CHECK(next.duration_s[p] == doctest::Approx(prosthesis.duration_s[p]));
    }
  }
  SUBCASE("one relaxation step moves a tenth of the gap") {
    cfg.adapt_rate = 0.1;
    cfg.adapt_coupling_peak = {1.0, 1.0, 1.0, 1.0};
    cfg.adapt_coupling_duration = {1.0, 1.0, 1.0, 1.0};
    const GaitFeatures next = adapt_intact(intact, prosthesis, cfg);
    CHECK(next.peak_deg[0] == doctest::Approx(59.0));  // 60 + 0.1 * (50 - 60)
  }
  SUBCASE("adapted features stay inside the feature box") {
    cfg.adapt_rate = 1.0;
    cfg.adapt_coupling_peak = {1.0, 1.0, 1.0, 1.0};
    cfg.feature_bounds.peak_max_deg = 55.0;
    const GaitFeatures next = adapt_intact(intact, prosthesis, cfg);
    for (int p = 0; p < kNumPhases; ++p) CHECK(next.peak_deg[p] <= 55.0);
  }
}

TEST_CASE("linear verification plant arithmetic") {
  const Eigen::Matrix2d identity = Eigen::Matrix2d::Identity();
  const Eigen::Matrix<double, 2, 3> zero_b = Eigen::Matrix<double, 2, 3>::Zero();
  const Eigen::Vector2d x(1.0, 2.0);
  CHECK(lqr_plant_step(x, Eigen::Vector3d::Zero(), identity, zero_b).isApprox(x));

  Eigen::Matrix<double, 2, 3> first_column = Eigen::Matrix<double, 2, 3>::Zero();
  first_column(0, 0) = 1.0;
  const Eigen::Vector2d pure_input = lqr_plant_step(Eigen::Vector2d::Zero(),
                                                    Eigen::Vector3d(3.0, 0.0, 0.0),
                                                    Eigen::Matrix2d::Zero(), first_column);
  CHECK(pure_input(0) == doctest::Approx(3.0));
  CHECK(pure_input(1) == doctest::Approx(0.0));

  Eigen::Matrix2d a;
  a << 0.9, 0.1, 0.0, 0.8;
  const Eigen::Matrix<double, 2, 3> b = Eigen::Matrix<double, 2, 3>::Constant(0.1);
  const Eigen::Vector2d next = lqr_plant_step(Eigen::Vector2d(1.0, 1.0),
                                              Eigen::Vector3d(1.0, 1.0, 1.0), a, b);
  CHECK(next(0) == doctest::Approx(1.3));
  CHECK(next(1) == doctest::Approx(1.1));
}

TEST_CASE("a failed cycle reposes the knee for the next attempt") {
  PlantConfig cfg = default_config().plant;
  cfg.noise_stddev_deg = 0.0;
  Plant plant(cfg, 11);
  ImpedanceSchedule bad = reference_schedule();
  bad[GaitPhase::StanceFlexion] = {0.02, 2.0, 80.0};
  const CycleResult failed = plant.step_cycle(bad);
  REQUIRE(failed.failed);
  const CycleResult good = plant.step_cycle(reference_schedule());
  CHECK_FALSE(good.failed);
  CHECK(good.trajectory.angle_deg.front() == doctest::Approx(cfg.initial_angle_deg));
}
