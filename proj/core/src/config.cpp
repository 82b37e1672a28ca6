#include "gaitmirror/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gaitmirror/errors.hpp"

namespace gaitmirror {

void LqrCheckConfig::validate() const {
  if (!a.allFinite() || !b.allFinite()) throw ConfigError("lqr plant matrices must be finite");
  cost.validate();
  if (!(discount > 0.0 && discount <= 1.0)) throw ConfigError("lqr.discount must be in (0, 1]");
  if (batch_size < kBasisSize)
    throw ConfigError("lqr.batch_size must be >= " + std::to_string(kBasisSize));
  if (!(state_scale > 0.0)) throw ConfigError("lqr.state_scale must be > 0");
  if (!(exploration_stddev > 0.0)) throw ConfigError("lqr.exploration_stddev must be > 0");
  if (max_iterations < 1) throw ConfigError("lqr.max_iterations must be >= 1");
  if (!(gain_tolerance > 0.0)) throw ConfigError("lqr.gain_tolerance must be > 0");
  if (!(dare.tolerance > 0.0)) throw ConfigError("lqr.dare.tolerance must be > 0");
  if (dare.max_iterations < 1) throw ConfigError("lqr.dare.max_iterations must be >= 1");
}

void ExperimentConfig::validate() const {
  plant.validate();
  features.validate();
  learner.validate();
  lqr.validate();
  if (trials < 1) throw ConfigError("experiment.trials must be >= 1");
  if (max_updates < 1) throw ConfigError("experiment.max_updates must be >= 1");
  if (!(tol_peak_deg > 0.0)) throw ConfigError("experiment.tol_peak must be > 0");
  if (!(tol_duration_frac > 0.0)) throw ConfigError("experiment.tol_duration must be > 0");
  if (!(initial_spread >= 0.0 && initial_spread < 1.0))
    throw ConfigError("experiment.initial_spread must be in [0, 1)");
  if (!(random_gain_scale >= 0.0)) throw ConfigError("experiment.random_gain_scale must be >= 0");
  if (abort_after_failed_cycles < 1)
    throw ConfigError("experiment.abort_after_failed_cycles must be >= 1");
  if (max_gain_resamples < 0) throw ConfigError("experiment.max_gain_resamples must be >= 0");
  if (out_dir.empty()) throw ConfigError("experiment.out_dir must not be empty");

  for (GaitPhase p : kPhaseOrder) {
    const auto i = static_cast<std::size_t>(p);
    const ImpedanceBounds& b = impedance_bounds[i];
    if (!(b.stiffness_max > b.stiffness_min) || !(b.damping_max > b.damping_min) ||
        !(b.equilibrium_max_deg > b.equilibrium_min_deg))
      throw ConfigError(std::string("impedance bounds for ") + std::string(phase_name(p)) +
                        " define an empty box");
    if (b.stiffness_min < 0.0 || b.damping_min < 0.0)
      throw ConfigError("stiffness and damping bounds must be non-negative");
    if (!b.contains(reference_schedule[p]))
      throw ConfigError(std::string("reference impedance for ") + std::string(phase_name(p)) +
                        " violates its bounds");
    if (!initial_gains[i].allFinite())
      throw ConfigError("initial gains must be finite");
    if (!(plant.intact_baseline.duration_s[i] > 0.0))
      throw ConfigError("baseline durations must be positive");
  }
}

void set_cadence_mode(ExperimentConfig& cfg, CadenceMode mode) {
  cfg.cadence_mode = mode;
  cfg.features.cycles_per_update = mode == CadenceMode::HumanCadence ? 4 : 1;
}

ExperimentConfig default_config() {
  ExperimentConfig cfg;

  cfg.plant.inertia = 0.05;
  cfg.plant.dt = 0.01;
  cfg.plant.cycle_duration_s = 1.5;
  cfg.plant.noise_stddev_deg = 0.3;
  cfg.plant.adapt_rate = 0.05;
  cfg.plant.adapt_coupling_peak = {0.3, 0.3, 0.3, 0.3};
  cfg.plant.adapt_coupling_duration = {0.3, 0.3, 0.3, 0.3};
  cfg.plant.load[0] = LoadProfile{8.0, 0.0, 0.0, 0.0};
  cfg.plant.load[1] = LoadProfile{-2.0, 0.0, 0.0, 0.0};
  cfg.plant.load[2] = LoadProfile{12.0, 0.0, 0.0, 0.0};
  cfg.plant.load[3] = LoadProfile{0.0, 0.0, 0.0, 0.0};
  cfg.plant.initial_angle_deg = 2.1;

  // Steady-cycle features of the reference schedule below, simulated
  // noise-free and frozen here as the tracking target.
  cfg.plant.intact_baseline.side = Side::Intact;
  cfg.plant.intact_baseline.peak_deg = {20.257, 2.74852, 67.2224, 2.06801};
  cfg.plant.intact_baseline.duration_s = {0.36, 0.35, 0.41, 0.37};

  cfg.reference_schedule.phases[0] = ImpedanceTriple{4.0, 0.18, 12.0};
  cfg.reference_schedule.phases[1] = ImpedanceTriple{4.5, 0.28, 8.0};
  cfg.reference_schedule.phases[2] = ImpedanceTriple{3.5, 0.32, 50.0};
  cfg.reference_schedule.phases[3] = ImpedanceTriple{5.0, 0.5, 11.2};

  for (auto& bounds : cfg.impedance_bounds) bounds = ImpedanceBounds{};

  cfg.learner.cost.state_weight = Eigen::Vector2d(1.0, 2000.0).asDiagonal();
  cfg.learner.cost.action_weight = Eigen::Vector3d(0.5, 1.0, 0.5).asDiagonal();
  cfg.learner.discount = 0.95;
  cfg.learner.batch_size = 20;
  cfg.learner.exploration_initial_frac = 0.1;
  cfg.learner.exploration_decay = 0.9;
  cfg.learner.exploration_floor_frac = 0.01;

  cfg.initial_gains[0] << 0.0, -6.0, 0.0, 0.0, 0.4, 0.0;
  cfg.initial_gains[1] << 0.0, -6.0, 0.0, 0.0, 0.45, 0.0;
  cfg.initial_gains[2] << 0.0, -5.0, 0.0, 0.0, 0.5, 0.0;
  cfg.initial_gains[3] << 0.0, -10.0, 0.0, 0.0, 0.6, 0.0;

  cfg.lqr.a << 0.9, 0.1, 0.0, 0.8;
  cfg.lqr.b << 0.1, 0.0, 0.05, 0.0, 0.1, 0.05;
  cfg.lqr.cost.state_weight = Eigen::Matrix2d::Identity();
  cfg.lqr.cost.action_weight = Eigen::Matrix3d::Identity();

  set_cadence_mode(cfg, CadenceMode::Simulation);
  return cfg;
}

namespace {

class SchemaParser {
 public:
  explicit SchemaParser(ExperimentConfig& cfg) : cfg_(cfg) { build_schema(); }

  void apply(const std::string& key, const std::string& value, const std::string& where) {
    const auto it = schema_.find(key);
    if (it == schema_.end()) throw ConfigError(where + ": unknown config key '" + key + "'");
    if (!seen_.insert(key).second)
      throw ConfigError(where + ": duplicate config key '" + key + "'");
    where_ = where;
    it->second(value);
  }

  void finish() { set_cadence_mode(cfg_, cfg_.cadence_mode); }

 private:
  using Handler = std::function<void(const std::string&)>;

  [[noreturn]] void fail(const std::string& what) const { throw ConfigError(where_ + ": " + what); }

  double number(const std::string& text) const {
    try {
      std::size_t used = 0;
      const double v = std::stod(text, &used);
      if (used != text.size()) fail("trailing characters after number '" + text + "'");
      return v;
    } catch (const std::logic_error&) {
      fail("expected a number, got '" + text + "'");
    }
  }

  std::vector<double> numbers(const std::string& text, std::size_t count) const {
    std::string separated = text;
    std::replace(separated.begin(), separated.end(), ',', ' ');
    std::istringstream in(separated);
    std::vector<double> values;
    std::string token;
    while (in >> token) values.push_back(number(token));
    if (values.size() != count)
      fail("expected " + std::to_string(count) + " numbers, got " +
           std::to_string(values.size()));
    return values;
  }

  int integer(const std::string& text) const {
    const double v = number(text);
    const int i = static_cast<int>(v);
    if (static_cast<double>(i) != v) fail("expected an integer, got '" + text + "'");
    return i;
  }

  std::uint64_t unsigned64(const std::string& text) const {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size())
      fail("expected an unsigned 64-bit integer, got '" + text + "'");
    return v;
  }

  bool boolean(const std::string& text) const {
    if (text == "on" || text == "true" || text == "1") return true;
    if (text == "off" || text == "false" || text == "0") return false;
    fail("expected on/off, got '" + text + "'");
  }

  Handler num(double& field) {
    return [this, &field](const std::string& v) { field = number(v); };
  }
  Handler num_int(int& field) {
    return [this, &field](const std::string& v) { field = integer(v); };
  }
  Handler per_phase(std::array<double, kNumPhases>& field) {
    return [this, &field](const std::string& v) {
      const auto values = numbers(v, kNumPhases);
      std::copy(values.begin(), values.end(), field.begin());
    };
  }
  Handler pair(double& lo, double& hi) {
    return [this, &lo, &hi](const std::string& v) {
      const auto values = numbers(v, 2);
      lo = values[0];
      hi = values[1];
    };
  }
  template <typename Matrix>
  Handler matrix(Matrix& field) {
    return [this, &field](const std::string& v) {
      const auto values = numbers(v, static_cast<std::size_t>(field.rows() * field.cols()));
      std::size_t k = 0;
      for (Eigen::Index r = 0; r < field.rows(); ++r)
        for (Eigen::Index c = 0; c < field.cols(); ++c) field(r, c) = values[k++];
    };
  }
  Handler load_component(double LoadProfile::*member) {
    return [this, member](const std::string& v) {
      const auto values = numbers(v, kNumPhases);
      for (std::size_t p = 0; p < kNumPhases; ++p) cfg_.plant.load[p].*member = values[p];
    };
  }
  Handler triple(ImpedanceTriple& field) {
    return [this, &field](const std::string& v) {
      const auto values = numbers(v, 3);
      field = ImpedanceTriple{values[0], values[1], values[2]};
    };
  }

  void build_schema() {
    schema_["plant.inertia"] = num(cfg_.plant.inertia);
    schema_["plant.dt"] = num(cfg_.plant.dt);
    schema_["plant.cycle_duration"] = num(cfg_.plant.cycle_duration_s);
    schema_["plant.noise_stddev"] = num(cfg_.plant.noise_stddev_deg);
    schema_["plant.adapt_rate"] = num(cfg_.plant.adapt_rate);
    schema_["plant.angle_min"] = num(cfg_.plant.angle_min_deg);
    schema_["plant.angle_max"] = num(cfg_.plant.angle_max_deg);
    schema_["plant.max_phase_duration"] = num(cfg_.plant.max_phase_duration_s);
    schema_["plant.min_phase_motion"] = num(cfg_.plant.min_phase_motion_deg);
    schema_["plant.initial_angle"] = num(cfg_.plant.initial_angle_deg);
    schema_["plant.load.constant"] = load_component(&LoadProfile::constant_nm);
    schema_["plant.load.amplitude"] = load_component(&LoadProfile::sin_amplitude_nm);
    schema_["plant.load.frequency"] = load_component(&LoadProfile::sin_frequency_hz);
    schema_["plant.load.phase"] = load_component(&LoadProfile::sin_phase_rad);
    schema_["plant.adapt_coupling.peak"] = per_phase(cfg_.plant.adapt_coupling_peak);
    schema_["plant.adapt_coupling.duration"] = per_phase(cfg_.plant.adapt_coupling_duration);
    schema_["plant.baseline.peak"] = per_phase(cfg_.plant.intact_baseline.peak_deg);
    schema_["plant.baseline.duration"] = per_phase(cfg_.plant.intact_baseline.duration_s);
    schema_["plant.feature_bounds.peak"] =
        pair(cfg_.plant.feature_bounds.peak_min_deg, cfg_.plant.feature_bounds.peak_max_deg);
    schema_["plant.feature_bounds.duration"] =
        pair(cfg_.plant.feature_bounds.duration_min_s, cfg_.plant.feature_bounds.duration_max_s);

    schema_["features.smoothing_window"] = num_int(cfg_.features.smoothing_window);
    schema_["features.peak_threshold"] = num(cfg_.features.peak_threshold_deg);
    schema_["features.duration_threshold"] = num(cfg_.features.duration_threshold_frac);
    schema_["features.raw_smoothing_window"] = num_int(cfg_.features.raw_smoothing_window);
    schema_["features.raw_prominence"] = num(cfg_.features.raw_prominence_deg);

    schema_["learner.discount"] = num(cfg_.learner.discount);
    schema_["learner.batch_size"] = num_int(cfg_.learner.batch_size);
    schema_["learner.projection_epsilon"] = num(cfg_.learner.projection_epsilon);
    schema_["learner.tikhonov"] = num(cfg_.learner.tikhonov);
    schema_["learner.condition_cap"] = num(cfg_.learner.condition_cap);
    schema_["learner.exploration.initial"] = num(cfg_.learner.exploration_initial_frac);
    schema_["learner.exploration.decay"] = num(cfg_.learner.exploration_decay);
    schema_["learner.exploration.floor"] = num(cfg_.learner.exploration_floor_frac);
    schema_["cost.state_weight"] = matrix(cfg_.learner.cost.state_weight);
    schema_["cost.action_weight"] = matrix(cfg_.learner.cost.action_weight);
    schema_["action_bounds.stiffness"] = num(cfg_.learner.action_bounds.dstiffness_max);
    schema_["action_bounds.damping"] = num(cfg_.learner.action_bounds.ddamping_max);
    schema_["action_bounds.equilibrium"] = num(cfg_.learner.action_bounds.dequilibrium_max_deg);

    schema_["impedance_bounds.stiffness"] = [this](const std::string& v) {
      const auto values = numbers(v, 2);
      for (auto& b : cfg_.impedance_bounds) {
        b.stiffness_min = values[0];
        b.stiffness_max = values[1];
      }
    };
    schema_["impedance_bounds.damping"] = [this](const std::string& v) {
      const auto values = numbers(v, 2);
      for (auto& b : cfg_.impedance_bounds) {
        b.damping_min = values[0];
        b.damping_max = values[1];
      }
    };
    schema_["impedance_bounds.equilibrium"] = [this](const std::string& v) {
      const auto values = numbers(v, 2);
      for (auto& b : cfg_.impedance_bounds) {
        b.equilibrium_min_deg = values[0];
        b.equilibrium_max_deg = values[1];
      }
    };
    for (GaitPhase p : kPhaseOrder) {
      const auto i = static_cast<std::size_t>(p);
      std::string lower(phase_name(p));
      for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      schema_["impedance_bounds." + lower + ".stiffness"] =
          pair(cfg_.impedance_bounds[i].stiffness_min, cfg_.impedance_bounds[i].stiffness_max);
      schema_["impedance_bounds." + lower + ".damping"] =
          pair(cfg_.impedance_bounds[i].damping_min, cfg_.impedance_bounds[i].damping_max);
      schema_["impedance_bounds." + lower + ".equilibrium"] = pair(
          cfg_.impedance_bounds[i].equilibrium_min_deg, cfg_.impedance_bounds[i].equilibrium_max_deg);
      schema_["reference." + lower] = triple(cfg_.reference_schedule.phases[i]);
      schema_["gains." + lower] = matrix(cfg_.initial_gains[i]);
    }

    schema_["experiment.trials"] = num_int(cfg_.trials);
    schema_["experiment.max_updates"] = num_int(cfg_.max_updates);
    schema_["experiment.initial_spread"] = num(cfg_.initial_spread);
    schema_["experiment.tol_peak"] = num(cfg_.tol_peak_deg);
    schema_["experiment.tol_duration"] = num(cfg_.tol_duration_frac);
    schema_["experiment.seed"] = [this](const std::string& v) { cfg_.master_seed = unsigned64(v); };
    schema_["experiment.mode"] = [this](const std::string& v) {
      if (v == "sim")
        cfg_.cadence_mode = CadenceMode::Simulation;
      else if (v == "human-cadence")
        cfg_.cadence_mode = CadenceMode::HumanCadence;
      else
        fail("experiment.mode must be sim or human-cadence, got '" + v + "'");
    };
    schema_["experiment.coadapt"] = [this](const std::string& v) { cfg_.coadapt = boolean(v); };
    schema_["experiment.tuning"] = [this](const std::string& v) {
      if (v == "simultaneous")
        cfg_.tuning_mode = TuningMode::Simultaneous;
      else if (v == "sequential")
        cfg_.tuning_mode = TuningMode::Sequential;
      else
        fail("experiment.tuning must be simultaneous or sequential, got '" + v + "'");
    };
    schema_["experiment.gain_mode"] = [this](const std::string& v) {
      if (v == "fixed")
        cfg_.gain_mode = InitialGainMode::Fixed;
      else if (v == "random")
        cfg_.gain_mode = InitialGainMode::Random;
      else
        fail("experiment.gain_mode must be fixed or random, got '" + v + "'");
    };
    schema_["experiment.random_gain_scale"] = num(cfg_.random_gain_scale);
    schema_["experiment.abort_after_failed_cycles"] = num_int(cfg_.abort_after_failed_cycles);
    schema_["experiment.max_gain_resamples"] = num_int(cfg_.max_gain_resamples);
    schema_["experiment.out_dir"] = [this](const std::string& v) {
      if (v.empty()) fail("experiment.out_dir must not be empty");
      cfg_.out_dir = v;
    };

    schema_["lqr.a"] = matrix(cfg_.lqr.a);
    schema_["lqr.b"] = matrix(cfg_.lqr.b);
    schema_["lqr.state_weight"] = matrix(cfg_.lqr.cost.state_weight);
    schema_["lqr.action_weight"] = matrix(cfg_.lqr.cost.action_weight);
    schema_["lqr.discount"] = num(cfg_.lqr.discount);
    schema_["lqr.batch_size"] = num_int(cfg_.lqr.batch_size);
    schema_["lqr.state_scale"] = num(cfg_.lqr.state_scale);
    schema_["lqr.exploration_stddev"] = num(cfg_.lqr.exploration_stddev);
    schema_["lqr.max_iterations"] = num_int(cfg_.lqr.max_iterations);
    schema_["lqr.gain_tolerance"] = num(cfg_.lqr.gain_tolerance);
    schema_["lqr.dare.tolerance"] = num(cfg_.lqr.dare.tolerance);
    schema_["lqr.dare.max_iterations"] = num_int(cfg_.lqr.dare.max_iterations);
  }

  ExperimentConfig& cfg_;
  std::map<std::string, Handler> schema_;
  std::set<std::string> seen_;
  std::string where_;
};

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

ExperimentConfig parse_config(std::istream& in, const std::string& origin) {
  ExperimentConfig cfg = default_config();
  SchemaParser parser(cfg);

  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto comment = line.find('#');
    if (comment != std::string::npos) line.erase(comment);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;

    const std::string where = origin + ":" + std::to_string(line_no);
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ConfigError(where + ": expected 'key = value', got '" + stripped + "'");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + ": empty config key");
    parser.apply(key, value, where);
  }

  parser.finish();
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  return parse_config(in, path);
}

namespace {

nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::string config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json j;

  nlohmann::json plant;
  plant["inertia"] = cfg.plant.inertia;
  plant["dt"] = cfg.plant.dt;
  plant["cycle_duration"] = cfg.plant.cycle_duration_s;
  plant["noise_stddev"] = cfg.plant.noise_stddev_deg;
  plant["adapt_rate"] = cfg.plant.adapt_rate;
  plant["angle_range"] = {cfg.plant.angle_min_deg, cfg.plant.angle_max_deg};
  plant["max_phase_duration"] = cfg.plant.max_phase_duration_s;
  plant["min_phase_motion"] = cfg.plant.min_phase_motion_deg;
  plant["initial_angle"] = cfg.plant.initial_angle_deg;
  plant["adapt_coupling_peak"] = cfg.plant.adapt_coupling_peak;
  plant["adapt_coupling_duration"] = cfg.plant.adapt_coupling_duration;
  plant["baseline_peak"] = cfg.plant.intact_baseline.peak_deg;
  plant["baseline_duration"] = cfg.plant.intact_baseline.duration_s;
  plant["feature_bounds"] = {
      {"peak", {cfg.plant.feature_bounds.peak_min_deg, cfg.plant.feature_bounds.peak_max_deg}},
      {"duration",
       {cfg.plant.feature_bounds.duration_min_s, cfg.plant.feature_bounds.duration_max_s}}};
  for (GaitPhase p : kPhaseOrder) {
    const auto i = static_cast<std::size_t>(p);
    plant["load"][std::string(phase_name(p))] = {{"constant", cfg.plant.load[i].constant_nm},
                                                 {"amplitude", cfg.plant.load[i].sin_amplitude_nm},
                                                 {"frequency", cfg.plant.load[i].sin_frequency_hz},
                                                 {"phase", cfg.plant.load[i].sin_phase_rad}};
  }
  j["plant"] = std::move(plant);

  j["features"] = {{"smoothing_window", cfg.features.smoothing_window},
                   {"peak_threshold", cfg.features.peak_threshold_deg},
                   {"duration_threshold", cfg.features.duration_threshold_frac},
                   {"cycles_per_update", cfg.features.cycles_per_update},
                   {"raw_smoothing_window", cfg.features.raw_smoothing_window},
                   {"raw_prominence", cfg.features.raw_prominence_deg}};

  nlohmann::json learner;
  learner["discount"] = cfg.learner.discount;
  learner["batch_size"] = cfg.learner.batch_size;
  learner["projection_epsilon"] = cfg.learner.projection_epsilon;
  learner["tikhonov"] = cfg.learner.tikhonov;
  learner["condition_cap"] = cfg.learner.condition_cap;
  learner["exploration"] = {{"initial", cfg.learner.exploration_initial_frac},
                            {"decay", cfg.learner.exploration_decay},
                            {"floor", cfg.learner.exploration_floor_frac}};
  learner["state_weight"] = matrix_json(cfg.learner.cost.state_weight);
  learner["action_weight"] = matrix_json(cfg.learner.cost.action_weight);
  learner["action_bounds"] = {cfg.learner.action_bounds.dstiffness_max,
                              cfg.learner.action_bounds.ddamping_max,
                              cfg.learner.action_bounds.dequilibrium_max_deg};
  j["learner"] = std::move(learner);

  for (GaitPhase p : kPhaseOrder) {
    const auto i = static_cast<std::size_t>(p);
    const std::string name(phase_name(p));
    const ImpedanceTriple& ref = cfg.reference_schedule.phases[i];
    j["reference"][name] = {ref.stiffness, ref.damping, ref.equilibrium_deg};
    j["initial_gains"][name] = matrix_json(cfg.initial_gains[i]);
    const ImpedanceBounds& b = cfg.impedance_bounds[i];
    j["impedance_bounds"][name] = {{"stiffness", {b.stiffness_min, b.stiffness_max}},
                                   {"damping", {b.damping_min, b.damping_max}},
                                   {"equilibrium", {b.equilibrium_min_deg, b.equilibrium_max_deg}}};
  }

  j["experiment"] = {
      {"trials", cfg.trials},
      {"max_updates", cfg.max_updates},
      {"initial_spread", cfg.initial_spread},
      {"tol_peak", cfg.tol_peak_deg},
      {"tol_duration", cfg.tol_duration_frac},
      {"seed", cfg.master_seed},
      {"mode", cfg.cadence_mode == CadenceMode::HumanCadence ? "human-cadence" : "sim"},
      {"coadapt", cfg.coadapt},
      {"tuning", cfg.tuning_mode == TuningMode::Sequential ? "sequential" : "simultaneous"},
      {"gain_mode", cfg.gain_mode == InitialGainMode::Random ? "random" : "fixed"},
      {"random_gain_scale", cfg.random_gain_scale},
      {"abort_after_failed_cycles", cfg.abort_after_failed_cycles},
      {"max_gain_resamples", cfg.max_gain_resamples},
      {"out_dir", cfg.out_dir}};

  j["lqr"] = {{"a", matrix_json(cfg.lqr.a)},
              {"b", matrix_json(cfg.lqr.b)},
              {"state_weight", matrix_json(cfg.lqr.cost.state_weight)},
              {"action_weight", matrix_json(cfg.lqr.cost.action_weight)},
              {"discount", cfg.lqr.discount},
              {"batch_size", cfg.lqr.batch_size},
              {"state_scale", cfg.lqr.state_scale},
              {"exploration_stddev", cfg.lqr.exploration_stddev},
              {"max_iterations", cfg.lqr.max_iterations},
              {"gain_tolerance", cfg.lqr.gain_tolerance},
              {"dare", {{"tolerance", cfg.lqr.dare.tolerance},
                        {"max_iterations", cfg.lqr.dare.max_iterations}}}};

  return j.dump(2) + "\n";
}

}  // namespace gaitmirror
