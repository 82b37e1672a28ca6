#include "gaitmirror/rl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include <Eigen/Dense>
#include <json.hpp>

#include "gaitmirror/errors.hpp"

namespace gaitmirror {

namespace {

/// Monomial index pairs of z = (x1, x2, u1, u2, u3), row order of the basis.
constexpr std::array<std::pair<int, int>, kBasisSize> kMonomials = {{
    {0, 0}, {0, 1}, {0, 2}, {0, 3}, {0, 4},
    {1, 1}, {1, 2}, {1, 3}, {1, 4},
    {2, 2}, {2, 3}, {2, 4},
    {3, 3}, {3, 4},
    {4, 4},
}};

void require_symmetric_pd(const Eigen::MatrixXd& m, const char* label) {
  if (!m.allFinite()) throw ConfigError(std::string(label) + " has non-finite entries");
  if (((m - m.transpose()).array().abs() > 1e-12).any())
    throw ConfigError(std::string(label) + " is not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
  if (eig.eigenvalues().minCoeff() <= 0.0)
    throw ConfigError(std::string(label) + " is not positive definite");
}

}  // namespace

void CostMatrices::validate() const {
  require_symmetric_pd(state_weight, "state weight matrix");
  require_symmetric_pd(action_weight, "action weight matrix");
}

QWeights QWeights::from_matrix(const Eigen::Matrix<double, 5, 5>& h) {
  QWeights q;
  for (int k = 0; k < kBasisSize; ++k) {
    const auto [i, j] = kMonomials[static_cast<std::size_t>(k)];
    q.w(k) = i == j ? h(i, j) : 2.0 * h(i, j);
  }
  return q;
}

Eigen::Matrix<double, 5, 5> QWeights::to_matrix() const {
  Eigen::Matrix<double, 5, 5> h;
  for (int k = 0; k < kBasisSize; ++k) {
    const auto [i, j] = kMonomials[static_cast<std::size_t>(k)];
    if (i == j) {
      h(i, j) = w(k);
    } else {
      h(i, j) = 0.5 * w(k);
      h(j, i) = 0.5 * w(k);
    }
  }
  return h;
}

Eigen::Matrix2d QWeights::hxx() const { return to_matrix().block<2, 2>(0, 0); }
Eigen::Matrix<double, 2, 3> QWeights::hxu() const { return to_matrix().block<2, 3>(0, 2); }
Eigen::Matrix3d QWeights::huu() const { return to_matrix().block<3, 3>(2, 2); }

double QWeights::value(const StateVec& x, const ActionVec& u) const {
  return w.dot(basis_phi(x, u));
}

BasisVec basis_phi(const StateVec& x, const ActionVec& u) {
  Eigen::Matrix<double, 5, 1> z;
  z << x(0), x(1), u(0), u(1), u(2);
  BasisVec phi;
  for (int k = 0; k < kBasisSize; ++k) {
    const auto [i, j] = kMonomials[static_cast<std::size_t>(k)];
    phi(k) = z(i) * z(j);
  }
  return phi;
}

double instantaneous_cost(const StateVec& x, const ActionVec& u, const CostMatrices& r) {
  return x.dot(r.state_weight * x) + u.dot(r.action_weight * u);
}

EvaluationResult policy_evaluation(std::span<const Experience> batch,
                                   const EvaluationOptions& opts) {
  if (batch.size() < static_cast<std::size_t>(kBasisSize))
    throw InsufficientDataError("policy evaluation needs at least " + std::to_string(kBasisSize) +
                                " experiences, got " + std::to_string(batch.size()));
  if (!(opts.discount > 0.0 && opts.discount <= 1.0))
    throw ConfigError("discount must be in (0, 1]");

  const auto n = static_cast<Eigen::Index>(batch.size());
  Eigen::MatrixXd regressor(n, kBasisSize);
  Eigen::VectorXd target(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const Experience& e = batch[static_cast<std::size_t>(r)];
    regressor.row(r) = (basis_phi(e.state, e.action) -
                        opts.discount * basis_phi(e.next_state, e.next_policy_action))
                           .transpose();
    target(r) = e.cost;
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(regressor, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double sigma_max = svd.singularValues()(0);
  const double sigma_min = svd.singularValues()(kBasisSize - 1);
  const double condition = sigma_min > 0.0 ? sigma_max / sigma_min
                                           : std::numeric_limits<double>::infinity();

  EvaluationResult result;
  result.condition_number = condition;
  if (condition <= opts.condition_cap) {
    result.weights.w = svd.solve(target);
  } else {
    result.regularized = true;
    const double lambda = opts.tikhonov;
    // Condition of the ridge-augmented regressor [X; sqrt(lambda) I].
    const double regularized_condition =
        lambda > 0.0 ? std::sqrt((sigma_max * sigma_max + lambda) / (sigma_min * sigma_min + lambda))
                     : condition;
    if (!(regularized_condition <= opts.condition_cap))
      throw IllConditionedError("regressor condition " + std::to_string(condition) +
                                " unusable even with ridge regularization");
    const Eigen::MatrixXd gram =
        regressor.transpose() * regressor +
        lambda * Eigen::MatrixXd::Identity(kBasisSize, kBasisSize);
    result.weights.w = gram.ldlt().solve(regressor.transpose() * target);
  }
  if (!result.weights.w.allFinite())
    throw IllConditionedError("policy evaluation produced non-finite weights");
  result.residual_norm = (regressor * result.weights.w - target).norm();
  return result;
}

QWeights project_q(const QWeights& w, double epsilon) {
  Eigen::Matrix<double, 5, 5> h = w.to_matrix();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(h.block<3, 3>(2, 2));
  const Eigen::Vector3d clamped = eig.eigenvalues().cwiseMax(epsilon);
  h.block<3, 3>(2, 2) =
      eig.eigenvectors() * clamped.asDiagonal() * eig.eigenvectors().transpose();
  return QWeights::from_matrix(h);
}

Policy policy_improvement(const QWeights& w) {
  const Eigen::Matrix3d huu = w.huu();
  Eigen::LLT<Eigen::Matrix3d> llt(huu);
  if (llt.info() != Eigen::Success)
    throw SingularCurvatureError("action-curvature block is not positive definite");
  Policy policy;
  policy.gain = llt.solve(w.hxu().transpose());
  return policy;
}

Action act(const Policy& policy, const StateVec& x, std::mt19937_64& rng,
           const ActionBounds& bounds) {
  ActionVec u = policy.feedback(x);
  if (policy.exploration_frac > 0.0) {
    const std::array<double, 3> scale = {bounds.dstiffness_max, bounds.ddamping_max,
                                         bounds.dequilibrium_max_deg};
    for (int j = 0; j < 3; ++j) {
      std::normal_distribution<double> noise(0.0, policy.exploration_frac * scale[static_cast<std::size_t>(j)]);
      u(j) += noise(rng);
    }
  }
  return bounds.clamp(Action{u(0), u(1), u(2)});
}

bool check_convergence(std::span<const TrackingState> recent, double tol_peak_deg,
                       double tol_duration_frac) {
  constexpr std::size_t kWindow = 10;
  constexpr int kRequired = 8;
  if (recent.size() < kWindow) return false;
  int within = 0;
  for (std::size_t i = recent.size() - kWindow; i < recent.size(); ++i) {
    const TrackingState& s = recent[i];
    if (std::abs(s.peak_error_deg) <= tol_peak_deg &&
        std::abs(s.duration_error_frac) <= tol_duration_frac)
      ++within;
  }
  return within >= kRequired;
}

void LearnerConfig::validate() const {
  cost.validate();
  if (!(discount > 0.0 && discount <= 1.0)) throw ConfigError("learner.discount must be in (0, 1]");
  if (batch_size < kBasisSize)
    throw ConfigError("learner.batch_size must be >= " + std::to_string(kBasisSize));
  if (!(projection_epsilon > 0.0)) throw ConfigError("learner.projection_epsilon must be > 0");
  if (!(tikhonov >= 0.0)) throw ConfigError("learner.tikhonov must be >= 0");
  if (!(condition_cap > 1.0)) throw ConfigError("learner.condition_cap must be > 1");
  if (!(exploration_initial_frac >= 0.0) || !(exploration_floor_frac >= 0.0) ||
      exploration_floor_frac > exploration_initial_frac)
    throw ConfigError("learner exploration fractions must satisfy 0 <= floor <= initial");
  if (!(exploration_decay > 0.0 && exploration_decay <= 1.0))
    throw ConfigError("learner.exploration_decay must be in (0, 1]");
  if (!(action_bounds.dstiffness_max > 0.0) || !(action_bounds.ddamping_max > 0.0) ||
      !(action_bounds.dequilibrium_max_deg > 0.0))
    throw ConfigError("action bounds must be positive");
}

PhaseLearner::PhaseLearner(GaitPhase phase, const GainMatrix& initial_gain,
                           const LearnerConfig& cfg, std::uint64_t exploration_seed)
    : phase_(phase), cfg_(cfg), rng_(exploration_seed) {
  cfg_.validate();
  if (!initial_gain.allFinite()) throw ConfigError("initial gain has non-finite entries");
  policy_.gain = initial_gain;
  policy_.exploration_frac = cfg_.exploration_initial_frac;
  buffer_.reserve(static_cast<std::size_t>(cfg_.batch_size));
}

PhaseLearner::StepResult PhaseLearner::step(const StateVec& x) {
  if (pending_) {
    // The deployed policy is the bound-clamped feedback, so the Bellman row
    // must back up the clamped next action, not the raw linear one.
    const ActionVec raw = policy_.feedback(x);
    const Action next = cfg_.action_bounds.clamp(Action{raw(0), raw(1), raw(2)});
    buffer_.push_back(Experience{pending_->state, pending_->action, pending_->cost, x,
                                 ActionVec{next.dstiffness, next.ddamping, next.dequilibrium_deg}});
    pending_.reset();
  }
  try_policy_iteration();

  const Action action = act(policy_, x, rng_, cfg_.action_bounds);
  const ActionVec u{action.dstiffness, action.ddamping, action.dequilibrium_deg};
  const double cost = instantaneous_cost(x, u, cfg_.cost);
  pending_ = Pending{x, u, cost};
  ++updates_seen_;
  return StepResult{action, cost};
}

namespace {

double min_eigenvalue(const Eigen::MatrixXd& m) {
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m).eigenvalues().minCoeff();
}

/// Every true policy Q-form satisfies Hxx >= Rx, Huu >= Ru and, for any
/// feedback gain G, the implied value matrix (I, -G')H(I; -G) >= Rx
/// (the discounted tail is nonnegative). A least-squares fit violating these
/// by more than half the cost floor is unidentified, not a real Q; adopting
/// it anyway turns fit noise into saturating gains.
bool plausible_policy_q(const QWeights& w, const GainMatrix& gain, const CostMatrices& cost) {
  constexpr double kSlack = 0.5;
  if (min_eigenvalue(w.hxx() - kSlack * cost.state_weight) < 0.0) return false;
  if (min_eigenvalue(w.huu() - kSlack * cost.action_weight) < 0.0) return false;
  const Eigen::Matrix<double, 2, 3> hxu = w.hxu();
  const Eigen::Matrix2d value =
      w.hxx() - hxu * gain - (hxu * gain).transpose() + gain.transpose() * w.huu() * gain;
  return min_eigenvalue(value - kSlack * cost.state_weight) >= 0.0;
}

}  // namespace

void PhaseLearner::try_policy_iteration() {
  if (buffer_.size() < static_cast<std::size_t>(cfg_.batch_size)) return;

  EvaluationOptions opts;
  opts.discount = cfg_.discount;
  opts.tikhonov = cfg_.tikhonov;
  opts.condition_cap = cfg_.condition_cap;
  EvaluationResult evaluated;
  try {
    evaluated = policy_evaluation(buffer_, opts);
  } catch (const IllConditionedError&) {
    // Not enough excitation yet; keep the batch and collect more samples.
    return;
  }

  const QWeights projected = project_q(evaluated.weights, cfg_.projection_epsilon);
  Policy improved;
  try {
    improved = policy_improvement(projected);
  } catch (const SingularCurvatureError&) {
    return;
  }
  if (!plausible_policy_q(projected, improved.gain, cfg_.cost)) return;

  weights_ = projected;
  improved.exploration_frac = std::max(cfg_.exploration_floor_frac,
                                       policy_.exploration_frac * cfg_.exploration_decay);
  policy_ = improved;
  buffer_.clear();
  ++iterations_completed_;
}

std::string PhaseLearner::to_json() const {
  nlohmann::json j;
  j["phase"] = std::string(phase_name(phase_));
  j["weights"] = std::vector<double>(weights_.w.data(), weights_.w.data() + kBasisSize);
  nlohmann::json gain = nlohmann::json::array();
  for (int r = 0; r < 3; ++r) gain.push_back({policy_.gain(r, 0), policy_.gain(r, 1)});
  j["gain"] = std::move(gain);
  j["exploration_frac"] = policy_.exploration_frac;
  j["iterations_completed"] = iterations_completed_;
  j["updates_seen"] = updates_seen_;
  return j.dump(2) + "\n";
}

PhaseLearner PhaseLearner::from_json(const std::string& json_text, const LearnerConfig& cfg,
                                     std::uint64_t exploration_seed) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
    const GaitPhase phase = phase_from_name(j.at("phase").get<std::string>());

    GainMatrix gain;
    const auto& rows = j.at("gain");
    if (rows.size() != 3) throw ConfigError("learner checkpoint gain must have 3 rows");
    for (int r = 0; r < 3; ++r) {
      if (rows[static_cast<std::size_t>(r)].size() != 2)
        throw ConfigError("learner checkpoint gain rows must have 2 columns");
      gain(r, 0) = rows[static_cast<std::size_t>(r)][0].get<double>();
      gain(r, 1) = rows[static_cast<std::size_t>(r)][1].get<double>();
    }

    PhaseLearner learner(phase, gain, cfg, exploration_seed);
    const auto weights = j.at("weights").get<std::vector<double>>();
    if (weights.size() != static_cast<std::size_t>(kBasisSize))
      throw ConfigError("learner checkpoint weights must have length " +
                        std::to_string(kBasisSize));
    for (int k = 0; k < kBasisSize; ++k)
      learner.weights_.w(k) = weights[static_cast<std::size_t>(k)];
    learner.policy_.exploration_frac = j.at("exploration_frac").get<double>();
    learner.iterations_completed_ = j.at("iterations_completed").get<int>();
    learner.updates_seen_ = j.at("updates_seen").get<long>();
    return learner;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid learner checkpoint: ") + e.what());
  }
}

}  // namespace gaitmirror
