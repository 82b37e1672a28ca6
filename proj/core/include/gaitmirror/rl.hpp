#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "gaitmirror/gait.hpp"
#include "gaitmirror/features.hpp"

namespace gaitmirror {

using StateVec = Eigen::Vector2d;                 // (peak error deg, duration error s)
using ActionVec = Eigen::Vector3d;                // (dK, dB, dtheta_e)
using GainMatrix = Eigen::Matrix<double, 3, 2>;   // h(x) = -G x

/// Number of degree-2 monomials of the joint state-action vector z = (x, u).
inline constexpr int kBasisSize = 15;
using BasisVec = Eigen::Matrix<double, kBasisSize, 1>;

/// Quadratic stage-cost weights, both symmetric positive definite.
struct CostMatrices {
  Eigen::Matrix2d state_weight = Eigen::Matrix2d::Identity();
  Eigen::Matrix3d action_weight = Eigen::Matrix3d::Identity();

  void validate() const;  // throws ConfigError on asymmetry or non-PD
};

/// Weights of the quadratic Q approximation. Stored as the coefficient
/// vector W over the monomials z_i * z_j (i <= j) of z = (x1, x2, u1, u2,
/// u3), ordered (1,1),(1,2),...,(1,5),(2,2),...,(5,5). Equivalently a
/// symmetric 5x5 form H with Q(x,u) = z^T H z; diagonal coefficients map
/// one-to-one and off-diagonal H entries are half the matching coefficient.
struct QWeights {
  BasisVec w = BasisVec::Zero();

  static QWeights from_matrix(const Eigen::Matrix<double, 5, 5>& h);
  Eigen::Matrix<double, 5, 5> to_matrix() const;

  Eigen::Matrix2d hxx() const;                 // state block
  Eigen::Matrix<double, 2, 3> hxu() const;     // cross block
  Eigen::Matrix3d huu() const;                 // action-curvature block

  double value(const StateVec& x, const ActionVec& u) const;
};

/// One state transition for policy evaluation. `next_policy_action` is the
/// current policy's (noise-free) action at `next_state`.
struct Experience {
  StateVec state;
  ActionVec action;
  double cost = 0.0;
  StateVec next_state;
  ActionVec next_policy_action;
};

/// Linear state feedback h(x) = -gain * x plus the exploration scale used
/// when acting. `exploration_frac` scales each action bound.
struct Policy {
  GainMatrix gain = GainMatrix::Zero();
  double exploration_frac = 0.0;

  ActionVec feedback(const StateVec& x) const { return -gain * x; }
};

/// All degree-2 monomials z_i * z_j (i <= j) of z = (x, u), in the
/// documented order.
BasisVec basis_phi(const StateVec& x, const ActionVec& u);

/// x^T Rx x + u^T Ru u.
double instantaneous_cost(const StateVec& x, const ActionVec& u, const CostMatrices& r);

struct EvaluationOptions {
  double discount = 0.95;          // gamma in (0, 1]
  double tikhonov = 1e-8;          // ridge added when the regressor is near rank-deficient
  double condition_cap = 1e10;     // reject solves above this even after regularization
};

struct EvaluationResult {
  QWeights weights;
  double residual_norm = 0.0;      // ||X w - y|| of the solved system
  double condition_number = 0.0;   // of the raw regressor
  bool regularized = false;
};

/// Least-squares solve of W^T (phi(x,u) - gamma * phi(x', u')) = U(x,u) over
/// the batch, via SVD pseudo-inverse; falls back to Tikhonov-regularized
/// normal equations when the regressor is rank-deficient. Throws
/// InsufficientDataError (batch smaller than the basis) or
/// IllConditionedError.
EvaluationResult policy_evaluation(std::span<const Experience> batch,
                                   const EvaluationOptions& opts);

/// Clamp the eigenvalues of the action-curvature block to at least
/// `epsilon`, leaving the state and cross blocks untouched. Identity on
/// weights already satisfying the floor.
QWeights project_q(const QWeights& w, double epsilon);

/// Greedy policy from a Q form with positive definite action curvature:
/// gain = Huu^{-1} Hux, the exact minimizer of Q(x, .) for every x. Throws
/// SingularCurvatureError if the curvature block is not positive definite.
Policy policy_improvement(const QWeights& w);

/// Exploratory action: clamp(-G x + eta) with eta ~ N(0, diag(sigma_j^2)),
/// sigma_j = policy.exploration_frac * bound_j.
Action act(const Policy& policy, const StateVec& x, std::mt19937_64& rng,
           const ActionBounds& bounds);

/// The 8-of-10 convergence rule: true iff at least 8 of the 10 most recent
/// states satisfy |peak error| <= tol_peak_deg and |duration error
/// fraction| <= tol_duration_frac simultaneously. False when fewer than 10
/// states are supplied.
bool check_convergence(std::span<const TrackingState> recent, double tol_peak_deg,
                       double tol_duration_frac);

struct LearnerConfig {
  CostMatrices cost;
  double discount = 0.95;
  int batch_size = 20;
  double projection_epsilon = 1e-6;
  double tikhonov = 1e-8;
  double condition_cap = 1e10;
  double exploration_initial_frac = 0.05;
  double exploration_decay = 0.9;
  double exploration_floor_frac = 0.01;
  ActionBounds action_bounds{};

  void validate() const;  // throws ConfigError
};

/// Online policy-iteration learner for one gait phase. Owns its weights,
/// policy, experience buffer and exploration generator; shares nothing with
/// the other phases' learners.
class PhaseLearner {
 public:
  PhaseLearner(GaitPhase phase, const GainMatrix& initial_gain, const LearnerConfig& cfg,
               std::uint64_t exploration_seed);

  /// One impedance update: completes the pending experience with the newly
  /// observed state, runs a policy iteration when the batch is full, then
  /// picks the next (clamped, exploratory) action. Returns the action and
  /// its instantaneous cost.
  struct StepResult {
    Action action;
    double cost = 0.0;
  };
  StepResult step(const StateVec& x);

  /// Drop the pending experience (used when the cycle that was supposed to
  /// produce the successor state failed).
  void invalidate_pending() { pending_.reset(); }

  GaitPhase phase() const { return phase_; }
  const Policy& policy() const { return policy_; }
  const QWeights& weights() const { return weights_; }
  int iterations_completed() const { return iterations_completed_; }
  std::size_t buffered() const { return buffer_.size(); }

  /// JSON checkpoint (schema documented in the README): weights, gain,
  /// exploration state, iteration and update counters.
  std::string to_json() const;
  static PhaseLearner from_json(const std::string& json_text, const LearnerConfig& cfg,
                                std::uint64_t exploration_seed);

 private:
  struct Pending {
    StateVec state;
    ActionVec action;
    double cost;
  };

  void try_policy_iteration();

  GaitPhase phase_;
  LearnerConfig cfg_;
  QWeights weights_;
  Policy policy_;
  std::vector<Experience> buffer_;
  std::optional<Pending> pending_;
  int iterations_completed_ = 0;
  long updates_seen_ = 0;
  std::mt19937_64 rng_;
};

}  // namespace gaitmirror
