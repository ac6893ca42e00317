#pragma once

/// @file envs.hpp
/// @brief Self-contained control tasks with a binary per-step constraint cost:
/// Tilt and Upright (pendulum), Move and Swing (cart-pole), and a 2-D
/// point-goal navigation task with circular hazards.

#include <array>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace csaclb {

enum class EnvKind { Tilt, Upright, Move, Swing, PointNav };

std::string_view to_string(EnvKind kind);
/// Accepts the lower-case names ("tilt", "pointnav", ...). Throws
/// std::invalid_argument on anything else.
EnvKind parse_env_kind(std::string_view name);

struct StepResult {
  Eigen::VectorXd obs;
  double reward = 0.0;
  double cost = 0.0;  ///< 0 or 1
  bool done = false;
};

// ---------------------------------------------------------------------------
// Pendulum (Pendulum-v0 dynamics; theta = 0 is upright)

struct PendulumState {
  double theta = 0.0;  ///< rad, wrapped to (-pi, pi]
  double omega = 0.0;  ///< rad/s, clipped to [-8, 8]
};

struct PendulumParams {
  static constexpr double kGravity = 10.0;
  static constexpr double kMass = 1.0;
  static constexpr double kLength = 1.0;
  static constexpr double kDt = 0.05;
  static constexpr double kMaxTorque = 2.0;
  static constexpr double kMaxSpeed = 8.0;
  static constexpr double kThetaLimit = 1.5;
  static constexpr double kUprightTarget = -0.41151684;
  static constexpr int kHorizon = 200;
};

/// Wraps an angle to (-pi, pi].
double wrap_angle(double theta);

/// Semi-implicit Euler step; omega is clipped before theta is advanced.
PendulumState pendulum_dynamics(const PendulumState& state, double torque,
                                double dt = PendulumParams::kDt);

/// Tilt: r = -theta^2. Upright: r = -(theta_lim - theta)^2. Cost is 1 when
/// |theta| > 1.5.
std::pair<double, double> pendulum_reward_cost(EnvKind task, double theta);

// ---------------------------------------------------------------------------
// Cart-pole (frictionless, standard constants)

struct CartpoleState {
  double x = 0.0;
  double theta = 0.0;
  double x_dot = 0.0;
  double theta_dot = 0.0;
};

struct CartpoleParams {
  static constexpr double kGravity = 9.8;
  static constexpr double kCartMass = 1.0;
  static constexpr double kPoleMass = 0.1;
  static constexpr double kHalfLength = 0.5;
  static constexpr double kDt = 0.02;
  static constexpr double kMaxForce = 10.0;
  static constexpr double kPositionLimit = 0.9;
  static constexpr double kMoveAngleLimit = 0.2;
  static constexpr double kSwingAngleLimit = 1.5;
  static constexpr int kHorizon = 1000;
};

struct CartpoleAccel {
  double x_acc;
  double theta_acc;
};

CartpoleAccel cartpole_accelerations(const CartpoleState& state, double force);

/// Semi-implicit Euler: velocities first, positions with the new velocities.
CartpoleState cartpole_dynamics(const CartpoleState& state, double force,
                                double dt = CartpoleParams::kDt);

/// Move: r = x^2; Swing: r = theta^2. Cost 1 when |x| > 0.9 or |theta|
/// exceeds 0.2 (Move) / 1.5 (Swing).
std::pair<double, double> cartpole_reward_cost(EnvKind task, double x, double theta);

// ---------------------------------------------------------------------------
// Point-goal navigation

struct Circle {
  Eigen::Vector2d center;
  double radius;
};

struct PointNavState {
  Eigen::Vector2d pos = Eigen::Vector2d::Zero();
  Eigen::Vector2d vel = Eigen::Vector2d::Zero();
  Circle goal{Eigen::Vector2d::Zero(), 0.3};
  std::vector<Circle> hazards;
  int step_count = 0;
};

struct PointNavParams {
  static constexpr double kDt = 0.1;
  static constexpr double kMaxAccel = 1.0;
  static constexpr double kMaxSpeed = 2.0;
  static constexpr double kArenaHalfWidth = 2.0;
  static constexpr double kGoalRadius = 0.3;
  static constexpr double kHazardRadius = 0.2;
  static constexpr int kNumHazards = 4;
  static constexpr int kNumSensors = 8;
  static constexpr double kSensorRange = 2.0;
  static constexpr double kGoalBonus = 1.0;
  static constexpr int kHorizon = 1000;
};

/// Goal offset (2) followed by 8 hazard range readings in [0, 1], where 1
/// means a hazard boundary at the agent and 0 means nothing within range.
Eigen::VectorXd pointnav_observation(const PointNavState& state);

/// Advances the point mass with an acceleration already in m/s^2.
StepResult pointnav_step(PointNavState& state, const Eigen::Vector2d& accel);

// ---------------------------------------------------------------------------

/// A task instance. By default actions are normalized to (-1, 1)^k and
/// rescaled to the native actuator range inside step(); with normalization
/// off they are taken in native units and clipped to the actuator range.
class Env {
 public:
  virtual ~Env() = default;

  virtual EnvKind kind() const = 0;
  virtual int obs_dim() const = 0;
  virtual int action_dim() const = 0;
  virtual int horizon() const = 0;

  virtual Eigen::VectorXd reset(std::mt19937_64& rng) = 0;
  /// Throws std::logic_error when the episode has already finished.
  virtual StepResult step(const Eigen::VectorXd& action) = 0;

  virtual std::unique_ptr<Env> clone() const = 0;

  int steps_taken() const { return steps_; }
  bool finished() const { return finished_; }
  /// h > 0 replaces the task's documented horizon; 0 restores it.
  void set_horizon_override(int h) { horizon_override_ = h; }
  void set_action_normalized(bool on) { action_normalized_ = on; }
  bool action_normalized() const { return action_normalized_; }

 protected:
  void begin_episode() {
    steps_ = 0;
    finished_ = false;
  }
  void check_can_step(const Eigen::VectorXd& action) const;
  /// Counts the step and marks the episode finished at the horizon.
  bool advance_clock();
  void mark_finished() { finished_ = true; }
  /// Native actuator value for one action component.
  double actuate(double a, double max_native) const;

  int horizon_override_ = 0;
  bool action_normalized_ = true;

 private:
  int steps_ = 0;
  bool finished_ = true;
};

class PendulumEnv final : public Env {
 public:
  explicit PendulumEnv(EnvKind task);

  EnvKind kind() const override { return task_; }
  int obs_dim() const override { return 3; }
  int action_dim() const override { return 1; }
  int horizon() const override;

  Eigen::VectorXd reset(std::mt19937_64& rng) override;
  StepResult step(const Eigen::VectorXd& action) override;
  std::unique_ptr<Env> clone() const override { return std::make_unique<PendulumEnv>(*this); }

  /// Every subsequent reset starts from `start` instead of sampling.
  void set_fixed_start(std::optional<PendulumState> start) { fixed_start_ = start; }
  const PendulumState& state() const { return state_; }

  Eigen::VectorXd observe() const;

 private:
  EnvKind task_;
  PendulumState state_;
  std::optional<PendulumState> fixed_start_;
};

class CartpoleEnv final : public Env {
 public:
  explicit CartpoleEnv(EnvKind task);

  EnvKind kind() const override { return task_; }
  int obs_dim() const override { return 4; }
  int action_dim() const override { return 1; }
  int horizon() const override;

  Eigen::VectorXd reset(std::mt19937_64& rng) override;
  StepResult step(const Eigen::VectorXd& action) override;
  std::unique_ptr<Env> clone() const override { return std::make_unique<CartpoleEnv>(*this); }

  void set_fixed_start(std::optional<CartpoleState> start) { fixed_start_ = start; }
  const CartpoleState& state() const { return state_; }

  Eigen::VectorXd observe() const;

 private:
  EnvKind task_;
  CartpoleState state_;
  std::optional<CartpoleState> fixed_start_;
};

class PointNavEnv final : public Env {
 public:
  PointNavEnv() = default;

  EnvKind kind() const override { return EnvKind::PointNav; }
  int obs_dim() const override { return 2 + PointNavParams::kNumSensors; }
  int action_dim() const override { return 2; }
  int horizon() const override;

  Eigen::VectorXd reset(std::mt19937_64& rng) override;
  StepResult step(const Eigen::VectorXd& action) override;
  std::unique_ptr<Env> clone() const override { return std::make_unique<PointNavEnv>(*this); }

  /// Every subsequent reset restores `layout` instead of sampling one.
  void set_fixed_layout(std::optional<PointNavState> layout) { fixed_layout_ = std::move(layout); }
  const PointNavState& state() const { return state_; }

 private:
  PointNavState state_;
  std::optional<PointNavState> fixed_layout_;
};

/// horizon_override > 0 replaces the task's documented horizon.
std::unique_ptr<Env> make_env(EnvKind kind, int horizon_override = 0);

}  // namespace csaclb
