#include "csaclb/envs.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace csaclb {

namespace {

constexpr double kPi = std::numbers::pi;

double clip_unit(double a) { return std::clamp(a, -1.0, 1.0); }

}  // namespace

std::string_view to_string(EnvKind kind) {
  switch (kind) {
    case EnvKind::Tilt:
      return "tilt";
    case EnvKind::Upright:
      return "upright";
    case EnvKind::Move:
      return "move";
    case EnvKind::Swing:
      return "swing";
    case EnvKind::PointNav:
      return "pointnav";
  }
  return "unknown";
}

EnvKind parse_env_kind(std::string_view name) {
  for (EnvKind k : {EnvKind::Tilt, EnvKind::Upright, EnvKind::Move, EnvKind::Swing,
                    EnvKind::PointNav}) {
    if (to_string(k) == name) {
      return k;
    }
  }
  throw std::invalid_argument("unknown env '" + std::string(name) +
                              "' (expected tilt, upright, move, swing or pointnav)");
}

// ---------------------------------------------------------------------------

double wrap_angle(double theta) {
  double r = std::fmod(theta + kPi, 2.0 * kPi);
  if (r <= 0.0) {
    r += 2.0 * kPi;
  }
  return r - kPi;
}

PendulumState pendulum_dynamics(const PendulumState& state, double torque, double dt) {
  using P = PendulumParams;
  const double u = std::clamp(torque, -P::kMaxTorque, P::kMaxTorque);
  const double accel = 3.0 * P::kGravity / (2.0 * P::kLength) * std::sin(state.theta) +
                       3.0 / (P::kMass * P::kLength * P::kLength) * u;
  PendulumState next;
  next.omega = std::clamp(state.omega + accel * dt, -P::kMaxSpeed, P::kMaxSpeed);
  next.theta = wrap_angle(state.theta + next.omega * dt);
  return next;
}

std::pair<double, double> pendulum_reward_cost(EnvKind task, double theta) {
  const double cost = std::abs(theta) > PendulumParams::kThetaLimit ? 1.0 : 0.0;
  switch (task) {
    case EnvKind::Tilt:
      return {-theta * theta, cost};
    case EnvKind::Upright: {
      const double e = PendulumParams::kUprightTarget - theta;
      return {-e * e, cost};
    }
    default:
      throw std::invalid_argument("pendulum_reward_cost: task must be tilt or upright");
  }
}

// ---------------------------------------------------------------------------

CartpoleAccel cartpole_accelerations(const CartpoleState& s, double force) {
  using P = CartpoleParams;
  constexpr double total_mass = P::kCartMass + P::kPoleMass;
  constexpr double pole_mass_length = P::kPoleMass * P::kHalfLength;
  const double sin_t = std::sin(s.theta);
  const double cos_t = std::cos(s.theta);
  const double temp = (force + pole_mass_length * s.theta_dot * s.theta_dot * sin_t) / total_mass;
  const double theta_acc =
      (P::kGravity * sin_t - cos_t * temp) /
      (P::kHalfLength * (4.0 / 3.0 - P::kPoleMass * cos_t * cos_t / total_mass));
  const double x_acc = temp - pole_mass_length * theta_acc * cos_t / total_mass;
  return {x_acc, theta_acc};
}

CartpoleState cartpole_dynamics(const CartpoleState& state, double force, double dt) {
  const double f = std::clamp(force, -CartpoleParams::kMaxForce, CartpoleParams::kMaxForce);
  const CartpoleAccel acc = cartpole_accelerations(state, f);
  CartpoleState next;
  next.x_dot = state.x_dot + dt * acc.x_acc;
  next.theta_dot = state.theta_dot + dt * acc.theta_acc;
  next.x = state.x + dt * next.x_dot;
  next.theta = wrap_angle(state.theta + dt * next.theta_dot);
  return next;
}

std::pair<double, double> cartpole_reward_cost(EnvKind task, double x, double theta) {
  using P = CartpoleParams;
  const bool off_track = std::abs(x) > P::kPositionLimit;
  switch (task) {
    case EnvKind::Move: {
      const bool tilted = std::abs(theta) > P::kMoveAngleLimit;
      return {x * x, (off_track || tilted) ? 1.0 : 0.0};
    }
    case EnvKind::Swing: {
      const bool tilted = std::abs(theta) > P::kSwingAngleLimit;
      return {theta * theta, (off_track || tilted) ? 1.0 : 0.0};
    }
    default:
      throw std::invalid_argument("cartpole_reward_cost: task must be move or swing");
  }
}

// ---------------------------------------------------------------------------

namespace {

// Distance along the unit ray (origin, dir) to the circle boundary; 0 when the
// origin is inside, negative when the ray misses.
double ray_circle_distance(const Eigen::Vector2d& origin, const Eigen::Vector2d& dir,
                           const Circle& c) {
  const Eigen::Vector2d f = origin - c.center;
  const double cc = f.squaredNorm() - c.radius * c.radius;
  if (cc <= 0.0) {
    return 0.0;
  }
  const double b = f.dot(dir);
  const double disc = b * b - cc;
  if (disc < 0.0) {
    return -1.0;
  }
  const double t = -b - std::sqrt(disc);
  return t >= 0.0 ? t : -1.0;
}

bool inside(const Circle& c, const Eigen::Vector2d& p) {
  return (p - c.center).norm() < c.radius;
}

}  // namespace

Eigen::VectorXd pointnav_observation(const PointNavState& state) {
  using P = PointNavParams;
  Eigen::VectorXd obs(2 + P::kNumSensors);
  obs.head<2>() = state.goal.center - state.pos;
  for (int i = 0; i < P::kNumSensors; ++i) {
    const double angle = 2.0 * kPi * i / P::kNumSensors;
    const Eigen::Vector2d dir(std::cos(angle), std::sin(angle));
    double reading = 0.0;
    for (const Circle& h : state.hazards) {
      const double d = ray_circle_distance(state.pos, dir, h);
      if (d >= 0.0 && d <= P::kSensorRange) {
        reading = std::max(reading, 1.0 - d / P::kSensorRange);
      }
    }
    obs(2 + i) = reading;
  }
  return obs;
}

StepResult pointnav_step(PointNavState& state, const Eigen::Vector2d& accel) {
  using P = PointNavParams;
  const Eigen::Vector2d a = accel.cwiseMax(-P::kMaxAccel).cwiseMin(P::kMaxAccel);
  const double dist_before = (state.goal.center - state.pos).norm();
  state.vel += a * P::kDt;
  const double speed = state.vel.norm();
  if (speed > P::kMaxSpeed) {
    state.vel *= P::kMaxSpeed / speed;
  }
  state.pos += state.vel * P::kDt;
  state.step_count += 1;

  StepResult out;
  const double dist_after = (state.goal.center - state.pos).norm();
  const bool at_goal = dist_after < state.goal.radius;
  out.reward = dist_before - dist_after + (at_goal ? P::kGoalBonus : 0.0);
  out.cost = std::any_of(state.hazards.begin(), state.hazards.end(),
                         [&](const Circle& h) { return inside(h, state.pos); })
                 ? 1.0
                 : 0.0;
  out.done = at_goal || state.step_count >= P::kHorizon;
  out.obs = pointnav_observation(state);
  return out;
}

// ---------------------------------------------------------------------------

void Env::check_can_step(const Eigen::VectorXd& action) const {
  if (finished_) {
    throw std::logic_error("env step called on a finished episode; call reset() first");
  }
  if (action.size() != action_dim()) {
    throw std::invalid_argument("env step: action has " + std::to_string(action.size()) +
                                " entries, expected " + std::to_string(action_dim()));
  }
}

double Env::actuate(double a, double max_native) const {
  if (action_normalized_) {
    return max_native * clip_unit(a);
  }
  return std::clamp(a, -max_native, max_native);
}

bool Env::advance_clock() {
  ++steps_;
  if (steps_ >= horizon()) {
    finished_ = true;
  }
  return finished_;
}

PendulumEnv::PendulumEnv(EnvKind task) : task_(task) {
  if (task != EnvKind::Tilt && task != EnvKind::Upright) {
    throw std::invalid_argument("PendulumEnv: task must be tilt or upright");
  }
}

int PendulumEnv::horizon() const {
  return horizon_override_ > 0 ? horizon_override_ : PendulumParams::kHorizon;
}

Eigen::VectorXd PendulumEnv::observe() const {
  return Eigen::Vector3d(std::cos(state_.theta), std::sin(state_.theta), state_.omega);
}

Eigen::VectorXd PendulumEnv::reset(std::mt19937_64& rng) {
  if (fixed_start_) {
    state_ = *fixed_start_;
  } else {
    std::uniform_real_distribution<double> angle(-kPi, kPi);
    std::uniform_real_distribution<double> speed(-1.0, 1.0);
    state_.theta = wrap_angle(angle(rng));
    state_.omega = speed(rng);
  }
  begin_episode();
  return observe();
}

StepResult PendulumEnv::step(const Eigen::VectorXd& action) {
  check_can_step(action);
  state_ = pendulum_dynamics(state_, actuate(action(0), PendulumParams::kMaxTorque));
  StepResult out;
  std::tie(out.reward, out.cost) = pendulum_reward_cost(task_, state_.theta);
  out.obs = observe();
  out.done = advance_clock();
  return out;
}

CartpoleEnv::CartpoleEnv(EnvKind task) : task_(task) {
  if (task != EnvKind::Move && task != EnvKind::Swing) {
    throw std::invalid_argument("CartpoleEnv: task must be move or swing");
  }
}

int CartpoleEnv::horizon() const {
  return horizon_override_ > 0 ? horizon_override_ : CartpoleParams::kHorizon;
}

Eigen::VectorXd CartpoleEnv::observe() const {
  return Eigen::Vector4d(state_.x, state_.theta, state_.x_dot, state_.theta_dot);
}

Eigen::VectorXd CartpoleEnv::reset(std::mt19937_64& rng) {
  if (fixed_start_) {
    state_ = *fixed_start_;
  } else {
    std::uniform_real_distribution<double> u(-0.05, 0.05);
    state_.x = u(rng);
    state_.theta = u(rng);
    state_.x_dot = u(rng);
    state_.theta_dot = u(rng);
  }
  begin_episode();
  return observe();
}

StepResult CartpoleEnv::step(const Eigen::VectorXd& action) {
  check_can_step(action);
  state_ = cartpole_dynamics(state_, actuate(action(0), CartpoleParams::kMaxForce));
  StepResult out;
  std::tie(out.reward, out.cost) = cartpole_reward_cost(task_, state_.x, state_.theta);
  out.obs = observe();
  out.done = advance_clock();
  return out;
}

int PointNavEnv::horizon() const {
  return horizon_override_ > 0 ? horizon_override_ : PointNavParams::kHorizon;
}

Eigen::VectorXd PointNavEnv::reset(std::mt19937_64& rng) {
  using P = PointNavParams;
  if (fixed_layout_) {
    state_ = *fixed_layout_;
    state_.step_count = 0;
  } else {
    std::uniform_real_distribution<double> coord(-P::kArenaHalfWidth, P::kArenaHalfWidth);
    // Keep a clearance around the start so the first step is never a
    // collision or an instant goal.
    constexpr double kStartClearance = 0.5;
    const Eigen::Vector2d start = Eigen::Vector2d::Zero();
    state_ = PointNavState{};
    std::vector<Circle> placed;
    auto place = [&](double radius) {
      for (;;) {
        const Circle c{Eigen::Vector2d(coord(rng), coord(rng)), radius};
        if ((c.center - start).norm() < radius + kStartClearance) {
          continue;
        }
        const bool overlaps = std::any_of(placed.begin(), placed.end(), [&](const Circle& o) {
          return (o.center - c.center).norm() < o.radius + c.radius;
        });
        if (!overlaps) {
          placed.push_back(c);
          return c;
        }
      }
    };
    state_.goal = place(P::kGoalRadius);
    for (int i = 0; i < P::kNumHazards; ++i) {
      state_.hazards.push_back(place(P::kHazardRadius));
    }
  }
  begin_episode();
  return pointnav_observation(state_);
}

StepResult PointNavEnv::step(const Eigen::VectorXd& action) {
  check_can_step(action);
  const Eigen::Vector2d accel(actuate(action(0), PointNavParams::kMaxAccel),
                              actuate(action(1), PointNavParams::kMaxAccel));
  StepResult out = pointnav_step(state_, accel);
  const bool clock_done = advance_clock();
  out.done = out.done || clock_done;
  if (out.done) {
    mark_finished();
  }
  return out;
}

std::unique_ptr<Env> make_env(EnvKind kind, int horizon_override) {
  std::unique_ptr<Env> env;
  switch (kind) {
    case EnvKind::Tilt:
    case EnvKind::Upright:
      env = std::make_unique<PendulumEnv>(kind);
      break;
    case EnvKind::Move:
    case EnvKind::Swing:
      env = std::make_unique<CartpoleEnv>(kind);
      break;
    case EnvKind::PointNav:
      env = std::make_unique<PointNavEnv>();
      break;
  }
  env->set_horizon_override(horizon_override);
  return env;
}

}  // namespace csaclb
