#pragma once

/// @file harness.hpp
/// @brief Training loop, normalization, periodic evaluation, configuration
/// and CSV logging.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "csaclb/algos.hpp"
#include "csaclb/envs.hpp"

namespace csaclb {

/// Named, independent random stream derived from the run seed.
std::mt19937_64 make_stream(std::uint64_t seed, std::string_view name);

/// Full hyperparameter record. Field names double as the JSON config keys.
struct TrainConfig {
  AlgoKind algo = AlgoKind::CsacLb;
  EnvKind env = EnvKind::Tilt;
  std::uint64_t seed = 0;
  std::int64_t total_steps = 1'000'000;
  std::int64_t batch_size = 256;
  double gamma = 0.99;
  double gamma_cost = 0.99;
  std::int64_t buffer_capacity = 1'000'000;
  std::int64_t random_steps = 100;
  double actor_lr = 3e-4;
  double critic_lr = 3e-4;
  double temp_lr = 3e-4;
  double beta_lr = 3e-4;
  double tau = 0.005;
  double init_temperature = 1.0;
  double mu = 3.0;
  double cost_limit = 0.0;
  double rs_penalty = -30.0;
  bool normalize_obs = true;
  bool normalize_action = true;
  bool normalize_return = true;
  bool normalize_cost = true;
  std::pair<double, double> clip_reward{-10.0, 10.0};
  std::pair<double, double> clip_cost{-10.0, 10.0};
  std::int64_t eval_interval = 2000;
  std::int64_t eval_episodes = 10;
  std::int64_t target_update_every = 2;
  /// Env steps between gradient updates ("critic update frequency" knob).
  std::int64_t update_every = 1;
  std::vector<int> hidden_sizes{256, 256};
  /// 0 keeps the task's documented horizon.
  std::int64_t horizon = 0;

  bool operator==(const TrainConfig&) const = default;
};

/// Throws std::invalid_argument naming the offending key.
void validate(const TrainConfig& cfg);

nlohmann::json config_to_json(const TrainConfig& cfg);
/// Keys mirror TrainConfig fields; absent keys keep their defaults. Unknown
/// keys and out-of-range values throw std::invalid_argument naming the key.
TrainConfig config_from_json(const nlohmann::json& doc);
TrainConfig parse_config(std::string_view json_text);
TrainConfig parse_config_file(const std::string& path);

/// Welford running mean / standard deviation.
struct RunningScale {
  static constexpr double kStdFloor = 1e-8;

  std::int64_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void update(double x);
  /// 1 until two samples have been seen, then max(population std, floor).
  double std() const;
};

/// Per-dimension RunningScale over observation vectors.
struct ObsNormalizer {
  static constexpr double kClip = 10.0;

  std::int64_t count = 0;
  Vector mean;
  Vector m2;

  ObsNormalizer() = default;
  explicit ObsNormalizer(int dim) : mean(Vector::Zero(dim)), m2(Vector::Zero(dim)) {}

  void update(const Vector& x);
  Vector std() const;
  /// (x - mean) / std, clipped to +-kClip.
  Vector normalize(const Vector& x) const;
  Matrix normalize(const Matrix& batch) const;
};

struct Normalizers {
  ObsNormalizer obs;
  RunningScale episode_return;
  RunningScale episode_cost;
};

/// Applies the configured obs / reward / cost normalization to a sampled
/// batch using the current statistics (which it does not modify). Reward and
/// cost are divided by the std of episodic totals and then clipped.
void normalize_pipeline(Batch& batch, const Normalizers& scales, const TrainConfig& cfg);
double normalize_reward(double r, const Normalizers& scales, const TrainConfig& cfg);
double normalize_cost(double c, const Normalizers& scales, const TrainConfig& cfg);

struct EvalResult {
  double return_mean = 0.0;
  double return_std = 0.0;
  double cost_mean = 0.0;
  double cost_std = 0.0;
  std::vector<double> returns;
  std::vector<double> costs;
};

using ActionFn = std::function<Vector(const Vector& raw_obs)>;

/// Runs n_episodes full episodes and reports undiscounted sums of the raw
/// reward and cost (population std across episodes).
EvalResult evaluate(const ActionFn& act, Env& env, int n_episodes, std::mt19937_64& rng);
/// Deterministic tanh(mean) policy on observations normalized by `obs_norm`
/// (nullptr = raw observations). Nothing is updated.
EvalResult evaluate(const Agent& agent, const ObsNormalizer* obs_norm, Env& env, int n_episodes,
                    std::mt19937_64& rng);

struct LogRow {
  std::int64_t step = 0;
  std::string algo;
  std::string env;
  std::uint64_t seed = 0;
  double eval_return_mean = 0.0;
  double eval_return_std = 0.0;
  double eval_cost_mean = 0.0;
  double eval_cost_std = 0.0;
  double alpha = 0.0;
  std::optional<double> beta;
  std::optional<double> mu;
  std::optional<double> actor_loss;
  std::optional<double> critic_loss_r;
  std::optional<double> critic_loss_c;
};

inline constexpr std::string_view kLogHeader =
    "step,algo,env,seed,eval_return_mean,eval_return_std,eval_cost_mean,eval_cost_std,"
    "alpha,beta,mu,actor_loss,critic_loss_r,critic_loss_c";

/// Shortest decimal rendering that parses back to the same double.
std::string format_double(double v);

void write_log(std::ostream& out, const std::vector<LogRow>& rows);
std::string log_to_csv(const std::vector<LogRow>& rows);

struct RunLog {
  TrainConfig config;
  std::vector<LogRow> rows;
  Agent agent;
  Normalizers normalizers;
  std::int64_t env_steps = 0;
  std::int64_t update_calls = 0;      ///< agent_update_step invocations
  std::int64_t gradient_updates = 0;  ///< invocations that changed parameters
  bool aborted = false;
  std::string diagnostic;
};

/// Called after each evaluation row; return false to stop early.
using ProgressFn = std::function<bool(const LogRow&)>;

/// Runs exactly config.total_steps environment steps (unless a non-finite
/// loss aborts the run, which appends a diagnostic row and sets `aborted`).
RunLog train(const TrainConfig& config, const ProgressFn& progress = {});

/// Agent checkpoint plus the observation normalizer and env name.
nlohmann::json checkpoint_to_json(const RunLog& run);
struct LoadedCheckpoint {
  Agent agent;
  ObsNormalizer obs_norm;
  std::optional<EnvKind> env;
};
LoadedCheckpoint checkpoint_from_json(const nlohmann::json& doc);

struct TrajectoryRow {
  int step = 0;
  Vector obs;
  Vector action;
  double reward = 0.0;
  double cost = 0.0;
  bool done = false;
};

/// One episode with `act`, recording the pre-step observation of every step.
std::vector<TrajectoryRow> rollout(const ActionFn& act, Env& env, std::mt19937_64& rng);
/// step, obs_0..obs_{n-1}, action_0..action_{k-1}, reward, cost, done.
void write_trajectory(std::ostream& out, const std::vector<TrajectoryRow>& rows);

}  // namespace csaclb
