#include "csaclb/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace csaclb {

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

[[noreturn]] void bad_key(std::string_view key, std::string_view why) {
  throw std::invalid_argument("config key '" + std::string(key) + "': " + std::string(why));
}

void require(bool ok, std::string_view key, std::string_view why) {
  if (!ok) {
    bad_key(key, why);
  }
}

bool finite(double v) { return std::isfinite(v); }

double clip(double v, const std::pair<double, double>& range) {
  return std::clamp(v, range.first, range.second);
}

std::pair<double, double> episode_stats(const std::vector<double>& v, double& stddev) {
  double mean = 0.0;
  for (double x : v) {
    mean += x;
  }
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) {
    var += (x - mean) * (x - mean);
  }
  stddev = std::sqrt(var / static_cast<double>(v.size()));
  return {mean, stddev};
}

}  // namespace

std::mt19937_64 make_stream(std::uint64_t seed, std::string_view name) {
  const std::uint64_t h = fnv1a(name);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
  return std::mt19937_64(seq);
}

// ---------------------------------------------------------------------------
// configuration

void validate(const TrainConfig& c) {
  require(c.total_steps >= 0, "total_steps", "must be >= 0");
  require(c.batch_size >= 1, "batch_size", "must be >= 1");
  require(finite(c.gamma) && c.gamma > 0.0 && c.gamma < 1.0, "gamma", "must lie in (0, 1)");
  require(finite(c.gamma_cost) && c.gamma_cost >= 0.0 && c.gamma_cost < 1.0, "gamma_cost",
          "must lie in [0, 1)");
  require(c.buffer_capacity >= c.batch_size, "buffer_capacity", "must be >= batch_size");
  require(c.random_steps >= 0, "random_steps", "must be >= 0");
  require(finite(c.actor_lr) && c.actor_lr > 0.0, "actor_lr", "must be > 0");
  require(finite(c.critic_lr) && c.critic_lr > 0.0, "critic_lr", "must be > 0");
  require(finite(c.temp_lr) && c.temp_lr > 0.0, "temp_lr", "must be > 0");
  require(finite(c.beta_lr) && c.beta_lr > 0.0, "beta_lr", "must be > 0");
  require(finite(c.tau) && c.tau > 0.0 && c.tau <= 1.0, "tau", "must lie in (0, 1]");
  require(finite(c.init_temperature) && c.init_temperature > 0.0, "init_temperature",
          "must be > 0");
  if (c.algo == AlgoKind::CsacLb) {
    require(finite(c.mu) && c.mu > 1.0, "mu", "must exceed 1 for csac_lb");
  } else {
    require(finite(c.mu) && c.mu > 0.0, "mu", "must be > 0");
  }
  require(finite(c.cost_limit), "cost_limit", "must be finite");
  require(finite(c.rs_penalty) && c.rs_penalty <= 0.0, "rs_penalty", "must be <= 0");
  require(finite(c.clip_reward.first) && finite(c.clip_reward.second) &&
              c.clip_reward.first < c.clip_reward.second,
          "clip_reward", "must be a finite [lo, hi] with lo < hi");
  require(finite(c.clip_cost.first) && finite(c.clip_cost.second) &&
              c.clip_cost.first < c.clip_cost.second,
          "clip_cost", "must be a finite [lo, hi] with lo < hi");
  require(c.eval_interval >= 0, "eval_interval", "must be >= 0 (0 disables evaluation)");
  require(c.eval_episodes >= 1, "eval_episodes", "must be >= 1");
  require(c.target_update_every >= 1, "target_update_every", "must be >= 1");
  require(c.update_every >= 1, "update_every", "must be >= 1");
  require(!c.hidden_sizes.empty(), "hidden_sizes", "must list at least one layer");
  for (int h : c.hidden_sizes) {
    require(h >= 1, "hidden_sizes", "layer widths must be >= 1");
  }
  require(c.horizon >= 0, "horizon", "must be >= 0 (0 = task default)");
}

nlohmann::json config_to_json(const TrainConfig& c) {
  return {
      {"algo", std::string(to_string(c.algo))},
      {"env", std::string(to_string(c.env))},
      {"seed", c.seed},
      {"total_steps", c.total_steps},
      {"batch_size", c.batch_size},
      {"gamma", c.gamma},
      {"gamma_cost", c.gamma_cost},
      {"buffer_capacity", c.buffer_capacity},
      {"random_steps", c.random_steps},
      {"actor_lr", c.actor_lr},
      {"critic_lr", c.critic_lr},
      {"temp_lr", c.temp_lr},
      {"beta_lr", c.beta_lr},
      {"tau", c.tau},
      {"init_temperature", c.init_temperature},
      {"mu", c.mu},
      {"cost_limit", c.cost_limit},
      {"rs_penalty", c.rs_penalty},
      {"normalize_obs", c.normalize_obs},
      {"normalize_action", c.normalize_action},
      {"normalize_return", c.normalize_return},
      {"normalize_cost", c.normalize_cost},
      {"clip_reward", {c.clip_reward.first, c.clip_reward.second}},
      {"clip_cost", {c.clip_cost.first, c.clip_cost.second}},
      {"eval_interval", c.eval_interval},
      {"eval_episodes", c.eval_episodes},
      {"target_update_every", c.target_update_every},
      {"update_every", c.update_every},
      {"hidden_sizes", c.hidden_sizes},
      {"horizon", c.horizon},
  };
}

namespace {

using Setter = std::function<void(TrainConfig&, const nlohmann::json&, const std::string&)>;

template <typename T>
Setter integer_field(T TrainConfig::*field) {
  return [field](TrainConfig& c, const nlohmann::json& v, const std::string& key) {
    if (v.is_number_integer()) {
      if constexpr (std::is_unsigned_v<T>) {
        if (v.is_number_unsigned() || v.get<std::int64_t>() >= 0) {
          c.*field = v.get<T>();
          return;
        }
        bad_key(key, "must be a non-negative integer");
      } else {
        c.*field = v.get<T>();
        return;
      }
    }
    // Accept integral floats such as 1e6.
    if (v.is_number_float()) {
      const double d = v.get<double>();
      if (std::isfinite(d) && d == std::floor(d) && std::abs(d) < 9.0e15) {
        if (std::is_unsigned_v<T> && d < 0) {
          bad_key(key, "must be a non-negative integer");
        }
        c.*field = static_cast<T>(d);
        return;
      }
    }
    bad_key(key, "must be an integer");
  };
}

Setter double_field(double TrainConfig::*field) {
  return [field](TrainConfig& c, const nlohmann::json& v, const std::string& key) {
    if (!v.is_number()) {
      bad_key(key, "must be a number");
    }
    c.*field = v.get<double>();
  };
}

Setter bool_field(bool TrainConfig::*field) {
  return [field](TrainConfig& c, const nlohmann::json& v, const std::string& key) {
    if (!v.is_boolean()) {
      bad_key(key, "must be true or false");
    }
    c.*field = v.get<bool>();
  };
}

Setter range_field(std::pair<double, double> TrainConfig::*field) {
  return [field](TrainConfig& c, const nlohmann::json& v, const std::string& key) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
      bad_key(key, "must be a two-element [lo, hi] array");
    }
    c.*field = {v[0].get<double>(), v[1].get<double>()};
  };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"algo",
       [](TrainConfig& c, const nlohmann::json& v, const std::string& key) {
         if (!v.is_string()) bad_key(key, "must be a string");
         try {
           c.algo = parse_algo_kind(v.get<std::string>());
         } catch (const std::invalid_argument&) {
           bad_key(key, "must be one of csac_lb, sac_lag, sac_rs");
         }
       }},
      {"env",
       [](TrainConfig& c, const nlohmann::json& v, const std::string& key) {
         if (!v.is_string()) bad_key(key, "must be a string");
         try {
           c.env = parse_env_kind(v.get<std::string>());
         } catch (const std::invalid_argument&) {
           bad_key(key, "must be one of tilt, upright, move, swing, pointnav");
         }
       }},
      {"seed", integer_field(&TrainConfig::seed)},
      {"total_steps", integer_field(&TrainConfig::total_steps)},
      {"batch_size", integer_field(&TrainConfig::batch_size)},
      {"gamma", double_field(&TrainConfig::gamma)},
      {"gamma_cost", double_field(&TrainConfig::gamma_cost)},
      {"buffer_capacity", integer_field(&TrainConfig::buffer_capacity)},
      {"random_steps", integer_field(&TrainConfig::random_steps)},
      {"actor_lr", double_field(&TrainConfig::actor_lr)},
      {"critic_lr", double_field(&TrainConfig::critic_lr)},
      {"temp_lr", double_field(&TrainConfig::temp_lr)},
      {"beta_lr", double_field(&TrainConfig::beta_lr)},
      {"tau", double_field(&TrainConfig::tau)},
      {"init_temperature", double_field(&TrainConfig::init_temperature)},
      {"mu", double_field(&TrainConfig::mu)},
      {"cost_limit", double_field(&TrainConfig::cost_limit)},
      {"rs_penalty", double_field(&TrainConfig::rs_penalty)},
      {"normalize_obs", bool_field(&TrainConfig::normalize_obs)},
      {"normalize_action", bool_field(&TrainConfig::normalize_action)},
      {"normalize_return", bool_field(&TrainConfig::normalize_return)},
      {"normalize_cost", bool_field(&TrainConfig::normalize_cost)},
      {"clip_reward", range_field(&TrainConfig::clip_reward)},
      {"clip_cost", range_field(&TrainConfig::clip_cost)},
      {"eval_interval", integer_field(&TrainConfig::eval_interval)},
      {"eval_episodes", integer_field(&TrainConfig::eval_episodes)},
      {"target_update_every", integer_field(&TrainConfig::target_update_every)},
      {"update_every", integer_field(&TrainConfig::update_every)},
      {"hidden_sizes",
       [](TrainConfig& c, const nlohmann::json& v, const std::string& key) {
         if (!v.is_array()) bad_key(key, "must be an array of layer widths");
         std::vector<int> sizes;
         for (const auto& e : v) {
           if (!e.is_number_integer()) bad_key(key, "layer widths must be integers");
           sizes.push_back(e.get<int>());
         }
         c.hidden_sizes = std::move(sizes);
       }},
      {"horizon", integer_field(&TrainConfig::horizon)},
  };
  return table;
}

}  // namespace

TrainConfig config_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) {
    throw std::invalid_argument("config must be a JSON object");
  }
  TrainConfig c;
  const auto& table = setters();
  for (const auto& [key, value] : doc.items()) {
    auto it = table.find(key);
    if (it == table.end()) {
      bad_key(key, "unknown key");
    }
    it->second(c, value, key);
  }
  validate(c);
  return c;
}

TrainConfig parse_config(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
  }
  return config_from_json(doc);
}

TrainConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open config file " + path);
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

// ---------------------------------------------------------------------------
// normalization

void RunningScale::update(double x) {
  ++count;
  const double delta = x - mean;
  mean += delta / static_cast<double>(count);
  m2 += delta * (x - mean);
}

double RunningScale::std() const {
  if (count < 2) {
    return 1.0;
  }
  return std::max(std::sqrt(m2 / static_cast<double>(count)), kStdFloor);
}

void ObsNormalizer::update(const Vector& x) {
  if (mean.size() == 0) {
    mean = Vector::Zero(x.size());
    m2 = Vector::Zero(x.size());
  }
  if (x.size() != mean.size()) {
    throw std::invalid_argument("ObsNormalizer: dimension mismatch");
  }
  ++count;
  const Vector delta = x - mean;
  mean += delta / static_cast<double>(count);
  m2 += delta.cwiseProduct(x - mean);
}

Vector ObsNormalizer::std() const {
  if (count < 2) {
    return Vector::Ones(mean.size());
  }
  return (m2 / static_cast<double>(count)).cwiseSqrt().cwiseMax(RunningScale::kStdFloor);
}

Vector ObsNormalizer::normalize(const Vector& x) const {
  if (count == 0) {
    return x;
  }
  return ((x - mean).cwiseQuotient(std())).cwiseMax(-kClip).cwiseMin(kClip);
}

Matrix ObsNormalizer::normalize(const Matrix& batch) const {
  if (count == 0) {
    return batch;
  }
  const Vector inv = std().cwiseInverse();
  Matrix out = (batch.colwise() - mean).array().colwise() * inv.array();
  return out.cwiseMax(-kClip).cwiseMin(kClip);
}

double normalize_reward(double r, const Normalizers& scales, const TrainConfig& cfg) {
  if (!cfg.normalize_return) {
    return r;
  }
  return clip(r / scales.episode_return.std(), cfg.clip_reward);
}

double normalize_cost(double c, const Normalizers& scales, const TrainConfig& cfg) {
  if (!cfg.normalize_cost) {
    return c;
  }
  return clip(c / scales.episode_cost.std(), cfg.clip_cost);
}

void normalize_pipeline(Batch& batch, const Normalizers& scales, const TrainConfig& cfg) {
  if (cfg.normalize_obs) {
    batch.obs = scales.obs.normalize(batch.obs);
    batch.next_obs = scales.obs.normalize(batch.next_obs);
  }
  if (cfg.normalize_return) {
    batch.rewards = batch.rewards.unaryExpr(
        [&](double r) { return normalize_reward(r, scales, cfg); });
  }
  if (cfg.normalize_cost) {
    batch.costs =
        batch.costs.unaryExpr([&](double c) { return normalize_cost(c, scales, cfg); });
  }
}

// ---------------------------------------------------------------------------
// evaluation

EvalResult evaluate(const ActionFn& act, Env& env, int n_episodes, std::mt19937_64& rng) {
  if (n_episodes < 1) {
    throw std::invalid_argument("evaluate requires n_episodes >= 1");
  }
  EvalResult res;
  for (int ep = 0; ep < n_episodes; ++ep) {
    Vector obs = env.reset(rng);
    double ret = 0.0;
    double cost = 0.0;
    for (;;) {
      StepResult s = env.step(act(obs));
      ret += s.reward;
      cost += s.cost;
      if (s.done) {
        break;
      }
      obs = std::move(s.obs);
    }
    res.returns.push_back(ret);
    res.costs.push_back(cost);
  }
  res.return_mean = episode_stats(res.returns, res.return_std).first;
  res.cost_mean = episode_stats(res.costs, res.cost_std).first;
  return res;
}

EvalResult evaluate(const Agent& agent, const ObsNormalizer* obs_norm, Env& env, int n_episodes,
                    std::mt19937_64& rng) {
  const ActionFn act = [&](const Vector& obs) {
    return obs_norm ? policy_mean_action(agent.policy, obs_norm->normalize(obs))
                    : policy_mean_action(agent.policy, obs);
  };
  return evaluate(act, env, n_episodes, rng);
}

// ---------------------------------------------------------------------------
// logging

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) {
    throw std::runtime_error("format_double failed");
  }
  return std::string(buf, end);
}

namespace {

std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

}  // namespace

void write_log(std::ostream& out, const std::vector<LogRow>& rows) {
  out << kLogHeader << '\n';
  for (const auto& r : rows) {
    out << r.step << ',' << r.algo << ',' << r.env << ',' << r.seed << ','
        << format_double(r.eval_return_mean) << ',' << format_double(r.eval_return_std) << ','
        << format_double(r.eval_cost_mean) << ',' << format_double(r.eval_cost_std) << ','
        << format_double(r.alpha) << ',' << opt(r.beta) << ',' << opt(r.mu) << ','
        << opt(r.actor_loss) << ',' << opt(r.critic_loss_r) << ',' << opt(r.critic_loss_c)
        << '\n';
  }
}

std::string log_to_csv(const std::vector<LogRow>& rows) {
  std::ostringstream ss;
  write_log(ss, rows);
  return ss.str();
}

// ---------------------------------------------------------------------------
// training

namespace {

struct LossAccumulator {
  double actor = 0.0;
  double critic_r = 0.0;
  double critic_c = 0.0;
  std::int64_t n = 0;

  void add(const UpdateMetrics& m) {
    actor += m.actor_loss;
    critic_r += m.critic_loss_r;
    critic_c += m.critic_loss_c.value_or(0.0);
    ++n;
  }
};

AgentSpec agent_spec(const TrainConfig& c, const Env& env) {
  AgentSpec spec;
  spec.algo = c.algo;
  spec.obs_dim = env.obs_dim();
  spec.action_dim = env.action_dim();
  spec.hidden = c.hidden_sizes;
  spec.init_temperature = c.init_temperature;
  spec.barrier = BarrierConfig{c.mu, c.cost_limit};
  spec.lag = SacLagState{0.0, c.beta_lr};
  spec.rs = RsConfig{c.rs_penalty};
  return spec;
}

UpdateSettings update_settings(const TrainConfig& c) {
  UpdateSettings s;
  s.batch_size = static_cast<std::size_t>(c.batch_size);
  s.random_steps = static_cast<std::size_t>(c.random_steps);
  s.gamma = c.gamma;
  s.gamma_cost = c.gamma_cost;
  s.actor_lr = c.actor_lr;
  s.critic_lr = c.critic_lr;
  s.temp_lr = c.temp_lr;
  s.tau = c.tau;
  s.target_update_every = static_cast<int>(c.target_update_every);
  return s;
}

LogRow base_row(const TrainConfig& c, std::int64_t step, const Agent& agent) {
  LogRow row;
  row.step = step;
  row.algo = std::string(to_string(c.algo));
  row.env = std::string(to_string(c.env));
  row.seed = c.seed;
  row.alpha = agent.temperature.alpha();
  if (c.algo == AlgoKind::SacLag) {
    row.beta = agent.lag.beta;
  }
  if (c.algo == AlgoKind::CsacLb) {
    row.mu = agent.barrier.mu;
  }
  return row;
}

bool metrics_finite(const UpdateMetrics& m) {
  return std::isfinite(m.actor_loss) && std::isfinite(m.critic_loss_r) &&
         (!m.critic_loss_c || std::isfinite(*m.critic_loss_c)) && std::isfinite(m.alpha);
}

}  // namespace

RunLog train(const TrainConfig& config, const ProgressFn& progress) {
  validate(config);

  RunLog run;
  run.config = config;

  auto env = make_env(config.env, static_cast<int>(config.horizon));
  env->set_action_normalized(config.normalize_action);
  auto eval_env = env->clone();

  std::mt19937_64 init_rng = make_stream(config.seed, "init");
  std::mt19937_64 env_rng = make_stream(config.seed, "env-init");
  std::mt19937_64 act_rng = make_stream(config.seed, "policy-noise");
  UpdateRngs update_rngs{make_stream(config.seed, "buffer-sampling"),
                         make_stream(config.seed, "update-noise")};

  run.agent = make_agent(agent_spec(config, *env), init_rng);
  run.normalizers.obs = ObsNormalizer(env->obs_dim());
  const UpdateSettings settings = update_settings(config);
  ReplayBuffer buffer(static_cast<std::size_t>(
      std::min<std::int64_t>(config.buffer_capacity, std::max<std::int64_t>(config.total_steps, 1))));

  const BatchTransform transform = [&](Batch& b) {
    normalize_pipeline(b, run.normalizers, config);
  };

  const int k = env->action_dim();
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  Vector obs = env->reset(env_rng);
  double ep_return = 0.0;
  double ep_cost = 0.0;
  LossAccumulator losses;

  for (std::int64_t t = 1; t <= config.total_steps; ++t) {
    if (config.normalize_obs) {
      run.normalizers.obs.update(obs);
    }
    Vector action(k);
    if (t <= config.random_steps) {
      for (int i = 0; i < k; ++i) {
        action(i) = uniform(act_rng);
      }
    } else {
      Vector noise(k);
      for (int i = 0; i < k; ++i) {
        noise(i) = normal(act_rng);
      }
      const Vector policy_obs = config.normalize_obs ? run.normalizers.obs.normalize(obs) : obs;
      action = policy_sample(run.agent.policy, policy_obs, noise).first;
    }

    StepResult s = env->step(action);
    double reward = s.reward;
    bool done = s.done;
    if (config.algo == AlgoKind::SacRs) {
      const ShapedStep shaped = rs_shape(reward, s.cost, done, run.agent.rs);
      reward = shaped.reward;
      done = shaped.done;
    }
    buffer.push(Transition{obs, action, reward, s.cost, s.obs, done});
    ep_return += reward;
    ep_cost += s.cost;
    run.env_steps = t;

    if (done) {
      run.normalizers.episode_return.update(ep_return);
      run.normalizers.episode_cost.update(ep_cost);
      ep_return = 0.0;
      ep_cost = 0.0;
      obs = env->reset(env_rng);
    } else {
      obs = std::move(s.obs);
    }

    if (t > config.random_steps && (t - config.random_steps) % config.update_every == 0) {
      const UpdateMetrics m = agent_update_step(run.agent, buffer, settings, update_rngs, transform);
      ++run.update_calls;
      if (m.updated) {
        ++run.gradient_updates;
        if (!metrics_finite(m)) {
          LogRow row = base_row(config, t, run.agent);
          row.eval_return_mean = 0.0;
          row.actor_loss = std::isfinite(m.actor_loss) ? std::optional<double>(m.actor_loss)
                                                       : std::nullopt;
          run.rows.push_back(row);
          run.aborted = true;
          run.diagnostic = "non-finite loss at step " + std::to_string(t) +
                           " (actor " + format_double(m.actor_loss) + ", critic_r " +
                           format_double(m.critic_loss_r) + ")";
          break;
        }
        losses.add(m);
      }
    }

    if (config.eval_interval > 0 && t % config.eval_interval == 0) {
      std::mt19937_64 eval_rng = make_stream(config.seed, "eval");
      const EvalResult ev =
          evaluate(run.agent, config.normalize_obs ? &run.normalizers.obs : nullptr, *eval_env,
                   static_cast<int>(config.eval_episodes), eval_rng);
      LogRow row = base_row(config, t, run.agent);
      row.eval_return_mean = ev.return_mean;
      row.eval_return_std = ev.return_std;
      row.eval_cost_mean = ev.cost_mean;
      row.eval_cost_std = ev.cost_std;
      if (losses.n > 0) {
        const double n = static_cast<double>(losses.n);
        row.actor_loss = losses.actor / n;
        row.critic_loss_r = losses.critic_r / n;
        if (run.agent.uses_cost_critic()) {
          row.critic_loss_c = losses.critic_c / n;
        }
      }
      losses = LossAccumulator{};
      run.rows.push_back(row);
      if (progress && !progress(row)) {
        break;
      }
    }
  }
  return run;
}

// ---------------------------------------------------------------------------
// checkpoints and trajectories

nlohmann::json checkpoint_to_json(const RunLog& run) {
  nlohmann::json doc = agent_to_json(run.agent, run.env_steps);
  const auto& on = run.normalizers.obs;
  doc["env"] = std::string(to_string(run.config.env));
  doc["obs_norm"] = {
      {"count", on.count},
      {"mean", std::vector<double>(on.mean.data(), on.mean.data() + on.mean.size())},
      {"m2", std::vector<double>(on.m2.data(), on.m2.data() + on.m2.size())},
  };
  return doc;
}

LoadedCheckpoint checkpoint_from_json(const nlohmann::json& doc) {
  LoadedCheckpoint out;
  out.agent = agent_from_json(doc);
  if (doc.contains("env")) {
    out.env = parse_env_kind(doc.at("env").get<std::string>());
  }
  if (doc.contains("obs_norm")) {
    const auto& on = doc.at("obs_norm");
    const auto mean = on.at("mean").get<std::vector<double>>();
    const auto m2 = on.at("m2").get<std::vector<double>>();
    if (mean.size() != m2.size()) {
      throw std::invalid_argument("checkpoint: obs_norm mean/m2 size mismatch");
    }
    out.obs_norm.count = on.at("count").get<std::int64_t>();
    out.obs_norm.mean = Eigen::Map<const Vector>(mean.data(), static_cast<Eigen::Index>(mean.size()));
    out.obs_norm.m2 = Eigen::Map<const Vector>(m2.data(), static_cast<Eigen::Index>(m2.size()));
  }
  return out;
}

std::vector<TrajectoryRow> rollout(const ActionFn& act, Env& env, std::mt19937_64& rng) {
  std::vector<TrajectoryRow> rows;
  Vector obs = env.reset(rng);
  for (int t = 0;; ++t) {
    TrajectoryRow row;
    row.step = t;
    row.obs = obs;
    row.action = act(obs);
    StepResult s = env.step(row.action);
    row.reward = s.reward;
    row.cost = s.cost;
    row.done = s.done;
    rows.push_back(row);
    if (s.done) {
      break;
    }
    obs = std::move(s.obs);
  }
  return rows;
}

void write_trajectory(std::ostream& out, const std::vector<TrajectoryRow>& rows) {
  out << "step";
  if (!rows.empty()) {
    for (Eigen::Index i = 0; i < rows.front().obs.size(); ++i) out << ",obs_" << i;
    for (Eigen::Index i = 0; i < rows.front().action.size(); ++i) out << ",action_" << i;
  }
  out << ",reward,cost,done\n";
  for (const auto& r : rows) {
    out << r.step;
    for (Eigen::Index i = 0; i < r.obs.size(); ++i) out << ',' << format_double(r.obs(i));
    for (Eigen::Index i = 0; i < r.action.size(); ++i) out << ',' << format_double(r.action(i));
    out << ',' << format_double(r.reward) << ',' << format_double(r.cost) << ','
        << (r.done ? 1 : 0) << '\n';
  }
}

}  // namespace csaclb
