#pragma once

/// @file algos.hpp
/// @brief The three agents (barrier-penalized CSAC-LB, SAC-Lagrangian and
/// reward-shaped SAC) and the per-step gradient update they share.

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "csaclb/barrier.hpp"
#include "csaclb/sac.hpp"

namespace csaclb {

enum class AlgoKind { CsacLb, SacLag, SacRs };

/// Canonical names: "csac_lb", "sac_lag", "sac_rs".
std::string_view to_string(AlgoKind kind);
/// Accepts the canonical names and their hyphenated forms ("csac-lb").
AlgoKind parse_algo_kind(std::string_view name);

/// Lagrange multiplier of SAC-Lag, kept non-negative.
struct SacLagState {
  double beta = 0.0;
  double beta_lr = 3e-4;
};

struct RsConfig {
  double penalty = -30.0;
};

/// Everything needed to construct an agent.
struct AgentSpec {
  AlgoKind algo = AlgoKind::CsacLb;
  int obs_dim = 0;
  int action_dim = 0;
  std::vector<int> hidden{256, 256};
  double init_temperature = 1.0;
  BarrierConfig barrier{};
  SacLagState lag{};
  RsConfig rs{};
};

struct Agent {
  AlgoKind algo = AlgoKind::CsacLb;
  GaussianPolicy policy;
  DoubleQ q_reward;
  DoubleQ q_reward_target;
  DoubleQ q_cost;
  DoubleQ q_cost_target;
  EntropyTemperature temperature;
  BarrierConfig barrier;
  SacLagState lag;
  RsConfig rs;

  AdamState policy_opt;
  CriticOptimizers reward_opt;
  CriticOptimizers cost_opt;
  std::int64_t critic_updates = 0;

  bool uses_cost_critic() const { return algo != AlgoKind::SacRs; }
};

/// Fresh agent; targets start as copies of the online critics, the entropy
/// target is -action_dim. Throws std::invalid_argument for CSAC-LB with
/// mu <= 1.
Agent make_agent(const AgentSpec& spec, std::mt19937_64& init_rng);

// --- per-sample objectives -------------------------------------------------

/// alpha logpi - Q_r + psi~*(Q_c).
double csaclb_objective(double log_prob, double alpha, double q_reward, double q_cost,
                        const BarrierConfig& cfg);
/// alpha logpi - Q_r + beta Q_c.
double saclag_objective(double log_prob, double alpha, double q_reward, double q_cost,
                        double beta);

// --- batched actor losses --------------------------------------------------

struct ActorLoss {
  double loss = 0.0;
  Vector policy_grads;  ///< d(loss)/d(policy params)
  Vector log_probs;     ///< per-sample logpi(a|s) of the reparameterized actions
  Vector cost_values;   ///< per-sample max(Q_c1, Q_c2); empty when unused
};

/// Cost-critic penalty applied inside the actor loss.
struct ActorPenalty {
  enum class Kind { None, Linear, Barrier } kind = Kind::None;
  double beta = 0.0;
  BarrierConfig barrier{};

  static ActorPenalty none() { return {}; }
  static ActorPenalty linear(double beta) { return {Kind::Linear, beta, {}}; }
  static ActorPenalty log_barrier(const BarrierConfig& cfg) { return {Kind::Barrier, 0.0, cfg}; }
};

/// Mean over the batch of alpha logpi(a|s) - min Q_r(s, a) + penalty(max Q_c(s, a)),
/// with a = tanh(mean + std * noise) reparameterized from `policy`.
ActorLoss actor_loss(const Matrix& obs, const GaussianPolicy& policy, const DoubleQ& q_reward,
                     const DoubleQ* q_cost, double alpha, const ActorPenalty& penalty,
                     const Matrix& noise);

ActorLoss csaclb_actor_loss(const Matrix& obs, const GaussianPolicy& policy,
                            const DoubleQ& q_reward, const DoubleQ& q_cost, double alpha,
                            const BarrierConfig& cfg, const Matrix& noise);
ActorLoss saclag_actor_loss(const Matrix& obs, const GaussianPolicy& policy,
                            const DoubleQ& q_reward, const DoubleQ& q_cost, double alpha,
                            double beta, const Matrix& noise);
ActorLoss sac_actor_loss(const Matrix& obs, const GaussianPolicy& policy,
                         const DoubleQ& q_reward, double alpha, const Matrix& noise);

/// Projected gradient step on J(beta) = beta (d - mean_qc).
SacLagState saclag_beta_update(const SacLagState& state, double mean_qc, double cost_limit);

struct ShapedStep {
  double reward;
  bool done;
};

/// Reward shaping baseline: a violating step gets `penalty` added and ends the
/// episode.
ShapedStep rs_shape(double reward, double cost, bool done, const RsConfig& rs);

// --- update step -----------------------------------------------------------

struct UpdateSettings {
  std::size_t batch_size = 256;
  std::size_t random_steps = 100;
  double gamma = 0.99;
  double gamma_cost = 0.99;
  double actor_lr = 3e-4;
  double critic_lr = 3e-4;
  double temp_lr = 3e-4;
  double tau = 0.005;
  int target_update_every = 2;
};

struct UpdateMetrics {
  bool updated = false;
  double critic_loss_r = 0.0;
  std::optional<double> critic_loss_c;
  double actor_loss = 0.0;
  double alpha = 0.0;
  std::optional<double> beta;
  std::optional<double> mu;
};

struct UpdateRngs {
  std::mt19937_64 sampling;
  std::mt19937_64 policy_noise;
};

/// Optional hook applied to every sampled batch (normalization).
using BatchTransform = std::function<void(Batch&)>;

/// One gradient step on an already-prepared batch: reward critics, cost
/// critics, actor, temperature, multiplier (SAC-Lag), then polyak targets
/// every target_update_every critic steps.
UpdateMetrics agent_update_on_batch(Agent& agent, const Batch& batch,
                                    const UpdateSettings& settings, std::mt19937_64& noise_rng);

/// Samples a batch and runs agent_update_on_batch. A no-op (updated = false)
/// while the buffer holds fewer than max(batch_size, random_steps) transitions.
UpdateMetrics agent_update_step(Agent& agent, const ReplayBuffer& buffer,
                                const UpdateSettings& settings, UpdateRngs& rngs,
                                const BatchTransform& transform = {});

// --- checkpoints -----------------------------------------------------------

/// Networks in the dense-net JSON format plus {log_alpha, beta, mu, d, step}.
nlohmann::json agent_to_json(const Agent& agent, std::int64_t step);
/// Restores networks and scalars; optimizer moments start fresh.
Agent agent_from_json(const nlohmann::json& doc);

}  // namespace csaclb
