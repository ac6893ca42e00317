#include "csaclb/algos.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace csaclb {

std::string_view to_string(AlgoKind kind) {
  switch (kind) {
    case AlgoKind::CsacLb:
      return "csac_lb";
    case AlgoKind::SacLag:
      return "sac_lag";
    case AlgoKind::SacRs:
      return "sac_rs";
  }
  return "unknown";
}

AlgoKind parse_algo_kind(std::string_view name) {
  std::string s(name);
  std::replace(s.begin(), s.end(), '-', '_');
  for (AlgoKind k : {AlgoKind::CsacLb, AlgoKind::SacLag, AlgoKind::SacRs}) {
    if (to_string(k) == s) {
      return k;
    }
  }
  throw std::invalid_argument("unknown algo '" + std::string(name) +
                              "' (expected csac-lb, sac-lag or sac-rs)");
}

Agent make_agent(const AgentSpec& spec, std::mt19937_64& init_rng) {
  if (spec.algo == AlgoKind::CsacLb && !(spec.barrier.mu > 1.0)) {
    throw std::invalid_argument("CSAC-LB requires mu > 1");
  }
  if (!(spec.init_temperature > 0.0)) {
    throw std::invalid_argument("init_temperature must be positive");
  }
  Agent a;
  a.algo = spec.algo;
  a.policy = GaussianPolicy::make(spec.obs_dim, spec.action_dim, spec.hidden, init_rng);
  a.q_reward = DoubleQ::make(spec.obs_dim, spec.action_dim, spec.hidden, init_rng);
  a.q_cost = DoubleQ::make(spec.obs_dim, spec.action_dim, spec.hidden, init_rng);
  a.q_reward_target = a.q_reward;
  a.q_cost_target = a.q_cost;
  a.temperature.log_alpha = std::log(spec.init_temperature);
  a.temperature.target_entropy = -static_cast<double>(spec.action_dim);
  a.barrier = spec.barrier;
  a.lag = spec.lag;
  a.rs = spec.rs;
  a.policy_opt = AdamState(a.policy.trunk.num_params());
  return a;
}

double csaclb_objective(double log_prob, double alpha, double q_reward, double q_cost,
                        const BarrierConfig& cfg) {
  return alpha * log_prob - q_reward + shifted_barrier(q_cost, cfg);
}

double saclag_objective(double log_prob, double alpha, double q_reward, double q_cost,
                        double beta) {
  return alpha * log_prob - q_reward + beta * q_cost;
}

namespace {

// Both critics forwarded at [obs; actions]; the per-sample min or max of the
// pair is selected and can be differentiated w.r.t. the actions.
class SelectedQ {
 public:
  SelectedQ(const DoubleQ& critics, const Matrix& obs, const Matrix& actions, bool take_max)
      : critics_(critics), action_rows_(actions.rows()) {
    const Matrix x = concat_obs_action(obs, actions);
    t1_ = critics.q1.forward_tape(x);
    t2_ = critics.q2.forward_tape(x);
    const auto q1 = t1_.output().row(0).array();
    const auto q2 = t2_.output().row(0).array();
    pick_first_ = take_max ? (q1 >= q2).eval() : (q1 <= q2).eval();
    value_ = pick_first_.select(q1, q2).matrix().transpose();
  }

  const Vector& value() const { return value_; }

  /// sum_i weights(i) * d value(i) / d actions(:, i), as a (k x B) matrix.
  Matrix action_grad(const Eigen::RowVectorXd& weights) const {
    const Matrix up1 = pick_first_.select(weights.array(), 0.0).matrix();
    const Matrix up2 = pick_first_.select(0.0, weights.array()).matrix();
    return critics_.q1.backward(t1_, up1, false).input.bottomRows(action_rows_) +
           critics_.q2.backward(t2_, up2, false).input.bottomRows(action_rows_);
  }

 private:
  const DoubleQ& critics_;
  Eigen::Index action_rows_;
  ForwardTape t1_;
  ForwardTape t2_;
  Eigen::Array<bool, 1, Eigen::Dynamic> pick_first_;
  Vector value_;
};

}  // namespace

ActorLoss actor_loss(const Matrix& obs, const GaussianPolicy& policy, const DoubleQ& q_reward,
                     const DoubleQ* q_cost, double alpha, const ActorPenalty& penalty,
                     const Matrix& noise) {
  const Eigen::Index n = obs.cols();
  const double inv_n = 1.0 / static_cast<double>(n);
  const PolicySample sample = sample_actions(policy, obs, noise);

  // -min Q_r contributes -1/n per sample.
  const SelectedQ qr(q_reward, obs, sample.actions, false);
  Vector per_sample = alpha * sample.log_prob - qr.value();
  Matrix d_actions = qr.action_grad(Eigen::RowVectorXd::Constant(n, -inv_n));

  ActorLoss out;
  if (penalty.kind != ActorPenalty::Kind::None) {
    if (q_cost == nullptr) {
      throw std::invalid_argument("actor_loss: penalty requested without a cost critic");
    }
    const SelectedQ qc(*q_cost, obs, sample.actions, true);
    Eigen::RowVectorXd slope(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double c = qc.value()(i);
      if (penalty.kind == ActorPenalty::Kind::Linear) {
        per_sample(i) += penalty.beta * c;
        slope(i) = penalty.beta * inv_n;
      } else {
        per_sample(i) += shifted_barrier(c, penalty.barrier);
        slope(i) = shifted_barrier_grad(c, penalty.barrier) * inv_n;
      }
    }
    d_actions += qc.action_grad(slope);
    out.cost_values = qc.value();
  }

  out.loss = per_sample.mean();
  out.policy_grads =
      policy_backward(policy, sample, d_actions, Vector::Constant(n, alpha * inv_n));
  out.log_probs = sample.log_prob;
  return out;
}

ActorLoss csaclb_actor_loss(const Matrix& obs, const GaussianPolicy& policy,
                            const DoubleQ& q_reward, const DoubleQ& q_cost, double alpha,
                            const BarrierConfig& cfg, const Matrix& noise) {
  if (!(cfg.mu > 1.0)) {
    throw std::invalid_argument("csaclb_actor_loss requires mu > 1");
  }
  return actor_loss(obs, policy, q_reward, &q_cost, alpha, ActorPenalty::log_barrier(cfg), noise);
}

ActorLoss saclag_actor_loss(const Matrix& obs, const GaussianPolicy& policy,
                            const DoubleQ& q_reward, const DoubleQ& q_cost, double alpha,
                            double beta, const Matrix& noise) {
  if (beta < 0.0) {
    throw std::invalid_argument("saclag_actor_loss requires beta >= 0");
  }
  return actor_loss(obs, policy, q_reward, &q_cost, alpha, ActorPenalty::linear(beta), noise);
}

ActorLoss sac_actor_loss(const Matrix& obs, const GaussianPolicy& policy,
                         const DoubleQ& q_reward, double alpha, const Matrix& noise) {
  return actor_loss(obs, policy, q_reward, nullptr, alpha, ActorPenalty::none(), noise);
}

SacLagState saclag_beta_update(const SacLagState& state, double mean_qc, double cost_limit) {
  SacLagState next = state;
  // dJ/dbeta = d - mean_qc; descend and project onto beta >= 0.
  next.beta = std::max(0.0, state.beta - state.beta_lr * (cost_limit - mean_qc));
  return next;
}

ShapedStep rs_shape(double reward, double cost, bool done, const RsConfig& rs) {
  if (cost > 0.0) {
    return {reward + rs.penalty, true};
  }
  return {reward, done};
}

UpdateMetrics agent_update_on_batch(Agent& agent, const Batch& batch,
                                    const UpdateSettings& settings, std::mt19937_64& noise_rng) {
  UpdateMetrics m;
  const int k = agent.policy.action_dim;
  const Eigen::Index n = batch.size();
  const double alpha = agent.temperature.alpha();

  // (1) reward critics, (2) cost critics; both bootstrap from one next-action
  // sample.
  const PolicySample next =
      sample_actions(agent.policy, batch.next_obs, standard_normal(k, n, noise_rng));
  const Vector y_r = reward_critic_target(batch, agent.q_reward_target, next, settings.gamma, alpha);
  m.critic_loss_r = critic_regression_step(agent.q_reward, agent.reward_opt, batch.obs,
                                           batch.actions, y_r, settings.critic_lr);
  if (agent.uses_cost_critic()) {
    const Vector y_c =
        cost_critic_target(batch, agent.q_cost_target, next.actions, settings.gamma_cost);
    m.critic_loss_c = critic_regression_step(agent.q_cost, agent.cost_opt, batch.obs,
                                             batch.actions, y_c, settings.critic_lr);
  }

  // (3) actor
  const Matrix noise = standard_normal(k, n, noise_rng);
  ActorLoss actor;
  switch (agent.algo) {
    case AlgoKind::CsacLb:
      actor = csaclb_actor_loss(batch.obs, agent.policy, agent.q_reward, agent.q_cost, alpha,
                                agent.barrier, noise);
      m.mu = agent.barrier.mu;
      break;
    case AlgoKind::SacLag:
      actor = saclag_actor_loss(batch.obs, agent.policy, agent.q_reward, agent.q_cost, alpha,
                                agent.lag.beta, noise);
      break;
    case AlgoKind::SacRs:
      actor = sac_actor_loss(batch.obs, agent.policy, agent.q_reward, alpha, noise);
      break;
  }
  adam_step(agent.policy_opt, agent.policy.trunk.params(), actor.policy_grads, settings.actor_lr);
  m.actor_loss = actor.loss;

  // (4) temperature
  temperature_update(agent.temperature, actor.log_probs, settings.temp_lr);

  // (5) multiplier, from the cost values of the freshly sampled actions
  if (agent.algo == AlgoKind::SacLag) {
    agent.lag = saclag_beta_update(agent.lag, actor.cost_values.mean(), agent.barrier.cost_limit);
    m.beta = agent.lag.beta;
  }

  // (6) targets
  agent.critic_updates += 1;
  if (settings.target_update_every > 0 && agent.critic_updates % settings.target_update_every == 0) {
    polyak_update(agent.q_reward_target.q1, agent.q_reward.q1, settings.tau);
    polyak_update(agent.q_reward_target.q2, agent.q_reward.q2, settings.tau);
    if (agent.uses_cost_critic()) {
      polyak_update(agent.q_cost_target.q1, agent.q_cost.q1, settings.tau);
      polyak_update(agent.q_cost_target.q2, agent.q_cost.q2, settings.tau);
    }
  }

  m.alpha = agent.temperature.alpha();
  m.updated = true;
  return m;
}

UpdateMetrics agent_update_step(Agent& agent, const ReplayBuffer& buffer,
                                const UpdateSettings& settings, UpdateRngs& rngs,
                                const BatchTransform& transform) {
  if (buffer.size() < std::max(settings.batch_size, settings.random_steps)) {
    UpdateMetrics m;
    m.alpha = agent.temperature.alpha();
    if (agent.algo == AlgoKind::SacLag) {
      m.beta = agent.lag.beta;
    }
    if (agent.algo == AlgoKind::CsacLb) {
      m.mu = agent.barrier.mu;
    }
    return m;
  }
  Batch batch = buffer.sample(settings.batch_size, rngs.sampling);
  if (transform) {
    transform(batch);
  }
  return agent_update_on_batch(agent, batch, settings, rngs.policy_noise);
}

nlohmann::json agent_to_json(const Agent& agent, std::int64_t step) {
  nlohmann::json nets = {
      {"policy", to_json(agent.policy.trunk)},
      {"q_reward_1", to_json(agent.q_reward.q1)},
      {"q_reward_2", to_json(agent.q_reward.q2)},
      {"q_reward_1_target", to_json(agent.q_reward_target.q1)},
      {"q_reward_2_target", to_json(agent.q_reward_target.q2)},
      {"q_cost_1", to_json(agent.q_cost.q1)},
      {"q_cost_2", to_json(agent.q_cost.q2)},
      {"q_cost_1_target", to_json(agent.q_cost_target.q1)},
      {"q_cost_2_target", to_json(agent.q_cost_target.q2)},
  };
  nlohmann::json scalars = {
      {"log_alpha", agent.temperature.log_alpha},
      {"beta", agent.lag.beta},
      {"mu", agent.barrier.mu},
      {"d", agent.barrier.cost_limit},
      {"step", step},
  };
  return {{"algo", std::string(to_string(agent.algo))},
          {"action_dim", agent.policy.action_dim},
          {"networks", nets},
          {"scalars", scalars}};
}

Agent agent_from_json(const nlohmann::json& doc) {
  Agent a;
  a.algo = parse_algo_kind(doc.at("algo").get<std::string>());
  const auto& nets = doc.at("networks");
  a.policy.trunk = dense_net_from_json(nets.at("policy"));
  a.policy.action_dim = doc.at("action_dim").get<int>();
  if (a.policy.trunk.output_size() != 2 * a.policy.action_dim) {
    throw std::invalid_argument("checkpoint: policy output does not match action_dim");
  }
  a.q_reward.q1 = dense_net_from_json(nets.at("q_reward_1"));
  a.q_reward.q2 = dense_net_from_json(nets.at("q_reward_2"));
  a.q_reward_target.q1 = dense_net_from_json(nets.at("q_reward_1_target"));
  a.q_reward_target.q2 = dense_net_from_json(nets.at("q_reward_2_target"));
  a.q_cost.q1 = dense_net_from_json(nets.at("q_cost_1"));
  a.q_cost.q2 = dense_net_from_json(nets.at("q_cost_2"));
  a.q_cost_target.q1 = dense_net_from_json(nets.at("q_cost_1_target"));
  a.q_cost_target.q2 = dense_net_from_json(nets.at("q_cost_2_target"));
  const auto& s = doc.at("scalars");
  a.temperature.log_alpha = s.at("log_alpha").get<double>();
  a.temperature.target_entropy = -static_cast<double>(a.policy.action_dim);
  a.lag.beta = s.at("beta").get<double>();
  a.barrier.mu = s.at("mu").get<double>();
  a.barrier.cost_limit = s.at("d").get<double>();
  a.policy_opt = AdamState(a.policy.trunk.num_params());
  return a;
}

}  // namespace csaclb
