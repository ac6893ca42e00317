#include "csaclb/sac.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace csaclb {

namespace {

std::vector<int> with_ends(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> sizes;
  sizes.reserve(hidden.size() + 2);
  sizes.push_back(in);
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(out);
  return sizes;
}

void require_discount(double gamma, const char* what) {
  if (!(gamma >= 0.0 && gamma < 1.0)) {
    throw std::invalid_argument(std::string(what) + " must lie in [0, 1)");
  }
}

const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

// tanh rounds to exactly +-1 once |u| exceeds ~19; keep actions strictly inside.
const double kActionBound = std::nextafter(1.0, 0.0);

Eigen::ArrayXXd squash(const Eigen::ArrayXXd& u) {
  return u.tanh().cwiseMax(-kActionBound).cwiseMin(kActionBound);
}

}  // namespace

GaussianPolicy GaussianPolicy::make(int obs_dim, int action_dim, const std::vector<int>& hidden,
                                    std::mt19937_64& rng) {
  GaussianPolicy p;
  p.trunk = DenseNet::uniform_init(with_ends(obs_dim, hidden, 2 * action_dim), rng);
  p.action_dim = action_dim;
  return p;
}

PolicySample sample_actions(const GaussianPolicy& policy, const Matrix& obs, const Matrix& noise) {
  const int k = policy.action_dim;
  if (noise.rows() != k || noise.cols() != obs.cols()) {
    throw std::invalid_argument("sample_actions: noise must be action_dim x batch");
  }
  PolicySample s;
  s.tape = policy.trunk.forward_tape(obs);
  const Matrix& out = s.tape.output();
  s.mean = out.topRows(k);
  const Matrix raw_log_std = out.bottomRows(k);
  s.log_std = raw_log_std.cwiseMax(GaussianPolicy::kLogStdMin).cwiseMin(GaussianPolicy::kLogStdMax);
  s.log_std_clamped = (raw_log_std.array() < GaussianPolicy::kLogStdMin) ||
                      (raw_log_std.array() > GaussianPolicy::kLogStdMax);
  s.noise = noise;
  const Matrix pre_tanh = s.mean.array() + s.log_std.array().exp() * noise.array();
  s.actions = squash(pre_tanh.array());
  const Eigen::ArrayXXd gauss = -0.5 * noise.array().square() - s.log_std.array() - kHalfLog2Pi;
  const Eigen::ArrayXXd squash = (1.0 - s.actions.array().square() + kSquashEpsilon).log();
  s.log_prob = (gauss - squash).colwise().sum().transpose();
  return s;
}

Vector policy_backward(const GaussianPolicy& policy, const PolicySample& sample,
                       const Matrix& d_actions, const Vector& d_log_prob) {
  const int k = policy.action_dim;
  const Eigen::Index n = sample.actions.cols();
  if (d_actions.rows() != k || d_actions.cols() != n || d_log_prob.size() != n) {
    throw std::invalid_argument("policy_backward: gradient shapes do not match the sample");
  }
  const Eigen::ArrayXXd a = sample.actions.array();
  const Eigen::ArrayXXd one_minus_a2 = 1.0 - a.square();
  const Eigen::ArrayXXd glp = d_log_prob.transpose().replicate(k, 1).array();

  // logp contains -sum ln(1 - a^2 + eps); its a-derivative is 2a / (1 - a^2 + eps).
  const Eigen::ArrayXXd d_a = d_actions.array() + glp * 2.0 * a / (one_minus_a2 + kSquashEpsilon);
  const Eigen::ArrayXXd d_u = d_a * one_minus_a2;

  Matrix upstream(2 * k, n);
  upstream.topRows(k) = d_u.matrix();
  // u = mean + exp(log_std) noise, and logp has a direct -log_std term.
  const Eigen::ArrayXXd d_log_std = d_u * sample.log_std.array().exp() * sample.noise.array() - glp;
  upstream.bottomRows(k) = sample.log_std_clamped.select(0.0, d_log_std).matrix();
  return policy.trunk.backward(sample.tape, upstream, true).params;
}

std::pair<Vector, double> policy_sample(const GaussianPolicy& policy, const Vector& obs,
                                        const Vector& noise) {
  PolicySample s = sample_actions(policy, obs, noise);
  return {s.actions.col(0), s.log_prob(0)};
}

Vector policy_mean_action(const GaussianPolicy& policy, const Vector& obs) {
  const Vector out = policy.trunk.forward(obs);
  return squash(out.head(policy.action_dim).array()).matrix();
}

DoubleQ DoubleQ::make(int obs_dim, int action_dim, const std::vector<int>& hidden,
                      std::mt19937_64& rng) {
  const auto sizes = with_ends(obs_dim + action_dim, hidden, 1);
  DoubleQ q;
  q.q1 = DenseNet::uniform_init(sizes, rng);
  q.q2 = DenseNet::uniform_init(sizes, rng);
  return q;
}

Matrix concat_obs_action(const Matrix& obs, const Matrix& actions) {
  if (obs.cols() != actions.cols()) {
    throw std::invalid_argument("concat_obs_action: batch sizes differ");
  }
  Matrix x(obs.rows() + actions.rows(), obs.cols());
  x.topRows(obs.rows()) = obs;
  x.bottomRows(actions.rows()) = actions;
  return x;
}

QPair q_values(const DoubleQ& critics, const Matrix& obs, const Matrix& actions) {
  const Matrix x = concat_obs_action(obs, actions);
  return {critics.q1.forward(x).row(0).transpose(), critics.q2.forward(x).row(0).transpose()};
}

double EntropyTemperature::alpha() const { return std::exp(log_alpha); }

void temperature_update(EntropyTemperature& temp, const Vector& log_probs, double lr) {
  const double grad = -(log_probs.mean() + temp.target_entropy);
  Vector param(1);
  param(0) = temp.log_alpha;
  Vector g(1);
  g(0) = grad;
  adam_step(temp.optimizer, param, g, lr);
  temp.log_alpha = param(0);
}

Batch make_batch(const std::vector<Transition>& transitions) {
  if (transitions.empty()) {
    throw std::invalid_argument("make_batch: no transitions");
  }
  const auto n = static_cast<Eigen::Index>(transitions.size());
  const Transition& first = transitions.front();
  Batch b;
  b.obs.resize(first.s.size(), n);
  b.actions.resize(first.a.size(), n);
  b.next_obs.resize(first.s_next.size(), n);
  b.rewards.resize(n);
  b.costs.resize(n);
  b.dones.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Transition& t = transitions[static_cast<std::size_t>(i)];
    b.obs.col(i) = t.s;
    b.actions.col(i) = t.a;
    b.next_obs.col(i) = t.s_next;
    b.rewards(i) = t.r;
    b.costs(i) = t.c;
    b.dones(i) = t.done ? 1.0 : 0.0;
  }
  return b;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) {
    throw std::invalid_argument("ReplayBuffer capacity must be positive");
  }
}

void ReplayBuffer::push(Transition t) {
  if (storage_.size() < capacity_) {
    storage_.push_back(std::move(t));
  } else {
    storage_[next_] = std::move(t);
  }
  next_ = (next_ + 1) % capacity_;
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= storage_.size()) {
    throw std::out_of_range("ReplayBuffer::at");
  }
  const std::size_t oldest = storage_.size() < capacity_ ? 0 : next_;
  return storage_[(oldest + i) % storage_.size()];
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t n, std::mt19937_64& rng) const {
  if (storage_.size() < n || n == 0) {
    throw std::logic_error("ReplayBuffer::sample: " + std::to_string(storage_.size()) +
                           " stored, " + std::to_string(n) + " requested");
  }
  std::uniform_int_distribution<std::size_t> pick(0, storage_.size() - 1);
  std::vector<std::size_t> idx(n);
  for (auto& i : idx) {
    i = pick(rng);
  }
  return idx;
}

Batch ReplayBuffer::sample(std::size_t n, std::mt19937_64& rng) const {
  const auto idx = sample_indices(n, rng);
  std::vector<Transition> picked;
  picked.reserve(n);
  for (auto i : idx) {
    picked.push_back(storage_[i]);
  }
  return make_batch(picked);
}

Vector reward_critic_target(const Batch& batch, const DoubleQ& target, const PolicySample& next,
                            double gamma, double alpha) {
  require_discount(gamma, "gamma");
  const QPair q = q_values(target, batch.next_obs, next.actions);
  const Vector soft = q.min() - alpha * next.log_prob;
  return batch.rewards.array() + (1.0 - batch.dones.array()) * gamma * soft.array();
}

Vector reward_critic_target(const Batch& batch, const DoubleQ& target,
                            const GaussianPolicy& policy, double gamma, double alpha,
                            const Matrix& next_noise) {
  return reward_critic_target(batch, target, sample_actions(policy, batch.next_obs, next_noise),
                              gamma, alpha);
}

Vector cost_critic_target(const Batch& batch, const DoubleQ& target, const Matrix& next_actions,
                          double gamma_c) {
  require_discount(gamma_c, "gamma_cost");
  const QPair q = q_values(target, batch.next_obs, next_actions);
  return batch.costs.array() + (1.0 - batch.dones.array()) * gamma_c * q.max().array();
}

Vector cost_critic_target(const Batch& batch, const DoubleQ& target,
                          const GaussianPolicy& policy, double gamma_c, const Matrix& next_noise) {
  return cost_critic_target(batch, target,
                            sample_actions(policy, batch.next_obs, next_noise).actions, gamma_c);
}

double critic_regression_step(DoubleQ& critics, CriticOptimizers& opt, const Matrix& obs,
                              const Matrix& actions, const Vector& targets, double lr) {
  const Matrix x = concat_obs_action(obs, actions);
  const double n = static_cast<double>(targets.size());
  double total = 0.0;
  auto step = [&](DenseNet& net, AdamState& state) {
    const ForwardTape tape = net.forward_tape(x);
    const Eigen::RowVectorXd err = tape.output().row(0) - targets.transpose();
    total += err.squaredNorm() / n;
    const Matrix upstream = (2.0 / n) * err;
    const NetGradients g = net.backward(tape, upstream, true);
    adam_step(state, net.params(), g.params, lr);
  };
  step(critics.q1, opt.q1);
  step(critics.q2, opt.q2);
  return 0.5 * total;
}

Matrix standard_normal(Eigen::Index k, Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(k, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < k; ++i) {
      m(i, j) = normal(rng);
    }
  }
  return m;
}

}  // namespace csaclb
