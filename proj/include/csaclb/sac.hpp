#pragma once

/// @file sac.hpp
/// @brief Soft actor-critic building blocks shared by every agent: squashed
/// Gaussian policy, double-Q critics, critic targets, entropy temperature and
/// the replay buffer.

#include <cstddef>
#include <random>
#include <utility>
#include <vector>

#include "csaclb/nn.hpp"

namespace csaclb {

/// Stabilizer inside ln(1 - a^2 + eps) of the tanh change of variables.
inline constexpr double kSquashEpsilon = 1e-6;

/// Trunk maps an observation to [mean (k); log_std (k)]. Actions are
/// tanh(mean + exp(log_std) * noise), strictly inside (-1, 1)^k.
struct GaussianPolicy {
  static constexpr double kLogStdMin = -20.0;
  static constexpr double kLogStdMax = 2.0;

  DenseNet trunk;
  int action_dim = 0;

  static GaussianPolicy make(int obs_dim, int action_dim, const std::vector<int>& hidden,
                             std::mt19937_64& rng);
  int obs_dim() const { return trunk.input_size(); }
};

/// Batched reparameterized sample with everything backward needs.
struct PolicySample {
  Matrix actions;   ///< k x B
  Vector log_prob;  ///< B
  Matrix mean;
  Matrix log_std;   ///< after clamping
  Matrix noise;
  ForwardTape tape;
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> log_std_clamped;
};

PolicySample sample_actions(const GaussianPolicy& policy, const Matrix& obs, const Matrix& noise);

/// Parameter gradient of a loss L(a, logp) through the sample. d_actions is
/// dL/da (k x B); d_log_prob is dL/dlogp per sample (B). Both already carry
/// the batch averaging.
Vector policy_backward(const GaussianPolicy& policy, const PolicySample& sample,
                       const Matrix& d_actions, const Vector& d_log_prob);

/// Single-observation sample: (action, log probability).
std::pair<Vector, double> policy_sample(const GaussianPolicy& policy, const Vector& obs,
                                        const Vector& noise);

/// Deterministic evaluation action tanh(mean).
Vector policy_mean_action(const GaussianPolicy& policy, const Vector& obs);

/// Two independently parameterized critics over [obs; action].
struct DoubleQ {
  DenseNet q1;
  DenseNet q2;

  static DoubleQ make(int obs_dim, int action_dim, const std::vector<int>& hidden,
                      std::mt19937_64& rng);
};

Matrix concat_obs_action(const Matrix& obs, const Matrix& actions);

struct QPair {
  Vector q1;
  Vector q2;
  Vector min() const { return q1.cwiseMin(q2); }
  Vector max() const { return q1.cwiseMax(q2); }
};

QPair q_values(const DoubleQ& critics, const Matrix& obs, const Matrix& actions);

/// Learnable alpha = exp(log_alpha); optimized in log space so it stays > 0.
struct EntropyTemperature {
  double log_alpha = 0.0;
  double target_entropy = 0.0;
  AdamState optimizer{1};

  double alpha() const;
};

/// One Adam step on -log_alpha * (mean(logp) + target_entropy).
void temperature_update(EntropyTemperature& temp, const Vector& log_probs, double lr);

struct Transition {
  Vector s;
  Vector a;
  double r = 0.0;
  double c = 0.0;
  Vector s_next;
  bool done = false;
};

/// Column-stacked transitions.
struct Batch {
  Matrix obs;
  Matrix actions;
  Vector rewards;
  Vector costs;
  Matrix next_obs;
  Vector dones;  ///< 1.0 where the transition ended the episode

  Eigen::Index size() const { return rewards.size(); }
};

Batch make_batch(const std::vector<Transition>& transitions);

/// Ring buffer: once full, each push overwrites the oldest entry.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition t);
  /// n uniform draws with replacement. Throws std::logic_error when fewer than
  /// n transitions are stored.
  std::vector<std::size_t> sample_indices(std::size_t n, std::mt19937_64& rng) const;
  Batch sample(std::size_t n, std::mt19937_64& rng) const;

  std::size_t size() const { return storage_.size(); }
  std::size_t capacity() const { return capacity_; }
  /// i-th oldest stored transition.
  const Transition& at(std::size_t i) const;
  const Transition& slot(std::size_t physical) const { return storage_[physical]; }

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;
  std::vector<Transition> storage_;
};

inline void replay_push(ReplayBuffer& buffer, Transition t) { buffer.push(std::move(t)); }
inline Batch replay_sample(const ReplayBuffer& buffer, std::size_t n, std::mt19937_64& rng) {
  return buffer.sample(n, rng);
}

/// r + (1 - done) gamma (min(q1', q2')(s', a') - alpha logpi(a'|s')).
Vector reward_critic_target(const Batch& batch, const DoubleQ& target, const PolicySample& next,
                            double gamma, double alpha);
Vector reward_critic_target(const Batch& batch, const DoubleQ& target,
                            const GaussianPolicy& policy, double gamma, double alpha,
                            const Matrix& next_noise);

/// c + (1 - done) gamma_c max(q1', q2')(s', a'). No entropy term.
Vector cost_critic_target(const Batch& batch, const DoubleQ& target, const Matrix& next_actions,
                          double gamma_c);
Vector cost_critic_target(const Batch& batch, const DoubleQ& target,
                          const GaussianPolicy& policy, double gamma_c, const Matrix& next_noise);

struct CriticOptimizers {
  AdamState q1;
  AdamState q2;
};

/// One Adam step of each critic on the mean squared error to `targets`.
/// Returns the mean of the two losses before the step.
double critic_regression_step(DoubleQ& critics, CriticOptimizers& opt, const Matrix& obs,
                              const Matrix& actions, const Vector& targets, double lr);

/// Standard-normal (k x n) draw.
Matrix standard_normal(Eigen::Index k, Eigen::Index n, std::mt19937_64& rng);

}  // namespace csaclb
