#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "csaclb/harness.hpp"
#include "csaclb/sac.hpp"
#include "golden_io.hpp"
#include "oracles.hpp"

using namespace csaclb;

namespace {

/// k = 1 policy whose trunk ignores the observation: mean and log_std come
/// from the output bias.
GaussianPolicy constant_policy(double mean, double log_std, int obs_dim = 2) {
  GaussianPolicy p;
  p.action_dim = 1;
  p.trunk = DenseNet({obs_dim, 4, 2});
  p.trunk.bias(1) << mean, log_std;
  return p;
}

/// Critic that outputs `value` for every input.
DenseNet constant_net(int in, double value) {
  DenseNet n({in, 1});
  n.bias(0)(0) = value;
  return n;
}

DoubleQ constant_pair(int in, double v1, double v2) {
  return {constant_net(in, v1), constant_net(in, v2)};
}

Batch one_step_batch(double r, double c, bool done, int obs_dim = 2) {
  Transition t{Vector::Zero(obs_dim), Vector::Zero(1), r, c, Vector::Ones(obs_dim), done};
  return make_batch({t});
}

}  // namespace

TEST_CASE("zero mean and zero noise give action 0 with no squash correction") {
  const double ls = -0.7;
  const auto p = constant_policy(0.0, ls);
  const auto [a, logp] = policy_sample(p, Vector::Zero(2), Vector::Zero(1));
  CHECK(a(0) == 0.0);
  const double gauss = -ls - 0.5 * std::log(2.0 * std::numbers::pi);
  CHECK(logp == doctest::Approx(gauss - std::log(1.0 + kSquashEpsilon)).epsilon(1e-14));
}

TEST_CASE("tiny log_std collapses samples onto tanh(mean)") {
  const auto p = constant_policy(0.4, -35.0);
  const auto s = sample_actions(p, Matrix::Zero(2, 3), Matrix::Constant(1, 3, 2.5));
  CHECK(s.log_std(0, 0) == GaussianPolicy::kLogStdMin);
  CHECK(s.log_std_clamped(0, 0));
  for (int j = 0; j < 3; ++j) CHECK(s.actions(0, j) == doctest::Approx(std::tanh(0.4)).epsilon(1e-7));
  CHECK(policy_mean_action(p, Vector::Zero(2))(0) == doctest::Approx(std::tanh(0.4)));
}

TEST_CASE("squashed density integrates to one") {
  for (auto [mean, ls] : {std::pair{0.3, std::log(0.5)}, std::pair{-0.8, std::log(0.3)},
                          std::pair{0.0, 0.0}}) {
    const auto p = constant_policy(mean, ls);
    const double sigma = std::exp(ls);
    auto density = [&](double a) {
      const double u = std::atanh(a);
      const auto [act, logp] = policy_sample(p, Vector::Zero(2), Vector::Constant(1, (u - mean) / sigma));
      return std::exp(logp);
    };
    // Substitute a = tanh(u) so the integrand stays smooth near the edges.
    auto in_u = [&](double u) {
      const double a = std::tanh(u);
      return density(a) * (1.0 - a * a);
    };
    const double mass = oracle::simpson(in_u, mean - 12.0 * sigma, mean + 12.0 * sigma, 40000);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-4));
  }
}

TEST_CASE("actions stay strictly inside the unit box") {
  std::mt19937_64 rng(4);
  for (double mean : {-500.0, -30.0, -3.0, 0.0, 3.0, 30.0, 500.0}) {
    const auto p = constant_policy(mean, 2.0);
    const auto s = sample_actions(p, Matrix::Zero(2, 64), standard_normal(1, 64, rng) * 10.0);
    CHECK(s.actions.cwiseAbs().maxCoeff() < 1.0);
    CHECK(s.log_prob.allFinite());
    CHECK(std::abs(policy_mean_action(p, Vector::Zero(2))(0)) < 1.0);
  }
  // log_std is clamped at the upper bound as well.
  const auto wide = constant_policy(0.0, 9.0);
  const auto s = sample_actions(wide, Matrix::Zero(2, 1), Matrix::Ones(1, 1));
  CHECK(s.log_std(0, 0) == GaussianPolicy::kLogStdMax);
}

TEST_CASE("zero trunk gives the zero evaluation action") {
  GaussianPolicy p;
  p.action_dim = 2;
  p.trunk = DenseNet({3, 5, 4});
  CHECK(policy_mean_action(p, Vector::Ones(3)).isZero());
}

TEST_CASE("policy sampling is the noise-to-zero limit of evaluation") {
  std::mt19937_64 rng(8);
  const auto p = GaussianPolicy::make(3, 2, {16, 16}, rng);
  const Vector obs = Vector::LinSpaced(3, -1.0, 1.0);
  const auto [a, logp] = policy_sample(p, obs, Vector::Zero(2));
  CHECK((a - policy_mean_action(p, obs)).norm() < 1e-15);
}

TEST_CASE("policy gradient through the sample matches finite differences") {
  std::mt19937_64 rng(31);
  auto p = GaussianPolicy::make(3, 2, {8, 8}, rng);
  // Spread log_std so both the clamped-free path and the squash are exercised.
  const Matrix obs = standard_normal(3, 6, rng);
  const Matrix noise = standard_normal(2, 6, rng);
  const Matrix wa = standard_normal(2, 6, rng);
  const Vector wl = standard_normal(6, 1, rng).col(0);
  auto loss = [&](const GaussianPolicy& pol) {
    const auto s = sample_actions(pol, obs, noise);
    return (wa.array() * s.actions.array()).sum() + wl.dot(s.log_prob);
  };
  const auto s = sample_actions(p, obs, noise);
  const Vector g = policy_backward(p, s, wa, wl);
  GaussianPolicy probe = p;
  const Vector fd = oracle::central_grad(
      [&](const Vector& v) {
        probe.trunk.params() = v;
        return loss(probe);
      },
      p.trunk.params(), 1e-6);
  CHECK(oracle::max_rel_err(g, fd, 1e-5) < 1e-4);
}

TEST_CASE("golden evaluation action") {
  std::mt19937_64 rng(1234);
  const auto p = GaussianPolicy::make(3, 1, {8, 8}, rng);
  Vector obs(3);
  obs << 0.25, -0.5, 1.5;
  const std::string actual = format_double(policy_mean_action(p, obs)(0)) + "\n";
  CHECK(golden::expect("policy_action.txt", actual) == actual);
}

TEST_CASE("reward critic target") {
  const DoubleQ q = constant_pair(3, 1.0, 2.0);
  const auto p = constant_policy(0.0, -1.0);
  const Matrix noise = Matrix::Zero(1, 1);

  CHECK(reward_critic_target(one_step_batch(1.0, 0.0, false), q, p, 0.99, 0.0, noise)(0) ==
        doctest::Approx(1.99));
  CHECK(reward_critic_target(one_step_batch(1.0, 0.0, true), q, p, 0.99, 0.7, noise)(0) == 1.0);
  CHECK(reward_critic_target(one_step_batch(1.0, 0.0, false), q, p, 0.0, 0.7, noise)(0) == 1.0);

  // Entropy term enters with -alpha logpi(a'|s').
  const auto next = sample_actions(p, Matrix::Ones(2, 1), noise);
  const double expected = 1.0 + 0.99 * (1.0 - 0.5 * next.log_prob(0));
  CHECK(reward_critic_target(one_step_batch(1.0, 0.0, false), q, next, 0.99, 0.5)(0) ==
        doctest::Approx(expected).epsilon(1e-14));
  CHECK_THROWS_AS(reward_critic_target(one_step_batch(1, 0, false), q, p, 1.0, 0.0, noise),
                  std::invalid_argument);
}

TEST_CASE("cost critic target") {
  const DoubleQ q = constant_pair(3, 1.0, 2.0);
  const auto p = constant_policy(0.0, -1.0);
  const Matrix noise = Matrix::Zero(1, 1);
  CHECK(cost_critic_target(one_step_batch(0.0, 0.0, false), q, p, 0.99, noise)(0) ==
        doctest::Approx(1.98));
  CHECK(cost_critic_target(one_step_batch(0.0, 1.0, false), q, p, 0.0, noise)(0) == 1.0);
  CHECK(cost_critic_target(one_step_batch(0.0, 1.0, true), q, p, 0.99, noise)(0) == 1.0);
  CHECK_THROWS_AS(cost_critic_target(one_step_batch(0, 0, false), q, p, -0.1, noise),
                  std::invalid_argument);
}

TEST_CASE("critic targets do not depend on batch order") {
  std::mt19937_64 rng(12);
  const auto q = DoubleQ::make(2, 1, {8}, rng);
  const auto p = GaussianPolicy::make(2, 1, {8}, rng);
  std::vector<Transition> ts;
  for (int i = 0; i < 5; ++i) {
    ts.push_back({standard_normal(2, 1, rng).col(0), Vector::Constant(1, 0.1 * i), 0.3 * i,
                  i % 2 == 0 ? 1.0 : 0.0, standard_normal(2, 1, rng).col(0), i == 3});
  }
  const Matrix noise = standard_normal(1, 5, rng);
  const Batch b = make_batch(ts);
  std::vector<Transition> rev(ts.rbegin(), ts.rend());
  const Batch br = make_batch(rev);
  const Matrix noise_r = noise.rowwise().reverse();
  const Vector y = reward_critic_target(b, q, p, 0.99, 0.2, noise);
  const Vector yr = reward_critic_target(br, q, p, 0.99, 0.2, noise_r);
  const Vector c = cost_critic_target(b, q, p, 0.99, noise);
  const Vector cr = cost_critic_target(br, q, p, 0.99, noise_r);
  for (int i = 0; i < 5; ++i) {
    CHECK(y(i) == yr(4 - i));
    CHECK(c(i) == cr(4 - i));
  }
}

TEST_CASE("min and max aggregation bound each critic") {
  std::mt19937_64 rng(6);
  const auto q = DoubleQ::make(3, 2, {8}, rng);
  const auto v = q_values(q, standard_normal(3, 50, rng), standard_normal(2, 50, rng));
  CHECK((v.min().array() <= v.q1.array()).all());
  CHECK((v.min().array() <= v.q2.array()).all());
  CHECK((v.max().array() >= v.q1.array()).all());
  CHECK((v.max().array() >= v.q2.array()).all());
  CHECK(q.q1.layer_sizes() == q.q2.layer_sizes());
  CHECK(!(q.q1 == q.q2));
}

TEST_CASE("temperature update") {
  EntropyTemperature t;
  t.target_entropy = -1.0;
  temperature_update(t, Vector::Constant(4, 1.0), 3e-4);
  CHECK(t.log_alpha == 0.0);

  // Entropy too low (logp high) -> alpha grows.
  EntropyTemperature up;
  up.target_entropy = -1.0;
  temperature_update(up, Vector::Constant(4, 2.0), 3e-4);
  CHECK(up.alpha() > 1.0);
  // First Adam step has magnitude lr, matching the plain-gradient value here.
  CHECK(up.log_alpha == doctest::Approx(3e-4).epsilon(1e-6));

  // Further steps follow the Adam recurrence.
  double m = 0, v = 0, x = 0;
  EntropyTemperature rec;
  rec.target_entropy = -1.0;
  const double lps[] = {2.0, 0.5, -3.0, 1.5};
  for (int t_i = 1; t_i <= 4; ++t_i) {
    const double g = -(lps[t_i - 1] + rec.target_entropy);
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    x -= 0.01 * (m / (1 - std::pow(0.9, t_i))) / (std::sqrt(v / (1 - std::pow(0.999, t_i))) + 1e-8);
    temperature_update(rec, Vector::Constant(3, lps[t_i - 1]), 0.01);
    CHECK(rec.log_alpha == doctest::Approx(x).epsilon(1e-13));
  }

  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0.0, 50.0);
  EntropyTemperature wild;
  for (int i = 0; i < 2000; ++i) {
    temperature_update(wild, Vector::Constant(2, n(rng)), 0.05);
    CHECK(wild.alpha() > 0.0);
  }
}

TEST_CASE("replay buffer ring semantics") {
  ReplayBuffer buf(3);
  for (int i = 0; i < 4; ++i) {
    replay_push(buf, {Vector::Constant(1, i), Vector::Zero(1), double(i), 0.0, Vector::Zero(1), false});
  }
  CHECK(buf.size() == 3);
  CHECK(buf.at(0).r == 1.0);
  CHECK(buf.at(2).r == 3.0);
  CHECK_THROWS_AS(ReplayBuffer(0), std::invalid_argument);
  std::mt19937_64 rng(1);
  CHECK_THROWS_AS(replay_sample(buf, 4, rng), std::logic_error);
}

TEST_CASE("seeded sampling is reproducible") {
  ReplayBuffer buf(20);
  for (int i = 0; i < 20; ++i) {
    buf.push({Vector::Constant(1, i), Vector::Zero(1), double(i), 0.0, Vector::Zero(1), false});
  }
  std::mt19937_64 a(5), b(5);
  CHECK(replay_sample(buf, 8, a).rewards == replay_sample(buf, 8, b).rewards);
}

TEST_CASE("sampled indices are uniform") {
  ReplayBuffer buf(10);
  for (int i = 0; i < 13; ++i) {
    buf.push({Vector::Zero(1), Vector::Zero(1), double(i), 0.0, Vector::Zero(1), false});
  }
  std::mt19937_64 rng(99);
  const int n = 100000;
  std::vector<int> hist(10, 0);
  for (int k = 0; k < n / 10; ++k) {
    for (auto i : buf.sample_indices(10, rng)) hist[i] += 1;
  }
  const double expect = n / 10.0;
  const double sigma = std::sqrt(n * 0.1 * 0.9);
  double chi2 = 0.0;
  for (int h : hist) {
    CHECK(std::abs(h - expect) < 3.0 * sigma);
    chi2 += (h - expect) * (h - expect) / expect;
  }
  // 9 degrees of freedom; the 0.999 quantile is 27.9.
  CHECK(chi2 < 27.9);
}
