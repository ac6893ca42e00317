// csaclb command line: train, eval, bench-bound.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "csaclb/harness.hpp"
#include "csaclb/optbench.hpp"

namespace fs = std::filesystem;
using namespace csaclb;

namespace {

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  return nlohmann::json::parse(in);
}

struct TrainArgs {
  std::string algo;
  std::string env;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> steps;
  std::optional<double> mu;
  std::optional<double> cost_limit;
  std::vector<int> hidden;
  std::string config;
  std::string out;
  bool quiet = false;
};

int run_train(const TrainArgs& a) {
  TrainConfig c = a.config.empty() ? TrainConfig{} : parse_config_file(a.config);
  if (!a.algo.empty()) c.algo = parse_algo_kind(a.algo);
  if (!a.env.empty()) c.env = parse_env_kind(a.env);
  if (a.seed) c.seed = *a.seed;
  if (a.steps) c.total_steps = *a.steps;
  if (a.mu) c.mu = *a.mu;
  if (a.cost_limit) c.cost_limit = *a.cost_limit;
  if (!a.hidden.empty()) c.hidden_sizes = a.hidden;
  validate(c);

  const fs::path out(a.out);
  fs::create_directories(out);
  write_file(out / "config.json", config_to_json(c).dump(2) + "\n");

  const RunLog run = train(c, [&](const LogRow& r) {
    if (!a.quiet) {
      std::cerr << "step " << r.step << " return " << r.eval_return_mean << " cost " << r.eval_cost_mean
                << "\n";
    }
    return true;
  });
  write_file(out / "log.csv", log_to_csv(run.rows));
  write_file(out / "checkpoint.json", checkpoint_to_json(run).dump() + "\n");
  if (run.aborted) throw std::runtime_error(run.diagnostic);
  return 0;
}

struct EvalArgs {
  std::string checkpoint;
  std::string env;
  int episodes = 10;
  std::uint64_t seed = 0;
  int horizon = 0;
  std::string trajectory;
};

int run_eval(const EvalArgs& a) {
  const LoadedCheckpoint ck = checkpoint_from_json(read_json(a.checkpoint));
  std::optional<EnvKind> kind = ck.env;
  if (!a.env.empty()) kind = parse_env_kind(a.env);
  if (!kind) throw std::invalid_argument("--env is required: checkpoint names no environment");
  auto env = make_env(*kind, a.horizon);
  if (env->obs_dim() != ck.agent.policy.obs_dim() || env->action_dim() != ck.agent.policy.action_dim) {
    throw std::invalid_argument("checkpoint does not match environment " + std::string(to_string(*kind)));
  }
  std::mt19937_64 rng = make_stream(a.seed, "eval");
  const EvalResult r = evaluate(ck.agent, &ck.obs_norm, *env, a.episodes, rng);
  std::cout << "return_mean " << format_double(r.return_mean) << "\n"
            << "return_std " << format_double(r.return_std) << "\n"
            << "cost_mean " << format_double(r.cost_mean) << "\n"
            << "cost_std " << format_double(r.cost_std) << "\n";
  if (!a.trajectory.empty()) {
    std::mt19937_64 traj_rng = make_stream(a.seed, "eval");
    const auto rows = rollout(
        [&](const Vector& obs) { return policy_mean_action(ck.agent.policy, ck.obs_norm.normalize(obs)); }, *env,
        traj_rng);
    std::ofstream out(a.trajectory);
    if (!out) throw std::runtime_error("cannot write " + a.trajectory);
    write_trajectory(out, rows);
  }
  return 0;
}

struct BenchArgs {
  std::vector<double> mus;
  std::string problem = "all";
  std::string out;
};

int run_bench_cmd(const BenchArgs& a) {
  std::vector<ConvexProblem> problems;
  if (a.problem == "all") {
    problems = bundled_problems();
  } else {
    problems.push_back(problem_by_name(a.problem));
  }
  const std::vector<double> mus = a.mus.empty() ? std::vector<double>{1.0, 1.5, 2.0, 3.0, 5.0} : a.mus;
  const auto rows = run_bench(problems, mus);
  std::ofstream out(a.out);
  if (!out) throw std::runtime_error("cannot write " + a.out);
  write_bench_csv(out, rows);
  bool all_ok = true;
  for (const auto& r : rows) all_ok = all_ok && r.ok;
  if (!all_ok) throw std::runtime_error("bound check failed for at least one (problem, mu) cell");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Constrained SAC with a log barrier: training, evaluation and bound checks"};
  app.require_subcommand(1);

  TrainArgs ta;
  auto* train_cmd = app.add_subcommand("train", "train an agent and write log.csv, config.json, checkpoint.json");
  train_cmd->add_option("--algo", ta.algo, "csac-lb | sac-lag | sac-rs");
  train_cmd->add_option("--env", ta.env, "tilt | upright | move | swing | pointnav");
  train_cmd->add_option("--seed", ta.seed);
  train_cmd->add_option("--steps", ta.steps, "environment steps");
  train_cmd->add_option("--mu", ta.mu, "log barrier factor");
  train_cmd->add_option("--cost-limit", ta.cost_limit);
  train_cmd->add_option("--hidden", ta.hidden, "hidden layer widths, e.g. --hidden 64 64");
  train_cmd->add_option("--config", ta.config, "JSON config; flags override it")->check(CLI::ExistingFile);
  train_cmd->add_option("--out", ta.out)->required();
  train_cmd->add_flag("--quiet", ta.quiet, "no progress on stderr");

  EvalArgs ea;
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint with the deterministic policy");
  eval_cmd->add_option("--checkpoint", ea.checkpoint)->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--env", ea.env);
  eval_cmd->add_option("--episodes", ea.episodes)->check(CLI::PositiveNumber);
  eval_cmd->add_option("--seed", ea.seed);
  eval_cmd->add_option("--horizon", ea.horizon, "override the episode horizon");
  eval_cmd->add_option("--trajectory", ea.trajectory, "write one episode as CSV");

  BenchArgs ba;
  auto* bench_cmd = app.add_subcommand("bench-bound", "check the barrier performance bound on convex problems");
  bench_cmd->add_option("--mu", ba.mus)->check(CLI::Range(1.0, 1e6));
  bench_cmd->add_option("--problem", ba.problem)->check(CLI::IsMember({"p1", "p2", "p3", "all"}));
  bench_cmd->add_option("--out", ba.out)->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (train_cmd->parsed()) return run_train(ta);
    if (eval_cmd->parsed()) return run_eval(ea);
    if (bench_cmd->parsed()) return run_bench_cmd(ba);
  } catch (const std::exception& e) {
    std::cerr << "csaclb: error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
