#pragma once

/// @file optbench.hpp
/// @brief Small convex problems for checking the smoothed-barrier optimality
/// gap bound: gradient descent on f + sum psi~*(g_i), a stationarity residual
/// with the barrier slopes as multipliers, and the |1 - mu^2| m / mu bound.

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace csaclb {

struct Constraint {
  std::function<double(const Eigen::VectorXd&)> g;  ///< satisfied iff g <= 0
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> grad;
};

struct ConvexProblem {
  std::string name;
  int dim = 1;
  std::function<double(const Eigen::VectorXd&)> f;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> grad_f;
  std::vector<Constraint> constraints;
  double p_star = 0.0;
  std::optional<Eigen::VectorXd> minimizer;

  int m() const { return static_cast<int>(constraints.size()); }
};

/// f = x^2, g = 1 - x; p* = 1 at x = 1.
ConvexProblem problem_p1();
/// f = (x - 2)^2, g = x - 3; p* = 0 at x = 2 (constraint inactive).
ConvexProblem problem_p2();
/// f = |x|^2 in 2-D, g_i = 1 - x_i; p* = 2 at (1, 1).
ConvexProblem problem_p3();
std::vector<ConvexProblem> bundled_problems();
/// "p1", "p2" or "p3"; throws std::invalid_argument otherwise.
ConvexProblem problem_by_name(const std::string& name);

struct SolveOptions {
  double lr = 1e-2;
  long iters = 100000;
  double grad_tol = 1e-8;
};

struct SolveResult {
  Eigen::VectorXd x;
  long iterations = 0;
  double grad_norm = 0.0;
  bool converged = false;
};

/// Gradient of F(x) = f(x) + sum_i psi~*(g_i(x); mu, d = 0).
Eigen::VectorXd penalized_gradient(const ConvexProblem& p, const Eigen::VectorXd& x, double mu);

/// Plain gradient descent on F from x0 (zeros when omitted). mu = 1 is
/// accepted: psi~* then degenerates to a slope-1 ReLU. Throws
/// std::invalid_argument for mu < 1 or lr <= 0 and std::runtime_error on a
/// non-finite iterate.
SolveResult solve_smoothed_barrier(const ConvexProblem& p, double mu, const SolveOptions& opts = {},
                                   std::optional<Eigen::VectorXd> x0 = std::nullopt);

/// |grad f(x) + sum_i psi~*'(g_i(x)) grad g_i(x)|_2.
double kkt_residual(const ConvexProblem& p, const Eigen::VectorXd& x, double mu);

struct BoundCheck {
  double gap = 0.0;    ///< f(x) - p*
  double bound = 0.0;  ///< |1 - mu^2| m / mu
  bool ok = false;     ///< gap <= bound + 1e-6
  std::vector<bool> feasible;
};

BoundCheck verify_bound(const ConvexProblem& p, const Eigen::VectorXd& x, double mu);

struct BenchRow {
  std::string problem;
  double mu = 0.0;
  int m = 0;
  Eigen::VectorXd x_tilde;
  double f_value = 0.0;
  double p_star = 0.0;
  double gap = 0.0;
  double bound = 0.0;
  double kkt_residual = 0.0;
  bool ok = false;
};

std::vector<BenchRow> run_bench(const std::vector<ConvexProblem>& problems,
                                const std::vector<double>& mus, const SolveOptions& opts = {});

/// problem, mu, m, x_tilde_0..x_tilde_{D-1}, f_value, p_star, gap, bound,
/// kkt_residual, ok. D is the largest dimension present; shorter rows leave
/// the extra cells empty.
void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows);

}  // namespace csaclb
