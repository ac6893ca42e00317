#include "csaclb/optbench.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "csaclb/barrier.hpp"
#include "csaclb/harness.hpp"

namespace csaclb {

using Eigen::VectorXd;

ConvexProblem problem_p1() {
  ConvexProblem p;
  p.name = "p1";
  p.dim = 1;
  p.f = [](const VectorXd& x) { return x(0) * x(0); };
  p.grad_f = [](const VectorXd& x) { return VectorXd::Constant(1, 2.0 * x(0)); };
  p.constraints.push_back({[](const VectorXd& x) { return 1.0 - x(0); },
                           [](const VectorXd&) { return VectorXd::Constant(1, -1.0); }});
  p.p_star = 1.0;
  p.minimizer = VectorXd::Constant(1, 1.0);
  return p;
}

ConvexProblem problem_p2() {
  ConvexProblem p;
  p.name = "p2";
  p.dim = 1;
  p.f = [](const VectorXd& x) { return (x(0) - 2.0) * (x(0) - 2.0); };
  p.grad_f = [](const VectorXd& x) { return VectorXd::Constant(1, 2.0 * (x(0) - 2.0)); };
  p.constraints.push_back({[](const VectorXd& x) { return x(0) - 3.0; },
                           [](const VectorXd&) { return VectorXd::Constant(1, 1.0); }});
  p.p_star = 0.0;
  p.minimizer = VectorXd::Constant(1, 2.0);
  return p;
}

ConvexProblem problem_p3() {
  ConvexProblem p;
  p.name = "p3";
  p.dim = 2;
  p.f = [](const VectorXd& x) { return x.squaredNorm(); };
  p.grad_f = [](const VectorXd& x) -> VectorXd { return 2.0 * x; };
  for (int i = 0; i < 2; ++i) {
    p.constraints.push_back({[i](const VectorXd& x) { return 1.0 - x(i); },
                             [i](const VectorXd&) {
                               VectorXd g = VectorXd::Zero(2);
                               g(i) = -1.0;
                               return g;
                             }});
  }
  p.p_star = 2.0;
  p.minimizer = VectorXd::Ones(2);
  return p;
}

std::vector<ConvexProblem> bundled_problems() { return {problem_p1(), problem_p2(), problem_p3()}; }

ConvexProblem problem_by_name(const std::string& name) {
  if (name == "p1") return problem_p1();
  if (name == "p2") return problem_p2();
  if (name == "p3") return problem_p3();
  throw std::invalid_argument("unknown problem '" + name + "' (expected p1, p2 or p3)");
}

VectorXd penalized_gradient(const ConvexProblem& p, const VectorXd& x, double mu) {
  VectorXd grad = p.grad_f(x);
  for (const auto& c : p.constraints) {
    const double lambda = detail::shifted_barrier_grad_unchecked(c.g(x), mu, 0.0);
    if (lambda != 0.0) {
      grad += lambda * c.grad(x);
    }
  }
  return grad;
}

SolveResult solve_smoothed_barrier(const ConvexProblem& p, double mu, const SolveOptions& opts,
                                   std::optional<VectorXd> x0) {
  if (!(mu >= 1.0)) {
    throw std::invalid_argument("solve_smoothed_barrier requires mu >= 1");
  }
  if (!(opts.lr > 0.0)) {
    throw std::invalid_argument("solve_smoothed_barrier requires lr > 0");
  }
  SolveResult res;
  res.x = x0 ? *x0 : VectorXd::Zero(p.dim);
  if (res.x.size() != p.dim) {
    throw std::invalid_argument("solve_smoothed_barrier: x0 has the wrong dimension");
  }
  for (res.iterations = 0; res.iterations < opts.iters; ++res.iterations) {
    const VectorXd g = penalized_gradient(p, res.x, mu);
    res.grad_norm = g.norm();
    if (res.grad_norm < opts.grad_tol) {
      res.converged = true;
      return res;
    }
    res.x -= opts.lr * g;
    if (!res.x.allFinite()) {
      throw std::runtime_error("solve_smoothed_barrier: non-finite iterate on " + p.name +
                               " at iteration " + std::to_string(res.iterations) +
                               " (mu " + format_double(mu) + ")");
    }
  }
  res.grad_norm = penalized_gradient(p, res.x, mu).norm();
  res.converged = res.grad_norm < opts.grad_tol;
  return res;
}

double kkt_residual(const ConvexProblem& p, const VectorXd& x, double mu) {
  return penalized_gradient(p, x, mu).norm();
}

BoundCheck verify_bound(const ConvexProblem& p, const VectorXd& x, double mu) {
  BoundCheck out;
  out.gap = p.f(x) - p.p_star;
  out.bound = performance_bound(mu, p.m());
  out.ok = out.gap <= out.bound + 1e-6;
  for (const auto& c : p.constraints) {
    out.feasible.push_back(c.g(x) <= 0.0);
  }
  return out;
}

std::vector<BenchRow> run_bench(const std::vector<ConvexProblem>& problems,
                                const std::vector<double>& mus, const SolveOptions& opts) {
  std::vector<BenchRow> rows;
  for (const auto& p : problems) {
    for (double mu : mus) {
      const SolveResult sol = solve_smoothed_barrier(p, mu, opts);
      const BoundCheck check = verify_bound(p, sol.x, mu);
      BenchRow row;
      row.problem = p.name;
      row.mu = mu;
      row.m = p.m();
      row.x_tilde = sol.x;
      row.f_value = p.f(sol.x);
      row.p_star = p.p_star;
      row.gap = check.gap;
      row.bound = check.bound;
      row.kkt_residual = kkt_residual(p, sol.x, mu);
      row.ok = check.ok;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
  Eigen::Index dim = 1;
  for (const auto& r : rows) {
    dim = std::max(dim, r.x_tilde.size());
  }
  out << "problem,mu,m";
  for (Eigen::Index i = 0; i < dim; ++i) {
    out << ",x_tilde_" << i;
  }
  out << ",f_value,p_star,gap,bound,kkt_residual,ok\n";
  for (const auto& r : rows) {
    out << r.problem << ',' << format_double(r.mu) << ',' << r.m;
    for (Eigen::Index i = 0; i < dim; ++i) {
      out << ',';
      if (i < r.x_tilde.size()) {
        out << format_double(r.x_tilde(i));
      }
    }
    out << ',' << format_double(r.f_value) << ',' << format_double(r.p_star) << ','
        << format_double(r.gap) << ',' << format_double(r.bound) << ','
        << format_double(r.kkt_residual) << ',' << (r.ok ? "true" : "false") << '\n';
  }
}

}  // namespace csaclb
