#include <doctest.h>

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "csaclb/barrier.hpp"
#include "csaclb/optbench.hpp"

using namespace csaclb;

namespace {
const double kMus[] = {1.5, 2.0, 3.0, 5.0};
}

TEST_CASE("bundled problems") {
  const auto ps = bundled_problems();
  REQUIRE(ps.size() == 3);
  for (const auto& p : ps) {
    // p* is attained at the known minimizer, which is feasible.
    CHECK(p.f(*p.minimizer) == doctest::Approx(p.p_star));
    for (const auto& c : p.constraints) CHECK(c.g(*p.minimizer) <= 0.0);
  }
  CHECK(ps[2].m() == 2);
  CHECK(problem_by_name("p2").name == "p2");
  CHECK_THROWS_AS(problem_by_name("p9"), std::invalid_argument);
}

TEST_CASE("inactive constraint recovers the unconstrained optimum") {
  for (double mu : kMus) {
    const auto sol = solve_smoothed_barrier(problem_p2(), mu);
    CHECK(sol.converged);
    CHECK(sol.x(0) == doctest::Approx(2.0).epsilon(1e-8));
    CHECK(std::abs(problem_p2().f(sol.x) - problem_p2().p_star) < 1e-6);
    CHECK(kkt_residual(problem_p2(), sol.x, mu) <= 1e-4);
  }
}

TEST_CASE("active constraint matches the analytic stationary point") {
  CHECK(solve_smoothed_barrier(problem_p1(), 2.0).x(0) == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(solve_smoothed_barrier(problem_p1(), 1.5).x(0) ==
        doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-6));
  for (double mu : kMus) {
    const auto sol = solve_smoothed_barrier(problem_p1(), mu);
    CHECK(std::abs(sol.x(0) - 1.0 / std::sqrt(2.0 * mu)) < 1e-4);
    const auto p3 = solve_smoothed_barrier(problem_p3(), mu);
    CHECK(std::abs(p3.x(0) - 1.0 / std::sqrt(2.0 * mu)) < 1e-4);
    CHECK(std::abs(p3.x(1) - 1.0 / std::sqrt(2.0 * mu)) < 1e-4);
  }
}

TEST_CASE("kkt residual") {
  // Interior point with every multiplier in the dead zone.
  CHECK(kkt_residual(problem_p2(), Eigen::VectorXd::Constant(1, 2.0), 2.0) == 0.0);
  CHECK(kkt_residual(problem_p1(), Eigen::VectorXd::Constant(1, 0.0), 2.0) == doctest::Approx(2.0));
  for (const auto& p : bundled_problems()) {
    for (double mu : kMus) {
      CHECK(kkt_residual(p, solve_smoothed_barrier(p, mu).x, mu) <= 1e-4);
    }
  }
}

TEST_CASE("gap bound") {
  const auto b = verify_bound(problem_p1(), Eigen::VectorXd::Constant(1, 0.5), 2.0);
  CHECK(b.gap == doctest::Approx(-0.75));
  CHECK(b.bound == doctest::Approx(1.5));
  CHECK(b.ok);
  CHECK_FALSE(b.feasible[0]);

  const auto p2 = verify_bound(problem_p2(), Eigen::VectorXd::Constant(1, 2.0), 3.0);
  CHECK(p2.gap == 0.0);
  CHECK(p2.ok);
  CHECK(p2.feasible[0]);

  for (const auto& p : bundled_problems()) {
    for (double mu : kMus) {
      CHECK(verify_bound(p, solve_smoothed_barrier(p, mu).x, mu).ok);
    }
  }
}

TEST_CASE("mu of one follows the slope-saturated path") {
  const auto sol = solve_smoothed_barrier(problem_p1(), 1.0);
  CHECK(sol.x(0) == doctest::Approx(0.5).epsilon(1e-6));
  const auto b = verify_bound(problem_p1(), sol.x, 1.0);
  CHECK(b.bound == 0.0);
  CHECK(b.gap == doctest::Approx(-0.75).epsilon(1e-6));
  CHECK(b.ok);
  CHECK_THROWS_AS(solve_smoothed_barrier(problem_p1(), 0.9), std::invalid_argument);
  SolveOptions bad;
  bad.lr = 0.0;
  CHECK_THROWS_AS(solve_smoothed_barrier(problem_p1(), 2.0, bad), std::invalid_argument);
}

TEST_CASE("gap shrinks and violation grows with mu on the active problem") {
  double prev_gap = 1e300;
  double prev_violation = -1e300;
  for (double mu : kMus) {
    const auto x = solve_smoothed_barrier(problem_p1(), mu).x;
    const double gap = verify_bound(problem_p1(), x, mu).gap;
    const double violation = problem_p1().constraints[0].g(x);
    CHECK(gap <= prev_gap);
    CHECK(violation > prev_violation);
    CHECK(violation == doctest::Approx(1.0 - 1.0 / std::sqrt(2.0 * mu)).epsilon(1e-4));
    prev_gap = gap;
    prev_violation = violation;
  }
}

TEST_CASE("diverging descent is reported") {
  SolveOptions huge;
  huge.lr = 1e155;
  CHECK_THROWS_AS(solve_smoothed_barrier(problem_p1(), 2.0, huge, Eigen::VectorXd::Constant(1, 5.0)),
                  std::runtime_error);
}

TEST_CASE("bench csv") {
  const auto rows = run_bench(bundled_problems(), {2.0});
  std::ostringstream out;
  write_bench_csv(out, rows);
  const std::string csv = out.str();
  CHECK(csv.rfind("problem,mu,m,x_tilde_0,x_tilde_1,f_value,p_star,gap,bound,kkt_residual,ok\n", 0) == 0);
  CHECK(csv.find("\np1,2,1,") != std::string::npos);
  CHECK(csv.find("\np3,2,2,") != std::string::npos);
  for (const auto& r : rows) CHECK(r.ok);
}
