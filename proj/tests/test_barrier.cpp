#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "csaclb/barrier.hpp"
#include "oracles.hpp"

using namespace csaclb;

namespace {
const double kMus[] = {1.1, 1.5, 2.0, 3.0, 10.0};
}

TEST_CASE("log barrier values and domain") {
  CHECK(log_barrier(-1.0, 2.0) == doctest::Approx(0.0));
  CHECK(log_barrier(-0.25, 2.0) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK_THROWS_AS(log_barrier(0.1, 2.0), std::domain_error);
  CHECK_THROWS_AS(log_barrier(0.0, 2.0), std::domain_error);
  CHECK_THROWS_AS(log_barrier(-1.0, 0.0), std::domain_error);
}

TEST_CASE("smoothed log barrier branches") {
  CHECK(smoothed_log_barrier(-1.0, 2.0) == doctest::Approx(0.0));
  CHECK(smoothed_log_barrier(-0.25, 2.0) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(smoothed_log_barrier(0.0, 2.0) == doctest::Approx(std::log(2.0) + 0.5).epsilon(1e-12));

  // Linear branch evaluated directly at the knot equals the log branch there.
  const double mu = 2.0;
  const double knot = smoothed_knot(mu);
  const double linear_at_knot = mu * knot - std::log(1.0 / (mu * mu)) / mu + 1.0 / mu;
  CHECK(linear_at_knot == doctest::Approx(smoothed_log_barrier(knot, mu)).epsilon(1e-12));

  CHECK(smoothed_log_barrier_grad(-1.0, 2.0) == doctest::Approx(0.5));
  CHECK(smoothed_log_barrier_grad(-0.25, 2.0) == doctest::Approx(2.0));
  CHECK(smoothed_log_barrier_grad(5.0, 2.0) == doctest::Approx(2.0));
}

TEST_CASE("knot continuity of value and slope") {
  for (double mu : kMus) {
    const double k = smoothed_knot(mu);
    const double left = -std::log(-k) / mu;
    const double right = mu * k - std::log(1.0 / (mu * mu)) / mu + 1.0 / mu;
    CHECK(std::abs(left - right) < 1e-9);
    CHECK(std::abs(-1.0 / (mu * k) - mu) < 1e-9);
    const double eps = 1e-10;
    CHECK(std::abs(smoothed_log_barrier(k - eps, mu) - smoothed_log_barrier(k + eps, mu)) < 1e-8);
  }
}

TEST_CASE("smoothed barrier gradient matches finite differences") {
  std::mt19937_64 rng(11);
  for (double mu : kMus) {
    std::uniform_real_distribution<double> xs(-5.0, 3.0);
    int checked = 0;
    while (checked < 100) {
      const double x = xs(rng);
      if (std::abs(x - smoothed_knot(mu)) < 1e-6) continue;
      const double fd =
          oracle::central_diff([mu](double v) { return smoothed_log_barrier(v, mu); }, x, 1e-6);
      const double an = smoothed_log_barrier_grad(x, mu);
      CHECK(std::abs(fd - an) / std::max(std::abs(an), 1e-8) < 1e-5);
      ++checked;
    }
  }
}

TEST_CASE("dominance: smoothed equals the plain barrier left of the knot") {
  for (double mu : kMus) {
    for (double x = smoothed_knot(mu) - 1e-3; x > -10.0; x *= 1.37) {
      CHECK(smoothed_log_barrier(x, mu) == log_barrier(x, mu));
    }
  }
}

TEST_CASE("shifted barrier values") {
  const BarrierConfig c2{2.0, 0.0};
  CHECK(shifted_barrier(-3.0, c2) == 0.0);
  CHECK(shifted_barrier(0.5, c2) == doctest::Approx(0.346574).epsilon(1e-6));
  CHECK(shifted_barrier(1.5, BarrierConfig{2.0, 1.0}) == shifted_barrier(0.5, c2));
  CHECK(shifted_barrier(2.0, c2) == doctest::Approx(2.0 + std::log(2.0) + 0.5).epsilon(1e-12));
  CHECK_THROWS_AS(shifted_barrier(0.0, BarrierConfig{1.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(shifted_barrier_grad(0.0, BarrierConfig{0.5, 0.0}), std::invalid_argument);
}

TEST_CASE("shifted barrier gradient cases") {
  const BarrierConfig c2{2.0, 0.0};
  CHECK(shifted_barrier_grad(-1.0, c2) == 0.0);
  CHECK(shifted_barrier_grad(0.0, c2) == 0.0);
  const double fd =
      oracle::central_diff([&](double x) { return shifted_barrier(x, c2); }, 0.5, 1e-6);
  CHECK(shifted_barrier_grad(0.5, c2) == doctest::Approx(fd).epsilon(1e-8));
  CHECK(shifted_barrier_grad(0.5, c2) == doctest::Approx(1.0));
  CHECK(shifted_barrier_grad(0.9, c2) == doctest::Approx(2.0));
}

TEST_CASE("shifted barrier gradient matches finite differences away from the corners") {
  std::mt19937_64 rng(5);
  for (double mu : kMus) {
    for (double d : {0.0, 0.7, -1.3}) {
      const BarrierConfig cfg{mu, d};
      const double knot = d + 1.0 - 1.0 / (mu * mu);
      std::uniform_real_distribution<double> xs(d - 2.0, d + 3.0);
      int checked = 0;
      while (checked < 100) {
        const double x = xs(rng);
        if (std::abs(x - knot) < 1e-6 || std::abs(x - d) < 1e-6) continue;
        const double fd =
            oracle::central_diff([&](double v) { return shifted_barrier(v, cfg); }, x, 1e-6);
        const double an = shifted_barrier_grad(x, cfg);
        if (an == 0.0) {
          CHECK(std::abs(fd) < 1e-12);
        } else {
          CHECK(std::abs(fd - an) / std::abs(an) < 1e-5);
        }
        ++checked;
      }
    }
  }
}

TEST_CASE("dead zone is exact on a dense grid") {
  for (double mu : kMus) {
    for (double d : {0.0, 2.5, -4.0}) {
      const BarrierConfig cfg{mu, d};
      for (int i = 0; i < 1000; ++i) {
        const double x = d - 50.0 + 50.0 * i / 999.0;
        CHECK(shifted_barrier(x, cfg) == 0.0);
        CHECK(shifted_barrier_grad(x, cfg) == 0.0);
      }
    }
  }
}

TEST_CASE("monotone and slope capped at mu") {
  for (double mu : kMus) {
    const BarrierConfig cfg{mu, 0.0};
    double prev_s = -1.0;
    double prev_t = -1e300;
    for (double x = -3.0; x < 4.0; x += 0.01) {
      const double s = smoothed_log_barrier(x, mu);
      const double t = shifted_barrier(x, cfg);
      CHECK(s >= prev_s - 1e-15 * std::abs(prev_s));
      CHECK(t >= prev_t);
      CHECK(shifted_barrier_grad(x, cfg) <= mu + 1e-12);
      CHECK(shifted_barrier_grad(x, cfg) >= 0.0);
      prev_s = s;
      prev_t = t;
    }
  }
}

TEST_CASE("performance bound") {
  CHECK(performance_bound(1.0, 5) == 0.0);
  CHECK(performance_bound(2.0, 1) == doctest::Approx(1.5));
  CHECK(performance_bound(3.0, 2) == doctest::Approx(16.0 / 3.0));
  for (double mu : {0.3, 1.0, 1.5, 2.0, 7.0}) {
    for (int m = 1; m <= 6; ++m) {
      CHECK(performance_bound(mu, m) == doctest::Approx(m * performance_bound(mu, 1)));
    }
  }
  CHECK_THROWS_AS(performance_bound(0.0, 1), std::domain_error);
  CHECK_THROWS_AS(performance_bound(-1.0, 1), std::domain_error);
  CHECK_THROWS_AS(performance_bound(2.0, 0), std::domain_error);
}

TEST_CASE("mu equal to one degenerates to a unit-slope rectifier") {
  for (double x : {-2.0, 0.0, 0.3, 1.0, 4.0}) {
    CHECK(detail::shifted_barrier_unchecked(x, 1.0, 0.0) ==
          doctest::Approx(std::max(x, 0.0)).epsilon(1e-12));
    CHECK(detail::shifted_barrier_grad_unchecked(x, 1.0, 0.0) == (x > 0.0 ? 1.0 : 0.0));
  }
}
