#include "csaclb/barrier.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace csaclb {

namespace {

void require_shifted_mu(double mu) {
  if (!(mu > 1.0)) {
    throw std::invalid_argument("shifted barrier requires mu > 1, got " + std::to_string(mu));
  }
}

}  // namespace

double log_barrier(double x, double mu) {
  if (!(mu > 0.0)) {
    throw std::domain_error("log_barrier: mu must be positive");
  }
  if (!(x < 0.0)) {
    throw std::domain_error("log_barrier: x must be negative");
  }
  return -std::log(-x) / mu;
}

double smoothed_log_barrier(double x, double mu) {
  if (x <= smoothed_knot(mu)) {
    return -std::log(-x) / mu;
  }
  return mu * x - std::log(1.0 / (mu * mu)) / mu + 1.0 / mu;
}

double smoothed_log_barrier_grad(double x, double mu) {
  if (x <= smoothed_knot(mu)) {
    return -1.0 / (mu * x);
  }
  return mu;
}

double shifted_barrier(double x, const BarrierConfig& cfg) {
  require_shifted_mu(cfg.mu);
  return detail::shifted_barrier_unchecked(x, cfg.mu, cfg.cost_limit);
}

double shifted_barrier_grad(double x, const BarrierConfig& cfg) {
  require_shifted_mu(cfg.mu);
  return detail::shifted_barrier_grad_unchecked(x, cfg.mu, cfg.cost_limit);
}

double performance_bound(double mu, int m) {
  if (!(mu > 0.0)) {
    throw std::domain_error("performance_bound: mu must be positive");
  }
  if (m < 1) {
    throw std::domain_error("performance_bound: need at least one constraint");
  }
  return std::abs(1.0 - mu * mu) * static_cast<double>(m) / mu;
}

namespace detail {

double shifted_barrier_unchecked(double x, double mu, double cost_limit) {
  const double z = x - cost_limit;
  if (z <= 0.0) {
    // psi~(-1) = -(1/mu) ln 1 = 0 exactly; skip the log so the dead zone is
    // bit-exact zero.
    return 0.0;
  }
  return smoothed_log_barrier(z - 1.0, mu);
}

double shifted_barrier_grad_unchecked(double x, double mu, double cost_limit) {
  const double z = x - cost_limit;
  if (z <= 0.0) {
    return 0.0;
  }
  if (z <= 1.0 - 1.0 / (mu * mu)) {
    return 1.0 / (mu * (1.0 - z));
  }
  return mu;
}

}  // namespace detail

}  // namespace csaclb
