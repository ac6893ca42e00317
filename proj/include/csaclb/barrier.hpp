#pragma once

/// @file barrier.hpp
/// @brief Log barrier, linear smoothed log barrier and the rectified, shifted
/// barrier used as the constraint penalty on the safety critic.

namespace csaclb {

/// Sharpness of the barrier and the limit it guards.
struct BarrierConfig {
  double mu = 3.0;          ///< log barrier factor
  double cost_limit = 0.0;  ///< d, in the units of the penalized quantity
};

/// psi(x) = -(1/mu) ln(-x). Throws std::domain_error unless x < 0 and mu > 0.
double log_barrier(double x, double mu);

/// Linear smoothed log barrier. Follows the log barrier up to the knot
/// x = -1/mu^2 and continues linearly with slope mu past it, so it is finite
/// and C^1 on the whole real line.
double smoothed_log_barrier(double x, double mu);

/// d/dx of smoothed_log_barrier.
double smoothed_log_barrier_grad(double x, double mu);

/// Abscissa where smoothed_log_barrier switches from the log to the linear
/// branch.
inline double smoothed_knot(double mu) { return -1.0 / (mu * mu); }

/// psi~*(x) = psi~(max(x - d, 0) - 1). Identically zero on x <= d.
/// Throws std::invalid_argument when cfg.mu <= 1.
double shifted_barrier(double x, const BarrierConfig& cfg);

/// Analytic derivative of shifted_barrier. With z = x - d:
///   0                  for z <= 0 (the corner z = 0 included)
///   1 / (mu (1 - z))   for 0 < z <= 1 - 1/mu^2
///   mu                 otherwise
double shifted_barrier_grad(double x, const BarrierConfig& cfg);

/// Upper bound on f(x~) - p* for the barrier-penalized optimum with m
/// constraints: |1 - mu^2| m / mu.
double performance_bound(double mu, int m);

namespace detail {

// Unvalidated variants that also accept mu == 1, where the log branch of the
// shifted barrier is empty and the penalty degenerates to relu(x - d).
double shifted_barrier_unchecked(double x, double mu, double cost_limit);
double shifted_barrier_grad_unchecked(double x, double mu, double cost_limit);

}  // namespace detail

}  // namespace csaclb
