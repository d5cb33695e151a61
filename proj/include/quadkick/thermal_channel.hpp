#pragma once

#include <cmath>
#include <stdexcept>

#include "quadkick/quadrature_state.hpp"

namespace quadkick {

namespace detail {

inline void check_channel_args(double gamma, double tau, double n_env) {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw std::domain_error("dissipation rate must be non-negative");
  if (!(tau >= 0.0) || !std::isfinite(tau)) throw std::domain_error("dissipation time must be non-negative");
  if (!(n_env >= 0.0) || !std::isfinite(n_env)) throw std::domain_error("bath occupancy must be non-negative");
}

}  // namespace detail

/// Noise added by the bath over tau: (1 - e^{-gamma tau}) (n_env + 1/2).
inline double decoherence_term(double gamma, double tau, double n_env) {
  detail::check_channel_args(gamma, tau, n_env);
  return -std::expm1(-gamma * tau) * (n_env + kVacuumVariance);
}

/**
 * Markovian thermal channel acting for a time tau.
 *
 * The whole covariance relaxes as cov -> e^{-gamma tau} cov +
 * (1 - e^{-gamma tau}) (n_env + 1/2) I, and the mean decays at half the
 * energy rate. thermal_state(n_env) is the fixed point.
 */
inline GaussianState dissipate(const GaussianState& state, double gamma, double tau, double n_env) {
  detail::check_channel_args(gamma, tau, n_env);
  const double keep = std::exp(-gamma * tau);
  const double added = decoherence_term(gamma, tau, n_env);
  const double mean_keep = std::exp(-0.5 * gamma * tau);
  return {{mean_keep * state.mean().p, mean_keep * state.mean().x},
          keep * state.var_p() + added,
          keep * state.var_x() + added,
          keep * state.cross()};
}

}  // namespace quadkick
