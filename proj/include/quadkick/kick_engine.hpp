#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include "quadkick/constants.hpp"
#include "quadkick/errors.hpp"
#include "quadkick/quadrature_state.hpp"
#include "quadkick/thermal_channel.hpp"

namespace quadkick {

/**
 * Dimensional inputs of the membrane-in-the-middle setup (SI units, rates in
 * s^-1). Defaults reproduce the reference parameter set: g = 1e-4 s^-1,
 * omega_m = 1e6 s^-1, 1e11 pulse photons, kappa = 1e7 s^-1, gamma = 0.1 s^-1,
 * T = 0.1 mK, a 1 ng membrane of reflectivity 0.4 in a 6.7 cm cavity at 532 nm.
 */
struct PhysicalParams {
  double g = 1e-4;         // quadratic coupling rate
  double omega_m = 1e6;    // mechanical angular frequency
  double n_p = 1e11;       // mean intracavity photon number during a kick
  double kappa = 1e7;      // cavity amplitude decay rate
  double gamma = 0.1;      // mechanical energy damping rate
  double T = 1e-4;         // bath temperature, K
  double mass = 1e-12;     // kg
  double L = 0.067;        // cavity length, m
  double lambda = 532e-9;  // optical wavelength, m
  double R = 0.4;          // membrane reflectivity

  /// Overrides thermal_occupancy(T, omega_m) for the initial state and the bath.
  std::optional<double> n_bar;

  /// Throws ParameterError naming the first offending field.
  void validate() const {
    const auto require = [](bool ok, double value, const char* field, const char* rule) {
      if (!ok || !std::isfinite(value)) throw ParameterError(field, std::string("must satisfy ") + rule);
    };
    require(g >= 0.0, g, "g", "g >= 0");
    require(omega_m > 0.0, omega_m, "omega_m", "omega_m > 0");
    require(n_p >= 0.0, n_p, "n_p", "n_p >= 0");
    require(kappa > 0.0, kappa, "kappa", "kappa > 0");
    require(gamma >= 0.0, gamma, "gamma", "gamma >= 0");
    require(T >= 0.0, T, "T", "T >= 0");
    require(mass > 0.0, mass, "mass", "mass > 0");
    require(L > 0.0, L, "L", "L > 0");
    require(lambda > 0.0, lambda, "lambda", "lambda > 0");
    require(R >= 0.0 && R < 1.0, R, "R", "0 <= R < 1");
    if (n_bar) require(*n_bar >= 0.0, *n_bar, "n_bar", "n_bar >= 0");
  }

  /// Thermal occupancy of the oscillator and its bath.
  double occupancy() const { return n_bar ? *n_bar : thermal_occupancy(T, omega_m); }
};

inline constexpr std::array<std::string_view, 11> kParameterNames{
    "g", "omega_m", "n_p", "kappa", "gamma", "T", "mass", "L", "lambda", "R", "n_bar"};

/// Assigns a field by name; returns false for an unknown name.
inline bool set_parameter(PhysicalParams& params, std::string_view name, double value) {
  if (name == "g") params.g = value;
  else if (name == "omega_m") params.omega_m = value;
  else if (name == "n_p") params.n_p = value;
  else if (name == "kappa") params.kappa = value;
  else if (name == "gamma") params.gamma = value;
  else if (name == "T") params.T = value;
  else if (name == "mass") params.mass = value;
  else if (name == "L") params.L = value;
  else if (name == "lambda") params.lambda = value;
  else if (name == "R") params.R = value;
  else if (name == "n_bar") params.n_bar = value;
  else return false;
  return true;
}

// ---------------------------------------------------------------------------
// Pulse schedules

/// Pump interaction of fixed duration; n_p defaults to PhysicalParams::n_p.
struct Kick {
  double duration;
  std::optional<double> n_p;
};

/// Coherent free rotation at omega_m.
struct Free {
  double duration;
};

/// Thermal relaxation toward the bath occupancy.
struct Dissipate {
  double duration;
};

using Segment = std::variant<Kick, Free, Dissipate>;

inline std::string_view segment_kind(const Segment& s) {
  return std::visit(
      [](const auto& seg) -> std::string_view {
        using S = std::decay_t<decltype(seg)>;
        if constexpr (std::is_same_v<S, Kick>) return "kick";
        else if constexpr (std::is_same_v<S, Free>) return "free";
        else return "diss";
      },
      s);
}

inline double segment_duration(const Segment& s) {
  return std::visit([](const auto& seg) { return seg.duration; }, s);
}

struct PulseSchedule {
  std::vector<Segment> segments;
  std::string label;
};

// ---------------------------------------------------------------------------
// Maps

/// Stiffened spring constant during a kick: 2 g n_p + omega_m.
inline double effective_stiffness(double g, double n_p, double omega_m) { return 2.0 * g * n_p + omega_m; }

/// Quadratic coupling rate 2 hbar w^2 / (m omega_m L c) sqrt(R / (1 - R)), w = 2 pi c / lambda.
inline double coupling_from_physical(const PhysicalParams& params) {
  if (!(params.R >= 0.0 && params.R < 1.0)) throw ParameterError("R", "must satisfy 0 <= R < 1");
  if (!(params.mass > 0.0)) throw ParameterError("mass", "must satisfy mass > 0");
  if (!(params.L > 0.0)) throw ParameterError("L", "must satisfy L > 0");
  if (!(params.lambda > 0.0)) throw ParameterError("lambda", "must satisfy lambda > 0");
  if (!(params.omega_m > 0.0)) throw ParameterError("omega_m", "must satisfy omega_m > 0");
  const double omega = 2.0 * std::numbers::pi * kSpeedOfLight / params.lambda;
  return 2.0 * kHbar * omega * omega / (params.mass * params.omega_m * params.L * kSpeedOfLight) *
         std::sqrt(params.R / (1.0 - params.R));
}

/// Evolution under the stiffened Hamiltonian for time t; theta = sqrt(g_eff omega_m) t.
inline SymplecticMap kick_matrix(double g_eff, double omega_m, double t) {
  if (!(omega_m > 0.0) || !(g_eff >= omega_m)) {
    throw std::domain_error("kick_matrix: requires g_eff >= omega_m > 0");
  }
  if (!(t >= 0.0)) throw std::domain_error("kick_matrix: t must be non-negative");
  const double theta = std::sqrt(g_eff * omega_m) * t;
  const double stretch = std::sqrt(g_eff / omega_m);
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  return {c, -stretch * s, s / stretch, c};
}

inline SymplecticMap free_matrix(double omega_m, double tau) {
  if (!(tau >= 0.0)) throw std::domain_error("free_matrix: tau must be non-negative");
  return SymplecticMap::rotation(omega_m * tau);
}

/// Kick length with theta = pi/2, where the map becomes antidiagonal.
inline double optimal_kick_duration(double g_eff, double omega_m) {
  if (!(g_eff > 0.0) || !(omega_m > 0.0)) throw std::domain_error("optimal_kick_duration: rates must be positive");
  return std::numbers::pi / (2.0 * std::sqrt(g_eff * omega_m));
}

inline double quarter_period(double omega_m) { return std::numbers::pi / (2.0 * omega_m); }

// ---------------------------------------------------------------------------
// Schedule evaluation

/// State after `segment` (nullopt marks the input state).
struct ScheduleStep {
  std::optional<std::size_t> segment;
  GaussianState state;
};

inline GaussianState apply_segment(const GaussianState& state, const Segment& segment, const PhysicalParams& params) {
  return std::visit(
      [&](const auto& seg) -> GaussianState {
        using S = std::decay_t<decltype(seg)>;
        if constexpr (std::is_same_v<S, Kick>) {
          const double photons = seg.n_p.value_or(params.n_p);
          const double g_eff = effective_stiffness(params.g, photons, params.omega_m);
          return propagate(state, kick_matrix(g_eff, params.omega_m, seg.duration));
        } else if constexpr (std::is_same_v<S, Free>) {
          return propagate(state, free_matrix(params.omega_m, seg.duration));
        } else {
          return dissipate(state, params.gamma, seg.duration, params.occupancy());
        }
      },
      segment);
}

/**
 * Folds `state` through every segment in order. The result holds the input
 * state followed by the state after each segment. Any invariant failure is
 * rethrown as ScheduleError carrying the segment index.
 */
inline std::vector<ScheduleStep> apply_schedule(const GaussianState& state, const PulseSchedule& schedule,
                                                const PhysicalParams& params) {
  std::vector<ScheduleStep> steps;
  steps.reserve(schedule.segments.size() + 1);
  steps.push_back({std::nullopt, state});
  for (std::size_t i = 0; i < schedule.segments.size(); ++i) {
    try {
      steps.push_back({i, apply_segment(steps.back().state, schedule.segments[i], params)});
    } catch (const InvariantError& e) {
      throw ScheduleError(i, e.what());
    } catch (const std::domain_error& e) {
      throw ScheduleError(i, e.what());
    }
  }
  return steps;
}

struct VariancePair {
  double var_p;
  double var_x;
};

/**
 * Closed form for two optimal kicks separated by free evolution tau, acting
 * on a thermal state of occupancy n_bar:
 *   var_p = (cos^2 + (g_eff/w)^2 sin^2) (n_bar + 1/2)
 *   var_x = (cos^2 + (w/g_eff)^2 sin^2) (n_bar + 1/2),  angle w tau.
 */
inline VariancePair two_pulse_variance(double tau, double g_eff, double omega_m, double n_bar) {
  if (!(omega_m > 0.0) || !(g_eff > 0.0)) throw std::domain_error("two_pulse_variance: rates must be positive");
  const double c = std::cos(omega_m * tau);
  const double s = std::sin(omega_m * tau);
  const double ratio = g_eff / omega_m;
  const double v = n_bar + kVacuumVariance;
  return {(c * c + ratio * ratio * s * s) * v, (c * c + s * s / (ratio * ratio)) * v};
}

}  // namespace quadkick
