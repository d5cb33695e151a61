#pragma once

#include <cmath>
#include <cstddef>
#include <exception>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "quadkick/errors.hpp"
#include "quadkick/kick_engine.hpp"
#include "quadkick/quadrature_state.hpp"
#include "quadkick/thermal_channel.hpp"

namespace quadkick {

/**
 * Canonical stroboscopic protocol: `pulses` optimal kicks separated by a
 * quarter mechanical period of free evolution. With dissipation enabled each
 * free interval is followed by a Dissipate segment of the same length.
 */
inline PulseSchedule canonical_protocol(const PhysicalParams& params, int pulses, bool include_dissipation) {
  if (pulses < 0) throw std::domain_error("canonical_protocol: pulse count must be non-negative");
  const double g_eff = effective_stiffness(params.g, params.n_p, params.omega_m);
  const double t_kick = optimal_kick_duration(g_eff, params.omega_m);
  const double tau = quarter_period(params.omega_m);

  PulseSchedule schedule;
  schedule.label = "canonical-" + std::to_string(pulses);
  for (int k = 0; k < pulses; ++k) {
    if (k > 0) {
      schedule.segments.emplace_back(Free{tau});
      if (include_dissipation) schedule.segments.emplace_back(Dissipate{tau});
    }
    schedule.segments.emplace_back(Kick{t_kick, std::nullopt});
  }
  return schedule;
}

struct PlanResult {
  int pulses = 0;
  PulseSchedule schedule;
  GaussianState final_state = GaussianState::vacuum();
  std::vector<QuadratureVariances> history;  // input state, then one entry per segment
  bool target_met = false;
};

/**
 * Smallest number of canonical pulses that brings var_x strictly below
 * `threshold`, starting from the thermal state of params.occupancy().
 * When the target is never reached, pulses = max_pulses and target_met is false.
 */
inline PlanResult min_pulses(const PhysicalParams& params, double threshold = kVacuumVariance,
                             bool include_dissipation = false, int max_pulses = 64) {
  if (!(threshold > 0.0)) throw std::domain_error("min_pulses: threshold must be positive");
  if (max_pulses < 0) throw std::domain_error("min_pulses: max_pulses must be non-negative");
  params.validate();

  const PulseSchedule full = canonical_protocol(params, max_pulses, include_dissipation);
  PlanResult result;
  result.schedule.label = "min-pulses";
  GaussianState state = thermal_state(params.occupancy());
  result.history.push_back(quadrature_variances(state));

  const auto finish = [&](int pulses, bool met) {
    result.pulses = pulses;
    result.target_met = met;
    result.final_state = state;
    return result;
  };

  if (state.var_x() < threshold) return finish(0, true);
  int kicks = 0;
  for (std::size_t i = 0; i < full.segments.size(); ++i) {
    try {
      state = apply_segment(state, full.segments[i], params);
    } catch (const InvariantError& e) {
      throw ScheduleError(i, e.what());
    }
    result.schedule.segments.push_back(full.segments[i]);
    result.history.push_back(quadrature_variances(state));
    if (std::holds_alternative<Kick>(full.segments[i])) {
      ++kicks;
      if (state.var_x() < threshold) return finish(kicks, true);
    }
  }
  return finish(max_pulses, false);
}

struct JitterRow {
  double delta_tau;
  double var_x;
  double var_p;
};

/// Two-pulse variances with the free interval mistimed by each delta_tau.
inline std::vector<JitterRow> jitter_sensitivity(const PhysicalParams& params, double n_bar,
                                                 std::span<const double> delta_tau_values) {
  const double g_eff = effective_stiffness(params.g, params.n_p, params.omega_m);
  const double tau0 = quarter_period(params.omega_m);
  std::vector<JitterRow> rows;
  rows.reserve(delta_tau_values.size());
  for (double dtau : delta_tau_values) {
    if (!std::isfinite(dtau)) throw std::domain_error("jitter_sensitivity: non-finite timing offset");
    const VariancePair v = two_pulse_variance(tau0 + dtau, g_eff, params.omega_m, n_bar);
    rows.push_back({dtau, v.var_x, v.var_p});
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Grid sweeps

enum class Observable { var_x, var_p, pulses_needed, decoherence_term };

inline std::string_view observable_name(Observable o) {
  switch (o) {
    case Observable::var_x: return "var_x";
    case Observable::var_p: return "var_p";
    case Observable::pulses_needed: return "pulses_needed";
    case Observable::decoherence_term: return "decoherence_term";
  }
  return "unknown";
}

inline std::optional<Observable> parse_observable(std::string_view name) {
  for (Observable o : {Observable::var_x, Observable::var_p, Observable::pulses_needed, Observable::decoherence_term}) {
    if (observable_name(o) == name) return o;
  }
  return std::nullopt;
}

struct SweepAxis {
  std::string parameter;
  std::vector<double> values;
};

/**
 * Up to two axes over PhysicalParams fields.
 *
 * var_x / var_p report the final state of canonical_protocol(pulses);
 * pulses_needed runs min_pulses(threshold); decoherence_term is the bath
 * noise accumulated over half a mechanical period.
 */
struct SweepSpec {
  std::vector<SweepAxis> axes;
  PhysicalParams base;
  Observable observable = Observable::var_x;
  int pulses = 2;
  bool include_dissipation = false;
  double threshold = kVacuumVariance;
};

struct SweepCell {
  std::vector<double> coordinates;
  std::optional<double> value;
  std::string error;  // non-empty iff value is empty
};

inline double evaluate_observable(const SweepSpec& spec, const PhysicalParams& params) {
  params.validate();
  switch (spec.observable) {
    case Observable::var_x:
    case Observable::var_p: {
      const auto steps = apply_schedule(thermal_state(params.occupancy()),
                                        canonical_protocol(params, spec.pulses, spec.include_dissipation), params);
      const GaussianState& last = steps.back().state;
      return spec.observable == Observable::var_x ? last.var_x() : last.var_p();
    }
    case Observable::pulses_needed:
      return min_pulses(params, spec.threshold, spec.include_dissipation).pulses;
    case Observable::decoherence_term:
      return decoherence_term(params.gamma, std::numbers::pi / params.omega_m, params.occupancy());
  }
  throw std::logic_error("unhandled observable");
}

inline void validate_sweep(const SweepSpec& spec) {
  if (spec.axes.empty() || spec.axes.size() > 2) throw std::invalid_argument("sweep: expected one or two axes");
  for (const SweepAxis& axis : spec.axes) {
    PhysicalParams probe = spec.base;
    if (!set_parameter(probe, axis.parameter, 0.0)) {
      throw std::invalid_argument("sweep: unknown parameter '" + axis.parameter + "'");
    }
    if (axis.values.empty()) throw std::invalid_argument("sweep: axis '" + axis.parameter + "' has no values");
    for (double v : axis.values) {
      if (!std::isfinite(v)) throw std::invalid_argument("sweep: axis '" + axis.parameter + "' has a non-finite value");
    }
  }
}

/// Evaluates every grid cell, first axis major. Failing cells carry an error message.
inline std::vector<SweepCell> sweep(const SweepSpec& spec) {
  validate_sweep(spec);
  const std::vector<double> unit{0.0};
  const auto& outer = spec.axes[0].values;
  const auto& inner = spec.axes.size() > 1 ? spec.axes[1].values : unit;

  std::vector<SweepCell> cells;
  cells.reserve(outer.size() * inner.size());
  for (double a : outer) {
    for (double b : inner) {
      SweepCell cell;
      PhysicalParams params = spec.base;
      set_parameter(params, spec.axes[0].parameter, a);
      cell.coordinates.push_back(a);
      if (spec.axes.size() > 1) {
        set_parameter(params, spec.axes[1].parameter, b);
        cell.coordinates.push_back(b);
      }
      try {
        cell.value = evaluate_observable(spec, params);
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

}  // namespace quadkick
