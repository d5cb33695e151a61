#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "quadkick/errors.hpp"
#include "quadkick/quadrature_state.hpp"
#include "quadkick/rk4.hpp"

namespace quadkick {

using Complex = std::complex<double>;

/**
 * Weak-probe readout of the cavity in the frame rotating at the probe
 * frequency. The drive amplitude has units of s^-1; detuning is
 * omega_c - omega_p.
 *
 * omega_m is the mechanical frequency the trace must resolve (0 when x^2 is
 * static). It only enters the step-size bound.
 */
struct ReadoutConfig {
  double drive = 1e5;
  double detuning = 0.0;
  double kappa = 1e7;
  double g = 1e-4;
  double omega_m = 0.0;
  double t_start = 0.0;
  double t_end = 1e-5;
  double dt = 5e-9;

  /// Relaxation time after which the zeroth-order field is steady to double precision.
  double settle_time() const { return 50.0 / kappa; }

  void validate() const;
};

/// Largest admissible step: min(1/(20 kappa), pi/(40 omega_m)).
inline double max_readout_step(double kappa, double omega_m) {
  double h = 1.0 / (20.0 * kappa);
  if (omega_m > 0.0) h = std::min(h, std::numbers::pi / (40.0 * omega_m));
  return h;
}

inline void ReadoutConfig::validate() const {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw ParameterError("kappa", "must satisfy kappa > 0");
  if (!(g >= 0.0) || !std::isfinite(g)) throw ParameterError("g", "must satisfy g >= 0");
  if (!(omega_m >= 0.0) || !std::isfinite(omega_m)) throw ParameterError("omega_m", "must satisfy omega_m >= 0");
  if (!std::isfinite(drive)) throw ParameterError("probe_drive", "must be finite");
  if (!std::isfinite(detuning)) throw ParameterError("probe_detuning", "must be finite");
  if (!(t_end > t_start) || !std::isfinite(t_end) || !std::isfinite(t_start)) {
    throw ParameterError("t_end", "must satisfy t_end > t_start");
  }
  if (!(dt > 0.0)) throw ParameterError("dt", "must satisfy dt > 0");
  if (dt > max_readout_step(kappa, omega_m) * (1.0 + 1e-12)) {
    throw ParameterError("dt", "exceeds min(1/(20 kappa), pi/(40 omega_m))");
  }
}

/// Config spanning the settling time plus `periods` cycles of the 2 omega_m ripple.
inline ReadoutConfig make_readout_config(double kappa, double g, double omega_m, double drive = 1e5,
                                         double detuning = 0.0, double periods = 4.0) {
  ReadoutConfig cfg;
  cfg.drive = drive;
  cfg.detuning = detuning;
  cfg.kappa = kappa;
  cfg.g = g;
  cfg.omega_m = omega_m;
  cfg.t_start = 0.0;
  cfg.t_end = cfg.settle_time() + (omega_m > 0.0 ? periods * std::numbers::pi / omega_m : 10.0 / kappa);
  cfg.dt = max_readout_step(kappa, omega_m);
  return cfg;
}

namespace detail {

inline Complex cavity_pole(const ReadoutConfig& cfg) { return {cfg.kappa, cfg.detuning}; }

}  // namespace detail

/// Drive-only cavity amplitude E (1 - e^{-(kappa + i delta)(t - t_start)}) / (kappa + i delta).
inline Complex zeroth_order_field(const ReadoutConfig& cfg, double t) {
  if (t < cfg.t_start) throw std::domain_error("zeroth_order_field: t precedes probe switch-on");
  const Complex a = detail::cavity_pole(cfg);
  return cfg.drive * (1.0 - std::exp(-a * (t - cfg.t_start))) / a;
}

/// |E / (kappa + i delta)|^2, the unperturbed steady intensity I0.
inline double baseline_intensity(const ReadoutConfig& cfg) { return std::norm(cfg.drive / detail::cavity_pole(cfg)); }

/**
 * First-order steady intensity I0 (1 + 2 g x2 / kappa).
 *
 * Generic over the floating type: at the reference parameters the fractional
 * shift is ~1e-11, so a double intensity carries only ~5 significant digits
 * of x2. Wider types keep the inversion exact to their own precision.
 */
template <class Real>
Real adiabatic_intensity(const Real& x2, const Real& baseline, const Real& g, const Real& kappa) {
  return baseline * (Real(1) + Real(2) * g / kappa * x2);
}

inline double adiabatic_intensity(double x2, const ReadoutConfig& cfg) {
  return adiabatic_intensity<double>(x2, baseline_intensity(cfg), cfg.g, cfg.kappa);
}

/// Inverts the first-order readout on the magnitude of the fractional shift: |I/I0 - 1| kappa / (2 g).
template <class Real>
Real infer_x2(const Real& intensity, const Real& baseline, const Real& g, const Real& kappa) {
  using std::abs;
  if (!(baseline > Real(0))) throw std::domain_error("infer_x2: baseline must be positive");
  if (!(g > Real(0))) throw std::domain_error("infer_x2: g must be positive");
  return abs(intensity / baseline - Real(1)) * kappa / (Real(2) * g);
}

inline double infer_x2(double intensity, double baseline, double g, double kappa) {
  return infer_x2<double>(intensity, baseline, g, kappa);
}

/**
 * Sampled probe output. `shift` is I(t) - I0 evaluated without cancellation
 * and carries the full resolution of the x^2 signal; `intensity` is I0 + shift.
 */
struct ReadoutTrace {
  std::vector<double> times;
  std::vector<double> intensity;
  std::vector<double> shift;
  std::vector<double> inferred_x2;
  double baseline = 0.0;
};

/**
 * Integrates dc/dt = -(kappa + i delta + g x2(t)) c + E with c(t_start) = 0
 * by fixed-step RK4.
 *
 * The field is split as c = c0 + d, with c0 the closed-form drive-only
 * solution, and the exact equation for d is integrated:
 *   dd/dt = -(kappa + i delta + g x2) d - g x2 c0.
 * d is O(g x2 / kappa) relative to c0, so the intensity shift keeps its
 * relative precision even when it is ~1e-10 of I0.
 *
 * inferred_x2 = (I0 - I) kappa / (2 g I0); zero when g = 0.
 */
template <class X2Fn>
ReadoutTrace integrate_langevin(const ReadoutConfig& cfg, X2Fn&& x2_of_t) {
  cfg.validate();
  const Complex a = detail::cavity_pole(cfg);
  const double i0 = baseline_intensity(cfg);
  const double span = cfg.t_end - cfg.t_start;
  const double raw_steps = span / cfg.dt;
  auto steps = static_cast<std::size_t>(std::ceil(raw_steps - 1e-9 * raw_steps));
  steps = std::max<std::size_t>(steps, 1);
  const double h = span / static_cast<double>(steps);

  const auto transient = [&](double t) { return std::exp(-a * (t - cfg.t_start)); };
  const auto c0 = [&](double t) { return cfg.drive * (1.0 - transient(t)) / a; };
  const auto rhs = [&](double t, const Complex& d) {
    const double coupling = cfg.g * x2_of_t(t);
    return -(a + coupling) * d - coupling * c0(t);
  };

  ReadoutTrace trace;
  trace.baseline = i0;
  trace.times.reserve(steps + 1);
  trace.intensity.reserve(steps + 1);
  trace.shift.reserve(steps + 1);
  trace.inferred_x2.reserve(steps + 1);

  const auto record = [&](double t, const Complex& d) {
    const Complex w = transient(t);
    const Complex field0 = c0(t);
    const double shift = i0 * (std::norm(w) - 2.0 * w.real()) + 2.0 * (std::conj(field0) * d).real() + std::norm(d);
    trace.times.push_back(t);
    trace.shift.push_back(shift);
    trace.intensity.push_back(std::max(0.0, i0 + shift));
    trace.inferred_x2.push_back(cfg.g > 0.0 ? -shift * cfg.kappa / (2.0 * cfg.g * i0) : 0.0);
  };

  Complex d{0.0, 0.0};
  record(cfg.t_start, d);
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = cfg.t_start + static_cast<double>(k) * h;
    d = rk4_step(rhs, t, d, h);
    record(cfg.t_start + static_cast<double>(k + 1) * h, d);
  }
  return trace;
}

/// Steady-window summary of a readout run.
struct RippleReport {
  double dc_shift;           // mean I - I0 (signed)
  double ripple_amplitude;   // amplitude of the 2 omega_m component of I
  double kappa_over_2omega;  // adiabatic validity figure
  double baseline;           // I0
  double inferred_x2;        // |dc_shift| kappa / (2 g I0)
  double adiabatic_ripple;   // ripple expected if I followed x2(t) instantaneously
};

namespace detail {

/// Least-squares fit of y ~ c0 + c1 cos(w t) + c2 sin(w t).
inline std::array<double, 3> fit_harmonic(const std::vector<double>& t, const std::vector<double>& y, double w,
                                          std::size_t first) {
  std::array<std::array<double, 4>, 3> m{};
  for (std::size_t k = first; k < t.size(); ++k) {
    const std::array<double, 3> basis{1.0, std::cos(w * t[k]), std::sin(w * t[k])};
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < 3; ++j) m[i][j] += basis[i] * basis[j];
      m[i][3] += basis[i] * y[k];
    }
  }
  // Gaussian elimination with partial pivoting on the 3x3 normal equations.
  for (std::size_t col = 0; col < 3; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < 3; ++r) {
      if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
    }
    std::swap(m[col], m[pivot]);
    for (std::size_t r = col + 1; r < 3; ++r) {
      const double f = m[r][col] / m[col][col];
      for (std::size_t c = col; c < 4; ++c) m[r][c] -= f * m[col][c];
    }
  }
  std::array<double, 3> x{};
  for (std::size_t i = 3; i-- > 0;) {
    double acc = m[i][3];
    for (std::size_t j = i + 1; j < 3; ++j) acc -= m[i][j] * x[j];
    x[i] = acc / m[i][i];
  }
  return x;
}

}  // namespace detail

/**
 * Fits the steady part of a trace (after settle_time) with a constant plus a
 * 2 omega_m harmonic. `x2_ripple` is the amplitude of the 2 omega_m term of
 * the x^2 input, used for the instantaneous-tracking reference.
 */
inline RippleReport summarize_readout(const ReadoutConfig& cfg, const ReadoutTrace& trace, double omega_m,
                                      double x2_ripple) {
  if (!(omega_m > 0.0)) throw ParameterError("omega_m", "must satisfy omega_m > 0");
  const double window_start = cfg.t_start + cfg.settle_time();
  if (cfg.t_end - window_start < std::numbers::pi / omega_m) {
    throw ParameterError("t_end", "steady window shorter than one ripple period");
  }
  const auto first = static_cast<std::size_t>(
      std::lower_bound(trace.times.begin(), trace.times.end(), window_start) - trace.times.begin());
  std::vector<double> local_t(trace.times.size());
  std::transform(trace.times.begin(), trace.times.end(), local_t.begin(), [&](double t) { return t - cfg.t_start; });
  const auto coeff = detail::fit_harmonic(local_t, trace.shift, 2.0 * omega_m, first);

  RippleReport report{};
  report.dc_shift = coeff[0];
  report.ripple_amplitude = std::hypot(coeff[1], coeff[2]);
  report.kappa_over_2omega = cfg.kappa / (2.0 * omega_m);
  report.baseline = trace.baseline;
  report.inferred_x2 = cfg.g > 0.0 ? std::abs(coeff[0]) * cfg.kappa / (2.0 * cfg.g * trace.baseline) : 0.0;
  report.adiabatic_ripple = 2.0 * cfg.g / cfg.kappa * trace.baseline * x2_ripple;
  return report;
}

/// Amplitude of the 2 omega_m oscillation of <x^2>(t) under free rotation.
inline double x2_ripple_amplitude(const GaussianState& state) {
  const double pp = state.var_p() + state.mean().p * state.mean().p;
  const double xx = state.var_x() + state.mean().x * state.mean().x;
  const double px = state.cross() + state.mean().p * state.mean().x;
  return std::hypot(0.5 * (xx - pp), px);
}

/// Readout of a freely rotating state: x2(t) = free_x2_expectation(state, omega_m, t - t_start).
inline ReadoutTrace free_readout_trace(const ReadoutConfig& cfg, const GaussianState& state, double omega_m) {
  ReadoutConfig run = cfg;
  run.omega_m = omega_m;
  return integrate_langevin(run, [&](double t) { return free_x2_expectation(state, omega_m, t - run.t_start); });
}

/// Runs free_readout_trace and reports its dc shift and 2 omega_m ripple.
inline RippleReport ripple_report(const ReadoutConfig& cfg, const GaussianState& state, double omega_m) {
  if (!(omega_m > 0.0)) throw ParameterError("omega_m", "must satisfy omega_m > 0");
  ReadoutConfig run = cfg;
  run.omega_m = omega_m;
  return summarize_readout(run, free_readout_trace(run, state, omega_m), omega_m, x2_ripple_amplitude(state));
}

}  // namespace quadkick
