#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "quadkick/constants.hpp"
#include "quadkick/errors.hpp"

namespace quadkick {

/// Phase-space vector. Every matrix in the library acts on (p, x) in that order.
struct Quadratures {
  double p = 0.0;
  double x = 0.0;

  friend bool operator==(const Quadratures&, const Quadratures&) = default;
};

/**
 * Real 2x2 matrix with unit determinant acting on the column vector (p, x).
 *
 * Construction rejects matrices whose determinant departs from one by more
 * than kSymplecticTolerance, so any instance in circulation preserves the
 * canonical commutator.
 */
class SymplecticMap {
 public:
  SymplecticMap(double pp, double px, double xp, double xx) : m_{pp, px, xp, xx} {
    const double d = det();
    if (!std::isfinite(d) || std::abs(d - 1.0) > kSymplecticTolerance) {
      std::ostringstream os;
      os.precision(17);
      os << "symplectic map has det " << d;
      throw InvariantError(os.str());
    }
  }

  static SymplecticMap identity() { return {1.0, 0.0, 0.0, 1.0}; }

  /// Phase-space rotation by `angle`: p -> p cos - x sin, x -> p sin + x cos.
  static SymplecticMap rotation(double angle) {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    return {c, -s, s, c};
  }

  double operator()(int row, int col) const { return m_[static_cast<std::size_t>(2 * row + col)]; }

  double det() const { return std::fma(m_[0], m_[3], -m_[1] * m_[2]); }

  /// Composition: (a * b) applies b first, then a.
  friend SymplecticMap operator*(const SymplecticMap& a, const SymplecticMap& b) {
    return {a(0, 0) * b(0, 0) + a(0, 1) * b(1, 0), a(0, 0) * b(0, 1) + a(0, 1) * b(1, 1),
            a(1, 0) * b(0, 0) + a(1, 1) * b(1, 0), a(1, 0) * b(0, 1) + a(1, 1) * b(1, 1)};
  }

  Quadratures apply(const Quadratures& v) const {
    return {m_[0] * v.p + m_[1] * v.x, m_[2] * v.p + m_[3] * v.x};
  }

 private:
  std::array<double, 4> m_;
};

/// Second moments of a GaussianState, as reported to callers.
struct QuadratureVariances {
  double var_p;
  double var_x;
  double cross;  // symmetrised covariance <{dp, dx}>/2
};

/**
 * Single-mode Gaussian state of the mechanical oscillator: mean quadratures
 * plus the symmetric covariance matrix [[var_p, cross], [cross, var_x]].
 *
 * The vacuum has var_p = var_x = 1/2. Every instance is positive definite and
 * satisfies det(cov) >= 1/4 - kHeisenbergTolerance.
 */
class GaussianState {
 public:
  GaussianState(Quadratures mean, double var_p, double var_x, double cross)
      : mean_(mean), var_p_(var_p), var_x_(var_x), cross_(cross) {
    validate();
  }

  static GaussianState vacuum() { return {{}, kVacuumVariance, kVacuumVariance, 0.0}; }

  const Quadratures& mean() const { return mean_; }
  double var_p() const { return var_p_; }
  double var_x() const { return var_x_; }
  double cross() const { return cross_; }

  double det() const { return std::fma(var_p_, var_x_, -cross_ * cross_); }

  friend bool operator==(const GaussianState&, const GaussianState&) = default;

 private:
  void validate() const {
    const auto fail = [this](const char* why) {
      std::ostringstream os;
      os.precision(17);
      os << why << " (var_p=" << var_p_ << ", var_x=" << var_x_ << ", cross=" << cross_ << ")";
      throw InvariantError(os.str());
    };
    if (!std::isfinite(var_p_) || !std::isfinite(var_x_) || !std::isfinite(cross_) ||
        !std::isfinite(mean_.p) || !std::isfinite(mean_.x)) {
      fail("non-finite moment");
    }
    if (var_p_ <= 0.0 || var_x_ <= 0.0) fail("covariance diagonal not positive");
    const double d = det();
    if (d <= 0.0) fail("covariance not positive definite");
    // det is formed from rounded entries; allow for that cancellation on top of the fixed tolerance.
    const double slack = kHeisenbergTolerance + kDetRoundoffUlps * std::numeric_limits<double>::epsilon() * var_p_ * var_x_;
    if (d < 0.25 - slack) fail("covariance violates the uncertainty bound");
  }

  Quadratures mean_;
  double var_p_;
  double var_x_;
  double cross_;
};

/// Bose-Einstein occupancy 1/(exp(hbar w / kB T) - 1); zero at T = 0.
inline double thermal_occupancy(double temperature, double omega_m) {
  if (!(omega_m > 0.0) || !std::isfinite(omega_m)) {
    throw std::domain_error("thermal_occupancy: omega_m must be positive");
  }
  if (!(temperature >= 0.0) || !std::isfinite(temperature)) {
    throw std::domain_error("thermal_occupancy: temperature must be non-negative");
  }
  if (temperature == 0.0) return 0.0;
  return 1.0 / std::expm1(kHbar * omega_m / (kBoltzmann * temperature));
}

inline GaussianState thermal_state(double occupancy) {
  if (!(occupancy >= 0.0) || !std::isfinite(occupancy)) {
    throw std::domain_error("thermal_state: occupancy must be non-negative");
  }
  const double v = occupancy + kVacuumVariance;
  return {{}, v, v, 0.0};
}

/// mean -> M mean, cov -> M cov M^T.
inline GaussianState propagate(const GaussianState& state, const SymplecticMap& m) {
  const double a = state.var_p();
  const double b = state.var_x();
  const double c = state.cross();
  const double m00 = m(0, 0), m01 = m(0, 1), m10 = m(1, 0), m11 = m(1, 1);

  const double var_p = m00 * m00 * a + 2.0 * m00 * m01 * c + m01 * m01 * b;
  const double var_x = m10 * m10 * a + 2.0 * m10 * m11 * c + m11 * m11 * b;
  const double cross = m00 * m10 * a + (m00 * m11 + m01 * m10) * c + m01 * m11 * b;
  return {m.apply(state.mean()), var_p, var_x, cross};
}

inline QuadratureVariances quadrature_variances(const GaussianState& state) {
  return {state.var_p(), state.var_x(), state.cross()};
}

struct SqueezingFlags {
  bool x_squeezed;
  bool p_squeezed;
};

/// Strictly-below test of each variance against `threshold` (vacuum by default).
inline SqueezingFlags is_squeezed(const GaussianState& state, double threshold = kVacuumVariance) {
  if (!(threshold > 0.0)) throw std::domain_error("is_squeezed: threshold must be positive");
  return {state.var_x() < threshold, state.var_p() < threshold};
}

/// <x^2> after free evolution for time t: var_x + mean_x^2 of the rotated state.
inline double free_x2_expectation(const GaussianState& state, double omega_m, double t) {
  const GaussianState evolved = propagate(state, SymplecticMap::rotation(omega_m * t));
  return evolved.var_x() + evolved.mean().x * evolved.mean().x;
}

}  // namespace quadkick
