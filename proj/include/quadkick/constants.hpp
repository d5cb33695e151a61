#pragma once

namespace quadkick {

// CODATA 2018 exact/recommended values, SI units.
inline constexpr double kHbar = 1.054571817e-34;       // J s
inline constexpr double kBoltzmann = 1.380649e-23;     // J/K
inline constexpr double kSpeedOfLight = 2.99792458e8;  // m/s

/// Variance of either quadrature in the ground state.
inline constexpr double kVacuumVariance = 0.5;

/// Slack on det(cov) >= 1/4 to absorb rounding over long schedules.
inline constexpr double kHeisenbergTolerance = 1e-9;

/// Extra det(cov) slack, in units of eps * var_p * var_x, for strongly squeezed states.
inline constexpr double kDetRoundoffUlps = 64.0;

/// Maximum |det - 1| accepted for a symplectic map.
inline constexpr double kSymplecticTolerance = 1e-12;

}  // namespace quadkick
