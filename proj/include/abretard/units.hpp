#pragma once

// SI <-> natural Heaviside–Lorentz units (ħ = c = 1, lengths kept in meters).
// Time becomes c·t, charge q/sqrt(ε0 ħ c), current the charge rate per meter
// of light travel, and flux the amount whose product with a natural charge is
// the phase in radians.

#include <cmath>

namespace abretard::units {

inline constexpr double kSpeedOfLight = 299'792'458.0;      // m/s, exact
inline constexpr double kHbar = 1.054'571'817e-34;          // J s, exact
inline constexpr double kVacuumPermittivity = 8.8541878128e-12;  // F/m
inline constexpr double kElementaryCharge = 1.602'176'634e-19;   // C, exact

inline double charge_scale() { return std::sqrt(kVacuumPermittivity * kHbar * kSpeedOfLight); }

inline double time_to_natural(double seconds) { return seconds * kSpeedOfLight; }
inline double time_to_si(double t) { return t / kSpeedOfLight; }

inline double speed_to_natural(double meters_per_second) { return meters_per_second / kSpeedOfLight; }
inline double speed_to_si(double v) { return v * kSpeedOfLight; }

inline double charge_to_natural(double coulombs) { return coulombs / charge_scale(); }
inline double charge_to_si(double q) { return q * charge_scale(); }

inline double current_to_natural(double amperes) { return amperes / (charge_scale() * kSpeedOfLight); }
inline double current_to_si(double i) { return i * charge_scale() * kSpeedOfLight; }

inline double flux_to_natural(double webers) { return webers * charge_scale() / kHbar; }
inline double flux_to_si(double phi) { return phi * kHbar / charge_scale(); }

}  // namespace abretard::units
