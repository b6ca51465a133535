#pragma once

// Internal scaled unit system. All simulation quantities are carried in
//   voltage mV, current uA, resistance kOhm, time ps,
//   capacitance fF, inductance nH, charge aC, energy zJ.
// The set is coherent: mV/uA = kOhm, nH/kOhm = ps, kOhm*fF = ps,
// uA*ps = aC, mV*aC = zJ, uA*(mV*ps) = zJ.

#include <numbers>

namespace qpsj {

namespace si {
// Cooper-pair charge 2e in coulombs.
inline constexpr double two_e = 3.204353e-19;
// Magnetic flux quantum h/2e in webers.
inline constexpr double phi0 = 2.067834e-15;
inline constexpr double planck = 6.62607015e-34;
}  // namespace si

// Constants expressed in internal units.
inline constexpr double kTwoE = si::two_e * 1e18;  // aC
inline constexpr double kPhi0 = si::phi0 * 1e15;   // mV*ps
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// SI -> internal scale factors.
namespace scale {
inline constexpr double volt = 1e3;
inline constexpr double amp = 1e6;
inline constexpr double ohm = 1e-3;
inline constexpr double second = 1e12;
inline constexpr double farad = 1e15;
inline constexpr double henry = 1e9;
inline constexpr double coulomb = 1e18;
inline constexpr double joule = 1e21;
}  // namespace scale

}  // namespace qpsj
