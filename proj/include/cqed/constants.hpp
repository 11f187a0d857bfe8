#pragma once

#include <limits>
#include <numbers>

namespace cqed {

// CODATA 2018 exact values where they exist.
inline constexpr double kHbar = 1.054571817e-34;          // J s
inline constexpr double kPlanck = 6.62607015e-34;         // J s
inline constexpr double kElectronCharge = 1.602176634e-19;  // C
inline constexpr double kPi = std::numbers::pi;
inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Resistance quantum for Cooper pairs, h/(2e)^2.
inline constexpr double kResistanceQuantum =
    kPlanck / (4.0 * kElectronCharge * kElectronCharge);

// Reduced flux quantum hbar/(2e).
inline constexpr double kReducedFluxQuantum = kHbar / (2.0 * kElectronCharge);

}  // namespace cqed
