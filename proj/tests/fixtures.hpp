#pragma once

#include "memchua/circuit.hpp"
#include "memchua/device.hpp"

namespace fixture {

// Reference design values frozen from an independent numpy evaluation of the
// design equations with the V_STOP = 2.6 V coefficients.
inline constexpr double kR = 7621.1397307771385;
inline constexpr double kRN = 6837.823450502877;
inline constexpr double kL = 0.40845127142074417;
inline constexpr double kC1 = 10e-9;
inline constexpr double kC2 = 100e-9;
inline constexpr double kPMinus = -0.7464249763;

inline memchua::DevicePoly reference_poly()
{
    return memchua::DevicePoly(memchua::kReferenceCoeffs, -memchua::kReferenceVSetMag, memchua::kReferenceVStop);
}

inline memchua::CircuitParams designed()
{
    return memchua::CircuitParams(kC1, kC2, kL, 1.0 / kR, 1.0 / kRN, reference_poly());
}

inline memchua::DevicePoly zero_poly()
{
    return memchua::DevicePoly({0, 0, 0, 0, 0}, -1.2, 2.6);
}

/// Passive RLC: zero device, no negative conductance.
inline memchua::CircuitParams linear_rlc()
{
    return memchua::CircuitParams(kC1, kC2, kL, 1.0 / kR, 0.0, zero_poly());
}

/// Lossless L-C2 tank (g = 0 decouples v1).
inline memchua::CircuitParams lossless_lc()
{
    return memchua::CircuitParams(kC1, kC2, kL, 0.0, 0.0, zero_poly());
}

}  // namespace fixture
