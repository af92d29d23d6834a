#pragma once

// Unit conventions used throughout:
//   frequencies GHz (optical offsets) or MHz (spin/noise scales), times µs
//   unless a field name says otherwise (lifetimes in ms where noted),
//   lengths µm, magnetic field mT in configs, Tesla only inside formulas.

namespace remsim {

// µB/h. Multiplying by g and B[T] gives the Zeeman splitting in GHz.
inline constexpr double kBohrGHzPerTesla = 13.996;

inline constexpr double kPi = 3.14159265358979323846;

// FWHM of a Gaussian = kGaussFwhmPerSigma * sigma
inline constexpr double kGaussFwhmPerSigma = 2.3548200450309493;  // 2*sqrt(2 ln 2)

inline constexpr double ghz_to_mhz(double ghz) { return ghz * 1e3; }
inline constexpr double mhz_to_ghz(double mhz) { return mhz * 1e-3; }
inline constexpr double ms_to_us(double ms) { return ms * 1e3; }
inline constexpr double us_to_ms(double us) { return us * 1e-3; }

}  // namespace remsim
