#pragma once

#include <numbers>

namespace paramode {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

// CODATA values, 10 significant digits.
inline constexpr double flux_quantum = 2.067833848e-15; // Wb
inline constexpr double hbar = 1.054571817e-34;          // J s

/// Cyclic frequency in GHz to angular frequency in rad/s.
constexpr double ghz(double f) { return two_pi * 1e9 * f; }
constexpr double mhz(double f) { return two_pi * 1e6 * f; }
constexpr double khz(double f) { return two_pi * 1e3 * f; }

constexpr double to_ghz(double omega) { return omega / (two_pi * 1e9); }
constexpr double to_mhz(double omega) { return omega / (two_pi * 1e6); }

constexpr double ns(double t) { return t * 1e-9; }
constexpr double to_ns(double t) { return t * 1e9; }

} // namespace paramode
