#pragma once

// Internal unit system: time in microseconds, rates and frequencies as angular
// frequencies in rad/us. Linear frequencies nu = omega / 2pi in MHz are what
// configuration files and command-line flags carry.

#include <numbers>

namespace cqed::units {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

constexpr double mhz_to_angular(double mhz) { return two_pi * mhz; }
constexpr double angular_to_mhz(double rad_per_us) { return rad_per_us / two_pi; }

constexpr double ns_to_us(double ns) { return ns * 1e-3; }
constexpr double us_to_ns(double us) { return us * 1e3; }

}  // namespace cqed::units
