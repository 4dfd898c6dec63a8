#pragma once

#include <numbers>

namespace surftrap {

namespace constants {
inline constexpr double pi = std::numbers::pi;
inline constexpr double elementary_charge = 1.602176634e-19;  // C
inline constexpr double epsilon0 = 8.8541878128e-12;          // F/m
inline constexpr double atomic_mass_unit = 1.66053906660e-27; // kg
inline constexpr double electron_mass_u = 5.48579909065e-4;   // u
}  // namespace constants

// Lengths cross the public interface in micrometres; everything inside the
// kernels is SI.
inline constexpr double um_to_m = 1e-6;
inline constexpr double m_to_um = 1e6;

inline constexpr double joule_per_mev = 1.602176634e-22;

inline constexpr double to_mev(double joule) { return joule / joule_per_mev; }
inline constexpr double from_mev(double mev) { return mev * joule_per_mev; }

inline constexpr double two_pi = 2.0 * constants::pi;

// Angular frequency <-> ordinary frequency helpers.
inline constexpr double mhz_to_rad_s(double f_mhz) { return two_pi * f_mhz * 1e6; }
inline constexpr double rad_s_to_mhz(double w) { return w / two_pi * 1e-6; }

}  // namespace surftrap
