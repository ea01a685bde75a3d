#pragma once

// CODATA 2018 physical constants (SI units).

namespace ionsim::constants {

inline constexpr double hbar = 1.054571817e-34;     // J s
inline constexpr double h_planck = 6.62607015e-34;  // J s
inline constexpr double eps0 = 8.8541878128e-12;    // F/m
inline constexpr double c_light = 2.99792458e8;     // m/s
inline constexpr double k_boltzmann = 1.380649e-23; // J/K
inline constexpr double mu_bohr = 9.2740100783e-24; // J/T
inline constexpr double mu_nuclear = 5.0507837461e-27; // J/T
inline constexpr double mu0_over_4pi = 1.0e-7;      // T m/A

inline constexpr double two_pi = 6.283185307179586476925286766559;
inline constexpr double pi = 3.1415926535897932384626433832795;

// "2pi x f" notation used throughout: convert between ordinary frequency
// (Hz) and angular frequency (rad/s) at the boundary only.
inline constexpr double ang_from_hz(double f_hz) { return two_pi * f_hz; }
inline constexpr double hz_from_ang(double w) { return w / two_pi; }

} // namespace ionsim::constants
