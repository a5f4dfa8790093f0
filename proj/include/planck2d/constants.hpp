#pragma once

namespace planck2d::constants {

// CODATA 2018 exact defined values. Deliberately not configurable:
// every temperature-to-power conversion in the library assumes these.
inline constexpr double planck_h = 6.62607015e-34;  // J s
inline constexpr double boltzmann_k = 1.380649e-23; // J / K

} // namespace planck2d::constants
