#pragma once

// Independent reference implementations used to cross-check the library.
// These deliberately avoid the library's numerical tricks (expm1 forms,
// analytic gradients) so agreement is meaningful.

#include <cmath>
#include <functional>

namespace oracle {

inline constexpr long double h_planck = 6.62607015e-34L;
inline constexpr long double k_boltz = 1.380649e-23L;

inline long double coth_naive(long double x) {
    return std::cosh(x) / std::sinh(x);
}

inline long double crossover_k(long double f0_hz) {
    return h_planck * f0_hz / (2.0L * k_boltz);
}

inline long double bose(long double f_hz, long double t_k) {
    if (t_k == 0.0L) return 1.0L;
    return coth_naive(crossover_k(f_hz) / t_k);
}

inline long double detected_power(long double kappa, long double n_h, long double eta,
                                  long double t_att_k, long double t_mc_k, long double f0_hz,
                                  long double z0_ohm) {
    return kappa / z0_ohm *
           (0.5L * eta * bose(f0_hz, t_att_k) + 0.5L * (1.0L - eta) * bose(f0_hz, t_mc_k) + n_h);
}

// Central finite difference; h should already be scaled to x.
inline double fd_central(const std::function<double(double)>& f, double x, double h) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

} // namespace oracle
