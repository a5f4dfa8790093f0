#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "planck2d/physics.hpp"

namespace planck2d {

// Quadrature variances in vacuum units (vacuum = 0.25).
inline double squeezing_level(double var_s) {
    if (!(std::isfinite(var_s) && var_s > 0.0))
        throw std::domain_error("squeezing_level: variance must be positive");
    return -10.0 * std::log10(var_s / 0.25);
}

inline double variance_from_squeezing(double s_db) {
    detail::require(detail::finite(s_db), "variance_from_squeezing: level must be finite");
    return 0.25 * std::pow(10.0, -s_db / 10.0);
}

inline double purity(double var_s, double var_a) {
    if (!(std::isfinite(var_s) && var_s > 0.0 && std::isfinite(var_a) && var_a > 0.0))
        throw std::domain_error("purity: variances must be positive");
    return 0.25 / std::sqrt(var_s * var_a);
}

// Single-mode zero-mean Gaussian state with diagonal covariance, quadratures
// aligned with the measurement axes.
struct GaussianStateSummary {
    double var_s = 0.25; // squeezed quadrature (the smaller variance)
    double var_a = 0.25; // anti-squeezed quadrature
    double squeezing_db = 0.0;
    double antisqueezing_db = 0.0;
    double purity = 1.0;
    // Heisenberg check: var_s * var_a >= 0.25^2 (up to rounding tolerance);
    // miscalibrated reconstructions may legitimately violate it
    bool physical = true;

    static GaussianStateSummary from_variances(double vs, double va) {
        if (!(std::isfinite(vs) && vs > 0.0 && std::isfinite(va) && va > 0.0))
            throw std::invalid_argument("gaussian state: variances must be positive");
        if (vs > va) std::swap(vs, va); // the squeezed quadrature is the smaller one
        GaussianStateSummary st;
        st.var_s = vs;
        st.var_a = va;
        st.squeezing_db = squeezing_level(vs);
        st.antisqueezing_db = 10.0 * std::log10(va / 0.25);
        st.purity = planck2d::purity(vs, va);
        st.physical = vs * va >= 0.0625 * (1.0 - 1.0e-9);
        return st;
    }

    static GaussianStateSummary from_levels(double s_db, double mu) {
        detail::require(detail::finite(s_db), "gaussian state: squeezing level must be finite");
        if (!(std::isfinite(mu) && mu > 0.0 && mu <= 1.0))
            throw std::invalid_argument("gaussian state: purity must lie in (0, 1]");
        const double vs = variance_from_squeezing(s_db);
        const double va = 0.0625 / (mu * mu * vs); // from mu = 0.25/sqrt(vs*va)
        return from_variances(vs, va);
    }
};

struct CalibrationPair {
    CalibrationParams cal_true;
    CalibrationParams cal_assumed;

    void validate() const {
        cal_true.validate();
        cal_assumed.validate();
    }

    double ratio() const { return cal_true.kappa / cal_assumed.kappa; }
};

// Vacuum-anchored affine propagation of a calibration error onto
// reconstructed variances: var' = r var + 0.25 (1 - r), r = kappa_true /
// kappa_assumed. This is the unique linear-in-variance reconstruction error
// once both calibrations reproduce the same measured vacuum moment (their
// fitted noise offsets cancel at the calibration operating point).
inline GaussianStateSummary miscalibrate(const GaussianStateSummary& state,
                                         const CalibrationPair& pair) {
    pair.validate();
    const double r = pair.ratio();
    const double vs = r * state.var_s + 0.25 * (1.0 - r);
    const double va = r * state.var_a + 0.25 * (1.0 - r);
    if (!(vs > 0.0 && va > 0.0))
        throw std::domain_error(
            "miscalibrate: propagated variance is nonpositive; no state summary exists");
    return GaussianStateSummary::from_variances(vs, va);
}

// Moment-level forward model: measured second moment of a quadrature with
// variance var (vacuum units). The photon-number bracket of a variance-var
// quadrature is 2 var (vacuum contributes the 1/2), so the vacuum moment
// equals the zero-temperature detected power.
inline double forward_moment(double variance, const CalibrationParams& cal,
                             const ReceiverConfig& cfg) {
    cal.validate();
    cfg.validate();
    detail::require(detail::finite(variance) && variance > 0.0,
                    "forward_moment: variance must be positive");
    return cal.kappa / cfg.z0_ohm * (2.0 * variance + cal.n_h);
}

// Inversion of forward_moment: var = (M z0 / kappa - n_h) / 2. Negative
// results are returned as-is (the caller flags them unphysical); with the
// true calibration, the detected vacuum moment inverts to exactly 0.25.
inline double reconstruct_variance(double measured_moment, const CalibrationParams& cal,
                                   const ReceiverConfig& cfg) {
    cal.validate();
    cfg.validate();
    detail::require(detail::finite(measured_moment),
                    "reconstruct_variance: moment must be finite");
    return 0.5 * (measured_moment * cfg.z0_ohm / cal.kappa - cal.n_h);
}

} // namespace planck2d
