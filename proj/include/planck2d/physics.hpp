#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "planck2d/constants.hpp"

namespace planck2d {

namespace detail {

inline void require(bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument(msg);
}

inline bool finite(double v) {
    return std::isfinite(v);
}

} // namespace detail

// Power attenuation in dB <-> transmissivity eta = 10^(-L/10).
inline double eta_from_loss_db(double loss_db) {
    if (!(std::isfinite(loss_db) && loss_db >= 0.0))
        throw std::domain_error("loss_db must be finite and >= 0");
    return std::pow(10.0, -loss_db / 10.0);
}

inline double loss_db_from_eta(double eta) {
    if (!(std::isfinite(eta) && eta > 0.0 && eta <= 1.0))
        throw std::domain_error("eta must lie in (0, 1]");
    return -10.0 * std::log10(eta);
}

// Everything downstream of the attenuator output: detection frequency,
// measurement bandwidth, reference impedance, default integration time.
struct ReceiverConfig {
    double f0_hz = 5.5e9;
    double bandwidth_hz = 400.0e3;
    double z0_ohm = 50.0;
    double t_int_s = 1.0;

    void validate() const {
        detail::require(detail::finite(f0_hz) && f0_hz > 0.0,
                        "receiver: f0_hz must be positive");
        detail::require(detail::finite(bandwidth_hz) && bandwidth_hz > 0.0,
                        "receiver: bandwidth_hz must be positive");
        detail::require(bandwidth_hz < f0_hz,
                        "receiver: bandwidth must be smaller than the carrier frequency");
        detail::require(detail::finite(z0_ohm) && z0_ohm > 0.0,
                        "receiver: z0_ohm must be positive");
        detail::require(detail::finite(t_int_s) && t_int_s > 0.0,
                        "receiver: t_int_s must be positive");
    }

    // The narrowband emission formula assumes B << f0; callers should warn
    // (not fail) when this is violated.
    bool narrowband_ok() const { return bandwidth_hz / f0_hz < 0.01; }
};

// Calibration triple. kappa is the detected power per photon number times
// z0, so model power is always kappa/z0 * (photon-number bracket); its power
// unit follows whatever unit the fitted dataset was recorded in. n_h is the
// amplifier-chain noise photon number, eta the attenuator transmissivity.
struct CalibrationParams {
    double kappa = 1.0;
    double n_h = 0.0;
    double eta = 1.0;

    void validate() const {
        detail::require(detail::finite(kappa) && kappa > 0.0,
                        "calibration: kappa must be positive");
        detail::require(detail::finite(n_h) && n_h >= 0.0,
                        "calibration: n_h must be non-negative");
        detail::require(detail::finite(eta) && eta > 0.0 && eta <= 1.0,
                        "calibration: eta must lie in (0, 1]");
    }

    double loss_db() const { return loss_db_from_eta(eta); }
};

// Temperature where thermal occupation overtakes vacuum: T_cr = h f0 / 2 k_B.
inline double crossover_temperature(double f0_hz) {
    detail::require(detail::finite(f0_hz) && f0_hz > 0.0, "f0_hz must be positive");
    return constants::planck_h * f0_hz / (2.0 * constants::boltzmann_k);
}

// coth(x) for x > 0 via expm1: exact 1.0 limit once e^{2x} overflows, no
// cancellation for small x.
inline double coth_positive(double x) {
    return 1.0 + 2.0 / std::expm1(2.0 * x);
}

// Mean photon-number factor 2n + 1 = coth(h f / 2 k_B T); exactly 1 at T = 0.
inline double bose_factor(double f_hz, double t_k) {
    detail::require(detail::finite(f_hz) && f_hz > 0.0, "bose_factor: f_hz must be positive");
    detail::require(detail::finite(t_k) && t_k >= 0.0, "bose_factor: t_k must be >= 0");
    if (t_k == 0.0) return 1.0;
    return coth_positive(crossover_temperature(f_hz) / t_k);
}

// d/dT coth(T_cr / T) = csch^2(T_cr / T) * T_cr / T^2. csch^2 is written via
// expm1 so the large-argument tail underflows to 0 instead of cancelling.
inline double bose_factor_dtemp(double f_hz, double t_k) {
    detail::require(detail::finite(f_hz) && f_hz > 0.0, "bose_factor_dtemp: f_hz must be positive");
    detail::require(detail::finite(t_k) && t_k >= 0.0, "bose_factor_dtemp: t_k must be >= 0");
    if (t_k == 0.0) return 0.0;
    const double x = crossover_temperature(f_hz) / t_k;
    const double em = std::expm1(-2.0 * x); // e^{-2x} - 1, in (-1, 0)
    const double csch2 = 4.0 * (em + 1.0) / (em * em);
    return csch2 * x / t_k;
}

// Thermal emission of a matched attenuator into bandwidth B around f0,
// narrowband form: P = (h f0 B / 2) coth(h f0 / 2 k_B T). Needs B << f0.
inline double planck_power(double t_att_k, const ReceiverConfig& cfg) {
    cfg.validate();
    return 0.5 * constants::planck_h * cfg.f0_hz * cfg.bandwidth_hz *
           bose_factor(cfg.f0_hz, t_att_k);
}

// Exact band integral of the same emission, trapezoid rule over
// [f0 - B/2, f0 + B/2]. The integrand is smooth, so 101 points already sit
// far below double rounding for any realistic B/f0; fewer are not allowed.
inline double planck_power_band(double t_att_k, const ReceiverConfig& cfg, int n_points = 101) {
    cfg.validate();
    detail::require(n_points >= 101, "planck_power_band: n_points must be >= 101");
    const double lo = cfg.f0_hz - 0.5 * cfg.bandwidth_hz;
    const double hi = cfg.f0_hz + 0.5 * cfg.bandwidth_hz;
    const double step = (hi - lo) / (n_points - 1);
    double sum = 0.0;
    for (int i = 0; i < n_points; ++i) {
        const double f = lo + step * i;
        const double w = (i == 0 || i == n_points - 1) ? 0.5 : 1.0;
        sum += w * 0.5 * constants::planck_h * f * bose_factor(f, t_att_k);
    }
    return sum * step;
}

// Calibrated detector reading for attenuator temperature t_att and
// environment temperature t_mc:
//   P = (kappa/z0) * [ eta/2 coth(u_att) + (1-eta)/2 coth(u_mc) + n_h ]
inline double detected_power(const CalibrationParams& p, double t_att_k, double t_mc_k,
                             const ReceiverConfig& cfg) {
    p.validate();
    cfg.validate();
    const double c_att = bose_factor(cfg.f0_hz, t_att_k);
    const double c_mc = bose_factor(cfg.f0_hz, t_mc_k);
    return p.kappa / cfg.z0_ohm * (0.5 * p.eta * c_att + 0.5 * (1.0 - p.eta) * c_mc + p.n_h);
}

struct DetectedPowerGradient {
    double d_kappa;
    double d_n_h;
    double d_eta;
    double d_t_att;
    double d_t_mc;
};

// Analytic partials of detected_power; shares its validation.
inline DetectedPowerGradient detected_power_gradient(const CalibrationParams& p, double t_att_k,
                                                     double t_mc_k, const ReceiverConfig& cfg) {
    p.validate();
    cfg.validate();
    const double c_att = bose_factor(cfg.f0_hz, t_att_k);
    const double c_mc = bose_factor(cfg.f0_hz, t_mc_k);
    const double scale = p.kappa / cfg.z0_ohm;
    DetectedPowerGradient g;
    g.d_kappa = (0.5 * p.eta * c_att + 0.5 * (1.0 - p.eta) * c_mc + p.n_h) / cfg.z0_ohm;
    g.d_n_h = scale;
    g.d_eta = 0.5 * scale * (c_att - c_mc);
    g.d_t_att = 0.5 * scale * p.eta * bose_factor_dtemp(cfg.f0_hz, t_att_k);
    g.d_t_mc = 0.5 * scale * (1.0 - p.eta) * bose_factor_dtemp(cfg.f0_hz, t_mc_k);
    return g;
}

// Equipartition-limit spacing between environment curves separated by
// delta_t: dP = (kappa/z0)(1 - eta) k_B dT / (h f0) = (kappa/z0)(1 - eta) dT / (2 T_cr).
inline double curve_spacing(const CalibrationParams& p, double delta_t_k,
                            const ReceiverConfig& cfg) {
    p.validate();
    cfg.validate();
    detail::require(detail::finite(delta_t_k) && delta_t_k > 0.0,
                    "curve_spacing: delta_t_k must be positive");
    return 0.5 * p.kappa / cfg.z0_ohm * (1.0 - p.eta) * delta_t_k /
           crossover_temperature(cfg.f0_hz);
}

// Radiometer equation: rms power scatter sigma_P = P / sqrt(B t_int).
inline double radiometer_sigma(double power, double bandwidth_hz, double t_int_s) {
    detail::require(detail::finite(power) && power >= 0.0,
                    "radiometer_sigma: power must be >= 0");
    detail::require(detail::finite(bandwidth_hz) && bandwidth_hz > 0.0,
                    "radiometer_sigma: bandwidth_hz must be positive");
    detail::require(detail::finite(t_int_s) && t_int_s > 0.0,
                    "radiometer_sigma: t_int_s must be positive");
    return power / std::sqrt(bandwidth_hz * t_int_s);
}

} // namespace planck2d
