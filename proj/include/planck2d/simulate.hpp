#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "planck2d/dataset.hpp"
#include "planck2d/interp.hpp"
#include "planck2d/physics.hpp"
#include "planck2d/stats.hpp"

namespace planck2d {

// Steady-state mixing-chamber temperature as a function of the stabilized
// attenuator temperature, plus the planner-side operating caps.
struct ThermalLoadModel {
    enum class Coupling { table, power_law };
    Coupling coupling = Coupling::table;

    double base_t_mc_k = 0.1;  // unloaded chamber temperature
    double t_att_max_k = 0.65; // hard cap on the attenuator setpoint

    // table coupling: strictly increasing t_att knots, nondecreasing t_mc
    std::vector<double> table_t_att_k;
    std::vector<double> table_t_mc_k;

    // power-law coupling: base + coeff * max(0, t_att - onset)^exponent,
    // defined on [0, domain_max]
    double coeff = 0.0;
    double exponent = 2.0;
    double onset_k = 0.0;
    double domain_max_k = 1.2;

    void validate() const {
        detail::require(detail::finite(base_t_mc_k) && base_t_mc_k > 0.0,
                        "thermal model: base_t_mc must be positive");
        detail::require(detail::finite(t_att_max_k) && t_att_max_k > 0.0,
                        "thermal model: t_att_max must be positive");
        if (coupling == Coupling::table) {
            detail::check_knots(table_t_att_k, table_t_mc_k, "thermal table");
            for (std::size_t i = 0; i + 1 < table_t_mc_k.size(); ++i)
                detail::require(table_t_mc_k[i] <= table_t_mc_k[i + 1],
                                "thermal table: t_mc must be monotone nondecreasing");
            detail::require(table_t_mc_k.front() == base_t_mc_k,
                            "thermal table: first row must equal base_t_mc (unloaded point)");
        } else {
            detail::require(detail::finite(coeff) && coeff >= 0.0,
                            "thermal model: coeff must be >= 0");
            detail::require(detail::finite(exponent) && exponent > 0.0,
                            "thermal model: exponent must be positive");
            detail::require(detail::finite(onset_k) && onset_k >= 0.0,
                            "thermal model: onset must be >= 0");
            detail::require(detail::finite(domain_max_k) && domain_max_k > 0.0,
                            "thermal model: domain_max must be positive");
        }
    }

    double domain_min() const {
        return coupling == Coupling::table ? table_t_att_k.front() : 0.0;
    }
    double domain_max() const {
        return coupling == Coupling::table ? table_t_att_k.back() : domain_max_k;
    }
};

inline double steady_state_tmc(const ThermalLoadModel& model, double t_att_k) {
    model.validate();
    if (!(std::isfinite(t_att_k) && t_att_k >= model.domain_min() &&
          t_att_k <= model.domain_max())) {
        std::ostringstream msg;
        msg << "steady_state_tmc: t_att = " << t_att_k << " K outside the model domain ["
            << model.domain_min() << ", " << model.domain_max() << "] K";
        throw std::domain_error(msg.str());
    }
    if (model.coupling == ThermalLoadModel::Coupling::table)
        return linear_interp(model.table_t_att_k, model.table_t_mc_k, t_att_k);
    const double excess = std::max(0.0, t_att_k - model.onset_k);
    return model.base_t_mc_k + model.coeff * std::pow(excess, model.exponent);
}

// Largest admissible attenuator setpoint while the chamber holds
// t_mc_target: the thermal-map crossing, clipped by the operating caps.
// Empty when the target is below the unloaded base.
inline std::optional<double> thermal_ceiling(const ThermalLoadModel& model,
                                             double t_mc_target_k) {
    model.validate();
    detail::require(detail::finite(t_mc_target_k) && t_mc_target_k >= 0.0,
                    "thermal_ceiling: target must be finite and >= 0");
    if (t_mc_target_k < model.base_t_mc_k) return std::nullopt;
    const double cap = std::min(model.t_att_max_k, model.domain_max());
    if (steady_state_tmc(model, cap) <= t_mc_target_k) return cap;
    if (model.coupling == ThermalLoadModel::Coupling::table) {
        const auto& xs = model.table_t_att_k;
        const auto& ys = model.table_t_mc_k;
        std::size_t j = 0;
        for (std::size_t i = 0; i + 1 < xs.size(); ++i)
            if (ys[i] <= t_mc_target_k) j = i;
        // ys[j] <= target < ys[j+1]; the segment slope is positive here
        const double t = (t_mc_target_k - ys[j]) / (ys[j + 1] - ys[j]);
        return std::min(cap, xs[j] + t * (xs[j + 1] - xs[j]));
    }
    if (model.coeff == 0.0) return cap; // flat map never exceeds the target
    const double excess = std::pow((t_mc_target_k - model.base_t_mc_k) / model.coeff,
                                   1.0 / model.exponent);
    return std::min(cap, model.onset_k + excess);
}

// Bench-scale default: chamber pinned at 100 mK for attenuator setpoints up
// to 600 mK, convex rise beyond; attenuator capped slightly above that
// operating point.
inline ThermalLoadModel default_thermal_model() {
    ThermalLoadModel m;
    m.coupling = ThermalLoadModel::Coupling::table;
    m.base_t_mc_k = 0.1;
    m.t_att_max_k = 0.65;
    m.table_t_att_k = {0.0, 0.60, 0.70, 0.80, 0.90, 1.00, 1.10, 1.20};
    m.table_t_mc_k = {0.100, 0.100, 0.112, 0.130, 0.155, 0.190, 0.240, 0.310};
    return m;
}

struct SweepPlanEntry {
    double t_mc_k = 0.0;
    std::vector<double> t_att_k; // strictly increasing setpoints
    bool feasible = true;
    std::string reason; // populated when infeasible
};

struct SweepPlan {
    std::vector<SweepPlanEntry> entries;
    double margin_k = 0.025;
    double stabilization_tolerance_k = 1.0e-4;

    bool fully_feasible() const {
        for (const auto& e : entries)
            if (!e.feasible) return false;
        return !entries.empty();
    }

    std::string infeasibility_summary() const {
        std::ostringstream msg;
        for (const auto& e : entries)
            if (!e.feasible) msg << "T_mc = " << e.t_mc_k << " K: " << e.reason << "; ";
        return msg.str();
    }
};

// Plans one attenuator sweep per requested chamber temperature. Infeasible
// targets come back flagged with a reason instead of failing the whole plan.
inline SweepPlan plan_sweep(const std::vector<double>& t_mc_list_k, int points_per_curve,
                            double margin_k, const ThermalLoadModel& model) {
    model.validate();
    detail::require(!t_mc_list_k.empty(), "plan_sweep: empty T_mc list");
    for (std::size_t i = 0; i < t_mc_list_k.size(); ++i) {
        detail::require(detail::finite(t_mc_list_k[i]) && t_mc_list_k[i] > 0.0,
                        "plan_sweep: T_mc targets must be positive");
        if (i > 0)
            detail::require(t_mc_list_k[i - 1] < t_mc_list_k[i],
                            "plan_sweep: T_mc list must be strictly increasing");
    }
    detail::require(points_per_curve >= 2, "plan_sweep: points_per_curve must be >= 2");
    detail::require(detail::finite(margin_k) && margin_k > 0.0,
                    "plan_sweep: margin must be positive");

    SweepPlan plan;
    plan.margin_k = margin_k;
    for (double target : t_mc_list_k) {
        SweepPlanEntry e;
        e.t_mc_k = target;
        const auto ceiling = thermal_ceiling(model, target);
        if (!ceiling) {
            e.feasible = false;
            std::ostringstream msg;
            msg << "target below the unloaded base temperature (" << model.base_t_mc_k << " K)";
            e.reason = msg.str();
            plan.entries.push_back(std::move(e));
            continue;
        }
        const double start = target + margin_k;
        if (start > *ceiling) {
            e.feasible = false;
            std::ostringstream msg;
            msg << "no admissible T_att range: sweep would start at " << start
                << " K but the thermal-load ceiling is " << *ceiling << " K";
            e.reason = msg.str();
            plan.entries.push_back(std::move(e));
            continue;
        }
        // geometric grid resolves the coth curvature near T_cr and still
        // reaches deep into the linear regime
        const int n = points_per_curve;
        e.t_att_k.resize(n);
        const double ratio = *ceiling / start;
        for (int i = 0; i < n; ++i)
            e.t_att_k[i] = start * std::pow(ratio, static_cast<double>(i) / (n - 1));
        e.t_att_k.front() = start;
        e.t_att_k.back() = *ceiling;
        for (int i = 0; i + 1 < n; ++i) {
            if (!(e.t_att_k[i] < e.t_att_k[i + 1])) {
                e.feasible = false;
                e.t_att_k.clear();
                std::ostringstream msg;
                msg << "T_att range [" << start << ", " << *ceiling
                    << "] K too narrow for " << n << " distinct points";
                e.reason = msg.str();
                break;
            }
        }
        plan.entries.push_back(std::move(e));
    }
    return plan;
}

struct NoiseConfig {
    enum class Mode { noiseless, radiometer };
    Mode mode = Mode::radiometer;
    double t_int_s = 0.0; // 0: inherit the receiver's t_int
    std::uint64_t rng_seed = 0;
    double temperature_jitter_sigma_k = 1.0e-4;

    void validate() const {
        detail::require(detail::finite(t_int_s) && t_int_s >= 0.0,
                        "noise: t_int must be >= 0 (0 means receiver default)");
        detail::require(detail::finite(temperature_jitter_sigma_k) &&
                            temperature_jitter_sigma_k >= 0.0,
                        "noise: temperature_jitter_sigma must be >= 0");
    }
};

namespace detail {

inline std::string synthetic_provenance(const CalibrationParams& truth, const SweepPlan& plan,
                                        const NoiseConfig& noise, double t_int_eff_s,
                                        std::size_t points_per_curve) {
    std::ostringstream p;
    p.precision(17);
    p << "synthetic; truth kappa=" << truth.kappa << " n_h=" << truth.n_h
      << " eta=" << truth.eta
      << "; mode=" << (noise.mode == NoiseConfig::Mode::noiseless ? "noiseless" : "radiometer")
      << "; seed=" << noise.rng_seed << "; t_int_s=" << t_int_eff_s
      << "; jitter_k=" << noise.temperature_jitter_sigma_k
      << "; points_per_curve=" << points_per_curve << "; margin_k=" << plan.margin_k;
    return p.str();
}

} // namespace detail

// Forward model + noise over a fully feasible plan. Noiseless mode touches
// no RNG at all, so its output is bit-identical for any seed.
inline SweepDataset simulate_dataset(const CalibrationParams& truth, const SweepPlan& plan,
                                     const ReceiverConfig& cfg, const NoiseConfig& noise) {
    truth.validate();
    cfg.validate();
    noise.validate();
    detail::require(!plan.entries.empty(), "simulate_dataset: empty plan");
    if (!plan.fully_feasible())
        throw std::invalid_argument("simulate_dataset: plan has infeasible entries: " +
                                    plan.infeasibility_summary());

    const double t_int_eff = noise.t_int_s > 0.0 ? noise.t_int_s : cfg.t_int_s;
    SweepDataset ds;
    ds.receiver = cfg;
    ds.receiver.t_int_s = t_int_eff;
    ds.provenance = detail::synthetic_provenance(truth, plan, noise, t_int_eff,
                                                 plan.entries.front().t_att_k.size());

    std::mt19937_64 rng(noise.rng_seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const bool noisy = noise.mode == NoiseConfig::Mode::radiometer;

    for (const auto& entry : plan.entries) {
        PlanckCurve curve;
        curve.t_mc_k = entry.t_mc_k;
        for (double t_att : entry.t_att_k) {
            PowerPoint pt;
            pt.t_att_k = t_att; // recorded value is the stabilized setpoint
            if (noisy) {
                const double ta = std::max(
                    0.0, t_att + noise.temperature_jitter_sigma_k * gauss(rng));
                const double tm = std::max(
                    0.0, entry.t_mc_k + noise.temperature_jitter_sigma_k * gauss(rng));
                const double p_true = detected_power(truth, ta, tm, cfg);
                pt.sigma = radiometer_sigma(p_true, cfg.bandwidth_hz, t_int_eff);
                pt.power = p_true + pt.sigma * gauss(rng);
            } else {
                pt.power = detected_power(truth, t_att, entry.t_mc_k, cfg);
                pt.sigma = 1.0; // unit placeholder, marks "no noise model"
            }
            curve.points.push_back(pt);
        }
        ds.curves.push_back(std::move(curve));
    }
    ds.validate();
    return ds;
}

// Drift-fixture helper: same contract as simulate_dataset but with one
// transmissivity per plan entry, each curve drawing from its own
// derive_seed(seed, curve index) stream so curves stay independent.
inline SweepDataset simulate_dataset_with_eta_profile(const CalibrationParams& truth,
                                                      const SweepPlan& plan,
                                                      const ReceiverConfig& cfg,
                                                      const NoiseConfig& noise,
                                                      const std::vector<double>& eta_per_entry) {
    detail::require(eta_per_entry.size() == plan.entries.size(),
                    "simulate_dataset_with_eta_profile: one eta per plan entry required");
    SweepDataset out;
    bool first = true;
    for (std::size_t i = 0; i < plan.entries.size(); ++i) {
        CalibrationParams truth_i = truth;
        truth_i.eta = eta_per_entry[i];
        SweepPlan single;
        single.margin_k = plan.margin_k;
        single.stabilization_tolerance_k = plan.stabilization_tolerance_k;
        single.entries.push_back(plan.entries[i]);
        NoiseConfig noise_i = noise;
        noise_i.rng_seed = derive_seed(noise.rng_seed, i);
        SweepDataset part = simulate_dataset(truth_i, single, cfg, noise_i);
        if (first) {
            out = part;
            first = false;
        } else {
            out.curves.push_back(part.curves.front());
        }
    }
    out.provenance += "; eta profile per curve";
    out.validate();
    return out;
}

// Bias-dependent excess attenuation standing in for the flux-tunable
// element: a verbatim sample table (monotone-cubic interpolation; tables
// covering only I >= 0 are mirrored as even) or an even polynomial.
struct SnailModel {
    enum class Kind { table, polynomial };
    Kind kind = Kind::table;

    std::vector<double> bias_ua;
    std::vector<double> excess_db;

    std::vector<double> even_coeffs; // c_k multiplies I^(2(k+1)); no constant term
    double bias_max_ua = 0.0;        // polynomial domain is [-bias_max, bias_max]

    bool even_mirrored() const {
        return kind == Kind::table && bias_ua.front() >= 0.0;
    }

    double domain_min_ua() const {
        if (kind == Kind::polynomial) return -bias_max_ua;
        return even_mirrored() ? -bias_ua.back() : bias_ua.front();
    }
    double domain_max_ua() const {
        return kind == Kind::polynomial ? bias_max_ua : bias_ua.back();
    }

    void validate() const {
        if (kind == Kind::table) {
            detail::check_knots(bias_ua, excess_db, "snail table");
            bool has_zero = false;
            for (std::size_t i = 0; i < bias_ua.size(); ++i) {
                if (bias_ua[i] == 0.0) {
                    has_zero = true;
                    detail::require(excess_db[i] == 0.0,
                                    "snail table: excess loss at zero bias must be exactly 0 dB");
                }
            }
            detail::require(has_zero, "snail table: must tabulate the zero-bias reference row");
        } else {
            detail::require(!even_coeffs.empty(), "snail polynomial: needs at least one coefficient");
            for (double c : even_coeffs)
                detail::require(detail::finite(c), "snail polynomial: coefficients must be finite");
            detail::require(detail::finite(bias_max_ua) && bias_max_ua > 0.0,
                            "snail polynomial: bias_max must be positive");
        }
    }
};

inline SnailModel make_snail_table(std::vector<double> bias_ua, std::vector<double> excess_db) {
    SnailModel m;
    m.kind = SnailModel::Kind::table;
    m.bias_ua = std::move(bias_ua);
    m.excess_db = std::move(excess_db);
    m.validate();
    return m;
}

inline SnailModel make_snail_polynomial(std::vector<double> even_coeffs, double bias_max_ua) {
    SnailModel m;
    m.kind = SnailModel::Kind::polynomial;
    m.even_coeffs = std::move(even_coeffs);
    m.bias_max_ua = bias_max_ua;
    m.validate();
    return m;
}

inline double snail_excess_loss(const SnailModel& model, double i_dc_ua) {
    model.validate();
    if (!(std::isfinite(i_dc_ua) && i_dc_ua >= model.domain_min_ua() &&
          i_dc_ua <= model.domain_max_ua())) {
        std::ostringstream msg;
        msg << "snail_excess_loss: bias " << i_dc_ua << " uA outside the tabulated domain ["
            << model.domain_min_ua() << ", " << model.domain_max_ua() << "] uA";
        throw std::domain_error(msg.str());
    }
    if (model.kind == SnailModel::Kind::polynomial) {
        const double x = i_dc_ua * i_dc_ua;
        double acc = 0.0;
        for (std::size_t k = model.even_coeffs.size(); k-- > 0;)
            acc = model.even_coeffs[k] + acc * x;
        return acc * x;
    }
    const double q = model.even_mirrored() ? std::abs(i_dc_ua) : i_dc_ua;
    PchipInterpolant interp(model.bias_ua, model.excess_db);
    return interp(q);
}

// VNA-style relative transmission trace: delta_tau = -excess_loss + noise,
// re-referenced so the zero-bias record is exactly 0 dB (the reference trace
// cancels identically there).
inline std::vector<FluxSweepRecord> simulate_vna_trace(const SnailModel& model,
                                                       const std::vector<double>& i_grid_ua,
                                                       double noise_sigma_db,
                                                       std::uint64_t seed) {
    model.validate();
    detail::require(i_grid_ua.size() >= 2, "simulate_vna_trace: grid needs at least two points");
    detail::require(detail::finite(noise_sigma_db) && noise_sigma_db >= 0.0,
                    "simulate_vna_trace: noise_sigma must be >= 0");
    bool has_zero = false;
    for (std::size_t i = 0; i < i_grid_ua.size(); ++i) {
        detail::require(detail::finite(i_grid_ua[i]), "simulate_vna_trace: grid must be finite");
        if (i > 0)
            detail::require(i_grid_ua[i - 1] < i_grid_ua[i],
                            "simulate_vna_trace: grid must be strictly increasing");
        if (i_grid_ua[i] == 0.0) has_zero = true;
    }
    detail::require(has_zero, "simulate_vna_trace: grid must contain the zero-bias reference");

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<FluxSweepRecord> out;
    out.reserve(i_grid_ua.size());
    for (double i_dc : i_grid_ua) {
        FluxSweepRecord r;
        r.i_dc_ua = i_dc;
        r.source = SweepSource::vna;
        double v = -snail_excess_loss(model, i_dc);
        if (noise_sigma_db > 0.0) v += noise_sigma_db * gauss(rng);
        if (i_dc == 0.0) {
            r.delta_loss_db = 0.0; // re-referenced against itself
            r.sigma_db = 0.0;
        } else {
            r.delta_loss_db = v;
            r.sigma_db = noise_sigma_db;
        }
        out.push_back(r);
    }
    return out;
}

} // namespace planck2d
