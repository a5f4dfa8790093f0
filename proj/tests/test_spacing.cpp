#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include <planck2d/simulate.hpp>
#include <planck2d/spacing.hpp>

using namespace planck2d;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

CalibrationParams fixture_truth() {
    CalibrationParams p;
    p.kappa = 1.15;
    p.n_h = 6.83;
    p.eta = eta_from_loss_db(2.79);
    return p;
}

// Curves on one shared T_att grid, exact model powers, optional per-curve
// transmissivity override. Shared grids make the spacing algebra exact.
SweepDataset shared_grid_dataset(const std::vector<double>& t_mc,
                                 const std::vector<double>& etas, double sigma) {
    const ReceiverConfig cfg;
    const CalibrationParams base = fixture_truth();
    SweepDataset ds;
    for (std::size_t c = 0; c < t_mc.size(); ++c) {
        CalibrationParams p = base;
        p.eta = etas.empty() ? base.eta : etas[c];
        PlanckCurve curve;
        curve.t_mc_k = t_mc[c];
        for (double t = 0.30; t < 0.601; t += 0.05)
            curve.points.push_back({t, detected_power(p, t, t_mc[c], cfg), sigma});
        ds.curves.push_back(curve);
    }
    return ds;
}

} // namespace

TEST_CASE("spacing on a shared grid is exact") {
    const std::vector<double> t_mc{0.10, 0.15, 0.20, 0.25};
    const SweepDataset ds = shared_grid_dataset(t_mc, {}, 0.01);
    const CalibrationParams p = fixture_truth();
    const ReceiverConfig cfg;

    const SpacingResult sr = spacing_analysis(ds);
    CHECK_THAT(sr.t_cr_k, WithinRel(crossover_temperature(cfg.f0_hz), 1e-15));
    CHECK(sr.threshold_t_cr_multiple == 2.0);
    REQUIRE(sr.entries.size() == 3);

    // constant eta: every coth-normalized coupling equals kappa (1-eta) / 2 z0
    const double expect = 0.5 * p.kappa / cfg.z0_ohm * (1.0 - p.eta);
    for (const auto& e : sr.entries) {
        REQUIRE(e.ok);
        CHECK(e.n_common == 7);
        const double dcoth =
            bose_factor(cfg.f0_hz, e.t_mc_hi_k) - bose_factor(cfg.f0_hz, e.t_mc_lo_k);
        CHECK_THAT(e.delta_p, WithinRel(expect * dcoth, 1e-12));
        CHECK_THAT(e.coupling, WithinRel(expect, 1e-12));
        // equal sigmas, knot-aligned grids: var per term is 2 sigma^2
        CHECK_THAT(e.coupling_sigma,
                   WithinRel(std::sqrt(2.0 * 0.01 * 0.01 / 7.0) / dcoth, 1e-12));
        CHECK(e.noise_map.size() == 2);
        CHECK(e.noise_map[0].first == e.index);
        CHECK(e.noise_map[1].first == e.index + 1);
    }
    // raw offsets are NOT constant across pairs even with constant eta: the
    // slope of the bose factor grows with temperature toward its
    // linear-region value 1/t_cr, so equal t_mc steps give growing offsets
    CHECK(sr.entries[0].delta_p < sr.entries[1].delta_p);
    CHECK(sr.entries[1].delta_p < sr.entries[2].delta_p);
    const double plateau = expect * 0.05 / crossover_temperature(cfg.f0_hz);
    CHECK(sr.entries[2].delta_p < plateau);
}

TEST_CASE("spacing through the simulation pipeline") {
    const SweepPlan plan = plan_sweep({0.10, 0.15, 0.20, 0.25, 0.30, 0.35}, 20, 0.025,
                                      default_thermal_model());
    NoiseConfig noise;
    noise.mode = NoiseConfig::Mode::noiseless;
    const SweepDataset ds = simulate_dataset(fixture_truth(), plan, ReceiverConfig{}, noise);
    const SpacingResult sr = spacing_analysis(ds);
    REQUIRE(sr.entries.size() == 5);
    const double expect = 0.5 * 1.15 / 50.0 * (1.0 - eta_from_loss_db(2.79));
    for (const auto& e : sr.entries) {
        REQUIRE(e.ok);
        // grids differ per curve, so the dense curve is interpolated; the
        // model curvature in the linear region keeps the bias tiny
        CHECK_THAT(e.coupling, WithinRel(expect, 1e-3));
    }
}

TEST_CASE("linear region threshold is honored") {
    const std::vector<double> t_mc{0.10, 0.15};
    const SweepDataset ds = shared_grid_dataset(t_mc, {}, 0.01);
    // threshold 2 T_cr ~ 0.264 K keeps all 7 grid points; 3 T_cr ~ 0.396 K
    // drops the first two
    const SpacingResult wide = spacing_analysis(ds, 2.0);
    const SpacingResult tight = spacing_analysis(ds, 3.0);
    REQUIRE(wide.entries[0].ok);
    REQUIRE(tight.entries[0].ok);
    CHECK(wide.entries[0].n_common == 7);
    CHECK(tight.entries[0].n_common == 5);
    CHECK(tight.threshold_t_cr_multiple == 3.0);
    CHECK_THROWS_AS(spacing_analysis(ds, 0.0), std::invalid_argument);
}

TEST_CASE("spacing failure modes are per pair") {
    const ReceiverConfig cfg;
    const CalibrationParams p = fixture_truth();
    SweepDataset ds;
    // curve entirely below the linear region
    PlanckCurve cold;
    cold.t_mc_k = 0.05;
    for (double t : {0.10, 0.15, 0.20})
        cold.points.push_back({t, detected_power(p, t, 0.05, cfg), 0.01});
    ds.curves.push_back(cold);
    for (double t_mc : {0.10, 0.15}) {
        PlanckCurve c;
        c.t_mc_k = t_mc;
        for (double t : {0.30, 0.40, 0.50})
            c.points.push_back({t, detected_power(p, t, t_mc, cfg), 0.01});
        ds.curves.push_back(c);
    }
    const SpacingResult sr = spacing_analysis(ds);
    REQUIRE(sr.entries.size() == 2);
    CHECK_FALSE(sr.entries[0].ok);
    CHECK_THAT(sr.entries[0].message, ContainsSubstring("no linear-region points"));
    CHECK(sr.entries[1].ok);

    // disjoint linear-region supports
    SweepDataset disjoint;
    PlanckCurve a;
    a.t_mc_k = 0.10;
    for (double t : {0.30, 0.35, 0.40})
        a.points.push_back({t, detected_power(p, t, 0.10, cfg), 0.01});
    PlanckCurve b;
    b.t_mc_k = 0.15;
    for (double t : {0.45, 0.50, 0.55})
        b.points.push_back({t, detected_power(p, t, 0.15, cfg), 0.01});
    disjoint.curves = {a, b};
    const SpacingResult sd = spacing_analysis(disjoint);
    REQUIRE(sd.entries.size() == 1);
    CHECK_FALSE(sd.entries[0].ok);
    CHECK_THAT(sd.entries[0].message, ContainsSubstring("no overlapping"));

    SweepDataset single;
    single.curves = {a};
    CHECK_THROWS_AS(spacing_analysis(single), std::invalid_argument);
}

TEST_CASE("zero sigma points switch the pair to uniform weights") {
    const std::vector<double> t_mc{0.10, 0.15};
    SweepDataset ds = shared_grid_dataset(t_mc, {}, 0.01);
    ds.curves[0].points[0].sigma = 0.0;
    const SpacingResult sr = spacing_analysis(ds);
    REQUIRE(sr.entries[0].ok);
    // exact data: the offset is unchanged, only its error model differs
    const double expect = 0.5 * 1.15 / 50.0 * (1.0 - eta_from_loss_db(2.79));
    CHECK_THAT(sr.entries[0].coupling, WithinRel(expect, 1e-12));
}

TEST_CASE("constant transmissivity reads as constant") {
    const std::vector<double> t_mc{0.10, 0.15, 0.20, 0.25};
    const SweepDataset exact = shared_grid_dataset(t_mc, {}, 0.01);
    const DriftReport rep = detect_eta_drift(spacing_analysis(exact));
    CHECK(rep.verdict == DriftVerdict::constant);
    CHECK(rep.dof == 2);
    CHECK(rep.statistic < 1e-10);
    CHECK(rep.p_value > 0.999);
    CHECK_THAT(rep.mean_coupling,
               WithinRel(0.5 * 1.15 / 50.0 * (1.0 - eta_from_loss_db(2.79)), 1e-12));
    CHECK(to_string(rep.verdict) == "constant");

    // full pipeline with radiometer noise
    const SweepPlan plan = plan_sweep({0.10, 0.15, 0.20, 0.25, 0.30, 0.35}, 60, 0.025,
                                      default_thermal_model());
    NoiseConfig noise;
    noise.rng_seed = 101;
    const SweepDataset noisy = simulate_dataset(fixture_truth(), plan, ReceiverConfig{}, noise);
    const DriftReport rn = detect_eta_drift(spacing_analysis(noisy));
    CHECK(rn.verdict == DriftVerdict::constant);
    CHECK(rn.p_value > 0.05);
}

TEST_CASE("a transmissivity step reads as drifting") {
    const std::vector<double> t_mc{0.10, 0.15, 0.20, 0.25};
    const double eta = eta_from_loss_db(2.79);
    // hottest curve sees 10 percent lower transmissivity
    SweepDataset ds = shared_grid_dataset(t_mc, {eta, eta, eta, 0.9 * eta}, 1e-4);
    const SpacingResult sr = spacing_analysis(ds);
    const DriftReport rep = detect_eta_drift(sr);
    CHECK(rep.verdict == DriftVerdict::drifting);
    CHECK(rep.p_value < 1e-6);
    CHECK(to_string(rep.verdict) == "drifting");

    // the affected pair deviates by far more than three of its sigmas, and
    // the drop in transmissivity LOWERS the normalized coupling
    const auto& last = sr.entries[2];
    CHECK(std::abs(last.coupling - rep.mean_coupling) > 3.0 * last.coupling_sigma);
    CHECK(last.coupling < sr.entries[0].coupling);

    // same step through the simulator, milder drop, radiometer noise
    const SweepPlan plan = plan_sweep({0.10, 0.15, 0.20, 0.25, 0.30, 0.35}, 200, 0.025,
                                      default_thermal_model());
    NoiseConfig noise;
    noise.rng_seed = 7;
    std::vector<double> etas;
    for (const auto& e : plan.entries) etas.push_back(e.t_mc_k > 0.30 ? 0.90 * eta : eta);
    const SweepDataset noisy =
        simulate_dataset_with_eta_profile(fixture_truth(), plan, ReceiverConfig{}, noise, etas);
    const DriftReport rn = detect_eta_drift(spacing_analysis(noisy));
    CHECK(rn.verdict == DriftVerdict::drifting);
}

TEST_CASE("drift detection input validation") {
    const std::vector<double> t_mc{0.10, 0.15, 0.20};
    const SweepDataset ds = shared_grid_dataset(t_mc, {}, 0.01);
    // two pairs only: not enough for a homogeneity test
    CHECK_THROWS_AS(detect_eta_drift(spacing_analysis(ds)), InsufficientDataError);

    const SweepDataset ok = shared_grid_dataset({0.10, 0.15, 0.20, 0.25}, {}, 0.01);
    const SpacingResult sr = spacing_analysis(ok);
    CHECK_THROWS_AS(detect_eta_drift(sr, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(detect_eta_drift(sr, 1.0), std::invalid_argument);

    SpacingResult zero_sigma = sr;
    for (auto& e : zero_sigma.entries) e.coupling_sigma = 0.0;
    CHECK_THROWS_AS(detect_eta_drift(zero_sigma), std::invalid_argument);
}
