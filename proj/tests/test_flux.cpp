#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <utility>
#include <vector>

#include <planck2d/flux.hpp>
#include <planck2d/simulate.hpp>

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

SnailModel test_snail() {
    return make_snail_table({0.0, 60.0, 100.0, 120.0, 140.0}, {0.0, 0.05, 0.30, 0.55, 0.90});
}

// One full sweep dataset per bias point, transmissivity scaled by the
// bias-dependent excess loss.
std::vector<std::pair<double, SweepDataset>> bias_datasets(
    const std::vector<double>& biases, NoiseConfig::Mode mode, std::uint64_t seed) {
    const SnailModel snail = test_snail();
    const SweepPlan plan = plan_sweep({0.10, 0.20, 0.30}, 12, 0.025, default_thermal_model());
    std::vector<std::pair<double, SweepDataset>> out;
    for (std::size_t i = 0; i < biases.size(); ++i) {
        CalibrationParams truth = fixture_truth();
        truth.eta *= std::pow(10.0, -snail_excess_loss(snail, biases[i]) / 10.0);
        NoiseConfig noise;
        noise.mode = mode;
        noise.rng_seed = derive_seed(seed, i);
        out.emplace_back(biases[i], simulate_dataset(truth, plan, ReceiverConfig{}, noise));
    }
    return out;
}

} // namespace

TEST_CASE("flux sweep recovers the excess loss curve") {
    const std::vector<double> biases{0.0, 60.0, 100.0, 120.0, 140.0};
    auto data = bias_datasets(biases, NoiseConfig::Mode::noiseless, 0);
    // shuffle to prove ordering is restored
    std::swap(data[0], data[3]);
    const FluxLossResult res = flux_loss_sweep(data);
    REQUIRE(res.records.size() == 5);
    REQUIRE(res.fits.size() == 5);
    CHECK(res.all_converged());
    const SnailModel snail = test_snail();
    for (std::size_t i = 0; i < res.records.size(); ++i) {
        const auto& r = res.records[i];
        CHECK(r.i_dc_ua == biases[i]); // sorted ascending
        CHECK(r.source == SweepSource::planck2d);
        CHECK_THAT(r.delta_loss_db, WithinAbs(snail_excess_loss(snail, r.i_dc_ua), 1e-6));
        CHECK(res.fits[i].i_dc_ua == r.i_dc_ua);
    }
    CHECK(res.records[0].delta_loss_db == 0.0);
    CHECK(res.records[0].sigma_db == 0.0);
    CHECK_NOTHROW(validate_flux_sweep(res.records));
}

TEST_CASE("flux sweep argument validation") {
    auto data = bias_datasets({0.0, 100.0}, NoiseConfig::Mode::noiseless, 0);
    CHECK_THROWS_AS(flux_loss_sweep({data[0]}), std::invalid_argument);

    auto no_zero = bias_datasets({60.0, 100.0}, NoiseConfig::Mode::noiseless, 0);
    CHECK_THROWS_MATCHES(flux_loss_sweep(no_zero), std::invalid_argument,
                         Catch::Matchers::MessageMatches(ContainsSubstring("zero-bias")));

    auto dup = bias_datasets({0.0, 100.0}, NoiseConfig::Mode::noiseless, 0);
    dup.push_back(dup.back());
    CHECK_THROWS_MATCHES(flux_loss_sweep(dup), std::invalid_argument,
                         Catch::Matchers::MessageMatches(ContainsSubstring("duplicate")));
}

TEST_CASE("vna trace sign adapter") {
    const SnailModel snail = test_snail();
    const std::vector<double> grid{-120.0, -60.0, 0.0, 60.0, 120.0};
    const auto trace = simulate_vna_trace(snail, grid, 0.0, 1);
    const auto losses = loss_from_vna_trace(trace);
    for (std::size_t i = 0; i < losses.size(); ++i) {
        CHECK_THAT(losses[i].delta_loss_db,
                   WithinAbs(snail_excess_loss(snail, losses[i].i_dc_ua), 1e-15));
        CHECK(losses[i].source == SweepSource::vna);
    }
    CHECK(losses[2].delta_loss_db == 0.0);
    CHECK(!std::signbit(losses[2].delta_loss_db));

    auto planck_sourced = trace;
    planck_sourced[0].source = SweepSource::planck2d;
    CHECK_THROWS_AS(loss_from_vna_trace(planck_sourced), std::invalid_argument);
}

TEST_CASE("planck and vna sweeps agree without dispersion") {
    const std::vector<double> biases{0.0, 60.0, 100.0, 120.0, 140.0};
    const FluxLossResult planck =
        flux_loss_sweep(bias_datasets(biases, NoiseConfig::Mode::radiometer, 5));
    REQUIRE(planck.all_converged());
    const SnailModel snail = test_snail();
    // denser grid than the planck sweep: exercises both the exact-match and
    // the interpolation paths
    std::vector<double> grid;
    for (double b = 0.0; b < 140.1; b += 20.0) grid.push_back(b);
    const auto vna = loss_from_vna_trace(simulate_vna_trace(snail, grid, 0.01, 9));

    const SweepComparison cmp = compare_sweeps(planck.records, vna);
    REQUIRE(cmp.points.size() == 5);
    CHECK(cmp.rms_db < 0.2);
    CHECK(cmp.n_flagged == 0);
    for (const auto& pt : cmp.points) CHECK(std::abs(pt.diff_db) <= 3.0 * pt.sigma_db);

    // an injected level shift on one bias is flagged as a dispersion
    // candidate
    auto shifted = vna;
    for (auto& r : shifted)
        if (r.i_dc_ua == 120.0) r.delta_loss_db += 0.8;
    const SweepComparison bad = compare_sweeps(planck.records, shifted);
    CHECK(bad.n_flagged >= 1);
    CHECK(bad.max_abs_db > 0.5);
    bool found = false;
    for (const auto& pt : bad.points)
        if (pt.i_dc_ua == 120.0) found = pt.dispersion_candidate;
    CHECK(found);
}

TEST_CASE("sweep comparison grid handling") {
    std::vector<FluxSweepRecord> a{{0.0, 0.0, 0.0, SweepSource::planck2d},
                                   {50.0, 0.5, 0.01, SweepSource::planck2d},
                                   {100.0, 1.0, 0.01, SweepSource::planck2d}};
    std::vector<FluxSweepRecord> b{{-10.0, -0.1, 0.01, SweepSource::vna},
                                   {40.0, 0.4, 0.01, SweepSource::vna},
                                   {60.0, 0.6, 0.01, SweepSource::vna}};
    // only 0 and 50 fall inside b's range; 50 is interpolated exactly
    const SweepComparison cmp = compare_sweeps(a, b);
    REQUIRE(cmp.points.size() == 2);
    CHECK(cmp.points[1].i_dc_ua == 50.0);
    CHECK_THAT(cmp.points[1].diff_db, WithinAbs(0.0, 1e-15));

    std::vector<FluxSweepRecord> far{{500.0, 0.1, 0.01, SweepSource::vna},
                                     {600.0, 0.2, 0.01, SweepSource::vna}};
    CHECK_THROWS_MATCHES(compare_sweeps(a, far), std::invalid_argument,
                         Catch::Matchers::MessageMatches(ContainsSubstring("overlap")));

    // exact zero sigmas: any nonzero difference is a candidate
    std::vector<FluxSweepRecord> exact_a{{0.0, 0.0, 0.0, SweepSource::planck2d},
                                         {50.0, 0.5, 0.0, SweepSource::planck2d}};
    std::vector<FluxSweepRecord> exact_b{{0.0, 0.0, 0.0, SweepSource::vna},
                                         {50.0, 0.6, 0.0, SweepSource::vna}};
    const SweepComparison ce = compare_sweeps(exact_a, exact_b);
    CHECK(ce.n_flagged == 1);
    CHECK(ce.points[0].dispersion_candidate == false);
    CHECK(ce.points[1].dispersion_candidate == true);
}
