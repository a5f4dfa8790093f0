#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include <planck2d/physics.hpp>
#include <planck2d/tomography.hpp>

using namespace planck2d;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("squeezing level and variance round trip") {
    // -10*log10(0.5/0.25) frozen against a high-precision evaluation
    CHECK_THAT(squeezing_level(0.5), WithinRel(-3.0102999566398120, 1e-15));
    CHECK(squeezing_level(0.25) == 0.0);
    CHECK_THAT(variance_from_squeezing(squeezing_level(0.17)), WithinRel(0.17, 1e-14));
    CHECK_THAT(squeezing_level(variance_from_squeezing(4.2)), WithinRel(4.2, 1e-13));
    CHECK_THROWS_AS(squeezing_level(0.0), std::domain_error);
    CHECK_THROWS_AS(squeezing_level(-0.1), std::domain_error);
}

TEST_CASE("gaussian state summaries") {
    // 3 dB squeezed pure state: var_s = 0.25*10^(-0.3), var_a = 0.0625/var_s
    const GaussianStateSummary pure = GaussianStateSummary::from_levels(3.0, 1.0);
    CHECK_THAT(pure.var_s, WithinRel(0.12529680840681807, 1e-14));
    CHECK_THAT(pure.var_a, WithinRel(0.4988155787422199, 1e-14));
    CHECK_THAT(pure.squeezing_db, WithinRel(3.0, 1e-13));
    CHECK_THAT(pure.purity, WithinRel(1.0, 1e-13));
    CHECK(pure.physical);

    const GaussianStateSummary vac = GaussianStateSummary::from_variances(0.25, 0.25);
    CHECK(vac.squeezing_db == 0.0);
    CHECK_THAT(vac.purity, WithinRel(1.0, 1e-14));

    // variances are ordered on entry
    const GaussianStateSummary swapped = GaussianStateSummary::from_variances(0.5, 0.2);
    CHECK(swapped.var_s == 0.2);
    CHECK(swapped.var_a == 0.5);

    // uncertainty-violating pair is reported, not rejected
    const GaussianStateSummary bogus = GaussianStateSummary::from_variances(0.2, 0.3);
    CHECK_FALSE(bogus.physical);
    CHECK(bogus.purity > 1.0);

    CHECK_THROWS_AS(GaussianStateSummary::from_variances(0.0, 0.25), std::invalid_argument);
    CHECK_THROWS_AS(GaussianStateSummary::from_variances(0.25, -1.0), std::invalid_argument);
    CHECK_THROWS_MATCHES(GaussianStateSummary::from_levels(3.0, 1.5), std::invalid_argument,
                         Catch::Matchers::MessageMatches(
                             ContainsSubstring("purity must lie in (0, 1]")));
    CHECK_THROWS_AS(GaussianStateSummary::from_levels(3.0, 0.0), std::invalid_argument);
}

TEST_CASE("purity from variances") {
    CHECK_THAT(purity(0.25, 0.25), WithinRel(1.0, 1e-15));
    // mixed state used in the miscalibration study
    CHECK_THAT(purity(0.1430, 0.4653), WithinRel(0.9691822767377277, 1e-14));
    CHECK_THROWS_AS(purity(0.0, 0.25), std::domain_error);
    CHECK_THROWS_AS(purity(0.25, 0.0), std::domain_error);
}

TEST_CASE("gain miscalibration biases the inferred state") {
    CalibrationPair pair;
    pair.cal_true.kappa = 1.15;
    pair.cal_assumed.kappa = 1.34;
    CHECK_THAT(pair.ratio(), WithinRel(1.15 / 1.34, 1e-15));

    const GaussianStateSummary truth = GaussianStateSummary::from_levels(3.0, 1.0);
    const GaussianStateSummary seen = miscalibrate(truth, pair);

    // var' = r*var + 0.25*(1 - r); frozen against an independent evaluation
    CHECK_THAT(seen.var_s, WithinRel(0.14297860422973193, 1e-14));
    CHECK_THAT(seen.var_a, WithinRel(0.46353575787578574, 1e-14));
    CHECK_THAT(seen.squeezing_db, WithinRel(2.4266895554386952, 1e-13));
    CHECK_THAT(seen.purity, WithinRel(0.9710975560565288, 1e-13));
    CHECK(seen.physical);

    // an 18 percent gain overestimate costs about half a dB of apparent
    // squeezing and a few percent of purity
    CHECK_THAT(seen.squeezing_db, WithinAbs(2.45, 0.05));
    CHECK_THAT(seen.purity, WithinAbs(0.96, 0.02));

    // identity calibration is a no-op
    CalibrationPair id;
    id.cal_true.kappa = 1.34;
    id.cal_assumed.kappa = 1.34;
    const GaussianStateSummary same = miscalibrate(truth, id);
    CHECK(same.var_s == truth.var_s);
    CHECK(same.var_a == truth.var_a);

    // ratio > 1 can push a strongly squeezed variance below zero
    CalibrationPair inflate;
    inflate.cal_true.kappa = 2.0;
    inflate.cal_assumed.kappa = 1.0;
    const GaussianStateSummary strong = GaussianStateSummary::from_levels(10.0, 1.0);
    CHECK_THROWS_MATCHES(miscalibrate(strong, inflate), std::domain_error,
                         Catch::Matchers::MessageMatches(
                             ContainsSubstring("propagated variance is nonpositive")));
}

TEST_CASE("moment forwarding anchors to the vacuum") {
    CalibrationParams cal;
    cal.kappa = 1.15;
    cal.n_h = 6.83;
    cal.eta = eta_from_loss_db(2.79);
    const ReceiverConfig cfg;

    // the receiver output for a vacuum-variance quadrature equals the
    // detected power with both stages at zero temperature
    const double p_vac = detected_power(cal, 0.0, 0.0, cfg);
    CHECK_THAT(forward_moment(0.25, cal, cfg), WithinRel(p_vac, 1e-15));
    CHECK_THAT(reconstruct_variance(p_vac, cal, cfg), WithinRel(0.25, 1e-12));

    // round trip at arbitrary variances
    for (double v : {0.05, 0.125, 0.25, 0.5, 1.7}) {
        CHECK_THAT(reconstruct_variance(forward_moment(v, cal, cfg), cal, cfg),
                   WithinRel(v, 1e-12));
    }

    // reconstruction from an implausibly small moment goes negative and is
    // returned as-is for the caller to diagnose
    CHECK(reconstruct_variance(0.0, cal, cfg) < 0.0);

    CHECK_THROWS_AS(forward_moment(0.0, cal, cfg), std::invalid_argument);
    CHECK_THROWS_AS(forward_moment(-0.25, cal, cfg), std::invalid_argument);
}

TEST_CASE("reconstruction with a wrong gain reproduces the variance bias") {
    CalibrationParams truth;
    truth.kappa = 1.15;
    truth.n_h = 6.83;
    truth.eta = eta_from_loss_db(2.79);
    CalibrationParams assumed = truth;
    assumed.kappa = 1.34;
    const ReceiverConfig cfg;

    CalibrationPair pair;
    pair.cal_true = truth;
    pair.cal_assumed = assumed;

    // vacuum anchoring: the wrong-gain calibration still reproduces the
    // measured vacuum moment, so its noise offset shifts accordingly
    assumed.n_h = pair.ratio() * (0.5 + truth.n_h) - 0.5;
    pair.cal_assumed = assumed;
    CHECK_THAT(forward_moment(0.25, assumed, cfg),
               WithinRel(forward_moment(0.25, truth, cfg), 1e-14));

    const GaussianStateSummary state = GaussianStateSummary::from_levels(3.0, 1.0);
    for (double v : {state.var_s, state.var_a}) {
        const double moment = forward_moment(v, truth, cfg);
        const double inferred = reconstruct_variance(moment, assumed, cfg);
        const double expected = pair.ratio() * v + 0.25 * (1.0 - pair.ratio());
        CHECK_THAT(inferred, WithinRel(expected, 1e-12));
    }
}
