#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include <planck2d/interp.hpp>

using namespace planck2d;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("linear table") {
    LinearTable t({0.0, 1.0, 3.0}, {10.0, 20.0, 10.0});
    CHECK(t(0.0) == 10.0);
    CHECK(t(1.0) == 20.0);
    CHECK(t(3.0) == 10.0);
    CHECK_THAT(t(0.5), WithinRel(15.0, 1e-15));
    CHECK_THAT(t(2.0), WithinRel(15.0, 1e-15));
    CHECK(t.contains(3.0));
    CHECK_FALSE(t.contains(3.0000001));
    CHECK_THROWS_AS(t(-0.1), std::domain_error);
    CHECK_THROWS_AS(t(3.1), std::domain_error);
    CHECK_THROWS_AS(LinearTable({0.0, 0.0}, {1.0, 2.0}), std::invalid_argument);
    CHECK_THROWS_AS(LinearTable({0.0}, {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(LinearTable({0.0, 1.0}, {1.0}), std::invalid_argument);

    CHECK_THAT(linear_interp({0.0, 2.0}, {4.0, 8.0}, 1.5), WithinRel(7.0, 1e-15));
}

TEST_CASE("pchip reproduces knots and degrades to a line") {
    PchipInterpolant p({0.0, 100.0, 140.0}, {0.0, 0.3, 0.9});
    CHECK(p(0.0) == 0.0);
    CHECK(p(100.0) == 0.3);
    CHECK(p(140.0) == 0.9);
    // two knots: exactly linear
    PchipInterpolant lin({0.0, 2.0}, {1.0, 5.0});
    CHECK_THAT(lin(0.5), WithinRel(2.0, 1e-15));
    CHECK_THAT(lin(1.5), WithinRel(4.0, 1e-15));
    CHECK_THROWS_AS(p(-1.0), std::domain_error);
    CHECK_THROWS_AS(p(140.0001), std::domain_error);
}

TEST_CASE("pchip matches frozen reference values") {
    // frozen against scipy.interpolate.PchipInterpolator
    PchipInterpolant p({0.0, 100.0, 140.0}, {0.0, 0.3, 0.9});
    CHECK_THAT(p(50.0), WithinRel(0.08092105263157896, 1e-13));
    CHECK_THAT(p(120.0), WithinRel(0.5354887218045112, 1e-13));
    CHECK_THAT(p(130.0), WithinRel(0.712951127819549, 1e-13));

    PchipInterpolant q({0.0, 40.0, 80.0, 120.0, 160.0, 200.0},
                       {0.0, 0.02, 0.09, 0.28, 0.55, 1.10});
    CHECK_THAT(q(20.0), WithinRel(0.006111111111111112, 1e-13));
    CHECK_THAT(q(60.0), WithinRel(0.046100427350427346, 1e-13));
    CHECK_THAT(q(100.0), WithinRel(0.16990802675585284, 1e-13));
    CHECK_THAT(q(140.0), WithinRel(0.3976060445387063, 1e-13));
    CHECK_THAT(q(190.0), WithinRel(0.9340091463414636, 1e-13));
}

TEST_CASE("pchip preserves monotonicity and flattens at extrema") {
    // monotone data: interpolant must be monotone between every knot pair
    PchipInterpolant q({0.0, 40.0, 80.0, 120.0, 160.0, 200.0},
                       {0.0, 0.02, 0.09, 0.28, 0.55, 1.10});
    double prev = q(0.0);
    for (int i = 1; i <= 400; ++i) {
        const double v = q(200.0 * i / 400.0);
        CHECK(v >= prev - 1e-15);
        prev = v;
    }
    // sign change in the slopes pins the extremum knot (zero derivative)
    PchipInterpolant hump({0.0, 1.0, 2.0}, {0.0, 1.0, 0.0});
    CHECK(hump.slope_at_knot(1) == 0.0);
    // no overshoot beyond the peak value
    for (int i = 0; i <= 100; ++i) CHECK(hump(2.0 * i / 100.0) <= 1.0 + 1e-15);
}
