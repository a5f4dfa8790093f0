#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>
#include <vector>

#include <planck2d/stats.hpp>

using namespace planck2d;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("weighted mean") {
    auto r = weighted_mean({1.0, 3.0}, {1.0, 1.0});
    CHECK_THAT(r.mean, WithinRel(2.0, 1e-15));
    CHECK_THAT(r.sigma, WithinRel(1.0 / std::sqrt(2.0), 1e-15));

    r = weighted_mean({0.0, 10.0}, {1.0, 3.0});
    CHECK_THAT(r.mean, WithinRel(1.0, 1e-14));
    CHECK_THAT(r.sigma, WithinRel(std::sqrt(0.9), 1e-14));

    // any exact value switches to uniform averaging with zero reported error
    r = weighted_mean({0.0, 10.0}, {0.0, 3.0});
    CHECK_THAT(r.mean, WithinRel(5.0, 1e-15));
    CHECK(r.sigma == 0.0);

    CHECK_THROWS_AS(weighted_mean({}, {}), std::invalid_argument);
    CHECK_THROWS_AS(weighted_mean({1.0}, {1.0, 2.0}), std::invalid_argument);
    CHECK_THROWS_AS(weighted_mean({1.0}, {-1.0}), std::invalid_argument);
}

TEST_CASE("chi square survival") {
    // closed forms: dof 2 -> exp(-x/2); dof 4 -> exp(-x/2)(1 + x/2)
    for (double x : {0.5, 2.0, 5.0, 10.0}) {
        CHECK_THAT(chi2_survival(x, 2), WithinRel(std::exp(-0.5 * x), 1e-13));
        CHECK_THAT(chi2_survival(x, 4), WithinRel(std::exp(-0.5 * x) * (1.0 + 0.5 * x), 1e-13));
    }
    // the canonical 95th percentile at one degree of freedom
    CHECK_THAT(chi2_survival(3.841458820694124, 1), WithinRel(0.05, 1e-10));
    CHECK(chi2_survival(0.0, 3) == 1.0);
    CHECK(chi2_survival(1e4, 3) < 1e-100);
    CHECK_THROWS_AS(chi2_survival(-1.0, 2), std::invalid_argument);
    CHECK_THROWS_AS(chi2_survival(1.0, 0), std::invalid_argument);
}

TEST_CASE("dense solver") {
    // 2x2 with known solution
    auto x = solve_dense({2.0, 1.0, 1.0, 3.0}, {5.0, 10.0}, 2);
    CHECK_THAT(x[0], WithinRel(1.0, 1e-13));
    CHECK_THAT(x[1], WithinRel(3.0, 1e-13));

    // 3x3 requiring a pivot swap
    auto y = solve_dense({0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 2.0}, {4.0, 3.0, 8.0}, 3);
    CHECK_THAT(y[0], WithinRel(3.0, 1e-13));
    CHECK_THAT(y[1], WithinRel(4.0, 1e-13));
    CHECK_THAT(y[2], WithinRel(4.0, 1e-13));

    CHECK_THROWS_AS(solve_dense({1.0, 2.0, 2.0, 4.0}, {1.0, 2.0}, 2), std::runtime_error);
    CHECK_THROWS_AS(solve_dense({1.0}, {1.0, 2.0}, 2), std::invalid_argument);
}

TEST_CASE("symmetric eigenvalues") {
    auto eig = sym_eigenvalues({2.0, 1.0, 1.0, 2.0}, 2);
    REQUIRE(eig.size() == 2);
    CHECK_THAT(eig[0], WithinRel(1.0, 1e-12));
    CHECK_THAT(eig[1], WithinRel(3.0, 1e-12));

    // eigenvectors come back as rows matching the ascending eigenvalues
    std::vector<double> a{4.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 2.0};
    std::vector<double> vecs;
    const auto e3 = sym_eigenvalues(a, 3, &vecs);
    CHECK(e3[0] <= e3[1]);
    CHECK(e3[1] <= e3[2]);
    // trace and determinant invariants
    CHECK_THAT(e3[0] + e3[1] + e3[2], WithinRel(9.0, 1e-12));
    CHECK_THAT(e3[0] * e3[1] * e3[2], WithinRel(4.0 * 5.0 - 1.0 * 2.0 - 0.0, 1e-10));
    for (int k = 0; k < 3; ++k) {
        // residual ||A v - lambda v|| ~ 0
        for (int r = 0; r < 3; ++r) {
            double av = 0.0;
            for (int c = 0; c < 3; ++c) av += a[r * 3 + c] * vecs[k * 3 + c];
            CHECK_THAT(av, WithinAbs(e3[k] * vecs[k * 3 + r], 1e-10));
        }
    }
}

TEST_CASE("seed derivation") {
    CHECK(derive_seed(1, 0) == derive_seed(1, 0));
    std::set<std::uint64_t> seen;
    for (std::uint64_t i = 0; i < 100; ++i) seen.insert(derive_seed(12345, i));
    CHECK(seen.size() == 100);
    CHECK(derive_seed(12345, 0) != derive_seed(12346, 0));
}
