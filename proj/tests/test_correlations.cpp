#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "solenoid/correlations.hpp"
#include "solenoid/ulam.hpp"

using namespace solenoid;

namespace {

SystemParams cos_system(int lap, double lambda) {
    return make_system(lap, lambda, TrigPoly::harmonic(1, 1.0, 0.0), 3, 0.0);
}

}  // namespace

TEST_CASE("constant observables have zero correlations up to noise") {
    SystemParams p = cos_system(3, 0.6);
    Observable constant{"const", [](double, double) { return 1.0; }};
    CorrelationOptions opts;
    opts.orbit_len = 200'000;
    auto res = correlation_decay(p, {constant}, opts);
    REQUIRE(res.size() == 1);
    for (double c : res[0].corr) CHECK(std::abs(c) <= 1e-12);
    CHECK(res[0].noise_flag);  // nothing above the floor, so no fit window
}

TEST_CASE("lag zero is a variance") {
    SystemParams p = cos_system(3, 0.6);
    auto res = correlation_decay(p, {harmonic_observable(1, p.effective_trap() * 1.05)});
    REQUIRE(res.size() == 1);
    CHECK(res[0].corr[0] >= 0.0);
}

TEST_CASE("fitted decay rates are consistent with the Ulam spectrum") {
    SystemParams p = cos_system(3, 0.6);
    double yb = p.effective_trap() * 1.05;

    CorrelationOptions opts;
    opts.n_max = 25;
    opts.orbit_len = 4'000'000;
    opts.ybound = yb;
    auto res = correlation_decay(
        p, {fiber_observable(yb), bump_observable(yb), harmonic_observable(1, yb)}, opts);
    REQUIRE(res.size() == 3);

    UlamOperator op = ulam_build(p, 48, 48, 16, 3, yb);
    double gap = second_eigenvalue(op, 500).second_ev;

    // The odd fiber observable rides the slow contraction mode.
    REQUIRE_FALSE(res[0].noise_flag);
    CHECK(res[0].rate < 0.0);
    INFO("ylin rate/step " << res[0].rate_per_step << " vs second ev " << gap);
    CHECK(std::abs(res[0].rate_per_step - gap) <= 0.1);

    // The even fiber observable decays at the squared rate.
    REQUIRE_FALSE(res[1].noise_flag);
    CHECK(std::abs(res[1].rate_per_step - p.lambda * p.lambda) <= 0.1);

    // Harmonics in x decorrelate essentially in one step under the
    // angle-multiplying base, far below the fiber rate.
    CHECK((res[2].noise_flag || res[2].rate_per_step < gap));
}

TEST_CASE("gamma reference value") {
    SystemParams p = make_system(3, 0.6, TrigPoly::harmonic(1, 1.0, 0.0), 4, 0.8);
    // e_upper = 4 at q = 2: sqrt(2 / (0.6^2.6 * 3)).
    double expect = std::sqrt(std::pow(4.0, 0.5) / (std::pow(0.6, 1.0 + 2.0 * 0.8) * 3.0));
    CHECK(gamma_reference(p, 4, 2) == Catch::Approx(expect).epsilon(1e-12));
}

TEST_CASE("norm index metadata") {
    NormIndices a = norm_indices(0.4);
    CHECK(a.rho0 == 2);  // smallest integer with 0.4 < rho0 - 1
    CHECK_FALSE(a.rho1.has_value());

    NormIndices b = norm_indices(0.8);
    CHECK(b.rho0 == 2);
    REQUIRE(b.rho1.has_value());
    CHECK(*b.rho1 == 0);  // largest integer below 0.3
    CHECK(*b.nu == Catch::Approx(1.0 + 0.5));

    NormIndices c = norm_indices(1.6);
    CHECK(c.rho0 == 3);
    REQUIRE(c.rho1.has_value());
    CHECK(*c.rho1 == 1);
    CHECK(*c.nu == Catch::Approx(0.5 + 1.0 / 3.0));
}
