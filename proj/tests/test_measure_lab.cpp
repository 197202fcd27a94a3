#include <doctest.h>

#include <cmath>
#include <vector>

#include "spdelab/coefficients.hpp"
#include "spdelab/measure_lab.hpp"

using namespace spdelab;

namespace {
// scalar equilibrium model: a = -1, unit additive kicks at rate 2, eps = 2,
// stationary second moment rate * E u^2 / (2|a|) = 1
const MarkMeasure kSym = MarkMeasure::atoms(2.0, {{1.0}, {-1.0}}, {1.0, 1.0});
const DiagonalGenerator kGen = DiagonalGenerator::from_eigenvalues({-1.0});
}

TEST_SUITE("measure_lab") {

TEST_CASE("coupled transport distance between dirac starts is explicit") {
    const auto c = additive_coefficients(1, 1.0, kSym);
    const auto rep = contraction_estimate(kGen, c, kSym, {2.0}, {0.0}, {0.5, 1.0}, 200, 64, 2,
                                          2.0, 17);
    CHECK(rep.pass);
    CHECK(rep.initial_distance == doctest::Approx(2.0).epsilon(1e-15));
    REQUIRE(rep.points.size() == 2);
    for (const auto& pt : rep.points) {
        // shared kicks cancel exactly: every pair sits 2 e^{-t} apart
        CHECK(pt.coupled == doctest::Approx(2.0 * std::exp(-pt.t)).epsilon(1e-9));
        CHECK(pt.coupled <= pt.coupled_bound);
        // independent clouds carry sampling noise; the bound holds within it
        CHECK(pt.independent <= pt.bound);
        CHECK(pt.self_distance > 0.0);
    }
    CHECK(rep.coupled_log_slope == doctest::Approx(-1.0).epsilon(0.02));
}

TEST_CASE("contraction inputs are validated") {
    const auto c = additive_coefficients(1, 1.0, kSym);
    CHECK_THROWS(contraction_estimate(kGen, c, kSym, {2.0}, {0.0}, {0.5}, 200, 64, 2, 0.0, 17));
    CHECK_THROWS(contraction_estimate(kGen, c, kSym, {2.0}, {0.0}, {0.5}, 200, 2000, 2, 2.0, 17));
    CHECK_THROWS(contraction_estimate(kGen, c, kSym, {2.0}, {2.0}, {0.5}, 200, 64, 2, 2.0, 17));
}

TEST_CASE("long run sampler approaches the stationary second moment") {
    const auto c = additive_coefficients(1, 1.0, kSym);
    const auto res = invariant_measure_sampler(kGen, c, kSym, 2.0, 2000, 200, 17);
    // defaults derived from the mixing scale 1/eps
    CHECK(res.burn_in == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(res.gap == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(res.sample.size() == 2000);
    CHECK(std::abs(res.second_moment - 1.0) <= 0.15);
    CHECK(res.stationary);
    CHECK(res.pushforward_distance <= 1.5 * res.self_distance + 1e-12);
}

TEST_CASE("sampler accepts explicit burn in and gap") {
    const auto c = additive_coefficients(1, 1.0, kSym);
    const auto res = invariant_measure_sampler(kGen, c, kSym, 2.0, 300, 100, 17, 2.0, 1.0);
    CHECK(res.burn_in == 2.0);
    CHECK(res.gap == 1.0);
    CHECK(res.sample.size() == 300);
}

TEST_CASE("sampler requires a certified exponent") {
    const auto c = additive_coefficients(1, 1.0, kSym);
    CHECK_THROWS(invariant_measure_sampler(kGen, c, kSym, 0.0, 100, 100, 17));
    CHECK_THROWS(invariant_measure_sampler(kGen, c, kSym, -1.0, 100, 100, 17));
}

}  // TEST_SUITE
