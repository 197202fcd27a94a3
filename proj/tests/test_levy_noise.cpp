#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "spdelab/jump_train.hpp"
#include "spdelab/mark_measure.hpp"
#include "spdelab/rng.hpp"
#include "spdelab/state.hpp"
#include "spdelab/stochastic_integral.hpp"

using namespace spdelab;

namespace {

/// State-independent integrand f(s, u) = c u embedded in one dimension, with
/// its closed-form mark averages.
TimeMarkIntegrand scaled_mark_integrand(const MarkMeasure& measure, double c) {
    TimeMarkIntegrand f;
    f.eval = [c](double, const Mark& u) { return StateVector{c * u[0]}; };
    f.time_independent = true;
    const double mean = measure.mean_mark().empty() ? 0.0 : measure.mean_mark()[0];
    const double sq = measure.coordinate_second_moment().empty()
                          ? 0.0
                          : measure.coordinate_second_moment()[0];
    f.mark_mean = [c, mean](double) { return StateVector{c * mean}; };
    f.mark_sq_mean = [c, sq](double) { return c * c * sq; };
    return f;
}

}  // namespace

TEST_SUITE("levy_noise") {

// === jump trains ===

TEST_CASE("zero rate yields the empty train") {
    const auto m = MarkMeasure::atoms(0.0, {{1.0}}, {1.0});
    RngStream rng(1, 0);
    const auto train = sample_jump_train(m, 2.0, rng);
    CHECK(train.size() == 0);
    CHECK(train.horizon == 2.0);
}

TEST_CASE("times are strictly increasing inside the horizon") {
    const auto m = MarkMeasure::atoms(6.0, {{1.0}, {-1.0}}, {1.0, 1.0});
    RngStream rng(7, 0);
    for (int rep = 0; rep < 200; ++rep) {
        const auto train = sample_jump_train(m, 1.5, rng);
        for (std::size_t j = 0; j < train.size(); ++j) {
            CHECK(train.times[j] > 0.0);
            CHECK(train.times[j] <= 1.5);
            if (j > 0) CHECK(train.times[j] > train.times[j - 1]);
            CHECK(train.marks[j].size() == 1);
        }
    }
}

TEST_CASE("count statistics and mark frequencies") {
    const double rate = 3.0, T = 2.0;
    const auto m = MarkMeasure::atoms(rate, {{1.0}, {-1.0}}, {1.0, 1.0});
    const std::size_t paths = 100000;
    double count_sum = 0.0;
    std::size_t plus = 0, total = 0;
    for (std::size_t p = 0; p < paths; ++p) {
        RngStream rng(11, p);
        const auto train = sample_jump_train(m, T, rng);
        count_sum += static_cast<double>(train.size());
        for (const auto& u : train.marks) {
            ++total;
            if (u[0] > 0.0) ++plus;
        }
    }
    const double mean_count = count_sum / static_cast<double>(paths);
    CHECK(std::abs(mean_count - rate * T) <
          5.0 * std::sqrt(rate * T / static_cast<double>(paths)));
    const double frac = static_cast<double>(plus) / static_cast<double>(total);
    CHECK(std::abs(frac - 0.5) < 5.0 * std::sqrt(0.25 / static_cast<double>(total)));
}

TEST_CASE("fingerprints identify realizations bitwise") {
    const auto m = MarkMeasure::atoms(4.0, {{1.0}, {-1.0}}, {1.0, 1.0});
    RngStream a(3, 5), b(3, 5), c(3, 6);
    const auto ta = sample_jump_train(m, 1.0, a);
    const auto tb = sample_jump_train(m, 1.0, b);
    const auto tc = sample_jump_train(m, 1.0, c);
    CHECK(ta.fingerprint() == tb.fingerprint());
    CHECK(ta.fingerprint() != tc.fingerprint());

    JumpTrain perturbed = ta;
    if (perturbed.size() > 0) {
        perturbed.marks[0][0] = -perturbed.marks[0][0];
        CHECK(perturbed.fingerprint() != ta.fingerprint());
    }
}

// === compensated integrals ===

TEST_CASE("compensated integral on a handmade train") {
    // marks always +1 at rate 2: compensator drift is 2t, jumps add c each
    const auto m = MarkMeasure::atoms(2.0, {{1.0}}, {1.0});
    const auto f = scaled_mark_integrand(m, 1.5);
    JumpTrain train;
    train.horizon = 1.0;
    train.times = {0.25, 0.7};
    train.marks = {{1.0}, {1.0}};
    const auto z = compensated_integral(f, train, m, 1.0, 1);
    REQUIRE(z.size() == 1);
    CHECK(z[0] == doctest::Approx(1.5 * 2.0 - 1.5 * 2.0 * 1.0).epsilon(1e-14));

    // symmetric marks compensate to zero drift: integral is the plain sum
    const auto sym = MarkMeasure::atoms(2.0, {{1.0}, {-1.0}}, {1.0, 1.0});
    const auto g = scaled_mark_integrand(sym, 1.0);
    JumpTrain t2;
    t2.horizon = 1.0;
    t2.times = {0.5};
    t2.marks = {{-1.0}};
    CHECK(compensated_integral(g, t2, sym, 1.0, 1)[0] == doctest::Approx(-1.0).epsilon(1e-14));
}

TEST_CASE("smoothed integral matches the explicit convolution") {
    const auto m = MarkMeasure::atoms(2.0, {{1.0}}, {1.0});
    const auto gen = DiagonalGenerator::from_eigenvalues({-1.0});
    const auto f = scaled_mark_integrand(m, 1.0);
    JumpTrain train;
    train.horizon = 1.0;
    train.times = {0.25, 0.7};
    train.marks = {{1.0}, {-0.5}};
    const double T = 1.0;
    const auto z = convolved_integral(gen, f, train, m, T);

    // hand evaluation: sum e^{-(T - tau_j)} u_j - 2 * (1 - e^{-T})
    const double jumps = std::exp(-(T - 0.25)) * 1.0 + std::exp(-(T - 0.7)) * (-0.5);
    const double comp = 2.0 * (1.0 - std::exp(-T));
    CHECK(z[0] == doctest::Approx(jumps - comp).epsilon(1e-13));
}

TEST_CASE("frozen generator gives the ito isometry") {
    // A = 0: E || Z_T ||^2 = T * int ||f||^2 d(rate * law)
    const auto m = MarkMeasure::atoms(3.0, {{1.0}, {-1.0}}, {1.0, 1.0});
    const auto gen = DiagonalGenerator::from_eigenvalues({0.0});
    const auto f = scaled_mark_integrand(m, 0.8);
    const double T = 1.5;
    const std::size_t paths = 40000;
    double sumsq = 0.0;
    for (std::size_t p = 0; p < paths; ++p) {
        RngStream rng(21, p);
        const auto train = sample_jump_train(m, T, rng);
        const auto z = convolved_integral(gen, f, train, m, T);
        sumsq += z[0] * z[0];
    }
    const double value = sumsq / static_cast<double>(paths);
    const double target = T * 0.8 * 0.8 * 3.0;
    CHECK(std::abs(value - target) <= 0.05 * target);
}

TEST_CASE("integrand rejects non finite values") {
    const auto m = MarkMeasure::atoms(1.0, {{1.0}}, {1.0});
    TimeMarkIntegrand f;
    f.eval = [](double, const Mark&) {
        return StateVector{std::numeric_limits<double>::quiet_NaN()};
    };
    f.time_independent = true;
    f.mark_mean = [](double) { return StateVector{0.0}; };
    f.mark_sq_mean = [](double) { return 0.0; };
    JumpTrain train;
    train.horizon = 1.0;
    train.times = {0.5};
    train.marks = {{1.0}};
    CHECK_THROWS(compensated_integral(f, train, m, 1.0, 1));
}

// === pathwise tail bound ===

TEST_CASE("tail probabilities sit under the concentration bound") {
    const auto m = MarkMeasure::atoms(3.0, {{1.0}, {-1.0}}, {1.0, 1.0});
    const auto gen = DiagonalGenerator::from_eigenvalues({-1.0});
    const auto f = scaled_mark_integrand(m, 1.0);
    const double T = 1.0;
    const auto rep = maximal_inequality_check(gen, f, m, T, {2.0, 4.0, 8.0}, 10000, 32, 5, 0);
    CHECK(rep.pass);
    CHECK(rep.second_moment_integral == doctest::Approx(T * 3.0).epsilon(1e-12));
    // negative growth bound clips to 4 e^0
    CHECK(rep.growth_factor == doctest::Approx(4.0).epsilon(1e-12));
    REQUIRE(rep.samples.size() == 3);
    for (const auto& s : rep.samples) {
        CHECK(s.bound == doctest::Approx(4.0 * 3.0 / (s.epsilon * s.epsilon)).epsilon(1e-12));
        CHECK(s.empirical_probability <= s.bound + s.mc_band);
        CHECK(s.pass);
    }
    // probabilities are monotone in the threshold
    CHECK(rep.samples[0].empirical_probability >= rep.samples[1].empirical_probability);
    CHECK(rep.samples[1].empirical_probability >= rep.samples[2].empirical_probability);
}

}  // TEST_SUITE
