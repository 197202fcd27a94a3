#include <doctest.h>

#include <cmath>
#include <vector>

#include "spdelab/mark_measure.hpp"
#include "spdelab/rng.hpp"

using namespace spdelab;

TEST_SUITE("mark_measure") {

// === quadrature building blocks ===

TEST_CASE("five point legendre rule matches the classical table") {
    std::vector<double> nodes, weights;
    gauss_legendre(5, nodes, weights);
    REQUIRE(nodes.size() == 5);
    CHECK(nodes[0] == doctest::Approx(-0.906179845938664).epsilon(1e-14));
    CHECK(nodes[1] == doctest::Approx(-0.5384693101056831).epsilon(1e-14));
    CHECK(nodes[2] == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));
    CHECK(weights[0] == doctest::Approx(0.23692688505618942).epsilon(1e-13));
    CHECK(weights[1] == doctest::Approx(0.4786286704993662).epsilon(1e-13));
    CHECK(weights[2] == doctest::Approx(0.568888888888889).epsilon(1e-13));
    double total = 0.0;
    for (double w : weights) total += w;
    CHECK(total == doctest::Approx(2.0).epsilon(1e-14));

    // exact for polynomials of degree <= 9: check x^8 over [-1,1] = 2/9
    double p8 = 0.0;
    for (std::size_t i = 0; i < 5; ++i) p8 += weights[i] * std::pow(nodes[i], 8);
    CHECK(p8 == doctest::Approx(2.0 / 9.0).epsilon(1e-13));
}

TEST_CASE("five point hermite rule matches the classical table") {
    std::vector<double> nodes, weights;
    gauss_hermite(5, nodes, weights);
    REQUIRE(nodes.size() == 5);
    CHECK(nodes[0] == doctest::Approx(-2.0201828704560856).epsilon(1e-13));
    CHECK(nodes[1] == doctest::Approx(-0.9585724646138185).epsilon(1e-13));
    CHECK(weights[0] == doctest::Approx(0.019953242059045917).epsilon(1e-12));
    CHECK(weights[1] == doctest::Approx(0.3936193231522411).epsilon(1e-12));
    CHECK(weights[2] == doctest::Approx(0.9453087204829418).epsilon(1e-12));
    double total = 0.0;
    for (double w : weights) total += w;
    CHECK(total == doctest::Approx(1.7724538509055159).epsilon(1e-14));  // sqrt(pi)
}

// === atoms ===

TEST_CASE("atom moments are weighted sums") {
    const auto m = MarkMeasure::atoms(3.0, {{1.0}, {-1.0}}, {1.0, 1.0});
    CHECK(m.total_rate() == 3.0);
    CHECK(m.mark_dimension() == 1);
    CHECK(m.moment(1) == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(m.moment(2) == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(m.moment(4) == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(m.mean_mark()[0] == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
    CHECK(m.coordinate_second_moment()[0] == doctest::Approx(3.0).epsilon(1e-15));
    CHECK_THROWS(m.moment(3));
}

TEST_CASE("atom weights are normalized, not required to sum to one") {
    const auto m = MarkMeasure::atoms(2.0, {{2.0}, {0.0}}, {3.0, 1.0});
    // P(2) = 3/4: rate * E u = 2 * 1.5 = 3, rate * E u^2 = 2 * 3 = 6
    CHECK(m.mean_mark()[0] == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(m.moment(2) == doctest::Approx(6.0).epsilon(1e-15));
    CHECK_THROWS(MarkMeasure::atoms(1.0, {{1.0}}, {-1.0}));
    CHECK_THROWS(MarkMeasure::atoms(-1.0, {{1.0}}, {1.0}));
}

TEST_CASE("atom quadrature is the measure itself") {
    const auto m = MarkMeasure::atoms(5.0, {{1.0, 0.0}, {0.0, -2.0}}, {1.0, 4.0});
    const auto q = m.quadrature();
    REQUIRE(q.nodes.size() == 2);
    double total = 0.0, second = 0.0;
    for (std::size_t i = 0; i < q.nodes.size(); ++i) {
        total += q.weights[i];
        second += q.weights[i] * (q.nodes[i][0] * q.nodes[i][0] + q.nodes[i][1] * q.nodes[i][1]);
    }
    CHECK(total == doctest::Approx(5.0).epsilon(1e-15));
    CHECK(second == doctest::Approx(m.moment(2)).epsilon(1e-14));
}

// === gaussian ===

TEST_CASE("gaussian moments in closed form") {
    const auto m = MarkMeasure::gaussian(2.0, {0.0}, {0.5});
    CHECK(m.moment(2) == doctest::Approx(0.5).epsilon(1e-14));           // 2 * 0.25
    CHECK(m.moment(4) == doctest::Approx(0.375).epsilon(1e-14));         // 2 * 3 sigma^4
    CHECK(m.moment(1) == doctest::Approx(2.0 * 0.3989422804014327).epsilon(1e-13));
    CHECK(m.mean_mark()[0] == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));

    const auto shifted = MarkMeasure::gaussian(1.0, {1.0}, {1.0});
    CHECK(shifted.moment(2) == doctest::Approx(2.0).epsilon(1e-14));     // mu^2 + sigma^2
    CHECK(shifted.moment(1) == doctest::Approx(1.1666309411753726).epsilon(1e-12));
    CHECK(shifted.mean_mark()[0] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("gaussian quadrature reproduces the closed forms") {
    const auto m = MarkMeasure::gaussian(2.0, {0.3, -0.7}, {0.5, 1.25});
    const auto q = m.quadrature();
    double second = 0.0, fourth = 0.0;
    for (std::size_t i = 0; i < q.nodes.size(); ++i) {
        const double nsq = q.nodes[i][0] * q.nodes[i][0] + q.nodes[i][1] * q.nodes[i][1];
        second += q.weights[i] * nsq;
        fourth += q.weights[i] * nsq * nsq;
    }
    CHECK(second == doctest::Approx(m.moment(2)).epsilon(1e-12));
    CHECK(fourth == doctest::Approx(m.moment(4)).epsilon(1e-11));
}

// === uniform box ===

TEST_CASE("uniform box moments in closed form") {
    const auto sym = MarkMeasure::uniform_box(1.0, {-1.0}, {1.0});
    CHECK(sym.moment(1) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(sym.moment(2) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK(sym.moment(4) == doctest::Approx(0.2).epsilon(1e-14));
    CHECK(sym.mean_mark()[0] == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));

    const auto off = MarkMeasure::uniform_box(3.0, {0.0}, {2.0});
    CHECK(off.mean_mark()[0] == doctest::Approx(3.0).epsilon(1e-14));    // 3 * 1
    CHECK(off.moment(2) == doctest::Approx(4.0).epsilon(1e-14));         // 3 * 4/3
    CHECK(off.moment(4) == doctest::Approx(3.0 * 16.0 / 5.0).epsilon(1e-14));
    CHECK_THROWS(MarkMeasure::uniform_box(1.0, {1.0}, {0.0}));
}

// === sampling ===

TEST_CASE("atom sampling frequencies match the weights") {
    const auto m = MarkMeasure::atoms(1.0, {{1.0}, {-1.0}, {0.5}}, {2.0, 1.0, 1.0});
    RngStream rng(13, 0);
    const std::size_t n = 100000;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (m.sample(rng)[0] == 1.0) ++hits;
    const double p = static_cast<double>(hits) / n;
    CHECK(std::abs(p - 0.5) < 5.0 * std::sqrt(0.25 / n));
}

TEST_CASE("continuous sampling matches the first two moments") {
    const auto g = MarkMeasure::gaussian(1.0, {1.0}, {2.0});
    RngStream rng(14, 0);
    const std::size_t n = 100000;
    double sum = 0.0, sumsq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double u = g.sample(rng)[0];
        sum += u;
        sumsq += u * u;
    }
    CHECK(std::abs(sum / n - 1.0) < 5.0 * 2.0 / std::sqrt(static_cast<double>(n)));
    CHECK(std::abs(sumsq / n - 5.0) < 0.2);  // E u^2 = 1 + 4

    const auto b = MarkMeasure::uniform_box(1.0, {-1.0, 0.0}, {1.0, 2.0});
    double s0 = 0.0, s1 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto u = b.sample(rng);
        s0 += u[0];
        s1 += u[1];
    }
    CHECK(std::abs(s0 / n) < 0.02);
    CHECK(std::abs(s1 / n - 1.0) < 0.02);
}

TEST_CASE("zero rate is legal and samples are still drawable") {
    const auto m = MarkMeasure::atoms(0.0, {{1.0}}, {1.0});
    CHECK(m.total_rate() == 0.0);
    CHECK(m.moment(2) == 0.0);
    RngStream rng(1, 1);
    CHECK(m.sample(rng).size() == 1);
}

}  // TEST_SUITE
