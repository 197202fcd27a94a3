#include <doctest.h>

#include <array>
#include <cmath>
#include <cstdint>
#include <set>

#include "spdelab/rng.hpp"

using namespace spdelab;

TEST_SUITE("rng") {

// Known-answer vectors for the 10-round Philox-4x32 block function, fixed
// before the implementation existed. A single flipped bit anywhere in the
// round chain changes every output word.
TEST_CASE("philox known answers") {
    {
        const auto r = philox4x32({0u, 0u, 0u, 0u}, {0u, 0u});
        CHECK(r[0] == 0x6627e8d5u);
        CHECK(r[1] == 0xe169c58du);
        CHECK(r[2] == 0xbc57ac4cu);
        CHECK(r[3] == 0x9b00dbd8u);
    }
    {
        const auto r = philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                  {0xffffffffu, 0xffffffffu});
        CHECK(r[0] == 0x408f276du);
        CHECK(r[1] == 0x41c83b0eu);
        CHECK(r[2] == 0xa20bc7c6u);
        CHECK(r[3] == 0x6d5451fdu);
    }
    {
        const auto r = philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                  {0xa4093822u, 0x299f31d0u});
        CHECK(r[0] == 0xd16cfe09u);
        CHECK(r[1] == 0x94fdccebu);
        CHECK(r[2] == 0x5001e420u);
        CHECK(r[3] == 0x24126ea1u);
    }
}

TEST_CASE("streams reproduce and do not collide") {
    RngStream a(42, 7), b(42, 7), c(42, 8), d(43, 7);
    bool all_equal = true, other_stream_differs = false, other_seed_differs = false;
    for (int i = 0; i < 256; ++i) {
        const std::uint64_t va = a.next_u64();
        all_equal = all_equal && (va == b.next_u64());
        other_stream_differs = other_stream_differs || (va != c.next_u64());
        other_seed_differs = other_seed_differs || (va != d.next_u64());
    }
    CHECK(all_equal);
    CHECK(other_stream_differs);
    CHECK(other_seed_differs);
}

TEST_CASE("uniform01 range and moments") {
    RngStream rng(1, 0);
    const std::size_t n = 200000;
    double sum = 0.0, sumsq = 0.0, lo = 1.0, hi = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double u = rng.uniform01();
        lo = std::min(lo, u);
        hi = std::max(hi, u);
        sum += u;
        sumsq += u * u;
    }
    CHECK(lo >= 0.0);
    CHECK(hi < 1.0);
    const double mean = sum / n;
    const double var = sumsq / n - mean * mean;
    // mean se = 1/sqrt(12 n); allow five of them
    CHECK(std::abs(mean - 0.5) < 5.0 / std::sqrt(12.0 * n));
    CHECK(std::abs(var - 1.0 / 12.0) < 0.002);
}

TEST_CASE("uniform_oc stays positive") {
    RngStream rng(9, 3);
    double lo = 1.0;
    for (int i = 0; i < 100000; ++i) lo = std::min(lo, rng.uniform_oc());
    CHECK(lo > 0.0);
    CHECK(std::isfinite(std::log(lo)));
}

TEST_CASE("normal moments") {
    RngStream rng(5, 11);
    const std::size_t n = 200000;
    double sum = 0.0, sumsq = 0.0, inside = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double z = rng.normal();
        sum += z;
        sumsq += z * z;
        if (std::abs(z) < 1.959963984540054) inside += 1.0;
    }
    const double mean = sum / n;
    const double var = sumsq / n - mean * mean;
    CHECK(std::abs(mean) < 5.0 / std::sqrt(static_cast<double>(n)));
    CHECK(std::abs(var - 1.0) < 5.0 * std::sqrt(2.0 / n));
    CHECK(std::abs(inside / n - 0.95) < 5.0 * std::sqrt(0.95 * 0.05 / n));
}

TEST_CASE("poisson moments, small and chunked mean") {
    RngStream rng(2, 4);
    for (const double mean : {3.7, 400.0}) {
        const std::size_t n = 40000;
        double sum = 0.0, sumsq = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double k = static_cast<double>(rng.poisson(mean));
            sum += k;
            sumsq += k * k;
        }
        const double m = sum / n;
        const double v = sumsq / n - m * m;
        CHECK(std::abs(m - mean) < 5.0 * std::sqrt(mean / n));
        CHECK(std::abs(v - mean) < 0.05 * mean);
    }
    CHECK(RngStream(3, 0).poisson(0.0) == 0);
}

TEST_CASE("uniform respects bounds") {
    RngStream rng(8, 1);
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.uniform(-2.5, 1.5);
        CHECK(u >= -2.5);
        CHECK(u < 1.5);
    }
}

}  // TEST_SUITE
