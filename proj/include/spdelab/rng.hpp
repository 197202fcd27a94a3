#pragma once

#include <array>
#include <cstdint>

namespace spdelab {

/// Counter-based generator (Philox-4x32, 10 rounds). A block cipher over a
/// 128-bit counter keyed by (seed, stream); identical (seed, stream) pairs
/// reproduce the same number sequence on every platform and thread layout,
/// which is what makes Monte Carlo output byte-stable under --threads.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// One logical random stream: stream ids partition the counter space, so
/// streams with the same seed but distinct ids never overlap.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t next_u64();

    /// Uniform on [0,1) with 53-bit resolution.
    double uniform01();

    /// Uniform on (0,1]; safe as a log argument.
    double uniform_oc();

    /// Uniform on [lo,hi).
    double uniform(double lo, double hi);

    /// Standard normal via Box-Muller (pair cached).
    double normal();

    /// Poisson count by exponential-gap counting; large means are split into
    /// chunks of 200 so the product of uniforms never underflows.
    std::uint64_t poisson(double mean);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

private:
    void refill();

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    std::array<std::uint64_t, 2> buffer_{};
    int buffer_pos_ = 2;  // forces refill on first draw
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

}  // namespace spdelab
