#include "spdelab/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace spdelab {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void philox_round(std::array<std::uint32_t, 4>& c, std::array<std::uint32_t, 2>& k) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    k[0] += kWeyl0;
    k[1] += kWeyl1;
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) {
    for (int r = 0; r < 10; ++r) philox_round(counter, key);
    return counter;
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

void RngStream::refill() {
    const std::array<std::uint32_t, 4> counter = {
        static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
        static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
    const std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(seed_),
                                              static_cast<std::uint32_t>(seed_ >> 32)};
    const auto out = philox4x32(counter, key);
    buffer_[0] = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
    buffer_[1] = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
    buffer_pos_ = 0;
    ++block_;
}

std::uint64_t RngStream::next_u64() {
    if (buffer_pos_ >= 2) refill();
    return buffer_[buffer_pos_++];
}

double RngStream::uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform_oc() { return 1.0 - uniform01(); }

double RngStream::uniform(double lo, double hi) {
    if (!(lo < hi)) throw std::invalid_argument("uniform: empty interval");
    return lo + (hi - lo) * uniform01();
}

double RngStream::normal() {
    if (has_cached_normal_) {
        has_cached_normal_ = false;
        return cached_normal_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform_oc()));
    const double theta = 2.0 * M_PI * uniform01();
    cached_normal_ = r * std::sin(theta);
    has_cached_normal_ = true;
    return r * std::cos(theta);
}

std::uint64_t RngStream::poisson(double mean) {
    if (!(mean >= 0.0) || !std::isfinite(mean))
        throw std::invalid_argument("poisson: mean must be finite and nonnegative");
    std::uint64_t total = 0;
    // Split so exp(-chunk) stays far above denormal territory.
    while (mean > 200.0) {
        mean -= 200.0;
        const double limit = std::exp(-200.0);
        double prod = uniform01();
        while (prod >= limit) {
            ++total;
            prod *= uniform01();
        }
    }
    const double limit = std::exp(-mean);
    double prod = uniform01();
    while (prod >= limit) {
        ++total;
        prod *= uniform01();
    }
    return total;
}

}  // namespace spdelab
