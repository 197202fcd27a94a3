#include "spdelab/jump_train.hpp"

#include <algorithm>
#include <stdexcept>

namespace spdelab {

namespace {

inline std::uint64_t fnv1a(std::uint64_t h, std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
        h ^= (v >> (8 * b)) & 0xffu;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::uint64_t bits_of(double x) {
    std::uint64_t u;
    static_assert(sizeof(u) == sizeof(x));
    __builtin_memcpy(&u, &x, sizeof(u));
    return u;
}

}  // namespace

std::uint64_t JumpTrain::fingerprint() const {
    std::uint64_t h = 0xcbf29ce484222325ull;
    h = fnv1a(h, bits_of(horizon));
    h = fnv1a(h, static_cast<std::uint64_t>(times.size()));
    for (std::size_t i = 0; i < times.size(); ++i) {
        h = fnv1a(h, bits_of(times[i]));
        for (double m : marks[i]) h = fnv1a(h, bits_of(m));
    }
    return h;
}

JumpTrain sample_jump_train(const MarkMeasure& measure, double horizon, RngStream& rng) {
    if (!(horizon > 0.0)) throw std::invalid_argument("sample_jump_train: horizon must be > 0");
    JumpTrain train;
    train.horizon = horizon;
    const double mean = measure.total_rate() * horizon;
    if (mean == 0.0) return train;

    const std::uint64_t count = rng.poisson(mean);
    train.times.resize(count);
    // horizon * (1 - u) maps [0,1) onto (0, horizon]: jumps at time 0 would be
    // absorbed into the initial condition, so they are excluded by mapping.
    for (std::uint64_t i = 0; i < count; ++i)
        train.times[i] = horizon * (1.0 - rng.uniform01());
    std::sort(train.times.begin(), train.times.end());
    train.marks.resize(count);
    for (std::uint64_t i = 0; i < count; ++i) train.marks[i] = measure.sample(rng);
    return train;
}

}  // namespace spdelab
