#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace spdelab {

/// Runs fn(i) for i in [0, count) on up to `threads` workers with a static
/// block partition. Workers write only to their own index's slot, and callers
/// reduce the slots sequentially afterwards, so results are byte-identical
/// for every thread count. threads < 1 is treated as 1.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

/// Deterministic parallel reduction: [0, count) is cut into fixed-size blocks
/// (independent of the thread count), fn(i, partial) adds item i into its
/// block's `slots`-sized accumulator, and the block accumulators are added in
/// block order. The result is byte-identical for every thread count.
std::vector<double> blocked_sum(std::size_t count, std::size_t slots, int threads,
                                const std::function<void(std::size_t, std::vector<double>&)>& fn,
                                std::size_t block_size = 256);

struct MeanVar {
    std::size_t count = 0;
    std::vector<double> mean;        ///< per-slot sample mean
    std::vector<double> sample_var;  ///< unbiased sample variance, zero when count < 2
};

/// Deterministic parallel mean/variance: fn(i, values) writes item i's value
/// into each of the `slots` entries (zeroed before every call). Accumulation
/// is Welford within fixed-size blocks merged in block order, so results are
/// byte-identical for every thread count and the variance of bitwise-identical
/// samples is exactly zero.
MeanVar blocked_mean_var(std::size_t count, std::size_t slots, int threads,
                         const std::function<void(std::size_t, std::vector<double>&)>& fn,
                         std::size_t block_size = 256);

}  // namespace spdelab
