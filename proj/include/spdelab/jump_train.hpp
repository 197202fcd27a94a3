#pragma once

#include <cstdint>
#include <vector>

#include "spdelab/mark_measure.hpp"
#include "spdelab/rng.hpp"
#include "spdelab/state.hpp"

namespace spdelab {

/// One realization of the jump component on [0, horizon]: strictly ordered
/// jump times in (0, horizon] with their marks. The count is Poisson with
/// mean total_rate * horizon, so every train is finite by construction.
struct JumpTrain {
    double horizon = 0.0;
    std::vector<double> times;
    std::vector<Mark> marks;

    std::size_t size() const { return times.size(); }

    /// FNV-1a over the bit patterns of horizon, times and marks. Two trains
    /// fingerprint equal iff they are bitwise the same realization; used to
    /// assert that coupled schemes consumed identical noise.
    std::uint64_t fingerprint() const;
};

/// Draws a train from the given stream: Poisson count, then ordered uniform
/// times, then marks in time order. A zero-rate measure yields an empty
/// train. Consumption order is fixed, so (seed, stream) determines the train.
JumpTrain sample_jump_train(const MarkMeasure& measure, double horizon, RngStream& rng);

}  // namespace spdelab
