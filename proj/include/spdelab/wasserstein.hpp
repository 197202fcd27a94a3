#pragma once

#include <cstdint>
#include <vector>

#include "spdelab/rng.hpp"
#include "spdelab/state.hpp"

namespace spdelab {

/// Uniform empirical measure on a finite point cloud.
struct EmpiricalMeasure {
    std::vector<StateVector> points;

    std::size_t size() const { return points.size(); }
    std::size_t dimension() const { return points.empty() ? 0 : points.front().size(); }
};

/// Optimal pairing between two equal-size clouds under squared distance.
struct CouplingResult {
    double distance = 0.0;             // quadratic transport distance
    std::vector<int> assignment;       // assignment[i] = index paired with point i
    double dual_residual = 0.0;        // worst complementary-slackness violation
};

/// Exact quadratic transport distance between equal-size clouds, solved as an
/// assignment problem by shortest augmenting paths with dual potentials
/// (O(n^3), exact double arithmetic, no scaling phase). Sizes must match and
/// stay <= 1024; the optimality certificate (dual feasibility plus
/// complementary slackness within 1e-9) is recomputed on every solve.
CouplingResult wasserstein2_exact(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu);

/// One-dimensional quadratic transport distance via monotone rearrangement
/// (sort both samples, RMS of aligned differences). Equal sizes required.
double wasserstein2_1d(std::vector<double> a, std::vector<double> b);

struct SlicedDistance {
    double value = 0.0;  // sqrt of the mean squared 1-d distance over directions
    double band = 0.0;   // 3 standard errors over directions, delta-mapped
    std::size_t directions = 0;
};

/// Sliced surrogate: average of squared 1-d distances of the clouds projected
/// onto random unit directions. Needs at least 16 directions; the band is
/// estimated from the spread across directions. Cheaper than the exact
/// solver and a lower-bound-flavored surrogate, not a replacement.
SlicedDistance sliced_w2(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                         std::size_t directions, std::uint64_t seed, std::uint64_t stream = 0);

}  // namespace spdelab
