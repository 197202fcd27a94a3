#pragma once

#include <cstdint>
#include <vector>

#include "spdelab/coefficients.hpp"
#include "spdelab/integrator.hpp"
#include "spdelab/mark_measure.hpp"
#include "spdelab/operator_core.hpp"
#include "spdelab/wasserstein.hpp"

namespace spdelab {

struct ContractionPoint {
    double t = 0.0;
    double independent = 0.0;     // exact transport distance, independent noise
    double independent_se = 0.0;  // replicate standard error
    double self_distance = 0.0;   // same-law cloud distance: the sampling floor
    double bound = 0.0;           // ||xi-eta|| e^{-eps t / 2} + sampling band
    double coupled = 0.0;         // RMS paired distance under shared noise
    double coupled_se = 0.0;
    double coupled_bound = 0.0;   // ||xi-eta|| e^{-eps t / 2} (1+10%) + 3 se
    bool pass = false;
};

struct ContractionReport {
    double epsilon = 0.0;
    double initial_distance = 0.0;
    std::vector<ContractionPoint> points;
    double coupled_log_slope = 0.0;  // fitted slope of log coupled distance vs t
    bool pass = false;
};

/// Transport-distance contraction between the laws started at xi and eta.
/// At each requested time the law distance is estimated two ways: the exact
/// empirical distance between clouds evolved with INDEPENDENT noise (whose
/// finite-sample floor is measured by the self-distance of two same-law
/// clouds), and the RMS paired distance under SHARED noise, which upper
/// bounds the true distance by the coupling inequality. Both must sit under
/// e^{-eps t / 2} envelopes, with the usual 10% + 3 se tolerance on the
/// coupled witness. Requires a certified eps > 0 and cloud_size <= 1024.
ContractionReport contraction_estimate(const DiagonalGenerator& gen,
                                       const CoefficientSet& coeffs, const MarkMeasure& measure,
                                       const StateVector& xi, const StateVector& eta,
                                       const std::vector<double>& times,
                                       std::size_t steps_per_unit, std::size_t cloud_size,
                                       std::size_t replicates, double epsilon,
                                       std::uint64_t seed, int threads = 1);

struct InvariantSamplerResult {
    EmpiricalMeasure sample;         // thinned long-run states
    double burn_in = 0.0;
    double gap = 0.0;
    double second_moment = 0.0;      // mean ||x||^2 over the sample
    double pushforward_distance = 0.0;  // distance between sample and its time-gap image
    double self_distance = 0.0;         // distance between disjoint thinned halves
    bool stationary = false;            // pushforward below the self-distance band
};

/// Long-run sampler for the invariant law: burn-in, then thinned recording
/// along one trajectory. Defaults follow the mixing scale: burn-in 10/eps,
/// gap 1/eps (pass 0 to accept a default). Stationarity witness: evolving the
/// whole sample forward by one gap (fresh noise) moves it by no more than the
/// sampling floor measured between disjoint thinned halves, within 50% slack.
/// Requires a certified eps > 0.
InvariantSamplerResult invariant_measure_sampler(const DiagonalGenerator& gen,
                                                 const CoefficientSet& coeffs,
                                                 const MarkMeasure& measure, double epsilon,
                                                 std::size_t samples, std::size_t steps_per_unit,
                                                 std::uint64_t seed, double burn_in = 0.0,
                                                 double gap = 0.0, int threads = 1);

}  // namespace spdelab
