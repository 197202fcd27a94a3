#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "spdelab/jump_train.hpp"
#include "spdelab/mark_measure.hpp"
#include "spdelab/operator_core.hpp"
#include "spdelab/state.hpp"

namespace spdelab {

/// Integrand f(s, u) of a jump integral, with optional closed forms for its
/// mark averages. When a closed form is absent the mark measure's
/// deterministic quadrature fills in (exact for atom families).
struct TimeMarkIntegrand {
    std::function<StateVector(double, const Mark&)> eval;

    /// True when f(s, u) does not depend on s; unlocks exact compensator
    /// convolution via the semigroup weights.
    bool time_independent = false;

    /// s -> integral of f(s, u) against the unnormalized mark measure.
    std::function<StateVector(double)> mark_mean;

    /// s -> integral of ||f(s, u)||^2 against the unnormalized mark measure.
    std::function<double(double)> mark_sq_mean;
};

struct IntegralOptions {
    std::size_t time_steps = 512;   // midpoint steps for time-dependent compensators
    std::size_t quad_order = 24;    // per-dimension mark quadrature order
};

/// Compensated jump integral over (0, T]: the sum of f at the realized jumps
/// minus the compensator drift integral. state_dim fixes the output size for
/// empty trains. Non-finite integrand values abort with the offending (s, u).
StateVector compensated_integral(const TimeMarkIntegrand& f, const JumpTrain& train,
                                 const MarkMeasure& measure, double T, std::size_t state_dim,
                                 const IntegralOptions& opts = {});

/// Semigroup-smoothed compensated integral: each jump contribution is
/// propagated to the horizon by S_{T - tau}, and the compensator is the
/// convolution of the semigroup with the mark mean (closed-form weights for
/// time-independent f, midpoint quadrature otherwise).
StateVector convolved_integral(const DiagonalGenerator& gen, const TimeMarkIntegrand& f,
                               const JumpTrain& train, const MarkMeasure& measure, double T,
                               const IntegralOptions& opts = {});

struct MaximalInequalitySample {
    double epsilon = 0.0;
    double empirical_probability = 0.0;
    double bound = 0.0;      // concentration bound for P[sup > epsilon]
    double mc_band = 0.0;    // 3 binomial standard errors + 1/paths
    bool pass = false;
};

struct MaximalInequalityReport {
    double horizon = 0.0;
    std::size_t paths = 0;
    double second_moment_integral = 0.0;  // \int_0^T \int ||f||^2 d(beta) ds
    double growth_factor = 0.0;           // 4 e^{2 max(growth bound, 0) T}
    std::vector<MaximalInequalitySample> samples;
    bool pass = false;
};

/// Monte Carlo check of the pathwise tail bound
///   P[ sup_{t<=T} ||Z_t|| > eps ] <= 4 e^{2 w+ T} / eps^2 * \int\int ||f||^2,
/// where Z is the semigroup-smoothed compensated integral. The supremum is
/// evaluated on a time grid refined by every jump time, recording the state
/// both before and after each jump.
MaximalInequalityReport maximal_inequality_check(const DiagonalGenerator& gen,
                                                 const TimeMarkIntegrand& f,
                                                 const MarkMeasure& measure, double T,
                                                 const std::vector<double>& epsilons,
                                                 std::size_t paths, std::size_t grid_points,
                                                 std::uint64_t seed, std::uint64_t stream_base,
                                                 const IntegralOptions& opts = {});

}  // namespace spdelab
