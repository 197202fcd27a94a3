#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spdelab/coefficients.hpp"
#include "spdelab/integrator.hpp"
#include "spdelab/lyapunov.hpp"
#include "spdelab/mark_measure.hpp"
#include "spdelab/operator_core.hpp"
#include "spdelab/state.hpp"

namespace spdelab {

/// Mean-square dissipativity of the pair (A, drift): the margin alpha with
///   <x - y, A(x-y) + drift(x) - drift(y)> <= -alpha ||x - y||^2.
/// This margin is a different quantity from the semigroup growth bound and
/// the two are never interchanged: the growth bound controls resolvent
/// domains, the dissipativity margin controls decay rates.
struct DissipativityReport {
    double empirical_margin = 0.0;  // smallest observed margin over probe pairs
    double analytic_margin = 0.0;   // min_k(-a_k) - sqrt(drift_lipschitz_sq)
    double epsilon = 0.0;           // 2 analytic_margin - jump_lipschitz_sq
    bool certified = false;         // epsilon > 0, using the analytic margin only
};

/// Estimates the dissipativity margin on random probe pairs and combines it
/// with the jump Lipschitz constant into the contraction exponent epsilon.
/// Certification intentionally ignores the (more optimistic) empirical
/// margin. Coinciding probe pairs are rejected.
DissipativityReport dissipativity_estimate(const DiagonalGenerator& gen,
                                           const CoefficientSet& coeffs, std::size_t probe_pairs,
                                           std::uint64_t seed);

struct LyapunovCheckSample {
    std::string property;
    double observed = 0.0;
    double allowed = 0.0;
    bool pass = false;
};

struct LyapunovCheckReport {
    std::vector<LyapunovCheckSample> samples;
    double largest_c3 = 0.0;         // largest rate with L H <= -c3 H on the probes
    double envelope_constant = 0.0;  // smallest quasi-sublinearity constant observed
    bool comparison_pass = false;    // c1 ||x||^2 <= H <= c2 ||x||^2
    bool envelope_pass = false;      // gradient/hessian envelopes hold
    bool drift_pass = false;         // L H <= -c3 H held with c3 > 0
    bool pass = false;
};

/// Checks the three certificate conditions for H on a probe set: norm
/// comparison, envelope bounds with their quasi-sublinearity constant, and
/// negativity of the generator action. State-independent jump coefficients
/// leave L H(0) > 0, so the drift condition honestly fails for them near the
/// origin.
LyapunovCheckReport lyapunov_check(const DiagonalGenerator& gen, const CoefficientSet& coeffs,
                                   const MarkMeasure& measure, const LyapunovFunction& H,
                                   std::size_t probes, std::uint64_t seed,
                                   std::size_t quad_order = 24);

struct DecayPoint {
    double t = 0.0;
    double value = 0.0;  // Monte Carlo mean at t
    double se = 0.0;     // standard error of the mean
    double bound = 0.0;  // certified envelope at t (tolerance included)
    bool pass = false;
};

struct StabilityReport {
    double epsilon = 0.0;
    bool certified = false;
    std::vector<DecayPoint> curve;   // decimated for reporting
    double fitted_rate = 0.0;        // least-squares slope of log mean vs t
    double growth_constant = 0.0;    // max_t value / (value(0) e^{-eps t})
    bool pass = false;               // bound held on every grid point
};

/// Synchronous-coupling decay of the mean squared distance between two
/// solutions started at xi and eta and driven by the same jump trains:
/// D(t) <= D(0) e^{-eps t}. The check allows 10% multiplicative slack plus
/// three Monte Carlo standard errors at every grid point. epsilon <= 0 is
/// reported uncertified with the curve intact. The reported curve is
/// decimated to report_points entries; the pass verdict uses every point.
StabilityReport mean_square_decay(const DiagonalGenerator& gen, const CoefficientSet& coeffs,
                                  const MarkMeasure& measure, const SimulationGrid& grid,
                                  const StateVector& xi, const StateVector& eta, double epsilon,
                                  std::size_t paths, std::uint64_t seed,
                                  std::uint64_t stream_base, int threads = 1,
                                  std::size_t report_points = 21);

/// Second-moment decay toward the origin equilibrium:
/// E ||X_t||^2 <= (c2/c1) e^{-c3 t} ||xi||^2, same tolerance policy. Requires
/// the origin to actually be an equilibrium (drift and jump coefficient both
/// vanish there); the diagnostic names whichever condition fails.
StabilityReport exp_stability_check(const DiagonalGenerator& gen, const CoefficientSet& coeffs,
                                    const MarkMeasure& measure, const LyapunovFunction& H,
                                    double c3, const SimulationGrid& grid, const StateVector& xi,
                                    std::size_t paths, std::uint64_t seed,
                                    std::uint64_t stream_base, int threads = 1,
                                    std::size_t report_points = 21);

/// Multiplicative + Monte Carlo tolerance shared by the decay checks.
inline constexpr double kDecaySlack = 0.10;

}  // namespace spdelab
