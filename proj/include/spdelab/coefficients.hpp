#pragma once

#include <functional>
#include <string>
#include <vector>

#include "spdelab/mark_measure.hpp"
#include "spdelab/state.hpp"

namespace spdelab {

/// Drift and jump coefficients of the state equation, with the squared
/// Lipschitz/growth constants the well-posedness and stability estimates
/// consume:
///   ||drift(x) - drift(y)||^2            <= drift_lipschitz_sq ||x-y||^2
///   int ||jump(u,x) - jump(u,y)||^2 beta <= jump_lipschitz_sq  ||x-y||^2
///   jump_at_zero_sq = int ||jump(u,0)||^2 beta(du).
/// compensator_mean and jump_sq_mean are optional closed forms for the mark
/// averages; when absent, callers fall back to mark-measure quadrature.
struct CoefficientSet {
    std::string name;
    std::function<StateVector(const StateVector&)> drift;
    std::function<StateVector(const Mark&, const StateVector&)> jump;
    double drift_lipschitz_sq = 0.0;
    double jump_lipschitz_sq = 0.0;
    double jump_at_zero_sq = 0.0;
    std::function<StateVector(const StateVector&)> compensator_mean;
    std::function<double(const StateVector&)> jump_sq_mean;

    /// Linear-growth constant 2 max{jump_lipschitz_sq, jump_at_zero_sq}; the
    /// jump coefficient then satisfies int ||jump(u,x)||^2 <= K (1 + ||x||^2).
    double linear_growth_constant() const;
};

/// No drift, no jumps; the equation reduces to the semigroup orbit.
CoefficientSet zero_coefficients(std::size_t dim);

/// drift(x) = drift_scale x, jump(u, x) = jump_scale u_1 x. Multiplicative
/// noise driven by the first mark coordinate.
CoefficientSet linear_coefficients(std::size_t dim, double drift_scale, double jump_scale,
                                   const MarkMeasure& measure);

/// No drift; jump(u, x) = scale * embed(u), the mark embedded into the first
/// coordinates of the state space. State-independent (additive) noise.
CoefficientSet additive_coefficients(std::size_t dim, double scale, const MarkMeasure& measure);

/// drift(x)_k = -drift_scale x_k/(1+x_k^2), jump(u, x) = jump_scale u_1 s(x)
/// with s(x)_k = x_k/(1+x_k^2). Bounded nonlinear coefficients that vanish at
/// the origin, so the origin stays an equilibrium.
CoefficientSet saturating_coefficients(std::size_t dim, double drift_scale, double jump_scale,
                                       const MarkMeasure& measure);

struct CoefficientValidationSample {
    std::string property;
    double observed = 0.0;
    double allowed = 0.0;
    bool pass = false;
};

struct CoefficientValidationReport {
    std::vector<CoefficientValidationSample> samples;
    double linear_growth_constant = 0.0;
    bool pass = false;
};

/// Probes the declared constants on randomized state pairs: Lipschitz ratios
/// never exceed the declared constants, the linear-growth envelope holds, and
/// any closed-form mark averages agree with measure quadrature.
CoefficientValidationReport validate_coefficients(const CoefficientSet& coeffs,
                                                  const MarkMeasure& measure, std::size_t dim,
                                                  std::size_t probe_pairs, std::uint64_t seed);

}  // namespace spdelab
