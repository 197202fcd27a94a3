#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "spdelab/coefficients.hpp"
#include "spdelab/integrator.hpp"
#include "spdelab/mark_measure.hpp"
#include "spdelab/operator_core.hpp"
#include "spdelab/state.hpp"

namespace spdelab {

/// Candidate energy function H for stability certification, together with
/// the comparison constants and envelope functions the certificates consume:
///   c1 ||x||^2 <= H(x) <= c2 ||x||^2,
///   ||grad H(x)|| <= h1(||x||),   sup_y ||Hess H(x) y|| / ||y|| <= h2(||x||),
/// where h1, h2 are quasi-sublinear: h(r+s) <= C (h(r)+h(s)) and
/// h(r s) <= C h(r) h(s) for a single constant C >= 1.
struct LyapunovFunction {
    std::string name;
    std::function<double(const StateVector&)> value;
    std::function<StateVector(const StateVector&)> gradient;
    std::function<StateVector(const StateVector&, const StateVector&)> hessian_apply;
    double c1 = 1.0;
    double c2 = 1.0;
    std::function<double(double)> envelope_gradient;  // h1
    std::function<double(double)> envelope_hessian;   // h2
    /// True when value(x) is exactly the squared Hilbert norm; the mark-jump
    /// term of the generator then collapses to the jump second moment and is
    /// evaluated in closed form where available.
    bool squared_norm = false;
};

/// H(x) = ||x||^2 with c1 = c2 = 1, h1(r) = 2r, h2 = 2.
LyapunovFunction quadratic_lyapunov();

/// Action of the integro-differential generator of the state equation on H:
/// the Frechet drift term <grad H, A x + F(x)> plus the jump correction
/// int [ H(x + f(u,x)) - H(x) - <grad H(x), f(u,x)> ] beta(du).
double lyapunov_generator_apply(const DiagonalGenerator& gen, const CoefficientSet& coeffs,
                                const MarkMeasure& measure, const LyapunovFunction& H,
                                const StateVector& x, std::size_t quad_order = 24);

/// Same action with the drift, jump coefficient and generator argument
/// regularized by the normalized resolvent at lambda (the bounded
/// approximation of the dynamics).
double lyapunov_generator_yosida_apply(const DiagonalGenerator& gen, const CoefficientSet& coeffs,
                                       const MarkMeasure& measure, const LyapunovFunction& H,
                                       const StateVector& x, double lambda,
                                       std::size_t quad_order = 24);

struct GeneratorGapSample {
    double lambda = 0.0;
    double gap = 0.0;  // max_x |L H(x) - L_lambda H(x)| over the probe set
};

struct GeneratorGapReport {
    std::vector<GeneratorGapSample> samples;
    bool decreasing = true;
};

/// Gap between the generator action and its regularized version on a probe
/// set, along an increasing lambda schedule. The gap must shrink as lambda
/// grows; this is the quantitative content of the bounded approximation.
GeneratorGapReport lyapunov_generator_gap(const DiagonalGenerator& gen,
                                          const CoefficientSet& coeffs,
                                          const MarkMeasure& measure, const LyapunovFunction& H,
                                          const std::vector<StateVector>& probes,
                                          const std::vector<double>& lambdas,
                                          std::size_t quad_order = 24);

/// Worst gap |L H(x) - L_lambda H(x)| over the states of a trajectory,
/// normally one produced by the regularized scheme at the same lambda.
double lyapunov_generator_path_gap(const DiagonalGenerator& gen, const CoefficientSet& coeffs,
                                   const MarkMeasure& measure, const LyapunovFunction& H,
                                   const MildPath& path, double lambda,
                                   std::size_t quad_order = 24);

}  // namespace spdelab
