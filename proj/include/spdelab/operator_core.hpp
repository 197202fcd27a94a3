#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "spdelab/state.hpp"

namespace spdelab {

/// Linear operator A that is diagonal in the chosen basis, together with the
/// strongly continuous semigroup S_t = e^{tA} it generates. growth_bound is
/// the semigroup growth rate sup_k a_k; the stability margin used elsewhere
/// is a separate quantity and is never substituted for it.
struct DiagonalGenerator {
    std::vector<double> eigenvalues;

    double growth_bound() const;
    std::size_t dimension() const { return eigenvalues.size(); }

    /// Laplacian on (0,1) with Dirichlet boundary, truncated to the first
    /// n_modes sine modes: a_k = -(k pi)^2, k = 1..n_modes.
    static DiagonalGenerator laplacian_dirichlet(std::size_t n_modes);
    static DiagonalGenerator from_eigenvalues(std::vector<double> eigenvalues);
};

/// S_t x, computed mode by mode. Rejects t < 0: the semigroup is only a
/// forward flow.
StateVector semigroup_apply(const DiagonalGenerator& gen, double t, const StateVector& x);

/// Per-mode weight w_k(dt) = (e^{a_k dt} - 1)/a_k, the exact integral of the
/// semigroup over a step. Evaluated via expm1 so w_k -> dt smoothly as
/// a_k -> 0.
std::vector<double> convolution_weights(const DiagonalGenerator& gen, double dt);

/// R(lambda, A) x for lambda in the resolvent set (lambda > growth bound).
StateVector resolvent_apply(const DiagonalGenerator& gen, double lambda, const StateVector& x);

/// Per-mode multipliers of the normalized resolvent lambda R(lambda, A);
/// these converge to 1 as lambda grows.
std::vector<double> scaled_resolvent_multipliers(const DiagonalGenerator& gen, double lambda);
StateVector scaled_resolvent_apply(const DiagonalGenerator& gen, double lambda,
                                   const StateVector& x);

/// Bounded approximation of A with eigenvalues lambda a_k / (lambda - a_k);
/// equals lambda^2 R(lambda, A) - lambda I on the diagonal.
DiagonalGenerator yosida_generator(const DiagonalGenerator& gen, double lambda);

StateVector generator_apply_linear(const DiagonalGenerator& gen, const StateVector& x);

// === verification suites ===

struct ResolventBoundSample {
    double lambda = 0.0;
    int power = 0;
    double norm = 0.0;   // operator norm of R(lambda,A)^power
    double bound = 0.0;  // (lambda - growth_bound)^{-power}
    double slack = 0.0;  // bound - norm, >= 0 when the estimate holds
};

struct ResolventBoundReport {
    std::vector<ResolventBoundSample> samples;
    double worst_slack = 0.0;
    bool pass = false;
};

/// Checks the resolvent power bound ||R(lambda,A)^r|| <= (lambda-w)^{-r}
/// (growth constant 1 for a diagonal generator) over a lambda grid and powers
/// 1..max_power. Every lambda must lie strictly to the right of the growth
/// bound.
ResolventBoundReport hille_yosida_verify(const DiagonalGenerator& gen,
                                         const std::vector<double>& lambdas, int max_power);

struct GeneratorIdentityReport {
    double integral_residual = 0.0;      // || A \int_0^t S_s x ds - (S_t x - x) ||
    double derivative_residual = 0.0;    // central difference of S_t x vs A S_t x
    double derivative_order_ratio = 0.0; // residual(h) / residual(h/2); ~4 for O(h^2)
    double laplace_residual = 0.0;       // || \int_0^M e^{-lambda s} S_s x ds - R(lambda,A) x ||
    bool pass = false;
};

/// Exercises three semigroup identities on a probe vector: the integrated
/// generator identity (closed-form integral), the strong derivative at t
/// (central differences at h and h/2), and the Laplace-transform definition
/// of the resolvent (midpoint quadrature, horizon chosen so the truncated
/// tail is below 1e-12).
GeneratorIdentityReport generator_identity_suite(const DiagonalGenerator& gen,
                                                 const StateVector& x, double t, double lambda,
                                                 std::size_t quad_steps);

}  // namespace spdelab
