#include "spdelab/operator_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace spdelab {

double DiagonalGenerator::growth_bound() const {
    if (eigenvalues.empty()) throw std::invalid_argument("generator has no modes");
    return *std::max_element(eigenvalues.begin(), eigenvalues.end());
}

DiagonalGenerator DiagonalGenerator::laplacian_dirichlet(std::size_t n_modes) {
    if (n_modes == 0) throw std::invalid_argument("laplacian_dirichlet: need at least one mode");
    DiagonalGenerator gen;
    gen.eigenvalues.resize(n_modes);
    for (std::size_t k = 0; k < n_modes; ++k) {
        const double kpi = static_cast<double>(k + 1) * M_PI;
        gen.eigenvalues[k] = -kpi * kpi;
    }
    return gen;
}

DiagonalGenerator DiagonalGenerator::from_eigenvalues(std::vector<double> eigenvalues) {
    if (eigenvalues.empty()) throw std::invalid_argument("generator has no modes");
    for (double a : eigenvalues)
        if (!std::isfinite(a)) throw std::invalid_argument("generator eigenvalues must be finite");
    return DiagonalGenerator{std::move(eigenvalues)};
}

namespace {

void require_dimension(const DiagonalGenerator& gen, const StateVector& x) {
    if (x.size() != gen.dimension())
        throw std::invalid_argument("state has " + std::to_string(x.size()) +
                                    " modes, generator has " + std::to_string(gen.dimension()));
}

}  // namespace

StateVector semigroup_apply(const DiagonalGenerator& gen, double t, const StateVector& x) {
    require_dimension(gen, x);
    if (!(t >= 0.0)) throw std::invalid_argument("semigroup_apply: t must be >= 0");
    StateVector out(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) out[k] = std::exp(t * gen.eigenvalues[k]) * x[k];
    return out;
}

std::vector<double> convolution_weights(const DiagonalGenerator& gen, double dt) {
    if (!(dt >= 0.0)) throw std::invalid_argument("convolution_weights: dt must be >= 0");
    std::vector<double> w(gen.dimension());
    for (std::size_t k = 0; k < w.size(); ++k) {
        const double a = gen.eigenvalues[k];
        w[k] = (a == 0.0) ? dt : std::expm1(a * dt) / a;
    }
    return w;
}

StateVector resolvent_apply(const DiagonalGenerator& gen, double lambda, const StateVector& x) {
    require_dimension(gen, x);
    const double w = gen.growth_bound();
    if (!(lambda > w))
        throw std::domain_error("resolvent_apply: lambda=" + std::to_string(lambda) +
                                " is not in the resolvent set (growth bound " + std::to_string(w) +
                                ")");
    StateVector out(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) out[k] = x[k] / (lambda - gen.eigenvalues[k]);
    return out;
}

std::vector<double> scaled_resolvent_multipliers(const DiagonalGenerator& gen, double lambda) {
    const double w = gen.growth_bound();
    if (!(lambda > w))
        throw std::domain_error("scaled_resolvent: lambda=" + std::to_string(lambda) +
                                " is not in the resolvent set (growth bound " + std::to_string(w) +
                                ")");
    std::vector<double> m(gen.dimension());
    for (std::size_t k = 0; k < m.size(); ++k) m[k] = lambda / (lambda - gen.eigenvalues[k]);
    return m;
}

StateVector scaled_resolvent_apply(const DiagonalGenerator& gen, double lambda,
                                   const StateVector& x) {
    require_dimension(gen, x);
    const auto m = scaled_resolvent_multipliers(gen, lambda);
    StateVector out(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) out[k] = m[k] * x[k];
    return out;
}

DiagonalGenerator yosida_generator(const DiagonalGenerator& gen, double lambda) {
    const double w = gen.growth_bound();
    if (!(lambda > w))
        throw std::domain_error("yosida_generator: lambda=" + std::to_string(lambda) +
                                " is not in the resolvent set (growth bound " + std::to_string(w) +
                                ")");
    DiagonalGenerator out;
    out.eigenvalues.resize(gen.dimension());
    for (std::size_t k = 0; k < out.eigenvalues.size(); ++k) {
        const double a = gen.eigenvalues[k];
        out.eigenvalues[k] = lambda * a / (lambda - a);
    }
    return out;
}

StateVector generator_apply_linear(const DiagonalGenerator& gen, const StateVector& x) {
    require_dimension(gen, x);
    StateVector out(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) out[k] = gen.eigenvalues[k] * x[k];
    return out;
}

ResolventBoundReport hille_yosida_verify(const DiagonalGenerator& gen,
                                         const std::vector<double>& lambdas, int max_power) {
    if (lambdas.empty()) throw std::invalid_argument("hille_yosida_verify: empty lambda grid");
    if (max_power < 1) throw std::invalid_argument("hille_yosida_verify: max_power must be >= 1");
    const double w = gen.growth_bound();
    for (double lambda : lambdas)
        if (!(lambda > w))
            throw std::domain_error("hille_yosida_verify: lambda=" + std::to_string(lambda) +
                                    " is not above the growth bound " + std::to_string(w));

    ResolventBoundReport report;
    report.worst_slack = std::numeric_limits<double>::infinity();
    report.pass = true;
    for (double lambda : lambdas) {
        // Operator norm of a diagonal power: max_k |lambda - a_k|^{-power}.
        double base = std::numeric_limits<double>::infinity();
        for (double a : gen.eigenvalues) base = std::min(base, std::abs(lambda - a));
        for (int r = 1; r <= max_power; ++r) {
            ResolventBoundSample s;
            s.lambda = lambda;
            s.power = r;
            s.norm = std::pow(base, -r);
            s.bound = std::pow(lambda - w, -r);
            s.slack = s.bound - s.norm;
            report.worst_slack = std::min(report.worst_slack, s.slack);
            if (s.norm > s.bound * (1.0 + 1e-12)) report.pass = false;
            report.samples.push_back(s);
        }
    }
    return report;
}

GeneratorIdentityReport generator_identity_suite(const DiagonalGenerator& gen,
                                                 const StateVector& x, double t, double lambda,
                                                 std::size_t quad_steps) {
    require_dimension(gen, x);
    if (!(t > 0.0)) throw std::invalid_argument("generator_identity_suite: t must be > 0");
    if (quad_steps < 2)
        throw std::invalid_argument("generator_identity_suite: need at least 2 quadrature steps");
    const double w = gen.growth_bound();
    if (!(lambda > w))
        throw std::domain_error("generator_identity_suite: lambda must exceed the growth bound");

    GeneratorIdentityReport report;

    // (i) A applied to the integrated orbit equals S_t x - x. The integral
    // \int_0^t S_s x ds is the convolution weight, so the identity is tested
    // against the independent exp() route rather than against itself.
    {
        const auto weights = convolution_weights(gen, t);
        StateVector integrated(x.size());
        for (std::size_t k = 0; k < x.size(); ++k) integrated[k] = weights[k] * x[k];
        const auto lhs = generator_apply_linear(gen, integrated);
        const auto end = semigroup_apply(gen, t, x);
        double r2 = 0.0;
        for (std::size_t k = 0; k < x.size(); ++k) {
            const double d = lhs[k] - (end[k] - x[k]);
            r2 += d * d;
        }
        report.integral_residual = std::sqrt(r2);
    }

    // (ii) strong derivative: central difference of the orbit against A S_t x,
    // at two step sizes to expose the O(h^2) order.
    {
        const auto exact = generator_apply_linear(gen, semigroup_apply(gen, t, x));
        auto residual_at = [&](double h) {
            const auto plus = semigroup_apply(gen, t + h, x);
            const auto minus = semigroup_apply(gen, t - h, x);
            double r2 = 0.0;
            for (std::size_t k = 0; k < x.size(); ++k) {
                const double d = (plus[k] - minus[k]) / (2.0 * h) - exact[k];
                r2 += d * d;
            }
            return std::sqrt(r2);
        };
        const double h = std::min(1e-3, 0.5 * t);
        const double r1 = residual_at(h);
        const double r2 = residual_at(0.5 * h);
        report.derivative_residual = r1;
        report.derivative_order_ratio = (r2 > 0.0) ? r1 / r2 : 4.0;
    }

    // (iii) Laplace transform of the orbit reproduces the resolvent. Horizon
    // s_max truncates the tail below 1e-12; composite midpoint in between.
    {
        const double s_max = -std::log(1e-12) / (lambda - w);
        const double h = s_max / static_cast<double>(quad_steps);
        StateVector quad(x.size(), 0.0);
        for (std::size_t i = 0; i < quad_steps; ++i) {
            const double s = (static_cast<double>(i) + 0.5) * h;
            const double damp = std::exp(-lambda * s);
            for (std::size_t k = 0; k < x.size(); ++k)
                quad[k] += h * damp * std::exp(s * gen.eigenvalues[k]) * x[k];
        }
        const auto exact = resolvent_apply(gen, lambda, x);
        double r2 = 0.0;
        for (std::size_t k = 0; k < x.size(); ++k) {
            const double d = quad[k] - exact[k];
            r2 += d * d;
        }
        report.laplace_residual = std::sqrt(r2);
    }

    report.pass = report.integral_residual < 1e-10 && report.derivative_order_ratio > 3.0 &&
                  report.derivative_order_ratio < 5.0;
    return report;
}

}  // namespace spdelab
