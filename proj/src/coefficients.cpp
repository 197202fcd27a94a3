#include "spdelab/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "spdelab/rng.hpp"

namespace spdelab {

double CoefficientSet::linear_growth_constant() const {
    return 2.0 * std::max(jump_lipschitz_sq, jump_at_zero_sq);
}

CoefficientSet zero_coefficients(std::size_t dim) {
    CoefficientSet c;
    c.name = "zero";
    c.drift = [dim](const StateVector&) { return StateVector(dim, 0.0); };
    c.jump = [dim](const Mark&, const StateVector&) { return StateVector(dim, 0.0); };
    c.compensator_mean = [dim](const StateVector&) { return StateVector(dim, 0.0); };
    c.jump_sq_mean = [](const StateVector&) { return 0.0; };
    return c;
}

CoefficientSet linear_coefficients(std::size_t dim, double drift_scale, double jump_scale,
                                   const MarkMeasure& measure) {
    if (measure.mark_dimension() < 1)
        throw std::invalid_argument("linear coefficients: mark dimension must be >= 1");
    const double mean1 = measure.mean_mark()[0];
    const double m2c1 = measure.coordinate_second_moment()[0];

    CoefficientSet c;
    c.name = "linear";
    c.drift = [drift_scale](const StateVector& x) {
        StateVector out(x);
        for (double& v : out) v *= drift_scale;
        return out;
    };
    c.jump = [jump_scale, dim](const Mark& u, const StateVector& x) {
        if (x.size() != dim) throw std::invalid_argument("jump coefficient: state dim mismatch");
        StateVector out(x);
        const double s = jump_scale * u[0];
        for (double& v : out) v *= s;
        return out;
    };
    c.drift_lipschitz_sq = drift_scale * drift_scale;
    c.jump_lipschitz_sq = jump_scale * jump_scale * m2c1;
    c.jump_at_zero_sq = 0.0;
    c.compensator_mean = [jump_scale, mean1](const StateVector& x) {
        StateVector out(x);
        for (double& v : out) v *= jump_scale * mean1;
        return out;
    };
    c.jump_sq_mean = [jump_scale, m2c1](const StateVector& x) {
        return jump_scale * jump_scale * m2c1 * norm_sq(x);
    };
    return c;
}

CoefficientSet additive_coefficients(std::size_t dim, double scale, const MarkMeasure& measure) {
    const std::size_t overlap = std::min(dim, measure.mark_dimension());
    const Mark mean = measure.mean_mark();
    const auto m2c = measure.coordinate_second_moment();
    double f0 = 0.0;
    for (std::size_t i = 0; i < overlap; ++i) f0 += scale * scale * m2c[i];

    CoefficientSet c;
    c.name = "additive";
    c.drift = [dim](const StateVector&) { return StateVector(dim, 0.0); };
    c.jump = [scale, dim, overlap](const Mark& u, const StateVector&) {
        StateVector out(dim, 0.0);
        for (std::size_t i = 0; i < overlap; ++i) out[i] = scale * u[i];
        return out;
    };
    c.jump_lipschitz_sq = 0.0;
    c.jump_at_zero_sq = f0;
    c.compensator_mean = [scale, dim, overlap, mean](const StateVector&) {
        StateVector out(dim, 0.0);
        for (std::size_t i = 0; i < overlap; ++i) out[i] = scale * mean[i];
        return out;
    };
    c.jump_sq_mean = [f0](const StateVector&) { return f0; };
    return c;
}

CoefficientSet saturating_coefficients(std::size_t dim, double drift_scale, double jump_scale,
                                       const MarkMeasure& measure) {
    if (measure.mark_dimension() < 1)
        throw std::invalid_argument("saturating coefficients: mark dimension must be >= 1");
    const double mean1 = measure.mean_mark()[0];
    const double m2c1 = measure.coordinate_second_moment()[0];

    auto squash = [](const StateVector& x) {
        StateVector out(x);
        for (double& v : out) v = v / (1.0 + v * v);
        return out;
    };

    CoefficientSet c;
    c.name = "saturating";
    c.drift = [drift_scale, squash](const StateVector& x) {
        StateVector out = squash(x);
        for (double& v : out) v *= -drift_scale;
        return out;
    };
    c.jump = [jump_scale, squash, dim](const Mark& u, const StateVector& x) {
        if (x.size() != dim) throw std::invalid_argument("jump coefficient: state dim mismatch");
        StateVector out = squash(x);
        const double s = jump_scale * u[0];
        for (double& v : out) v *= s;
        return out;
    };
    // |d/dr (r/(1+r^2))| <= 1, so the squash is 1-Lipschitz coordinatewise.
    c.drift_lipschitz_sq = drift_scale * drift_scale;
    c.jump_lipschitz_sq = jump_scale * jump_scale * m2c1;
    c.jump_at_zero_sq = 0.0;
    c.compensator_mean = [jump_scale, mean1, squash](const StateVector& x) {
        StateVector out = squash(x);
        for (double& v : out) v *= jump_scale * mean1;
        return out;
    };
    c.jump_sq_mean = [jump_scale, m2c1, squash](const StateVector& x) {
        return jump_scale * jump_scale * m2c1 * norm_sq(squash(x));
    };
    return c;
}

CoefficientValidationReport validate_coefficients(const CoefficientSet& coeffs,
                                                  const MarkMeasure& measure, std::size_t dim,
                                                  std::size_t probe_pairs, std::uint64_t seed) {
    if (!coeffs.drift || !coeffs.jump)
        throw std::invalid_argument("validate_coefficients: drift and jump must be set");
    if (probe_pairs == 0)
        throw std::invalid_argument("validate_coefficients: need at least one probe pair");

    CoefficientValidationReport report;
    report.linear_growth_constant = coeffs.linear_growth_constant();
    report.pass = true;
    const double slack = 1.0 + 1e-9;

    auto push = [&report, slack](const std::string& property, double observed, double allowed) {
        CoefficientValidationSample s;
        s.property = property;
        s.observed = observed;
        s.allowed = allowed;
        s.pass = observed <= allowed * slack + 1e-14;
        report.pass = report.pass && s.pass;
        report.samples.push_back(s);
    };

    const auto quad = measure.quadrature();
    RngStream rng(seed, 0);
    double worst_drift = 0.0, worst_jump = 0.0, worst_growth = 0.0;
    double worst_cm = 0.0, worst_sq = 0.0;
    for (std::size_t p = 0; p < probe_pairs; ++p) {
        StateVector x(dim), y(dim);
        for (std::size_t k = 0; k < dim; ++k) {
            x[k] = 4.0 * rng.normal();
            y[k] = 4.0 * rng.normal();
        }
        const double dist_sq = norm_sq(subtracted(x, y));
        if (dist_sq == 0.0) continue;

        const auto fx = coeffs.drift(x), fy = coeffs.drift(y);
        worst_drift = std::max(worst_drift, norm_sq(subtracted(fx, fy)) / dist_sq);

        double jump_diff = 0.0, jump_sq_x = 0.0;
        StateVector cm_quad(dim, 0.0);
        for (std::size_t q = 0; q < quad.nodes.size(); ++q) {
            const auto jx = coeffs.jump(quad.nodes[q], x);
            const auto jy = coeffs.jump(quad.nodes[q], y);
            jump_diff += quad.weights[q] * norm_sq(subtracted(jx, jy));
            jump_sq_x += quad.weights[q] * norm_sq(jx);
            for (std::size_t k = 0; k < dim; ++k) cm_quad[k] += quad.weights[q] * jx[k];
        }
        worst_jump = std::max(worst_jump, jump_diff / dist_sq);
        const double growth_cap = report.linear_growth_constant * (1.0 + norm_sq(x));
        if (growth_cap > 0.0) worst_growth = std::max(worst_growth, jump_sq_x / growth_cap);

        if (coeffs.compensator_mean)
            worst_cm = std::max(worst_cm,
                                norm(subtracted(coeffs.compensator_mean(x), cm_quad)) /
                                    (1.0 + norm(cm_quad)));
        if (coeffs.jump_sq_mean)
            worst_sq = std::max(worst_sq, std::abs(coeffs.jump_sq_mean(x) - jump_sq_x) /
                                              (1.0 + jump_sq_x));
    }

    push("drift lipschitz ratio", worst_drift, coeffs.drift_lipschitz_sq);
    push("jump lipschitz ratio", worst_jump, coeffs.jump_lipschitz_sq);
    if (report.linear_growth_constant > 0.0)
        push("jump linear growth ratio", worst_growth, 1.0);
    else
        push("jump vanishes (zero growth constant)", worst_growth, 0.0);
    if (coeffs.compensator_mean) push("compensator mean closed form", worst_cm, 1e-8);
    if (coeffs.jump_sq_mean) push("jump square mean closed form", worst_sq, 1e-8);
    return report;
}

}  // namespace spdelab
