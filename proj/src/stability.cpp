#include "spdelab/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "spdelab/jump_train.hpp"
#include "spdelab/parallel.hpp"
#include "spdelab/rng.hpp"

namespace spdelab {

DissipativityReport dissipativity_estimate(const DiagonalGenerator& gen,
                                           const CoefficientSet& coeffs, std::size_t probe_pairs,
                                           std::uint64_t seed) {
    if (probe_pairs == 0)
        throw std::invalid_argument("dissipativity_estimate: need at least one probe pair");
    const std::size_t dim = gen.dimension();

    double min_eig = gen.eigenvalues[0];
    for (double a : gen.eigenvalues) min_eig = std::min(min_eig, a);

    DissipativityReport report;
    report.analytic_margin = -gen.growth_bound() - std::sqrt(coeffs.drift_lipschitz_sq);
    report.epsilon = 2.0 * report.analytic_margin - coeffs.jump_lipschitz_sq;
    report.certified = report.epsilon > 0.0;

    RngStream rng(seed, 0);
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < probe_pairs; ++p) {
        StateVector x(dim), y(dim);
        for (std::size_t k = 0; k < dim; ++k) {
            x[k] = 3.0 * rng.normal();
            y[k] = 3.0 * rng.normal();
        }
        const StateVector diff = subtracted(x, y);
        const double d2 = norm_sq(diff);
        if (d2 == 0.0)
            throw std::invalid_argument("dissipativity_estimate: coinciding probe pair");
        StateVector flow = generator_apply_linear(gen, diff);
        add_scaled_in_place(flow, subtracted(coeffs.drift(x), coeffs.drift(y)), 1.0);
        worst = std::min(worst, -dot(diff, flow) / d2);
    }
    report.empirical_margin = worst;
    return report;
}

LyapunovCheckReport lyapunov_check(const DiagonalGenerator& gen, const CoefficientSet& coeffs,
                                   const MarkMeasure& measure, const LyapunovFunction& H,
                                   std::size_t probes, std::uint64_t seed,
                                   std::size_t quad_order) {
    if (probes == 0) throw std::invalid_argument("lyapunov_check: need at least one probe");
    if (!H.value || !H.gradient || !H.hessian_apply || !H.envelope_gradient ||
        !H.envelope_hessian)
        throw std::invalid_argument("lyapunov_check: incomplete Lyapunov candidate");
    const std::size_t dim = gen.dimension();

    LyapunovCheckReport report;
    auto push = [&report](const std::string& property, double observed, double allowed,
                          bool pass) {
        report.samples.push_back({property, observed, allowed, pass});
    };

    RngStream rng(seed, 0);
    const double slack = 1.0 + 1e-9;
    bool cmp = true, env = true, drift = true;
    double c3 = std::numeric_limits<double>::infinity();
    double worst_cmp_low = std::numeric_limits<double>::infinity();
    double worst_cmp_high = 0.0;
    double worst_grad = 0.0, worst_hess = 0.0, envelope_c = 0.0;

    // Probe radii stay O(1)-to-moderate; stability certificates act near the
    // equilibrium, and the origin itself is probed explicitly last.
    for (std::size_t p = 0; p < probes; ++p) {
        StateVector x(dim);
        const double scale = (p % 5 == 0) ? 0.05 : 2.0;
        for (std::size_t k = 0; k < dim; ++k) x[k] = scale * rng.normal();

        const double h = H.value(x);
        const double n2 = norm_sq(x);
        if (n2 > 0.0) {
            worst_cmp_low = std::min(worst_cmp_low, h / n2);
            worst_cmp_high = std::max(worst_cmp_high, h / n2);
            if (h < H.c1 * n2 / slack || h > H.c2 * n2 * slack) cmp = false;
        }

        const double r = norm(x);
        worst_grad = std::max(worst_grad, norm(H.gradient(x)) - H.envelope_gradient(r));
        StateVector y(dim);
        for (std::size_t k = 0; k < dim; ++k) y[k] = rng.normal();
        const double ny = norm(y);
        if (ny > 0.0)
            worst_hess =
                std::max(worst_hess, norm(H.hessian_apply(x, y)) / ny - H.envelope_hessian(r));

        const double action = lyapunov_generator_apply(gen, coeffs, measure, H, x, quad_order);
        if (h > 0.0) {
            if (action >= 0.0) drift = false;
            c3 = std::min(c3, -action / h);
        }

        // Quasi-sublinearity of the envelopes on radius pairs.
        const double s = 0.5 + rng.uniform01();
        for (const auto& envf : {H.envelope_gradient, H.envelope_hessian}) {
            const double denom_add = envf(r) + envf(s);
            const double denom_mul = envf(r) * envf(s);
            if (denom_add > 0.0)
                envelope_c = std::max(envelope_c, envf(r + s) / denom_add);
            if (denom_mul > 0.0)
                envelope_c = std::max(envelope_c, envf(r * s) / denom_mul);
        }
    }

    // The origin: state-independent jumps keep pumping energy there, so the
    // generator action fails to be negative and the report must say so.
    {
        const StateVector origin(dim, 0.0);
        const double action =
            lyapunov_generator_apply(gen, coeffs, measure, H, origin, quad_order);
        push("generator action at origin", action, 0.0, action <= 0.0);
        if (action > 0.0) {
            drift = false;
            c3 = 0.0;
        }
    }

    if (worst_grad > 1e-9 || worst_hess > 1e-9) env = false;
    if (!(c3 > 0.0) || !std::isfinite(c3)) {
        drift = false;
        c3 = std::max(c3, 0.0);
    }

    push("norm comparison lower c1", worst_cmp_low, H.c1, worst_cmp_low >= H.c1 / slack);
    push("norm comparison upper c2", worst_cmp_high, H.c2, worst_cmp_high <= H.c2 * slack);
    push("gradient envelope excess", worst_grad, 0.0, worst_grad <= 1e-9);
    push("hessian envelope excess", worst_hess, 0.0, worst_hess <= 1e-9);
    push("generator decay rate c3", c3, 0.0, drift);

    report.largest_c3 = std::isfinite(c3) ? c3 : 0.0;
    report.envelope_constant = envelope_c;
    report.comparison_pass = cmp;
    report.envelope_pass = env;
    report.drift_pass = drift;
    report.pass = cmp && env && drift;
    return report;
}

namespace {

StabilityReport decay_report_from_stats(const SimulationGrid& grid, const MeanVar& stats,
                                        std::size_t paths, double initial_value, double rate,
                                        double amplitude, double epsilon, bool certified,
                                        std::size_t report_points) {
    const std::size_t len = grid.steps + 1;
    StabilityReport report;
    report.epsilon = epsilon;
    report.certified = certified;

    const std::vector<double>& mean = stats.mean;
    std::vector<double> se(len);
    for (std::size_t k = 0; k < len; ++k)
        se[k] = std::sqrt(stats.sample_var[k] / static_cast<double>(paths));

    bool all_pass = certified;
    double growth = 0.0;
    for (std::size_t k = 0; k < len; ++k) {
        const double t = grid.time(k);
        const double envelope = amplitude * initial_value * std::exp(-rate * t);
        const double bound = envelope * (1.0 + kDecaySlack) + 3.0 * se[k];
        if (certified && mean[k] > bound) all_pass = false;
        if (envelope > 0.0) growth = std::max(growth, mean[k] / envelope);
    }
    report.pass = all_pass && certified;
    report.growth_constant = growth;

    // Least-squares rate on the positive part of the curve.
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::size_t m = 0;
    for (std::size_t k = 0; k < len; ++k) {
        if (mean[k] <= 0.0) continue;
        const double t = grid.time(k);
        const double ly = std::log(mean[k]);
        sx += t;
        sy += ly;
        sxx += t * t;
        sxy += t * ly;
        ++m;
    }
    if (m >= 2) {
        const double denom = static_cast<double>(m) * sxx - sx * sx;
        if (denom > 0.0) report.fitted_rate = (static_cast<double>(m) * sxy - sx * sy) / denom;
    }

    const std::size_t want = std::max<std::size_t>(2, std::min(report_points, len));
    for (std::size_t i = 0; i < want; ++i) {
        const std::size_t k = (i == want - 1) ? (len - 1) : i * (len - 1) / (want - 1);
        DecayPoint pt;
        pt.t = grid.time(k);
        pt.value = mean[k];
        pt.se = se[k];
        const double envelope = amplitude * initial_value * std::exp(-rate * pt.t);
        pt.bound = envelope * (1.0 + kDecaySlack) + 3.0 * se[k];
        pt.pass = certified && mean[k] <= pt.bound;
        report.curve.push_back(pt);
    }
    return report;
}

}  // namespace

StabilityReport mean_square_decay(const DiagonalGenerator& gen, const CoefficientSet& coeffs,
                                  const MarkMeasure& measure, const SimulationGrid& grid,
                                  const StateVector& xi, const StateVector& eta, double epsilon,
                                  std::size_t paths, std::uint64_t seed,
                                  std::uint64_t stream_base, int threads,
                                  std::size_t report_points) {
    if (paths == 0) throw std::invalid_argument("mean_square_decay: need at least one path");
    if (xi.size() != gen.dimension() || eta.size() != gen.dimension())
        throw std::invalid_argument("mean_square_decay: initial state dim mismatch");
    const double d0 = norm_sq(subtracted(xi, eta));
    if (d0 == 0.0)
        throw std::invalid_argument("mean_square_decay: xi and eta must differ");

    const std::size_t len = grid.steps + 1;
    const auto stats = blocked_mean_var(
        paths, len, threads, [&](std::size_t p, std::vector<double>& v) {
            RngStream rng(seed, stream_base + p);
            const JumpTrain train = sample_jump_train(measure, grid.horizon, rng);
            const MildPath a = simulate_mild_path(gen, coeffs, train, grid, xi);
            const MildPath b = simulate_mild_path(gen, coeffs, train, grid, eta);
            for (std::size_t k = 0; k < len; ++k)
                v[k] = norm_sq(subtracted(a.states[k], b.states[k]));
        });

    return decay_report_from_stats(grid, stats, paths, d0, epsilon, 1.0, epsilon, epsilon > 0.0,
                                   report_points);
}

StabilityReport exp_stability_check(const DiagonalGenerator& gen, const CoefficientSet& coeffs,
                                    const MarkMeasure& measure, const LyapunovFunction& H,
                                    double c3, const SimulationGrid& grid, const StateVector& xi,
                                    std::size_t paths, std::uint64_t seed,
                                    std::uint64_t stream_base, int threads,
                                    std::size_t report_points) {
    if (paths == 0) throw std::invalid_argument("exp_stability_check: need at least one path");
    if (xi.size() != gen.dimension())
        throw std::invalid_argument("exp_stability_check: initial state dim mismatch");
    if (norm_sq(xi) == 0.0)
        throw std::invalid_argument("exp_stability_check: xi must be away from the equilibrium");

    // The certificate is about decay toward the origin, so the origin must be
    // an equilibrium of both coefficients.
    const StateVector origin(gen.dimension(), 0.0);
    if (norm(coeffs.drift(origin)) > 1e-12)
        throw std::invalid_argument(
            "exp_stability_check: drift does not vanish at the origin (equilibrium condition "
            "violated)");
    double jump_at_zero = 0.0;
    if (coeffs.jump_sq_mean) {
        jump_at_zero = coeffs.jump_sq_mean(origin);
    } else if (measure.total_rate() > 0.0) {
        const auto quad = measure.quadrature();
        for (std::size_t q = 0; q < quad.nodes.size(); ++q)
            jump_at_zero += quad.weights[q] * norm_sq(coeffs.jump(quad.nodes[q], origin));
    }
    if (jump_at_zero > 1e-12)
        throw std::invalid_argument(
            "exp_stability_check: jump coefficient does not vanish at the origin (equilibrium "
            "condition violated)");

    const std::size_t len = grid.steps + 1;
    const auto stats = blocked_mean_var(
        paths, len, threads, [&](std::size_t p, std::vector<double>& v) {
            RngStream rng(seed, stream_base + p);
            const MildPath path = simulate_mild_path(gen, coeffs, measure, grid, xi, rng);
            for (std::size_t k = 0; k < len; ++k) v[k] = norm_sq(path.states[k]);
        });

    const double amplitude = H.c2 / H.c1;
    return decay_report_from_stats(grid, stats, paths, norm_sq(xi), c3, amplitude, c3, c3 > 0.0,
                                   report_points);
}

}  // namespace spdelab
