#include "spdelab/stochastic_integral.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace spdelab {

namespace {

std::string describe_site(double s, const Mark& u) {
    std::ostringstream os;
    os << "s=" << s << ", u=(";
    for (std::size_t i = 0; i < u.size(); ++i) os << (i ? "," : "") << u[i];
    os << ")";
    return os.str();
}

StateVector eval_checked(const TimeMarkIntegrand& f, double s, const Mark& u) {
    StateVector v = f.eval(s, u);
    if (!all_finite(v))
        throw std::runtime_error("jump integrand returned a non-finite value at " +
                                 describe_site(s, u));
    return v;
}

/// s -> mark mean of f, either the provided closed form or measure quadrature.
std::function<StateVector(double)> make_mark_mean(const TimeMarkIntegrand& f,
                                                  const MarkMeasure& measure,
                                                  std::size_t state_dim,
                                                  const IntegralOptions& opts) {
    if (f.mark_mean) return f.mark_mean;
    if (measure.total_rate() == 0.0)
        return [state_dim](double) { return StateVector(state_dim, 0.0); };
    auto quad = measure.quadrature(opts.quad_order);
    auto eval = f.eval;
    return [quad = std::move(quad), eval, state_dim](double s) {
        StateVector acc(state_dim, 0.0);
        for (std::size_t q = 0; q < quad.nodes.size(); ++q) {
            const StateVector v = eval(s, quad.nodes[q]);
            for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += quad.weights[q] * v[k];
        }
        return acc;
    };
}

std::function<double(double)> make_mark_sq_mean(const TimeMarkIntegrand& f,
                                                const MarkMeasure& measure,
                                                const IntegralOptions& opts) {
    if (f.mark_sq_mean) return f.mark_sq_mean;
    if (measure.total_rate() == 0.0) return [](double) { return 0.0; };
    auto quad = measure.quadrature(opts.quad_order);
    auto eval = f.eval;
    return [quad = std::move(quad), eval](double s) {
        double acc = 0.0;
        for (std::size_t q = 0; q < quad.nodes.size(); ++q)
            acc += quad.weights[q] * norm_sq(eval(s, quad.nodes[q]));
        return acc;
    };
}

void require_horizon(const JumpTrain& train, double T) {
    if (!(T > 0.0)) throw std::invalid_argument("jump integral: horizon must be > 0");
    if (train.horizon < T)
        throw std::invalid_argument("jump integral: train horizon shorter than requested T");
}

}  // namespace

StateVector compensated_integral(const TimeMarkIntegrand& f, const JumpTrain& train,
                                 const MarkMeasure& measure, double T, std::size_t state_dim,
                                 const IntegralOptions& opts) {
    require_horizon(train, T);
    StateVector acc(state_dim, 0.0);
    for (std::size_t j = 0; j < train.size(); ++j) {
        if (train.times[j] > T) break;
        const StateVector v = eval_checked(f, train.times[j], train.marks[j]);
        if (v.size() != state_dim)
            throw std::invalid_argument("jump integrand dimension mismatch");
        for (std::size_t k = 0; k < state_dim; ++k) acc[k] += v[k];
    }

    const auto mean = make_mark_mean(f, measure, state_dim, opts);
    if (f.time_independent) {
        const StateVector m = mean(0.0);
        for (std::size_t k = 0; k < state_dim; ++k) acc[k] -= T * m[k];
    } else {
        const double h = T / static_cast<double>(opts.time_steps);
        for (std::size_t i = 0; i < opts.time_steps; ++i) {
            const StateVector m = mean((static_cast<double>(i) + 0.5) * h);
            for (std::size_t k = 0; k < state_dim; ++k) acc[k] -= h * m[k];
        }
    }
    return acc;
}

StateVector convolved_integral(const DiagonalGenerator& gen, const TimeMarkIntegrand& f,
                               const JumpTrain& train, const MarkMeasure& measure, double T,
                               const IntegralOptions& opts) {
    require_horizon(train, T);
    const std::size_t dim = gen.dimension();
    StateVector acc(dim, 0.0);
    for (std::size_t j = 0; j < train.size(); ++j) {
        const double tau = train.times[j];
        if (tau > T) break;
        const StateVector v = eval_checked(f, tau, train.marks[j]);
        if (v.size() != dim) throw std::invalid_argument("jump integrand dimension mismatch");
        for (std::size_t k = 0; k < dim; ++k)
            acc[k] += std::exp((T - tau) * gen.eigenvalues[k]) * v[k];
    }

    const auto mean = make_mark_mean(f, measure, dim, opts);
    if (f.time_independent) {
        // \int_0^T S_{T-s} m ds = diag((e^{a T} - 1)/a) m, exactly.
        const auto w = convolution_weights(gen, T);
        const StateVector m = mean(0.0);
        for (std::size_t k = 0; k < dim; ++k) acc[k] -= w[k] * m[k];
    } else {
        const double h = T / static_cast<double>(opts.time_steps);
        for (std::size_t i = 0; i < opts.time_steps; ++i) {
            const double s = (static_cast<double>(i) + 0.5) * h;
            const StateVector m = mean(s);
            for (std::size_t k = 0; k < dim; ++k)
                acc[k] -= h * std::exp((T - s) * gen.eigenvalues[k]) * m[k];
        }
    }
    return acc;
}

MaximalInequalityReport maximal_inequality_check(const DiagonalGenerator& gen,
                                                 const TimeMarkIntegrand& f,
                                                 const MarkMeasure& measure, double T,
                                                 const std::vector<double>& epsilons,
                                                 std::size_t paths, std::size_t grid_points,
                                                 std::uint64_t seed, std::uint64_t stream_base,
                                                 const IntegralOptions& opts) {
    if (!(T > 0.0)) throw std::invalid_argument("maximal_inequality_check: horizon must be > 0");
    if (paths == 0 || grid_points == 0)
        throw std::invalid_argument("maximal_inequality_check: paths and grid_points must be > 0");
    if (epsilons.empty())
        throw std::invalid_argument("maximal_inequality_check: need at least one epsilon");
    for (double eps : epsilons)
        if (!(eps > 0.0))
            throw std::invalid_argument("maximal_inequality_check: epsilons must be > 0");

    const std::size_t dim = gen.dimension();
    const auto mean = make_mark_mean(f, measure, dim, opts);
    const auto sq_mean = make_mark_sq_mean(f, measure, opts);

    MaximalInequalityReport report;
    report.horizon = T;
    report.paths = paths;

    // Second-moment integral of the integrand against dt x beta.
    if (f.time_independent) {
        report.second_moment_integral = T * sq_mean(0.0);
    } else {
        const double h = T / static_cast<double>(opts.time_steps);
        double acc = 0.0;
        for (std::size_t i = 0; i < opts.time_steps; ++i)
            acc += h * sq_mean((static_cast<double>(i) + 0.5) * h);
        report.second_moment_integral = acc;
    }
    const double wplus = std::max(gen.growth_bound(), 0.0);
    report.growth_factor = 4.0 * std::exp(2.0 * wplus * T);

    // Advances Z over a jump-free window (t, t+dt]: semigroup decay plus the
    // compensator convolution (exact for constant mark mean, midpoint else).
    const StateVector m0 = f.time_independent ? mean(0.0) : StateVector{};
    auto advance = [&](StateVector& z, double t, double dt) {
        if (dt <= 0.0) return;
        for (std::size_t k = 0; k < dim; ++k) z[k] *= std::exp(dt * gen.eigenvalues[k]);
        if (f.time_independent) {
            const auto w = convolution_weights(gen, dt);
            for (std::size_t k = 0; k < dim; ++k) z[k] -= w[k] * m0[k];
        } else {
            const std::size_t sub = 4;
            const double h = dt / static_cast<double>(sub);
            for (std::size_t i = 0; i < sub; ++i) {
                const double s = t + (static_cast<double>(i) + 0.5) * h;
                const StateVector m = mean(s);
                for (std::size_t k = 0; k < dim; ++k)
                    z[k] -= h * std::exp((t + dt - s) * gen.eigenvalues[k]) * m[k];
            }
        }
    };

    std::vector<double> sups(paths, 0.0);
    for (std::size_t p = 0; p < paths; ++p) {
        RngStream rng(seed, stream_base + p);
        const JumpTrain train = sample_jump_train(measure, T, rng);

        StateVector z(dim, 0.0);
        double sup = 0.0;
        double t_cur = 0.0;
        std::size_t j = 0;  // next jump index
        for (std::size_t g = 1; g <= grid_points; ++g) {
            const double t_grid = T * static_cast<double>(g) / static_cast<double>(grid_points);
            while (j < train.size() && train.times[j] <= t_grid) {
                const double tau = train.times[j];
                advance(z, t_cur, tau - t_cur);
                sup = std::max(sup, norm(z));  // left limit at the jump
                const StateVector v = eval_checked(f, tau, train.marks[j]);
                for (std::size_t k = 0; k < dim; ++k) z[k] += v[k];
                sup = std::max(sup, norm(z));
                t_cur = tau;
                ++j;
            }
            advance(z, t_cur, t_grid - t_cur);
            t_cur = t_grid;
            sup = std::max(sup, norm(z));
        }
        sups[p] = sup;
    }

    report.pass = true;
    for (double eps : epsilons) {
        MaximalInequalitySample s;
        s.epsilon = eps;
        std::size_t hits = 0;
        for (double v : sups)
            if (v > eps) ++hits;
        s.empirical_probability = static_cast<double>(hits) / static_cast<double>(paths);
        s.bound = report.growth_factor / (eps * eps) * report.second_moment_integral;
        const double p_hat = s.empirical_probability;
        s.mc_band = 3.0 * std::sqrt(std::max(p_hat * (1.0 - p_hat), 0.0) /
                                    static_cast<double>(paths)) +
                    1.0 / static_cast<double>(paths);
        s.pass = s.empirical_probability <= s.bound + s.mc_band;
        report.pass = report.pass && s.pass;
        report.samples.push_back(s);
    }
    return report;
}

}  // namespace spdelab
