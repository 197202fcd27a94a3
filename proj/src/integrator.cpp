#include "spdelab/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "spdelab/parallel.hpp"

namespace spdelab {

namespace {

std::string divergence_message(std::size_t step, double time, double state_norm) {
    std::ostringstream os;
    os << "trajectory diverged at step " << step << " (t=" << time << "): state norm "
       << state_norm << " exceeds the trust region " << kDivergenceGuard;
    return os.str();
}

/// Sum of jump contributions propagated to the end of a window of size dt.
void add_propagated_jumps(const DiagonalGenerator& gen, const CoefficientSet& coeffs,
                          const StateVector& frozen,
                          const std::vector<std::pair<double, Mark>>& window_jumps, double dt,
                          const std::vector<double>* mult, StateVector& acc) {
    for (const auto& [offset, mark] : window_jumps) {
        if (!(offset > 0.0) || offset > dt)
            throw std::invalid_argument("step_mild: jump offset must lie in (0, dt]");
        StateVector v = coeffs.jump(mark, frozen);
        if (v.size() != acc.size())
            throw std::invalid_argument("step_mild: jump coefficient dimension mismatch");
        const double remain = dt - offset;
        for (std::size_t k = 0; k < acc.size(); ++k) {
            double jv = mult ? (*mult)[k] * v[k] : v[k];
            acc[k] += std::exp(remain * gen.eigenvalues[k]) * jv;
        }
    }
}

StateVector step_core(const DiagonalGenerator& gen, const CoefficientSet& coeffs,
                      const std::function<StateVector(const StateVector&)>& comp_mean,
                      const StateVector& x,
                      const std::vector<std::pair<double, Mark>>& window_jumps, double dt,
                      const std::vector<double>& decay, const std::vector<double>& weight,
                      const std::vector<double>* mult) {
    const std::size_t dim = gen.dimension();
    StateVector next(dim);

    const StateVector drift = coeffs.drift(x);
    if (drift.size() != dim) throw std::invalid_argument("drift dimension mismatch");
    const StateVector comp = comp_mean(x);

    for (std::size_t k = 0; k < dim; ++k) {
        const double d = mult ? (*mult)[k] * drift[k] : drift[k];
        const double c = mult ? (*mult)[k] * comp[k] : comp[k];
        next[k] = decay[k] * x[k] + weight[k] * (d - c);
    }
    add_propagated_jumps(gen, coeffs, x, window_jumps, dt, mult, next);
    return next;
}

std::function<StateVector(const StateVector&)> compensator_of(const CoefficientSet& coeffs,
                                                              const MarkMeasure* measure,
                                                              std::size_t dim) {
    if (coeffs.compensator_mean) return coeffs.compensator_mean;
    if (measure == nullptr)
        throw std::invalid_argument(
            "integrator: coefficients lack a compensator closed form and no mark measure was "
            "given to build one");
    if (measure->total_rate() == 0.0)
        return [dim](const StateVector&) { return StateVector(dim, 0.0); };
    auto quad = measure->quadrature();
    auto jump = coeffs.jump;
    return [quad = std::move(quad), jump, dim](const StateVector& x) {
        StateVector acc(dim, 0.0);
        for (std::size_t q = 0; q < quad.nodes.size(); ++q) {
            const StateVector v = jump(quad.nodes[q], x);
            for (std::size_t k = 0; k < dim; ++k) acc[k] += quad.weights[q] * v[k];
        }
        return acc;
    };
}

MildPath simulate_core(const DiagonalGenerator& gen, const CoefficientSet& coeffs,
                       const MarkMeasure* measure, const JumpTrain& train,
                       const SimulationGrid& grid, const StateVector& initial,
                       const std::vector<double>* mult) {
    if (grid.steps == 0) throw std::invalid_argument("simulate: grid needs at least one step");
    if (!(grid.horizon > 0.0)) throw std::invalid_argument("simulate: horizon must be > 0");
    if (train.horizon < grid.horizon)
        throw std::invalid_argument("simulate: train horizon shorter than the grid horizon");
    const std::size_t dim = gen.dimension();
    if (initial.size() != dim) throw std::invalid_argument("simulate: initial state dim mismatch");

    const double dt = grid.dt();
    std::vector<double> decay(dim), weight(dim);
    {
        const auto w = convolution_weights(gen, dt);
        for (std::size_t k = 0; k < dim; ++k) {
            decay[k] = std::exp(dt * gen.eigenvalues[k]);
            weight[k] = w[k];
        }
    }
    const auto comp_mean = compensator_of(coeffs, measure, dim);

    MildPath path;
    path.train_fingerprint = train.fingerprint();
    path.times.resize(grid.steps + 1);
    path.states.resize(grid.steps + 1);
    path.times[0] = 0.0;
    path.states[0] = initial;
    if (mult) {
        for (std::size_t k = 0; k < dim; ++k) path.states[0][k] *= (*mult)[k];
    }

    StateVector x = path.states[0];
    std::size_t j = 0;  // next unconsumed jump
    std::vector<std::pair<double, Mark>> window;
    for (std::size_t step = 0; step < grid.steps; ++step) {
        const double t0 = grid.time(step);
        const double t1 = grid.time(step + 1);
        window.clear();
        while (j < train.size() && train.times[j] <= t1) {
            if (train.times[j] > t0) window.emplace_back(train.times[j] - t0, train.marks[j]);
            ++j;
        }
        x = step_core(gen, coeffs, comp_mean, x, window, t1 - t0, decay, weight, mult);
        const double n = norm(x);
        if (!std::isfinite(n) || n > kDivergenceGuard)
            throw DivergenceError(step + 1, t1, n);
        path.times[step + 1] = t1;
        path.states[step + 1] = x;
    }
    return path;
}

std::vector<double> yosida_multipliers(const DiagonalGenerator& gen, double lambda) {
    return scaled_resolvent_multipliers(gen, lambda);  // rejects lambda <= growth bound
}

}  // namespace

DivergenceError::DivergenceError(std::size_t step, double time, double state_norm)
    : std::runtime_error(divergence_message(step, time, state_norm)),
      step_(step),
      time_(time),
      state_norm_(state_norm) {}

StateVector step_mild(const DiagonalGenerator& gen, const CoefficientSet& coeffs,
                      const StateVector& x,
                      const std::vector<std::pair<double, Mark>>& window_jumps, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("step_mild: dt must be > 0");
    const std::size_t dim = gen.dimension();
    if (x.size() != dim) throw std::invalid_argument("step_mild: state dim mismatch");
    std::vector<double> decay(dim);
    const auto weight = convolution_weights(gen, dt);
    for (std::size_t k = 0; k < dim; ++k) decay[k] = std::exp(dt * gen.eigenvalues[k]);
    const auto comp_mean = compensator_of(coeffs, nullptr, dim);
    StateVector next = step_core(gen, coeffs, comp_mean, x, window_jumps, dt, decay, weight,
                                 nullptr);
    const double n = norm(next);
    if (!std::isfinite(n) || n > kDivergenceGuard) throw DivergenceError(1, dt, n);
    return next;
}

MildPath simulate_mild_path(const DiagonalGenerator& gen, const CoefficientSet& coeffs,
                            const JumpTrain& train, const SimulationGrid& grid,
                            const StateVector& initial) {
    return simulate_core(gen, coeffs, nullptr, train, grid, initial, nullptr);
}

MildPath simulate_mild_path(const DiagonalGenerator& gen, const CoefficientSet& coeffs,
                            const MarkMeasure& measure, const SimulationGrid& grid,
                            const StateVector& initial, RngStream& rng) {
    const JumpTrain train = sample_jump_train(measure, grid.horizon, rng);
    return simulate_core(gen, coeffs, &measure, train, grid, initial, nullptr);
}

MildPath simulate_yosida_path(const DiagonalGenerator& gen, const CoefficientSet& coeffs,
                              const JumpTrain& train, const SimulationGrid& grid,
                              const StateVector& initial, double lambda) {
    const auto mult = yosida_multipliers(gen, lambda);
    return simulate_core(gen, coeffs, nullptr, train, grid, initial, &mult);
}

MildPath simulate_yosida_path(const DiagonalGenerator& gen, const CoefficientSet& coeffs,
                              const MarkMeasure& measure, const SimulationGrid& grid,
                              const StateVector& initial, double lambda, RngStream& rng) {
    const auto mult = yosida_multipliers(gen, lambda);
    const JumpTrain train = sample_jump_train(measure, grid.horizon, rng);
    return simulate_core(gen, coeffs, &measure, train, grid, initial, &mult);
}

double st2_norm(const std::vector<MildPath>& ensemble) {
    if (ensemble.empty()) throw std::invalid_argument("st2_norm: empty ensemble");
    const std::size_t len = ensemble.front().states.size();
    double acc = 0.0;
    for (const MildPath& p : ensemble) {
        if (p.states.size() != len)
            throw std::invalid_argument("st2_norm: ensemble paths live on different grids");
        double sup = 0.0;
        for (const StateVector& s : p.states) sup = std::max(sup, norm_sq(s));
        acc += sup;
    }
    return std::sqrt(acc / static_cast<double>(ensemble.size()));
}

YosidaGapReport yosida_gap_estimate(const DiagonalGenerator& gen, const CoefficientSet& coeffs,
                                    const MarkMeasure& measure, const SimulationGrid& grid,
                                    const StateVector& initial,
                                    const std::vector<double>& lambdas, std::size_t paths,
                                    std::uint64_t seed, std::uint64_t stream_base, int threads) {
    if (lambdas.empty()) throw std::invalid_argument("yosida_gap_estimate: empty lambda list");
    const double w = gen.growth_bound();
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        if (!(lambdas[i] > w))
            throw std::domain_error("yosida_gap_estimate: lambda must exceed the growth bound");
        if (i > 0 && !(lambdas[i] > lambdas[i - 1]))
            throw std::invalid_argument("yosida_gap_estimate: lambdas must be increasing");
    }
    if (paths == 0) throw std::invalid_argument("yosida_gap_estimate: need at least one path");

    std::vector<std::vector<double>> sup_sq(paths, std::vector<double>(lambdas.size(), 0.0));
    parallel_for(paths, threads, [&](std::size_t p) {
        RngStream rng(seed, stream_base + p);
        const JumpTrain train = sample_jump_train(measure, grid.horizon, rng);
        const MildPath ref = simulate_core(gen, coeffs, &measure, train, grid, initial, nullptr);
        for (std::size_t li = 0; li < lambdas.size(); ++li) {
            const auto mult = yosida_multipliers(gen, lambdas[li]);
            const MildPath approx =
                simulate_core(gen, coeffs, &measure, train, grid, initial, &mult);
            double sup = 0.0;
            for (std::size_t k = 0; k < ref.states.size(); ++k)
                sup = std::max(sup, norm_sq(subtracted(approx.states[k], ref.states[k])));
            sup_sq[p][li] = sup;
        }
    });

    YosidaGapReport report;
    report.points.resize(lambdas.size());
    for (std::size_t li = 0; li < lambdas.size(); ++li) {
        double mean = 0.0;
        for (std::size_t p = 0; p < paths; ++p) mean += sup_sq[p][li];
        mean /= static_cast<double>(paths);
        double var = 0.0;
        for (std::size_t p = 0; p < paths; ++p) {
            const double d = sup_sq[p][li] - mean;
            var += d * d;
        }
        var /= static_cast<double>(std::max<std::size_t>(paths - 1, 1));
        report.points[li] = {lambdas[li], mean,
                             3.0 * std::sqrt(var / static_cast<double>(paths))};
    }

    // Least-squares slope of log(gap) against log(lambda); flat zero gaps
    // (zero noise and zero drift can make the gap vanish identically) report
    // slope 0.
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::size_t m = 0;
    for (const auto& pt : report.points) {
        if (pt.gap <= 0.0) continue;
        const double lx = std::log(pt.lambda), ly = std::log(pt.gap);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++m;
    }
    if (m >= 2) {
        const double denom = static_cast<double>(m) * sxx - sx * sx;
        report.fitted_log_slope = (static_cast<double>(m) * sxy - sx * sy) / denom;
    }
    return report;
}

}  // namespace spdelab
