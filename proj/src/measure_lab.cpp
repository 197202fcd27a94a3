#include "spdelab/measure_lab.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "spdelab/jump_train.hpp"
#include "spdelab/parallel.hpp"

namespace spdelab {

namespace {

/// Grid indices for the requested times; every time must land on the grid.
std::vector<std::size_t> grid_indices(const SimulationGrid& grid,
                                      const std::vector<double>& times) {
    std::vector<std::size_t> idx(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double k = times[i] / grid.dt();
        const auto rounded = static_cast<std::size_t>(std::llround(k));
        if (rounded > grid.steps || std::abs(k - static_cast<double>(rounded)) > 1e-9)
            throw std::invalid_argument("requested time does not lie on the simulation grid");
        idx[i] = rounded;
    }
    return idx;
}

}  // namespace

ContractionReport contraction_estimate(const DiagonalGenerator& gen,
                                       const CoefficientSet& coeffs, const MarkMeasure& measure,
                                       const StateVector& xi, const StateVector& eta,
                                       const std::vector<double>& times,
                                       std::size_t steps_per_unit, std::size_t cloud_size,
                                       std::size_t replicates, double epsilon,
                                       std::uint64_t seed, int threads) {
    if (!(epsilon > 0.0))
        throw std::invalid_argument(
            "contraction_estimate: requires a certified positive contraction exponent");
    if (times.empty()) throw std::invalid_argument("contraction_estimate: empty time list");
    if (cloud_size == 0 || cloud_size > 1024)
        throw std::invalid_argument("contraction_estimate: cloud_size must be in [1, 1024]");
    if (replicates < 2)
        throw std::invalid_argument("contraction_estimate: need at least 2 replicates");
    if (steps_per_unit == 0)
        throw std::invalid_argument("contraction_estimate: steps_per_unit must be > 0");

    double t_max = 0.0;
    for (double t : times) {
        if (!(t > 0.0)) throw std::invalid_argument("contraction_estimate: times must be > 0");
        t_max = std::max(t_max, t);
    }
    SimulationGrid grid;
    grid.horizon = t_max;
    grid.steps = static_cast<std::size_t>(std::llround(t_max * static_cast<double>(steps_per_unit)));
    if (grid.steps == 0) grid.steps = 1;
    const auto indices = grid_indices(grid, times);
    const std::size_t nt = times.size();

    const double d0 = norm(subtracted(xi, eta));
    if (d0 == 0.0) throw std::invalid_argument("contraction_estimate: xi and eta must differ");

    // Per replicate and time: independent-noise distance, same-law
    // self-distance, coupled RMS distance.
    std::vector<std::vector<double>> ind(replicates, std::vector<double>(nt, 0.0));
    std::vector<std::vector<double>> self_d(replicates, std::vector<double>(nt, 0.0));
    std::vector<std::vector<double>> coup(replicates, std::vector<double>(nt, 0.0));

    // Stream layout: (replicate, side, point) with sides 0: from xi, 1: from
    // eta, 2: second cloud from eta, 3: coupled pair. Stream ids are unique
    // and reproducible for any thread count.
    const std::uint64_t per_side = cloud_size;
    const std::uint64_t per_replicate = 4 * per_side;

    parallel_for(replicates, threads, [&](std::size_t r) {
        std::vector<std::vector<StateVector>> cloud_x(nt), cloud_y(nt), cloud_y2(nt);
        for (std::size_t ti = 0; ti < nt; ++ti) {
            cloud_x[ti].reserve(cloud_size);
            cloud_y[ti].reserve(cloud_size);
            cloud_y2[ti].reserve(cloud_size);
        }
        std::vector<double> coupled_sq(nt, 0.0);

        for (std::size_t i = 0; i < cloud_size; ++i) {
            const std::uint64_t base = r * per_replicate;
            RngStream sx(seed, base + 0 * per_side + i);
            RngStream sy(seed, base + 1 * per_side + i);
            RngStream sy2(seed, base + 2 * per_side + i);
            RngStream sc(seed, base + 3 * per_side + i);

            const MildPath px = simulate_mild_path(gen, coeffs, measure, grid, xi, sx);
            const MildPath py = simulate_mild_path(gen, coeffs, measure, grid, eta, sy);
            const MildPath py2 = simulate_mild_path(gen, coeffs, measure, grid, eta, sy2);
            const JumpTrain shared = sample_jump_train(measure, grid.horizon, sc);
            const MildPath cx = simulate_mild_path(gen, coeffs, shared, grid, xi);
            const MildPath cy = simulate_mild_path(gen, coeffs, shared, grid, eta);

            for (std::size_t ti = 0; ti < nt; ++ti) {
                const std::size_t k = indices[ti];
                cloud_x[ti].push_back(px.states[k]);
                cloud_y[ti].push_back(py.states[k]);
                cloud_y2[ti].push_back(py2.states[k]);
                coupled_sq[ti] += norm_sq(subtracted(cx.states[k], cy.states[k]));
            }
        }

        for (std::size_t ti = 0; ti < nt; ++ti) {
            const EmpiricalMeasure mx{cloud_x[ti]};
            const EmpiricalMeasure my{cloud_y[ti]};
            const EmpiricalMeasure my2{cloud_y2[ti]};
            ind[r][ti] = wasserstein2_exact(mx, my).distance;
            self_d[r][ti] = wasserstein2_exact(my, my2).distance;
            coup[r][ti] = std::sqrt(coupled_sq[ti] / static_cast<double>(cloud_size));
        }
    });

    ContractionReport report;
    report.epsilon = epsilon;
    report.initial_distance = d0;
    report.pass = true;

    auto mean_se = [&](const std::vector<std::vector<double>>& vals, std::size_t ti) {
        double mean = 0.0;
        for (std::size_t r = 0; r < replicates; ++r) mean += vals[r][ti];
        mean /= static_cast<double>(replicates);
        double var = 0.0;
        for (std::size_t r = 0; r < replicates; ++r) {
            const double d = vals[r][ti] - mean;
            var += d * d;
        }
        var /= static_cast<double>(replicates - 1);
        return std::pair<double, double>(mean, std::sqrt(var / static_cast<double>(replicates)));
    };

    for (std::size_t ti = 0; ti < nt; ++ti) {
        ContractionPoint pt;
        pt.t = times[ti];
        const auto [mi, si] = mean_se(ind, ti);
        const auto [ms, ss] = mean_se(self_d, ti);
        const auto [mc, sc] = mean_se(coup, ti);
        pt.independent = mi;
        pt.independent_se = si;
        pt.self_distance = ms;
        pt.coupled = mc;
        pt.coupled_se = sc;
        const double envelope = d0 * std::exp(-0.5 * epsilon * pt.t);
        pt.bound = envelope + ms + 3.0 * (si + ss);
        pt.coupled_bound = envelope * 1.1 + 3.0 * sc;
        pt.pass = (pt.independent <= pt.bound) && (pt.coupled <= pt.coupled_bound);
        report.pass = report.pass && pt.pass;
        report.points.push_back(pt);
    }

    // Fitted slope of the coupled curve in log scale.
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::size_t m = 0;
    for (const auto& pt : report.points) {
        if (pt.coupled <= 0.0) continue;
        sx += pt.t;
        sy += std::log(pt.coupled);
        sxx += pt.t * pt.t;
        sxy += pt.t * std::log(pt.coupled);
        ++m;
    }
    if (m >= 2) {
        const double denom = static_cast<double>(m) * sxx - sx * sx;
        if (denom > 0.0) report.coupled_log_slope = (static_cast<double>(m) * sxy - sx * sy) / denom;
    }
    return report;
}

InvariantSamplerResult invariant_measure_sampler(const DiagonalGenerator& gen,
                                                 const CoefficientSet& coeffs,
                                                 const MarkMeasure& measure, double epsilon,
                                                 std::size_t samples, std::size_t steps_per_unit,
                                                 std::uint64_t seed, double burn_in, double gap,
                                                 int threads) {
    if (!(epsilon > 0.0))
        throw std::invalid_argument(
            "invariant_measure_sampler: requires a certified positive contraction exponent");
    if (samples < 8)
        throw std::invalid_argument("invariant_measure_sampler: need at least 8 samples");
    if (steps_per_unit == 0)
        throw std::invalid_argument("invariant_measure_sampler: steps_per_unit must be > 0");
    if (burn_in <= 0.0) burn_in = 10.0 / epsilon;
    if (gap <= 0.0) gap = 1.0 / epsilon;

    InvariantSamplerResult result;
    result.burn_in = burn_in;
    result.gap = gap;

    // One long trajectory; thinning times must land on the step grid, so the
    // gap is snapped to a whole number of steps (at least one).
    const double dt_req = 1.0 / static_cast<double>(steps_per_unit);
    const auto gap_steps =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(gap / dt_req)));
    const double dt = gap / static_cast<double>(gap_steps);
    const auto burn_steps = static_cast<std::size_t>(std::ceil(burn_in / dt));
    const std::size_t total_steps = burn_steps + samples * gap_steps;

    SimulationGrid grid;
    grid.horizon = dt * static_cast<double>(total_steps);
    grid.steps = total_steps;

    const StateVector origin(gen.dimension(), 0.0);
    RngStream rng(seed, 0);
    const MildPath run = simulate_mild_path(gen, coeffs, measure, grid, origin, rng);

    result.sample.points.reserve(samples);
    for (std::size_t s = 0; s < samples; ++s)
        result.sample.points.push_back(run.states[burn_steps + (s + 1) * gap_steps - 1]);

    double m2 = 0.0;
    for (const StateVector& x : result.sample.points) m2 += norm_sq(x);
    result.second_moment = m2 / static_cast<double>(samples);

    // Stationarity witness on a capped subset (exact solver limit).
    const std::size_t witness = std::min<std::size_t>(samples - (samples % 2), 512);
    const std::size_t stride = samples / witness;
    std::vector<StateVector> base(witness);
    for (std::size_t i = 0; i < witness; ++i) base[i] = result.sample.points[i * stride];

    // Push every witness point forward by one gap with fresh noise.
    SimulationGrid push_grid;
    push_grid.horizon = gap;
    push_grid.steps = gap_steps;
    std::vector<StateVector> pushed(witness);
    parallel_for(witness, threads, [&](std::size_t i) {
        RngStream push_rng(seed, 1 + i);
        const MildPath p = simulate_mild_path(gen, coeffs, measure, push_grid, base[i], push_rng);
        pushed[i] = p.final_state();
    });

    EmpiricalMeasure base_m{base}, pushed_m{std::move(pushed)};
    result.pushforward_distance = wasserstein2_exact(base_m, pushed_m).distance;

    std::vector<StateVector> even, odd;
    even.reserve(witness / 2);
    odd.reserve(witness / 2);
    for (std::size_t i = 0; i + 1 < witness; i += 2) {
        even.push_back(base[i]);
        odd.push_back(base[i + 1]);
    }
    result.self_distance =
        wasserstein2_exact(EmpiricalMeasure{even}, EmpiricalMeasure{odd}).distance;

    result.stationary = result.pushforward_distance <= 1.5 * result.self_distance + 1e-9;
    return result;
}

}  // namespace spdelab
