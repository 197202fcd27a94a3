#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "spdelab/coefficients.hpp"
#include "spdelab/jump_train.hpp"
#include "spdelab/operator_core.hpp"
#include "spdelab/state.hpp"

namespace spdelab {

/// Uniform time grid on [0, horizon]. time(steps) returns horizon exactly.
struct SimulationGrid {
    double horizon = 1.0;
    std::size_t steps = 1000;

    double dt() const { return horizon / static_cast<double>(steps); }
    double time(std::size_t k) const {
        return (k == steps) ? horizon : dt() * static_cast<double>(k);
    }
};

/// Discrete trajectory on a simulation grid, plus the fingerprint of the jump
/// train that produced it (coupled schemes must agree on this fingerprint).
struct MildPath {
    std::vector<double> times;
    std::vector<StateVector> states;
    std::uint64_t train_fingerprint = 0;

    const StateVector& final_state() const { return states.back(); }
};

/// A trajectory left the trust region (non-finite or norm above the guard).
/// Carries the step context so the caller can report where it blew up.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(std::size_t step, double time, double state_norm);
    std::size_t step() const { return step_; }
    double time() const { return time_; }
    double state_norm() const { return state_norm_; }

private:
    std::size_t step_;
    double time_;
    double state_norm_;
};

/// Norm guard beyond which a trajectory is declared divergent.
inline constexpr double kDivergenceGuard = 1e12;

/// One exponential-integrator step of size dt from state x. Jumps inside the
/// window are given as (offset, mark) with offset in (0, dt]; each jump is
/// propagated to the end of the window by the semigroup, the drift and the
/// compensator are frozen at the left endpoint and integrated exactly
/// against the semigroup.
StateVector step_mild(const DiagonalGenerator& gen, const CoefficientSet& coeffs,
                      const StateVector& x,
                      const std::vector<std::pair<double, Mark>>& window_jumps, double dt);

/// Full trajectory driven by the given train (the train horizon must cover
/// the grid). Initial state occupies slot 0.
MildPath simulate_mild_path(const DiagonalGenerator& gen, const CoefficientSet& coeffs,
                            const JumpTrain& train, const SimulationGrid& grid,
                            const StateVector& initial);

/// Convenience overload: samples the train from the stream, then simulates.
MildPath simulate_mild_path(const DiagonalGenerator& gen, const CoefficientSet& coeffs,
                            const MarkMeasure& measure, const SimulationGrid& grid,
                            const StateVector& initial, RngStream& rng);

/// Same scheme with every coefficient (and the initial state) regularized by
/// the normalized resolvent at lambda: a bounded-generator approximation of
/// the dynamics driven by the SAME noise. lambda must exceed the growth
/// bound.
MildPath simulate_yosida_path(const DiagonalGenerator& gen, const CoefficientSet& coeffs,
                              const JumpTrain& train, const SimulationGrid& grid,
                              const StateVector& initial, double lambda);

MildPath simulate_yosida_path(const DiagonalGenerator& gen, const CoefficientSet& coeffs,
                              const MarkMeasure& measure, const SimulationGrid& grid,
                              const StateVector& initial, double lambda, RngStream& rng);

/// Root-mean of the pathwise squared sup norm over an ensemble: the discrete
/// S_T^2-type norm sqrt( mean_p sup_k ||X_k||^2 ).
double st2_norm(const std::vector<MildPath>& ensemble);

struct YosidaGapPoint {
    double lambda = 0.0;
    double gap = 0.0;   // E sup_k ||X^lambda_k - X_k||^2
    double band = 0.0;  // 3 MC standard errors
};

struct YosidaGapReport {
    std::vector<YosidaGapPoint> points;
    double fitted_log_slope = 0.0;  // d log(gap) / d log(lambda)
};

/// Shared-noise comparison of the regularized scheme against the reference
/// mild scheme along increasing lambda. Each path reuses one train for every
/// lambda, so the curve isolates the regularization error.
YosidaGapReport yosida_gap_estimate(const DiagonalGenerator& gen, const CoefficientSet& coeffs,
                                    const MarkMeasure& measure, const SimulationGrid& grid,
                                    const StateVector& initial,
                                    const std::vector<double>& lambdas, std::size_t paths,
                                    std::uint64_t seed, std::uint64_t stream_base,
                                    int threads = 1);

}  // namespace spdelab
