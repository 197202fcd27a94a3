#pragma once

#include <cstddef>
#include <vector>

#include "spdelab/rng.hpp"
#include "spdelab/state.hpp"

namespace spdelab {

/// Finite jump measure on mark space R^d, described as total_rate times a
/// probability distribution over marks. total_rate = 0 is a legal noiseless
/// measure; infinite-activity measures are outside this component's scope and
/// are rejected at construction.
class MarkMeasure {
public:
    enum class Family { Atoms, Gaussian, UniformBox };

    /// Discrete measure: jumps land on the given points with the given
    /// probabilities (normalized at construction).
    static MarkMeasure atoms(double total_rate, std::vector<Mark> points,
                             std::vector<double> weights);

    /// Product Gaussian mark distribution with per-coordinate mean and sigma.
    static MarkMeasure gaussian(double total_rate, std::vector<double> mean,
                                std::vector<double> sigma);

    /// Uniform distribution on the axis-aligned box [lo, hi].
    static MarkMeasure uniform_box(double total_rate, std::vector<double> lo,
                                   std::vector<double> hi);

    Family family() const { return family_; }
    double total_rate() const { return total_rate_; }
    std::size_t mark_dimension() const { return dim_; }

    /// Absolute moment of the mark norm against the (unnormalized) measure:
    /// total_rate * E ||u||^p for p in {1, 2, 4}. p = 2 and p = 4 are exact
    /// for every family; p = 1 is exact for atoms and one-dimensional
    /// continuous families and uses fixed-order tensor quadrature otherwise.
    double moment(int p) const;

    /// total_rate * E u (vector-valued first moment); exact for all families.
    Mark mean_mark() const;

    /// total_rate * E u_i^2 per coordinate; exact for all families.
    std::vector<double> coordinate_second_moment() const;

    Mark sample(RngStream& rng) const;

    /// Deterministic nodes/weights integrating g against the unnormalized
    /// measure: sum_q w_q g(u_q) ~ total_rate * E g(u). Exact for atoms;
    /// Gauss-Hermite / Gauss-Legendre tensor rules otherwise, limited to
    /// mark dimension <= 3.
    struct Quadrature {
        std::vector<Mark> nodes;
        std::vector<double> weights;
    };
    Quadrature quadrature(std::size_t order_per_dim = 24) const;

private:
    MarkMeasure() = default;

    Family family_ = Family::Atoms;
    double total_rate_ = 0.0;
    std::size_t dim_ = 0;

    // atoms
    std::vector<Mark> points_;
    std::vector<double> probs_;
    std::vector<double> cumulative_;

    // gaussian
    std::vector<double> mean_;
    std::vector<double> sigma_;

    // uniform box
    std::vector<double> lo_;
    std::vector<double> hi_;
};

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
void gauss_legendre(std::size_t n, std::vector<double>& nodes, std::vector<double>& weights);

/// Nodes and weights of the n-point Gauss-Hermite rule for weight e^{-x^2}.
void gauss_hermite(std::size_t n, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace spdelab
