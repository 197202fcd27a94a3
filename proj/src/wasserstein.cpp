#include "spdelab/wasserstein.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace spdelab {

namespace {

constexpr std::size_t kMaxExactSize = 1024;

double squared_distance(const StateVector& a, const StateVector& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = a[k] - b[k];
        s += d * d;
    }
    return s;
}

}  // namespace

CouplingResult wasserstein2_exact(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
    const std::size_t n = mu.size();
    if (n == 0 || nu.size() == 0)
        throw std::invalid_argument("wasserstein2_exact: empty point cloud");
    if (n != nu.size())
        throw std::invalid_argument("wasserstein2_exact: clouds must have equal sizes (" +
                                    std::to_string(n) + " vs " + std::to_string(nu.size()) + ")");
    if (n > kMaxExactSize)
        throw std::invalid_argument("wasserstein2_exact: cloud size " + std::to_string(n) +
                                    " exceeds the exact-solver cap of 1024");
    if (mu.dimension() != nu.dimension())
        throw std::invalid_argument("wasserstein2_exact: point dimension mismatch");

    std::vector<double> cost(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            cost[i * n + j] = squared_distance(mu.points[i], nu.points[j]);

    // Shortest augmenting paths with dual potentials (u on rows, v on
    // columns); one row is inserted per outer iteration.
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> row_of(n + 1, 0);   // row matched to each column, 0 = free
    std::vector<int> parent(n + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        row_of[0] = static_cast<int>(i);
        std::size_t j0 = 0;
        std::vector<double> min_reduced(n + 1, inf);
        std::vector<char> visited(n + 1, 0);
        do {
            visited[j0] = 1;
            const std::size_t i0 = static_cast<std::size_t>(row_of[j0]);
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (visited[j]) continue;
                const double reduced = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
                if (reduced < min_reduced[j]) {
                    min_reduced[j] = reduced;
                    parent[j] = static_cast<int>(j0);
                }
                if (min_reduced[j] < delta) {
                    delta = min_reduced[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (visited[j]) {
                    u[static_cast<std::size_t>(row_of[j])] += delta;
                    v[j] -= delta;
                } else {
                    min_reduced[j] -= delta;
                }
            }
            j0 = j1;
        } while (row_of[j0] != 0);
        // Augment along the alternating path back to the root.
        do {
            const std::size_t j1 = static_cast<std::size_t>(parent[j0]);
            row_of[j0] = row_of[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    CouplingResult result;
    result.assignment.assign(n, -1);
    double total = 0.0;
    for (std::size_t j = 1; j <= n; ++j) {
        const std::size_t i = static_cast<std::size_t>(row_of[j]);
        result.assignment[i - 1] = static_cast<int>(j - 1);
        total += cost[(i - 1) * n + (j - 1)];
    }
    result.distance = std::sqrt(total / static_cast<double>(n));

    // Optimality certificate: dual feasibility everywhere, tight reduced cost
    // on the matched pairs. Scaled by the cost magnitude to stay meaningful
    // for large clouds.
    double scale = 1.0;
    for (std::size_t i = 0; i < n * n; ++i) scale = std::max(scale, std::abs(cost[i]));
    double worst = 0.0;
    for (std::size_t i = 1; i <= n; ++i)
        for (std::size_t j = 1; j <= n; ++j) {
            const double reduced = cost[(i - 1) * n + (j - 1)] - u[i] - v[j];
            worst = std::max(worst, -reduced);
            if (result.assignment[i - 1] == static_cast<int>(j - 1))
                worst = std::max(worst, std::abs(reduced));
        }
    result.dual_residual = worst / scale;
    if (result.dual_residual > 1e-9)
        throw std::runtime_error(
            "wasserstein2_exact: optimality certificate failed (dual residual " +
            std::to_string(result.dual_residual) + ")");
    return result;
}

double wasserstein2_1d(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || a.size() != b.size())
        throw std::invalid_argument("wasserstein2_1d: samples must be nonempty and equal size");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s / static_cast<double>(a.size()));
}

SlicedDistance sliced_w2(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                         std::size_t directions, std::uint64_t seed, std::uint64_t stream) {
    if (directions < 16)
        throw std::invalid_argument("sliced_w2: need at least 16 directions");
    if (mu.size() == 0 || mu.size() != nu.size())
        throw std::invalid_argument("sliced_w2: clouds must be nonempty and equal size");
    if (mu.dimension() != nu.dimension())
        throw std::invalid_argument("sliced_w2: point dimension mismatch");
    const std::size_t dim = mu.dimension();

    RngStream rng(seed, stream);
    std::vector<double> proj_a(mu.size()), proj_b(nu.size());
    std::vector<double> sq(directions);
    for (std::size_t d = 0; d < directions; ++d) {
        StateVector dir(dim);
        double nrm = 0.0;
        do {
            for (std::size_t k = 0; k < dim; ++k) dir[k] = rng.normal();
            nrm = norm(dir);
        } while (nrm == 0.0);
        for (std::size_t k = 0; k < dim; ++k) dir[k] /= nrm;

        for (std::size_t i = 0; i < mu.size(); ++i) proj_a[i] = dot(mu.points[i], dir);
        for (std::size_t i = 0; i < nu.size(); ++i) proj_b[i] = dot(nu.points[i], dir);
        const double w = wasserstein2_1d(proj_a, proj_b);
        sq[d] = w * w;
    }

    double mean = 0.0;
    for (double v : sq) mean += v;
    mean /= static_cast<double>(directions);
    double var = 0.0;
    for (double v : sq) var += (v - mean) * (v - mean);
    var /= static_cast<double>(directions - 1);
    const double se_mean = std::sqrt(var / static_cast<double>(directions));

    SlicedDistance out;
    out.directions = directions;
    out.value = std::sqrt(mean);
    // Delta method through sqrt; falls back to the raw se near zero.
    out.band = (out.value > 1e-12) ? 3.0 * se_mean / (2.0 * out.value) : 3.0 * se_mean;
    return out;
}

}  // namespace spdelab
