#include "spdelab/mark_measure.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace spdelab {

namespace {

void require_rate(double rate) {
    if (!std::isfinite(rate) || rate < 0.0)
        throw std::invalid_argument(
            "mark measure: total rate must be finite and nonnegative (finite jump activity)");
}

}  // namespace

MarkMeasure MarkMeasure::atoms(double total_rate, std::vector<Mark> points,
                               std::vector<double> weights) {
    require_rate(total_rate);
    if (points.empty()) throw std::invalid_argument("atoms: need at least one mark point");
    if (points.size() != weights.size())
        throw std::invalid_argument("atoms: points/weights size mismatch");
    const std::size_t dim = points.front().size();
    if (dim == 0) throw std::invalid_argument("atoms: marks must have dimension >= 1");
    for (const Mark& p : points) {
        if (p.size() != dim) throw std::invalid_argument("atoms: inconsistent mark dimensions");
        if (!all_finite(p)) throw std::invalid_argument("atoms: mark points must be finite");
    }
    double total = 0.0;
    for (double w : weights) {
        if (!(w > 0.0)) throw std::invalid_argument("atoms: weights must be positive");
        total += w;
    }

    MarkMeasure m;
    m.family_ = Family::Atoms;
    m.total_rate_ = total_rate;
    m.dim_ = dim;
    m.points_ = std::move(points);
    m.probs_.resize(weights.size());
    m.cumulative_.resize(weights.size());
    double run = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        m.probs_[i] = weights[i] / total;
        run += m.probs_[i];
        m.cumulative_[i] = run;
    }
    m.cumulative_.back() = 1.0;
    return m;
}

MarkMeasure MarkMeasure::gaussian(double total_rate, std::vector<double> mean,
                                  std::vector<double> sigma) {
    require_rate(total_rate);
    if (mean.empty() || mean.size() != sigma.size())
        throw std::invalid_argument("gaussian: mean/sigma must be nonempty and equal length");
    for (double s : sigma)
        if (!(s > 0.0) || !std::isfinite(s))
            throw std::invalid_argument("gaussian: sigma must be positive and finite");
    MarkMeasure m;
    m.family_ = Family::Gaussian;
    m.total_rate_ = total_rate;
    m.dim_ = mean.size();
    m.mean_ = std::move(mean);
    m.sigma_ = std::move(sigma);
    return m;
}

MarkMeasure MarkMeasure::uniform_box(double total_rate, std::vector<double> lo,
                                     std::vector<double> hi) {
    require_rate(total_rate);
    if (lo.empty() || lo.size() != hi.size())
        throw std::invalid_argument("uniform_box: lo/hi must be nonempty and equal length");
    for (std::size_t i = 0; i < lo.size(); ++i)
        if (!(lo[i] < hi[i])) throw std::invalid_argument("uniform_box: need lo < hi coordinatewise");
    MarkMeasure m;
    m.family_ = Family::UniformBox;
    m.total_rate_ = total_rate;
    m.dim_ = lo.size();
    m.lo_ = std::move(lo);
    m.hi_ = std::move(hi);
    return m;
}

double MarkMeasure::moment(int p) const {
    if (p != 1 && p != 2 && p != 4)
        throw std::invalid_argument("moment: only p in {1,2,4} is supported");

    auto second_per_coord = [&](std::size_t i) -> double {
        switch (family_) {
            case Family::Atoms: {
                double s = 0.0;
                for (std::size_t a = 0; a < points_.size(); ++a)
                    s += probs_[a] * points_[a][i] * points_[a][i];
                return s;
            }
            case Family::Gaussian:
                return mean_[i] * mean_[i] + sigma_[i] * sigma_[i];
            case Family::UniformBox:
                return (lo_[i] * lo_[i] + lo_[i] * hi_[i] + hi_[i] * hi_[i]) / 3.0;
        }
        return 0.0;
    };

    if (p == 2) {
        double s = 0.0;
        for (std::size_t i = 0; i < dim_; ++i) s += second_per_coord(i);
        return total_rate_ * s;
    }

    if (p == 4) {
        if (family_ == Family::Atoms) {
            double s = 0.0;
            for (std::size_t a = 0; a < points_.size(); ++a) {
                const double n2 = norm_sq(points_[a]);
                s += probs_[a] * n2 * n2;
            }
            return total_rate_ * s;
        }
        // Independent coordinates: E||u||^4 = Var(sum u_i^2) + (E||u||^2)^2.
        double sum2 = 0.0, var = 0.0;
        for (std::size_t i = 0; i < dim_; ++i) {
            const double e2 = second_per_coord(i);
            sum2 += e2;
            double e4 = 0.0;
            if (family_ == Family::Gaussian) {
                const double m = mean_[i], s = sigma_[i];
                e4 = m * m * m * m + 6.0 * m * m * s * s + 3.0 * s * s * s * s;
            } else {
                const double a = lo_[i], b = hi_[i];
                e4 = (std::pow(b, 5) - std::pow(a, 5)) / (5.0 * (b - a));
            }
            var += e4 - e2 * e2;
        }
        return total_rate_ * (var + sum2 * sum2);
    }

    // p == 1
    switch (family_) {
        case Family::Atoms: {
            double s = 0.0;
            for (std::size_t a = 0; a < points_.size(); ++a) s += probs_[a] * norm(points_[a]);
            return total_rate_ * s;
        }
        case Family::Gaussian:
            if (dim_ == 1) {
                const double m = mean_[0], s = sigma_[0];
                const double folded = s * std::sqrt(2.0 / M_PI) * std::exp(-m * m / (2.0 * s * s)) +
                                      m * std::erf(m / (s * std::sqrt(2.0)));
                return total_rate_ * folded;
            }
            break;
        case Family::UniformBox:
            if (dim_ == 1) {
                const double a = lo_[0], b = hi_[0];
                double e;
                if (a >= 0.0)
                    e = 0.5 * (a + b);
                else if (b <= 0.0)
                    e = -0.5 * (a + b);
                else
                    e = 0.5 * (a * a + b * b) / (b - a);
                return total_rate_ * e;
            }
            break;
    }
    // Multidimensional continuous families: ||u|| is not a polynomial, so use
    // a fixed high-order tensor rule.
    const auto q = quadrature(48);
    double s = 0.0;
    for (std::size_t i = 0; i < q.nodes.size(); ++i) s += q.weights[i] * norm(q.nodes[i]);
    return s;
}

Mark MarkMeasure::mean_mark() const {
    Mark out(dim_, 0.0);
    switch (family_) {
        case Family::Atoms:
            for (std::size_t a = 0; a < points_.size(); ++a)
                for (std::size_t i = 0; i < dim_; ++i) out[i] += probs_[a] * points_[a][i];
            break;
        case Family::Gaussian:
            out = mean_;
            break;
        case Family::UniformBox:
            for (std::size_t i = 0; i < dim_; ++i) out[i] = 0.5 * (lo_[i] + hi_[i]);
            break;
    }
    for (double& v : out) v *= total_rate_;
    return out;
}

std::vector<double> MarkMeasure::coordinate_second_moment() const {
    std::vector<double> out(dim_, 0.0);
    for (std::size_t i = 0; i < dim_; ++i) {
        switch (family_) {
            case Family::Atoms:
                for (std::size_t a = 0; a < points_.size(); ++a)
                    out[i] += probs_[a] * points_[a][i] * points_[a][i];
                break;
            case Family::Gaussian:
                out[i] = mean_[i] * mean_[i] + sigma_[i] * sigma_[i];
                break;
            case Family::UniformBox:
                out[i] = (lo_[i] * lo_[i] + lo_[i] * hi_[i] + hi_[i] * hi_[i]) / 3.0;
                break;
        }
        out[i] *= total_rate_;
    }
    return out;
}

Mark MarkMeasure::sample(RngStream& rng) const {
    switch (family_) {
        case Family::Atoms: {
            const double u = rng.uniform01();
            const auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), u);
            const std::size_t idx =
                std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()),
                                      points_.size() - 1);
            return points_[idx];
        }
        case Family::Gaussian: {
            Mark out(dim_);
            for (std::size_t i = 0; i < dim_; ++i) out[i] = mean_[i] + sigma_[i] * rng.normal();
            return out;
        }
        case Family::UniformBox: {
            Mark out(dim_);
            for (std::size_t i = 0; i < dim_; ++i) out[i] = rng.uniform(lo_[i], hi_[i]);
            return out;
        }
    }
    throw std::logic_error("mark measure: unknown family");
}

MarkMeasure::Quadrature MarkMeasure::quadrature(std::size_t order_per_dim) const {
    Quadrature q;
    if (family_ == Family::Atoms) {
        q.nodes = points_;
        q.weights.resize(probs_.size());
        for (std::size_t i = 0; i < probs_.size(); ++i) q.weights[i] = total_rate_ * probs_[i];
        return q;
    }
    if (order_per_dim < 2) throw std::invalid_argument("quadrature: order must be >= 2");
    if (dim_ > 3)
        throw std::invalid_argument(
            "quadrature: tensor rules are limited to mark dimension <= 3; use atoms for higher "
            "dimensions");

    std::vector<double> x1, w1;
    if (family_ == Family::Gaussian)
        gauss_hermite(order_per_dim, x1, w1);
    else
        gauss_legendre(order_per_dim, x1, w1);

    // Map the reference rule to each coordinate's distribution with unit mass.
    std::vector<std::vector<double>> nodes_d(dim_), weights_d(dim_);
    for (std::size_t i = 0; i < dim_; ++i) {
        nodes_d[i].resize(order_per_dim);
        weights_d[i].resize(order_per_dim);
        for (std::size_t j = 0; j < order_per_dim; ++j) {
            if (family_ == Family::Gaussian) {
                nodes_d[i][j] = mean_[i] + sigma_[i] * std::sqrt(2.0) * x1[j];
                weights_d[i][j] = w1[j] / std::sqrt(M_PI);
            } else {
                nodes_d[i][j] = 0.5 * (lo_[i] + hi_[i]) + 0.5 * (hi_[i] - lo_[i]) * x1[j];
                weights_d[i][j] = 0.5 * w1[j];
            }
        }
    }

    std::size_t count = 1;
    for (std::size_t i = 0; i < dim_; ++i) count *= order_per_dim;
    q.nodes.reserve(count);
    q.weights.reserve(count);
    for (std::size_t flat = 0; flat < count; ++flat) {
        Mark node(dim_);
        double w = total_rate_;
        std::size_t rem = flat;
        for (std::size_t i = 0; i < dim_; ++i) {
            const std::size_t j = rem % order_per_dim;
            rem /= order_per_dim;
            node[i] = nodes_d[i][j];
            w *= weights_d[i][j];
        }
        q.nodes.push_back(std::move(node));
        q.weights.push_back(w);
    }
    return q;
}

// === reference quadrature rules ===

void gauss_legendre(std::size_t n, std::vector<double>& nodes, std::vector<double>& weights) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
    nodes.assign(n, 0.0);
    weights.assign(n, 0.0);
    const std::size_t half = (n + 1) / 2;
    for (std::size_t i = 0; i < half; ++i) {
        // Chebyshev initial guess, then Newton on the recurrence.
        double x = std::cos(M_PI * (static_cast<double>(i) + 0.75) /
                            (static_cast<double>(n) + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p1 = 1.0, p2 = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                const double p3 = p2;
                p2 = p1;
                const double kk = static_cast<double>(k);
                p1 = ((2.0 * kk + 1.0) * x * p2 - kk * p3) / (kk + 1.0);
            }
            pp = static_cast<double>(n) * (x * p1 - p2) / (x * x - 1.0);
            const double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        const double w = 2.0 / ((1.0 - x * x) * pp * pp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
}

void gauss_hermite(std::size_t n, std::vector<double>& nodes, std::vector<double>& weights) {
    if (n < 1) throw std::invalid_argument("gauss_hermite: n must be >= 1");
    nodes.assign(n, 0.0);
    weights.assign(n, 0.0);
    const double pim4 = std::pow(M_PI, -0.25);
    const std::size_t half = (n + 1) / 2;
    double z = 0.0;
    for (std::size_t i = 0; i < half; ++i) {
        // Stroud/Secrest initial guesses, largest root first.
        const double dn = static_cast<double>(n);
        if (i == 0)
            z = std::sqrt(2.0 * dn + 1.0) - 1.85575 * std::pow(2.0 * dn + 1.0, -1.0 / 6.0);
        else if (i == 1)
            z -= 1.14 * std::pow(dn, 0.426) / z;
        else if (i == 2)
            z = 1.86 * z - 0.86 * nodes[0];
        else if (i == 3)
            z = 1.91 * z - 0.91 * nodes[1];
        else
            z = 2.0 * z - nodes[i - 2];

        double pp = 0.0;
        for (int it = 0; it < 200; ++it) {
            // Orthonormal Hermite recurrence keeps magnitudes O(1).
            double p1 = pim4, p2 = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                const double p3 = p2;
                p2 = p1;
                const double kk = static_cast<double>(k);
                p1 = z * std::sqrt(2.0 / (kk + 1.0)) * p2 - std::sqrt(kk / (kk + 1.0)) * p3;
            }
            pp = std::sqrt(2.0 * dn) * p2;
            const double dz = p1 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        nodes[i] = z;
        nodes[n - 1 - i] = -z;
        weights[i] = 2.0 / (pp * pp);
        weights[n - 1 - i] = weights[i];
    }
    // The guesses walk from the largest root down; store ascending.
    std::reverse(nodes.begin(), nodes.end());
    std::reverse(weights.begin(), weights.end());
}

}  // namespace spdelab
