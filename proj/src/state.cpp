#include "spdelab/state.hpp"

#include <cmath>
#include <stdexcept>

namespace spdelab {

namespace {

void require_same_size(const StateVector& a, const StateVector& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("state dimension mismatch: " + std::to_string(a.size()) +
                                    " vs " + std::to_string(b.size()));
}

}  // namespace

double dot(const StateVector& a, const StateVector& b) {
    require_same_size(a, b);
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s;
}

double norm_sq(const StateVector& x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return s;
}

double norm(const StateVector& x) { return std::sqrt(norm_sq(x)); }

bool all_finite(const StateVector& x) {
    for (double v : x)
        if (!std::isfinite(v)) return false;
    return true;
}

StateVector zeros(std::size_t n) { return StateVector(n, 0.0); }

StateVector add_scaled(const StateVector& x, const StateVector& y, double c) {
    require_same_size(x, y);
    StateVector out(x);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += c * y[k];
    return out;
}

void add_scaled_in_place(StateVector& x, const StateVector& y, double c) {
    require_same_size(x, y);
    for (std::size_t k = 0; k < x.size(); ++k) x[k] += c * y[k];
}

StateVector scaled(const StateVector& x, double c) {
    StateVector out(x);
    for (double& v : out) v *= c;
    return out;
}

StateVector subtracted(const StateVector& a, const StateVector& b) {
    require_same_size(a, b);
    StateVector out(a);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] -= b[k];
    return out;
}

}  // namespace spdelab
