#pragma once

#include <cstddef>
#include <vector>

namespace spdelab {

/// Coordinates of a truncated Hilbert-space element in the eigenbasis of the
/// generator; the Hilbert norm is the Euclidean norm of the coordinates.
using StateVector = std::vector<double>;

/// A point in the mark space R^d of the jump measure. Mark dimension is
/// independent of the state dimension; coupling happens only through the
/// jump coefficient.
using Mark = std::vector<double>;

double dot(const StateVector& a, const StateVector& b);
double norm_sq(const StateVector& x);
double norm(const StateVector& x);
bool all_finite(const StateVector& x);

StateVector zeros(std::size_t n);

/// x + c*y
StateVector add_scaled(const StateVector& x, const StateVector& y, double c);
void add_scaled_in_place(StateVector& x, const StateVector& y, double c);
StateVector scaled(const StateVector& x, double c);
StateVector subtracted(const StateVector& a, const StateVector& b);

}  // namespace spdelab
