#pragma once

#include <string>

namespace spdelab {

/// Locale-independent decimal rendering with 17 significant digits (enough
/// to round-trip any double). Used for every number that reaches a result
/// file, so reruns are byte-identical.
std::string format_double(double v);

}  // namespace spdelab
