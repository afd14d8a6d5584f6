#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace paramode {

struct Extremum {
    double x = 0.0;       ///< refined abscissa
    double y = 0.0;       ///< refined ordinate
    std::size_t index = 0; ///< sample index of the discrete extremum
};

/// Strict interior local minima of sampled data, each refined by a
/// three-point parabola through its neighbours. Assumes uniform or smooth
/// spacing; x must be strictly increasing.
std::vector<Extremum> local_minima(std::span<const double> x, std::span<const double> y);
std::vector<Extremum> local_maxima(std::span<const double> x, std::span<const double> y);

} // namespace paramode
