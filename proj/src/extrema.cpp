#include "paramode/extrema.hpp"

#include <cmath>

#include "paramode/errors.hpp"

namespace paramode {
namespace {

Extremum refine(std::span<const double> x, std::span<const double> y, std::size_t i)
{
    const double x0 = x[i - 1], x1 = x[i], x2 = x[i + 1];
    const double y0 = y[i - 1], y1 = y[i], y2 = y[i + 1];
    // Vertex of the parabola through three (possibly non-uniform) points.
    const double d01 = (y1 - y0) / (x1 - x0);
    const double d12 = (y2 - y1) / (x2 - x1);
    const double curv = (d12 - d01) / (x2 - x0);
    if (curv == 0.0 || !std::isfinite(curv))
        return {x1, y1, i};
    // p(x) = y0 + d01 (x - x0) + curv (x - x0)(x - x1)
    double xv = 0.5 * (x0 + x1) - d01 / (2.0 * curv);
    if (xv < x0 || xv > x2)
        xv = x1;
    const double yv = y0 + d01 * (xv - x0) + curv * (xv - x0) * (xv - x1);
    return {xv, yv, i};
}

template <class Cmp>
std::vector<Extremum> find(std::span<const double> x, std::span<const double> y, Cmp better)
{
    if (x.size() != y.size())
        throw ConfigError("extremum search: abscissa and ordinate lengths differ");
    std::vector<Extremum> out;
    if (y.size() < 3)
        return out;
    for (std::size_t i = 1; i + 1 < y.size(); ++i) {
        if (better(y[i], y[i - 1]) && better(y[i], y[i + 1]))
            out.push_back(refine(x, y, i));
    }
    return out;
}

} // namespace

std::vector<Extremum> local_minima(std::span<const double> x, std::span<const double> y)
{
    return find(x, y, [](double a, double b) { return a < b; });
}

std::vector<Extremum> local_maxima(std::span<const double> x, std::span<const double> y)
{
    return find(x, y, [](double a, double b) { return a > b; });
}

} // namespace paramode
