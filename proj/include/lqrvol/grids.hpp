#pragma once

#include <cmath>
#include <vector>

#include "lqrvol/errors.hpp"

namespace lqrvol
{
/// n points 10^lo_exp ... 10^hi_exp, evenly spaced in the exponent.
inline std::vector<double> logspace(double lo_exp, double hi_exp, int n)
{
    if (n < 1) throw InvalidParameter("n", "grid needs at least one point");
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double e = n == 1 ? lo_exp : lo_exp + (hi_exp - lo_exp) * double(i) / double(n - 1);
        out[static_cast<std::size_t>(i)] = std::pow(10.0, e);
    }
    return out;
}

/// n points geometrically spaced between lo and hi (both > 0).
inline std::vector<double> geomspace(double lo, double hi, int n)
{
    if (!(lo > 0 && hi > 0)) throw InvalidParameter("grid", "geometric grid bounds must be positive");
    return logspace(std::log10(lo), std::log10(hi), n);
}

inline std::vector<double> linspace(double lo, double hi, int n)
{
    if (n < 1) throw InvalidParameter("n", "grid needs at least one point");
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = n == 1 ? lo : lo + (hi - lo) * double(i) / double(n - 1);
    return out;
}

template <typename Scalar>
void require_increasing(const std::vector<Scalar>& grid, const char* name, std::size_t min_points, bool positive)
{
    if (grid.size() < min_points)
        throw InvalidParameter(name, "grid needs at least " + std::to_string(min_points) + " points");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!std::isfinite(double(grid[i]))) throw InvalidParameter(name, "grid has non-finite entries");
        if (positive && !(grid[i] > Scalar(0))) throw InvalidParameter(name, "grid entries must be positive");
        if (!positive && grid[i] < Scalar(0)) throw InvalidParameter(name, "grid entries must be nonnegative");
        if (i > 0 && !(grid[i] > grid[i - 1])) throw InvalidParameter(name, "grid must be strictly increasing");
    }
}

}  // namespace lqrvol
