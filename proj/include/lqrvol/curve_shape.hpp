#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "lqrvol/errors.hpp"
#include "lqrvol/linalg.hpp"

namespace lqrvol
{
/// One row of a sampled curve with its discrete differences. d1 is the step
/// from the previous sample; d2 is the chord defect at interior samples
/// (equal to the usual second difference on a uniform grid, and <= 0 for
/// concave data on any grid). Missing differences are NaN.
struct DifferenceRow
{
    double x;
    double value;
    double d1;
    double d2;
};

inline std::vector<DifferenceRow> difference_table(const std::vector<double>& xs, const std::vector<double>& values)
{
    if (xs.size() != values.size()) throw InvalidParameter("values", "must have one value per grid point");
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    const std::size_t n = xs.size();
    std::vector<DifferenceRow> rows(n);
    for (std::size_t i = 0; i < n; ++i) {
        rows[i] = {xs[i], values[i], nan, nan};
        if (i > 0) rows[i].d1 = values[i] - values[i - 1];
        if (i > 0 && i + 1 < n)
            rows[i].d2 = chord_defect(xs[i - 1], values[i - 1], xs[i], values[i], xs[i + 1], values[i + 1]);
    }
    return rows;
}

struct CurveShape
{
    double scale = 0;       // max |value|
    double min_d1 = 0;      // smallest first difference
    double max_d2 = 0;      // largest chord defect
    bool increasing = true;     // every d1 > 0
    bool nondecreasing = true;  // every d1 >= -tolerance * scale
    bool concave = true;        // every d2 <= tolerance * scale
};

/// Summarizes a difference table against a relative tolerance.
inline CurveShape curve_shape(const std::vector<DifferenceRow>& rows, double tolerance = 1e-6)
{
    CurveShape s;
    s.min_d1 = std::numeric_limits<double>::infinity();
    s.max_d2 = -std::numeric_limits<double>::infinity();
    for (const auto& row : rows) s.scale = std::max(s.scale, std::abs(row.value));
    const double slack = tolerance * s.scale;
    for (const auto& row : rows) {
        if (!std::isnan(row.d1)) {
            s.min_d1 = std::min(s.min_d1, row.d1);
            s.increasing = s.increasing && row.d1 > 0;
            s.nondecreasing = s.nondecreasing && row.d1 >= -slack;
        }
        if (!std::isnan(row.d2)) {
            s.max_d2 = std::max(s.max_d2, row.d2);
            s.concave = s.concave && row.d2 <= slack;
        }
    }
    return s;
}

}  // namespace lqrvol
