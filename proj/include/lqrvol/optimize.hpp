#pragma once

#include <cmath>

namespace lqrvol
{
struct GoldenResult
{
    double x;
    double value;
    int evaluations;
};

/// Maximizes a unimodal f on [lo, hi] by golden-section search. Stops when
/// the bracket width is at most tolerance * (1 + |x|).
template <typename F>
GoldenResult golden_section_maximize(F&& f, double lo, double hi, double tolerance, int max_evaluations = 500)
{
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    int evals = 2;
    while (b - a > tolerance * (1.0 + std::abs(0.5 * (a + b))) && evals < max_evaluations) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        ++evals;
    }
    return fc >= fd ? GoldenResult{c, fc, evals} : GoldenResult{d, fd, evals};
}

}  // namespace lqrvol
