#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "lqrvol/curve_shape.hpp"
#include "lqrvol/functionals.hpp"
#include "lqrvol/optimize.hpp"
#include "lqrvol/parallel.hpp"

namespace lqrvol
{
template <typename Scalar>
struct CapacityPoint
{
    Scalar alpha = 0;
    /// Zero when the budget does not bind (see solve_constrained).
    Scalar lambda_star = 0;
    Scalar L_star = 0;
    Scalar efficiency_star = 0;
    Scalar achieved_volatility = 0;
    bool constraint_active = true;
    LinearPolicy<Scalar> policy;
};

struct DualSearchOptions
{
    double lambda_start = 1e-3;
    double lambda_floor = 1e-6;
    int max_doublings = 60;
    double relative_tolerance = 1e-8;
};

/// Dual function x0'K_l x0 + gamma/(1-gamma) tr(K_l Psi) - l * alpha.
template <typename Scalar>
Scalar q_alpha(const LqrSystem<Scalar>& sys, Scalar alpha, Scalar lambda, const Vector<Scalar>& x0,
               const SolverOptions<Scalar>& opts = {})
{
    if (!(alpha > Scalar(0))) throw InvalidParameter("alpha", "must be positive");
    const auto sol = solve_riccati_lambda(sys, lambda, opts);
    return optimal_cost(sys, sol, x0) - lambda * alpha;
}

/// Maximizes the efficiency subject to volatility <= alpha through the
/// Lagrangian dual. If even the weakest multiplier on the search floor meets
/// the budget, the constraint is reported as inactive with lambda* = 0 and
/// L* taken from that policy's state cost, so the floor does not bias L*.
template <typename Scalar>
CapacityPoint<Scalar> solve_constrained(const LqrSystem<Scalar>& sys, Scalar alpha, const Vector<Scalar>& x0,
                                        const DualSearchOptions& search = {}, const SolverOptions<Scalar>& opts = {})
{
    if (!(alpha > Scalar(0)) || !std::isfinite(double(alpha))) throw InvalidParameter("alpha", "must be positive");
    check_initial_state(sys, x0);

    CapacityPoint<Scalar> point;
    point.alpha = alpha;
    {
        const Scalar floor = Scalar(search.lambda_floor);
        const auto sol = solve_riccati_lambda(sys, floor, opts);
        const auto rep = evaluate_policy(sys, sol.gain, x0, opts);
        if (rep.volatility <= alpha) {
            point.lambda_star = 0;
            point.L_star = -rep.efficiency;
            point.efficiency_star = rep.efficiency;
            point.achieved_volatility = rep.volatility;
            point.constraint_active = false;
            point.policy = sol.gain;
            return point;
        }
    }

    auto q = [&](double lambda) { return double(q_alpha(sys, alpha, Scalar(lambda), x0, opts)); };

    double lo, hi;
    double cur = search.lambda_start;
    double q_cur = q(cur);
    double q_up = q(2 * cur);
    if (q_up > q_cur) {
        double prev = cur;
        cur = 2 * cur;
        q_cur = q_up;
        int doublings = 1;
        for (;;) {
            if (doublings >= search.max_doublings)
                throw UnboundedDualError("dual maximum not bracketed after " + std::to_string(search.max_doublings) +
                                         " doublings; alpha is below the achievable volatility floor");
            const double next = 2 * cur;
            const double q_next = q(next);
            ++doublings;
            if (q_next <= q_cur) {
                lo = prev;
                hi = next;
                break;
            }
            prev = cur;
            cur = next;
            q_cur = q_next;
        }
    } else {
        hi = 2 * cur;
        for (;;) {
            const double next = cur / 2;
            if (next <= search.lambda_floor) {
                lo = search.lambda_floor;
                break;
            }
            const double q_next = q(next);
            if (q_next <= q_cur) {
                lo = next;
                break;
            }
            hi = cur;
            cur = next;
            q_cur = q_next;
        }
    }

    const auto best = golden_section_maximize([&](double t) { return q(std::exp(t)); }, std::log(lo), std::log(hi),
                                              search.relative_tolerance);
    const Scalar lambda_star = Scalar(std::exp(best.x));
    const auto sol = solve_riccati_lambda(sys, lambda_star, opts);
    const auto rep = evaluate_policy(sys, sol.gain, x0, opts);
    point.lambda_star = lambda_star;
    point.L_star = optimal_cost(sys, sol, x0) - lambda_star * alpha;
    point.efficiency_star = -point.L_star;
    point.achieved_volatility = rep.volatility;
    point.constraint_active = true;
    point.policy = sol.gain;
    return point;
}

struct SweepFailure
{
    double alpha;
    std::string message;
};

template <typename Scalar>
struct CapacityRegion
{
    std::vector<CapacityPoint<Scalar>> points;
    Scalar gamma = 0;
    Vector<Scalar> x0;
    std::vector<SweepFailure> failures;
    /// Shape of efficiency_star against alpha over the successful points.
    CurveShape boundary;
    bool lambda_nonincreasing = true;

    std::vector<double> alphas() const
    {
        std::vector<double> out;
        for (const auto& p : points) out.push_back(double(p.alpha));
        return out;
    }
    std::vector<double> efficiencies() const
    {
        std::vector<double> out;
        for (const auto& p : points) out.push_back(double(p.efficiency_star));
        return out;
    }
};

/// n log-spaced budgets over [0.01, 100] times the volatility of the
/// unconstrained optimal policy.
template <typename Scalar>
std::vector<double> default_alpha_grid(const LqrSystem<Scalar>& sys, const Vector<Scalar>& x0, int n = 40,
                                       const SolverOptions<Scalar>& opts = {})
{
    const auto sol = solve_riccati(sys, opts);
    const double v = double(evaluate_policy(sys, sol.gain, x0, opts).volatility);
    if (!(v > 0)) throw NumericalError("unconstrained optimal volatility is zero; supply an explicit alpha grid");
    return geomspace(0.01 * v, 100 * v, n);
}

template <typename Scalar>
CapacityRegion<Scalar> sweep_capacity_region(const LqrSystem<Scalar>& sys, const std::vector<double>& alpha_grid,
                                             const Vector<Scalar>& x0, unsigned threads = 1,
                                             const DualSearchOptions& search = {},
                                             const SolverOptions<Scalar>& opts = {})
{
    require_increasing(alpha_grid, "alpha_grid", 1, true);
    check_initial_state(sys, x0);
    const std::size_t n = alpha_grid.size();
    std::vector<std::optional<CapacityPoint<Scalar>>> slots(n);
    std::vector<std::string> errors(n);
    parallel_for(Index(n), threads, [&](Index i) {
        try {
            slots[std::size_t(i)] = solve_constrained(sys, Scalar(alpha_grid[std::size_t(i)]), x0, search, opts);
        } catch (const Error& e) {
            errors[std::size_t(i)] = e.what();
        }
    });

    CapacityRegion<Scalar> region;
    region.gamma = sys.gamma();
    region.x0 = x0;
    for (std::size_t i = 0; i < n; ++i) {
        if (slots[i])
            region.points.push_back(std::move(*slots[i]));
        else
            region.failures.push_back({alpha_grid[i], errors[i]});
    }
    const auto alphas = region.alphas();
    if (!alphas.empty()) region.boundary = curve_shape(difference_table(alphas, region.efficiencies()));
    for (std::size_t i = 1; i < region.points.size(); ++i)
        if (region.points[i].lambda_star > region.points[i - 1].lambda_star) region.lambda_nonincreasing = false;
    return region;
}

/// Normalizes a region's efficiencies so that the reference peak maps to 1:
/// |E_ref_peak| / |E|. Efficiencies are nonpositive, so values closer to zero
/// score higher. Returns all ones when the reference peak is zero.
template <typename Scalar>
std::vector<double> normalized_efficiency(const CapacityRegion<Scalar>& region, double reference_peak)
{
    std::vector<double> out;
    for (const auto& p : region.points) {
        const double e = std::abs(double(p.efficiency_star));
        out.push_back(reference_peak == 0 || e == 0 ? 1.0 : std::abs(reference_peak) / e);
    }
    return out;
}

template <typename Scalar>
double peak_efficiency(const CapacityRegion<Scalar>& region)
{
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& p : region.points) best = std::max(best, double(p.efficiency_star));
    return region.points.empty() ? 0.0 : best;
}

/// A point of the region with the stationary policy that attains it.
template <typename Scalar>
struct ParetoPoint
{
    Scalar volatility = 0;
    Scalar efficiency = 0;
    LinearPolicy<Scalar> policy;
};

/// Picks policies[0] with probability mu at t = 0 and keeps it forever,
/// otherwise policies[1].
template <typename Scalar>
struct MixturePolicy
{
    std::array<LinearPolicy<Scalar>, 2> policies;
    Scalar mu = 0;
};

template <typename Scalar>
struct MixturePoint
{
    Scalar volatility = 0;
    Scalar efficiency = 0;
    MixturePolicy<Scalar> policy;
};

template <typename Scalar>
MixturePoint<Scalar> mixture_policy(const ParetoPoint<Scalar>& first, const ParetoPoint<Scalar>& second, Scalar mu)
{
    if (!(mu >= Scalar(0) && mu <= Scalar(1))) throw InvalidParameter("mu", "must lie in [0, 1]");
    if (first.policy.dim() != second.policy.dim()) throw InvalidParameter("policy", "dimensions differ");
    MixturePoint<Scalar> out;
    out.volatility = mu * first.volatility + (Scalar(1) - mu) * second.volatility;
    out.efficiency = mu * first.efficiency + (Scalar(1) - mu) * second.efficiency;
    if (mu == Scalar(1)) {
        out.volatility = first.volatility;
        out.efficiency = first.efficiency;
    } else if (mu == Scalar(0)) {
        out.volatility = second.volatility;
        out.efficiency = second.efficiency;
    }
    out.policy = {{first.policy, second.policy}, mu};
    return out;
}

}  // namespace lqrvol
