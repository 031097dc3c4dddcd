#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <vector>

#include "lqrvol/core_model.hpp"
#include "lqrvol/curve_shape.hpp"
#include "lqrvol/grids.hpp"
#include "lqrvol/parallel.hpp"
#include "lqrvol/riccati.hpp"

namespace lqrvol
{
/// v(x) = x'Mx + c. Value iterates of a linear-quadratic problem stay in
/// this family, so the Bellman operator can act on (M, c) exactly.
template <typename Scalar>
struct QuadraticValue
{
    Matrix<Scalar> M;
    Scalar c = 0;

    Scalar operator()(const Vector<Scalar>& x) const { return quad_form(M, x) + c; }

    static QuadraticValue zero(Index d) { return {Matrix<Scalar>::Zero(d, d), Scalar(0)}; }
};

/// (Tv)(x) = min_u { x'Qx + r u^2 + gamma E[v(Ax + bu + n)] } for quadratic v.
template <typename Scalar>
QuadraticValue<Scalar> bellman_apply(const LqrSystem<Scalar>& sys, const QuadraticValue<Scalar>& v)
{
    if (v.M.rows() != sys.dim() || v.M.cols() != sys.dim())
        throw InvalidParameter("v", "quadratic form must be d x d");
    const Matrix<Scalar> M = symmetrize(v.M);
    if (!(sys.gamma() * quad_form(M, sys.b()) + sys.r() > Scalar(0)))
        throw InvalidParameter("v", "gamma b'Mb + r must be positive");
    QuadraticValue<Scalar> out;
    out.M = riccati_step(sys.A(), sys.b(), sys.Q(), sys.r(), sys.gamma(), M);
    out.c = sys.gamma() * (v.c + (M * sys.noise().covariance()).trace());
    return out;
}

/// x0'Wx0 + gamma/(1-gamma) tr(W Psi): the discounted sum of E[x_t'Wx_t]-type
/// terms once W solves the matching Lyapunov or Riccati equation.
template <typename Scalar>
Scalar discounted_quadratic(const Matrix<Scalar>& W, const Vector<Scalar>& x0, const Matrix<Scalar>& Psi, Scalar gamma)
{
    return quad_form(W, x0) + noise_weight(gamma) * (W * Psi).trace();
}

template <typename Scalar>
void check_initial_state(const LqrSystem<Scalar>& sys, const Vector<Scalar>& x0)
{
    if (x0.size() != sys.dim()) throw InvalidParameter("x0", "length must equal the state dimension");
    if (!x0.allFinite()) throw InvalidParameter("x0", "has non-finite entries");
}

template <typename Scalar>
Scalar optimal_cost(const LqrSystem<Scalar>& sys, const RiccatiSolution<Scalar>& sol, const Vector<Scalar>& x0)
{
    check_initial_state(sys, x0);
    return discounted_quadratic(sol.K, x0, sys.noise().covariance(), sys.gamma());
}

template <typename Scalar>
Scalar optimal_cost(const LqrSystem<Scalar>& sys, const Vector<Scalar>& x0, const SolverOptions<Scalar>& opts = {})
{
    return optimal_cost(sys, solve_riccati(sys, opts), x0);
}

enum class EvaluationMethod { closed_form, monte_carlo };

template <typename Scalar>
struct FunctionalReport
{
    Scalar cost = 0;
    Scalar volatility = 0;
    Scalar efficiency = 0;
    Vector<Scalar> x0;
    EvaluationMethod method = EvaluationMethod::closed_form;
    /// Standard errors of (cost, volatility, efficiency), Monte Carlo only.
    std::optional<std::array<Scalar, 3>> std_errors;
};

/// Closed-loop matrices behind a closed-form evaluation: S for the state
/// cost, W for the control energy.
template <typename Scalar>
struct PolicyForms
{
    Matrix<Scalar> S;
    Matrix<Scalar> W;
    bool open_loop_unstable = false;
};

template <typename Scalar>
PolicyForms<Scalar> policy_forms(const LqrSystem<Scalar>& sys, const LinearPolicy<Scalar>& policy,
                                 const SolverOptions<Scalar>& opts = {})
{
    const Matrix<Scalar> F = closed_loop(sys, policy);
    auto s = solve_discounted_lyapunov(F, sys.Q(), sys.gamma(), opts);
    const Matrix<Scalar> energy = policy.gain.transpose() * policy.gain;
    auto w = solve_discounted_lyapunov(F, energy, sys.gamma(), opts);
    return {std::move(s.S), std::move(w.S), s.open_loop_unstable};
}

/// Closed-form cost, volatility and efficiency of a stationary linear policy.
template <typename Scalar>
FunctionalReport<Scalar> evaluate_policy(const LqrSystem<Scalar>& sys, const LinearPolicy<Scalar>& policy,
                                         const Vector<Scalar>& x0, const SolverOptions<Scalar>& opts = {})
{
    check_initial_state(sys, x0);
    const auto forms = policy_forms(sys, policy, opts);
    const Matrix<Scalar>& Psi = sys.noise().covariance();
    FunctionalReport<Scalar> rep;
    const Scalar state_cost = discounted_quadratic(forms.S, x0, Psi, sys.gamma());
    rep.volatility = discounted_quadratic(forms.W, x0, Psi, sys.gamma());
    rep.efficiency = -state_cost;
    rep.cost = state_cost + sys.r() * rep.volatility;
    rep.x0 = x0;
    rep.method = EvaluationMethod::closed_form;
    return rep;
}

/// J_sp of the optimal policy for control weight `weight`.
template <typename Scalar>
Scalar state_penalizing_cost(const LqrSystem<Scalar>& sys, Scalar weight, const Vector<Scalar>& x0,
                             const SolverOptions<Scalar>& opts = {})
{
    const auto sol = solve_riccati_lambda(sys, weight, opts);
    return -evaluate_policy(sys, sol.gain, x0, opts).efficiency;
}

enum class ScanFunctional { optimal_cost, state_penalizing };

/// Evaluates J*_r(x0) or J_sp,r(x0) over an increasing grid of r, one
/// independent solve per point, and returns the difference table in grid
/// order.
template <typename Scalar>
std::vector<DifferenceRow> concavity_scan(const LqrSystem<Scalar>& sys, const std::vector<double>& r_grid,
                                          ScanFunctional which, const Vector<Scalar>& x0, unsigned threads = 1,
                                          const SolverOptions<Scalar>& opts = {})
{
    require_increasing(r_grid, "r_grid", 3, true);
    check_initial_state(sys, x0);
    std::vector<double> values(r_grid.size());
    parallel_for(Index(r_grid.size()), threads, [&](Index i) {
        const auto s = sys.with_r(Scalar(r_grid[std::size_t(i)]));
        const auto sol = solve_riccati(s, opts);
        const Scalar v = which == ScanFunctional::optimal_cost ? optimal_cost(s, sol, x0)
                                                                : -evaluate_policy(s, sol.gain, x0, opts).efficiency;
        values[std::size_t(i)] = double(v);
    });
    return difference_table(r_grid, values);
}

}  // namespace lqrvol
