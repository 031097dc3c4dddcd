#pragma once

#include <cmath>
#include <optional>
#include <string>

#include "lqrvol/core_model.hpp"
#include "lqrvol/errors.hpp"
#include "lqrvol/linalg.hpp"
#include "lqrvol/types.hpp"

namespace lqrvol
{
template <typename Scalar>
struct SolverOptions
{
    /// Stop when ||X_{t+1} - X_t||_F <= tolerance * (1 + ||X_t||_F).
    Scalar tolerance = Scalar(1e-10);
    long max_iterations = 100000;
};

template <typename Scalar>
struct RiccatiSolution
{
    Matrix<Scalar> K;
    LinearPolicy<Scalar> gain;
    long iterations = 0;
    /// Frobenius norm of K - step(K) at the returned K.
    Scalar residual = 0;
    /// False when (A, b) failed the rank test; the solve is still attempted.
    bool controllable = true;
};

template <typename Scalar>
struct LyapunovSolution
{
    Matrix<Scalar> S;
    long iterations = 0;
    Scalar residual = 0;
    /// Set when rho(F) >= 1 but gamma * rho(F)^2 < 1, so only the discounted
    /// sum converges.
    bool open_loop_unstable = false;
};

/// One application of K -> Q + A^T [gamma K - gamma^2/(gamma b'Kb + w) K b b' K] A,
/// where w is the control weight (r, or a Lagrange multiplier).
template <typename Scalar>
Matrix<Scalar> riccati_step(const Matrix<Scalar>& A, const Vector<Scalar>& b, const Matrix<Scalar>& Q,
                            Scalar control_weight, Scalar gamma, const Matrix<Scalar>& K)
{
    const Vector<Scalar> Kb = K * b;
    const Scalar denom = gamma * b.dot(Kb) + control_weight;
    if (!(denom > Scalar(0))) throw NumericalError("riccati step: gamma b'Kb + weight must be positive");
    const Matrix<Scalar> inner = gamma * K - (gamma * gamma / denom) * (Kb * Kb.transpose());
    return symmetrize(Q + A.transpose() * inner * A);
}

/// Optimal linear gain -gamma/(gamma b'Kb + w) b'KA for a given cost matrix K.
template <typename Scalar>
RowVector<Scalar> riccati_gain(const Matrix<Scalar>& A, const Vector<Scalar>& b, const Matrix<Scalar>& K,
                               Scalar control_weight, Scalar gamma)
{
    const Scalar denom = gamma * b.dot(K * b) + control_weight;
    if (!(denom > Scalar(0))) throw NumericalError("riccati gain: gamma b'Kb + weight must be positive");
    return -(gamma / denom) * (b.transpose() * K * A);
}

template <typename Scalar>
Scalar riccati_residual(const Matrix<Scalar>& A, const Vector<Scalar>& b, const Matrix<Scalar>& Q,
                        Scalar control_weight, Scalar gamma, const Matrix<Scalar>& K)
{
    return (riccati_step(A, b, Q, control_weight, gamma, K) - K).norm();
}

/// Value iteration for the discounted Riccati equation, started at K_0 = Q.
template <typename Scalar>
RiccatiSolution<Scalar> solve_riccati_weighted(const Matrix<Scalar>& A, const Vector<Scalar>& b,
                                               const Matrix<Scalar>& Q, Scalar control_weight, Scalar gamma,
                                               const SolverOptions<Scalar>& opts = {})
{
    Matrix<Scalar> K = symmetrize(Q);
    for (long it = 1; it <= opts.max_iterations; ++it) {
        Matrix<Scalar> next = riccati_step(A, b, Q, control_weight, gamma, K);
        const Scalar change = (next - K).norm();
        if (!std::isfinite(double(change)))
            throw DivergenceError("riccati iteration produced non-finite values", K.template cast<double>(),
                                  double(change), it);
        const Scalar scale = Scalar(1) + K.norm();
        K = std::move(next);
        if (change <= opts.tolerance * scale) {
            RiccatiSolution<Scalar> sol;
            sol.gain.gain = riccati_gain(A, b, K, control_weight, gamma);
            sol.residual = riccati_residual(A, b, Q, control_weight, gamma, K);
            sol.iterations = it;
            sol.K = std::move(K);
            return sol;
        }
    }
    throw DivergenceError("riccati iteration did not converge", K.template cast<double>(),
                          double(riccati_residual(A, b, Q, control_weight, gamma, K)), opts.max_iterations);
}

template <typename Scalar>
RiccatiSolution<Scalar> solve_riccati_lambda(const LqrSystem<Scalar>& sys, Scalar lambda,
                                             const SolverOptions<Scalar>& opts = {})
{
    if (!(lambda > Scalar(0))) throw InvalidParameter("lambda", "must be positive");
    auto sol = solve_riccati_weighted(sys.A(), sys.b(), sys.Q(), lambda, sys.gamma(), opts);
    sol.controllable = check_controllability(sys).controllable;
    return sol;
}

template <typename Scalar>
RiccatiSolution<Scalar> solve_riccati(const LqrSystem<Scalar>& sys, const SolverOptions<Scalar>& opts = {})
{
    return solve_riccati_lambda(sys, sys.r(), opts);
}

/// W = C + gamma F' W F by fixed-point iteration from `initial` (zero by
/// default). Requires gamma * rho(F)^2 < 1.
template <typename Scalar>
LyapunovSolution<Scalar> solve_discounted_lyapunov(const Matrix<Scalar>& F, const Matrix<Scalar>& C, Scalar gamma,
                                                   const SolverOptions<Scalar>& opts = {},
                                                   const std::optional<Matrix<Scalar>>& initial = std::nullopt)
{
    if (F.rows() != F.cols() || C.rows() != F.rows() || C.cols() != F.rows())
        throw InvalidParameter("F", "closed-loop and cost matrices must be square and of equal size");
    const Matrix<Scalar> c = validated_spsd(C, "C");
    const Scalar rho = spectral_radius(F);
    if (!(gamma * rho * rho < Scalar(1)))
        throw InstabilityError("discounted Lyapunov sum diverges: gamma * rho(F)^2 >= 1", double(rho));

    const Matrix<Scalar> Ft = F.transpose();
    Matrix<Scalar> S = initial ? symmetrize(*initial) : Matrix<Scalar>::Zero(F.rows(), F.cols());
    for (long it = 1; it <= opts.max_iterations; ++it) {
        Matrix<Scalar> next = symmetrize(c + gamma * Ft * S * F);
        const Scalar change = (next - S).norm();
        const Scalar scale = Scalar(1) + S.norm();
        S = std::move(next);
        if (change <= opts.tolerance * scale) {
            LyapunovSolution<Scalar> sol;
            sol.residual = (c + gamma * Ft * S * F - S).norm();
            sol.iterations = it;
            sol.open_loop_unstable = rho >= Scalar(1);
            sol.S = std::move(S);
            return sol;
        }
    }
    throw DivergenceError("discounted Lyapunov iteration did not converge", S.template cast<double>(),
                          double((c + gamma * Ft * S * F - S).norm()), opts.max_iterations);
}

template <typename Scalar>
Matrix<Scalar> closed_loop(const LqrSystem<Scalar>& sys, const LinearPolicy<Scalar>& policy)
{
    if (policy.dim() != sys.dim()) throw InvalidParameter("policy", "gain length must equal the state dimension");
    return sys.A() + sys.b() * policy.gain;
}

/// Discounted state cost matrix S = Q + gamma F' S F of a fixed linear policy.
template <typename Scalar>
LyapunovSolution<Scalar> solve_state_penalizing(const LqrSystem<Scalar>& sys, const LinearPolicy<Scalar>& policy,
                                                const SolverOptions<Scalar>& opts = {},
                                                const std::optional<Matrix<Scalar>>& initial = std::nullopt)
{
    return solve_discounted_lyapunov(closed_loop(sys, policy), sys.Q(), sys.gamma(), opts, initial);
}

}  // namespace lqrvol
