#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/LU>

#include "lqrvol/functionals.hpp"
#include "lqrvol/riccati.hpp"
#include "lqrvol/sim_engine.hpp"

namespace lqrvol
{
enum class ProsumerKind { consumer, producer };

/// One strategic prosumer. Consumer state is (demand, allocation, bid),
/// producer state is (supply, bid); the bid is the last coordinate and is
/// the one the player controls.
template <typename Scalar>
struct ProsumerSpec
{
    ProsumerKind kind = ProsumerKind::consumer;
    Matrix<Scalar> A_block;
    Matrix<Scalar> Q_block;

    Index size() const noexcept { return kind == ProsumerKind::consumer ? 3 : 2; }

    /// Throws unless the blocks have the right size, the template zeros are
    /// exactly zero and Q_block is SPSD.
    void validate(const std::string& name) const
    {
        const Index n = size();
        if (A_block.rows() != n || A_block.cols() != n)
            throw InvalidParameter(name + ".A", "must be " + std::to_string(n) + " x " + std::to_string(n));
        if (Q_block.rows() != n || Q_block.cols() != n)
            throw InvalidParameter(name + ".Q", "must be " + std::to_string(n) + " x " + std::to_string(n));
        if (!A_block.allFinite()) throw InvalidParameter(name + ".A", "has non-finite entries");
        if (!A_block.row(n - 1).isZero(0)) throw InvalidParameter(name + ".A", "bid row must be zero");
        if (kind == ProsumerKind::consumer && (A_block(0, 1) != Scalar(0) || A_block(1, 0) != Scalar(0)))
            throw InvalidParameter(name + ".A", "demand and allocation must not feed each other");
        validated_spsd(Q_block, name + ".Q");
    }
};

/// Market of strategic prosumers whose bids set the clearing price
/// kappa / N * (sum of bids + zeta), N the number of players.
template <typename Scalar>
struct MarketSpecPA
{
    std::vector<ProsumerSpec<Scalar>> consumers;
    std::vector<ProsumerSpec<Scalar>> producers;
    Scalar kappa = 0;
    Scalar zeta = 0;
    /// Sensitivity of demand (negative) and supply (positive) to the price.
    Scalar price_slope = 1;
    Scalar r = 1;
    Scalar gamma = Scalar(0.9);
    /// Covariance over the 3 N_c + 2 N_p prosumer coordinates.
    Matrix<Scalar> noise_covariance;

    int players() const noexcept { return int(consumers.size() + producers.size()); }
    Index market_dim() const noexcept { return 3 * Index(consumers.size()) + 2 * Index(producers.size()); }

    MarketSpecPA with_r(Scalar value) const
    {
        MarketSpecPA out = *this;
        out.r = value;
        return out;
    }
};

/// The linear game all players share: x+ = A x + sum_i b_i u_i + n with
/// player cost x'Q_i x + r u_i^2. With zeta != 0 a constant coordinate is
/// appended last.
template <typename Scalar>
struct AggregateMarket
{
    Matrix<Scalar> A;
    std::vector<Vector<Scalar>> b;
    std::vector<Matrix<Scalar>> Q;
    Matrix<Scalar> Psi;
    Scalar r = 1;
    Scalar gamma = Scalar(0.9);
    Scalar kappa = 0;
    Scalar zeta = 0;
    Index market_dim = 0;
    bool augmented = false;
    /// Coordinate of each player's bid in the aggregate state.
    std::vector<Index> bid_index;

    Index dim() const noexcept { return A.rows(); }
    int players() const noexcept { return int(b.size()); }

    /// Appends the constant coordinate when the market carries one.
    Vector<Scalar> lift_state(const Vector<Scalar>& x) const
    {
        if (x.size() == dim()) return x;
        if (!augmented || x.size() != market_dim)
            throw InvalidParameter("x0", "length must equal the aggregate market dimension");
        Vector<Scalar> out(dim());
        out << x, Scalar(1);
        return out;
    }

    Scalar clearing_price(const Vector<Scalar>& x) const
    {
        Scalar sum = zeta;
        for (Index k : bid_index) sum += x(k);
        return kappa / Scalar(players()) * sum;
    }
};

template <typename Scalar>
AggregateMarket<Scalar> assemble_aggregate(const MarketSpecPA<Scalar>& spec)
{
    const int n_players = spec.players();
    if (spec.consumers.empty() && spec.producers.empty()) throw InvalidParameter("market", "needs at least one player");
    if (!std::isfinite(double(spec.kappa))) throw InvalidParameter("kappa", "must be finite");
    if (!std::isfinite(double(spec.zeta))) throw InvalidParameter("zeta", "must be finite");
    if (!std::isfinite(double(spec.price_slope))) throw InvalidParameter("price_slope", "must be finite");
    if (!(spec.r > Scalar(0))) throw InvalidParameter("r", "must be positive");
    if (!(spec.gamma > Scalar(0) && spec.gamma < Scalar(1))) throw InvalidParameter("gamma", "must lie in (0, 1)");
    for (std::size_t i = 0; i < spec.consumers.size(); ++i) {
        if (spec.consumers[i].kind != ProsumerKind::consumer)
            throw InvalidParameter("consumers", "entry is not a consumer");
        spec.consumers[i].validate("consumers[" + std::to_string(i) + "]");
    }
    for (std::size_t j = 0; j < spec.producers.size(); ++j) {
        if (spec.producers[j].kind != ProsumerKind::producer)
            throw InvalidParameter("producers", "entry is not a producer");
        spec.producers[j].validate("producers[" + std::to_string(j) + "]");
    }

    const Index nm = spec.market_dim();
    AggregateMarket<Scalar> agg;
    agg.market_dim = nm;
    agg.augmented = spec.zeta != Scalar(0);
    const Index d = nm + (agg.augmented ? 1 : 0);
    agg.A = Matrix<Scalar>::Zero(d, d);
    agg.Psi = Matrix<Scalar>::Zero(d, d);
    agg.r = spec.r;
    agg.gamma = spec.gamma;
    agg.kappa = spec.kappa;
    agg.zeta = spec.zeta;

    if (spec.noise_covariance.size() != 0) {
        if (spec.noise_covariance.rows() != nm || spec.noise_covariance.cols() != nm)
            throw InvalidParameter("noise", "covariance must match the aggregate market dimension");
        agg.Psi.topLeftCorner(nm, nm) = validated_spsd(spec.noise_covariance, "noise.covariance");
    }

    std::vector<std::pair<Index, Scalar>> price_rows;  // (row, sign)
    Index offset = 0;
    auto place = [&](const ProsumerSpec<Scalar>& p, Scalar sign) {
        const Index n = p.size();
        agg.A.block(offset, offset, n, n) = p.A_block;
        Vector<Scalar> b = Vector<Scalar>::Zero(d);
        b(offset + n - 1) = 1;
        agg.b.push_back(std::move(b));
        Matrix<Scalar> Q = Matrix<Scalar>::Zero(d, d);
        Q.block(offset, offset, n, n) = symmetrize(p.Q_block);
        agg.Q.push_back(std::move(Q));
        agg.bid_index.push_back(offset + n - 1);
        price_rows.emplace_back(offset, sign);
        offset += n;
    };
    for (const auto& c : spec.consumers) place(c, Scalar(-1));
    for (const auto& p : spec.producers) place(p, Scalar(1));

    const Scalar weight = spec.kappa / Scalar(n_players) * spec.price_slope;
    for (const auto& [row, sign] : price_rows) {
        for (Index k : agg.bid_index) agg.A(row, k) += sign * weight;
        if (agg.augmented) agg.A(row, d - 1) += sign * weight * spec.zeta;
    }
    if (agg.augmented) agg.A(d - 1, d - 1) = 1;
    return agg;
}

template <typename Scalar>
struct NashOptions
{
    Scalar damping = Scalar(0.5);
    long max_iterations = 10000;
    Scalar tolerance = Scalar(1e-12);
    SolverOptions<Scalar> lyapunov{Scalar(1e-13), 1000000};
};

template <typename Scalar>
struct NashEquilibrium
{
    /// Player i bids u_i = -p[i] x.
    std::vector<RowVector<Scalar>> p;
    std::vector<Matrix<Scalar>> K;
    Matrix<Scalar> F;
    /// Frobenius defects of the value and gain equations per player.
    std::vector<Scalar> value_residuals;
    std::vector<Scalar> gain_residuals;
    /// Over the prosumer coordinates only (the constant coordinate, if any,
    /// always contributes an eigenvalue of 1).
    Scalar spectral_radius_F = 0;
    long iterations = 0;

    Scalar max_residual() const
    {
        Scalar m = 0;
        for (Scalar v : value_residuals) m = std::max(m, v);
        for (Scalar v : gain_residuals) m = std::max(m, v);
        return m;
    }
};

template <typename Scalar>
Matrix<Scalar> equilibrium_closed_loop(const AggregateMarket<Scalar>& agg, const std::vector<RowVector<Scalar>>& p)
{
    Matrix<Scalar> F = agg.A;
    for (int i = 0; i < agg.players(); ++i) F -= agg.b[std::size_t(i)] * p[std::size_t(i)];
    return F;
}

template <typename Scalar>
Scalar market_spectral_radius(const AggregateMarket<Scalar>& agg, const Matrix<Scalar>& F)
{
    return spectral_radius(Matrix<Scalar>(F.topLeftCorner(agg.market_dim, agg.market_dim)));
}

namespace detail
{
/// Rows of the joint gain system M P = R given the value matrices.
template <typename Scalar>
std::pair<Matrix<Scalar>, Matrix<Scalar>> gain_system(const AggregateMarket<Scalar>& agg,
                                                      const std::vector<Matrix<Scalar>>& K)
{
    const int n = agg.players();
    Matrix<Scalar> M(n, n);
    Matrix<Scalar> R(n, agg.dim());
    for (int i = 0; i < n; ++i) {
        const auto& Ki = K[std::size_t(i)];
        const auto& bi = agg.b[std::size_t(i)];
        for (int j = 0; j < n; ++j) M(i, j) = agg.gamma * bi.dot(Ki * agg.b[std::size_t(j)]);
        M(i, i) += agg.r;
        R.row(i) = agg.gamma * bi.transpose() * Ki * agg.A;
    }
    return {std::move(M), std::move(R)};
}
}  // namespace detail

/// Stationary Markov perfect equilibrium by damped fixed-point iteration on
/// the coupled value and gain equations, starting from zero gains.
template <typename Scalar>
NashEquilibrium<Scalar> solve_nash(const AggregateMarket<Scalar>& agg, const NashOptions<Scalar>& opts = {})
{
    const int n = agg.players();
    const Index d = agg.dim();
    std::vector<RowVector<Scalar>> p(std::size_t(n), RowVector<Scalar>::Zero(d));
    std::vector<Matrix<Scalar>> K(std::size_t(n), Matrix<Scalar>::Zero(d, d));
    Scalar change = std::numeric_limits<Scalar>::infinity();

    auto update_values = [&](const Matrix<Scalar>& F) {
        for (int i = 0; i < n; ++i) {
            const auto& pi = p[std::size_t(i)];
            const Matrix<Scalar> C = agg.Q[std::size_t(i)] + agg.r * pi.transpose() * pi;
            const std::optional<Matrix<Scalar>> warm = K[std::size_t(i)];
            K[std::size_t(i)] = solve_discounted_lyapunov(F, C, agg.gamma, opts.lyapunov, warm).S;
        }
    };

    for (long it = 1; it <= opts.max_iterations; ++it) {
        update_values(equilibrium_closed_loop(agg, p));
        auto [M, R] = detail::gain_system(agg, K);
        Eigen::FullPivLU<Matrix<Scalar>> lu(M);
        if (!lu.isInvertible()) throw DegenerateMarketError("joint gain system is singular");
        const Matrix<Scalar> P = lu.solve(R);
        change = 0;
        for (int i = 0; i < n; ++i) {
            const RowVector<Scalar> next = (Scalar(1) - opts.damping) * p[std::size_t(i)] + opts.damping * P.row(i);
            change = std::max(change, (next - p[std::size_t(i)]).cwiseAbs().maxCoeff());
            p[std::size_t(i)] = next;
        }
        if (!std::isfinite(double(change)))
            throw DivergenceError("equilibrium iteration produced non-finite gains", Matrix<double>(), double(change), it);
        if (change <= opts.tolerance) {
            NashEquilibrium<Scalar> eq;
            eq.F = equilibrium_closed_loop(agg, p);
            update_values(eq.F);
            eq.p = p;
            eq.K = K;
            eq.iterations = it;
            auto [M2, R2] = detail::gain_system(agg, K);
            Matrix<Scalar> Pm(n, d);
            for (int i = 0; i < n; ++i) Pm.row(i) = p[std::size_t(i)];
            const Matrix<Scalar> gain_defect = M2 * Pm - R2;
            for (int i = 0; i < n; ++i) {
                const auto& pi = p[std::size_t(i)];
                const Matrix<Scalar> C = agg.Q[std::size_t(i)] + agg.r * pi.transpose() * pi;
                const auto& Ki = K[std::size_t(i)];
                eq.value_residuals.push_back((agg.gamma * eq.F.transpose() * Ki * eq.F + C - Ki).norm());
                eq.gain_residuals.push_back(gain_defect.row(i).norm());
            }
            eq.spectral_radius_F = market_spectral_radius(agg, eq.F);
            return eq;
        }
    }
    Matrix<double> last(n, d);
    for (int i = 0; i < n; ++i) last.row(i) = p[std::size_t(i)].template cast<double>();
    throw DivergenceError("equilibrium iteration did not converge", last, double(change), opts.max_iterations);
}

template <typename Scalar>
NashEquilibrium<Scalar> solve_nash(const MarketSpecPA<Scalar>& spec, const NashOptions<Scalar>& opts = {})
{
    return solve_nash(assemble_aggregate(spec), opts);
}

/// Player i's single-agent optimum against the other players' frozen gains.
/// Returns p_i in the same sign convention as the equilibrium.
template <typename Scalar>
RowVector<Scalar> best_response(const AggregateMarket<Scalar>& agg, const std::vector<RowVector<Scalar>>& p, int player,
                                const SolverOptions<Scalar>& opts = {})
{
    if (player < 0 || player >= agg.players()) throw InvalidParameter("player", "out of range");
    Matrix<Scalar> A = agg.A;
    for (int j = 0; j < agg.players(); ++j)
        if (j != player) A -= agg.b[std::size_t(j)] * p[std::size_t(j)];
    const auto sol = solve_riccati_weighted(A, agg.b[std::size_t(player)], agg.Q[std::size_t(player)], agg.r,
                                            agg.gamma, opts);
    return -sol.gain.gain;
}

template <typename Scalar>
struct PlayerFunctionals
{
    std::vector<Scalar> state_cost;
    std::vector<Scalar> volatility;

    Scalar social_cost() const
    {
        Scalar s = 0;
        for (Scalar v : state_cost) s += v;
        return s;
    }
};

/// Per-player discounted state cost and control energy under the
/// equilibrium closed loop.
template <typename Scalar>
PlayerFunctionals<Scalar> player_functionals(const AggregateMarket<Scalar>& agg, const NashEquilibrium<Scalar>& eq,
                                             const Vector<Scalar>& x0, const SolverOptions<Scalar>& opts = {})
{
    const Vector<Scalar> x = agg.lift_state(x0);
    PlayerFunctionals<Scalar> out;
    for (int i = 0; i < agg.players(); ++i) {
        const auto S = solve_discounted_lyapunov(eq.F, agg.Q[std::size_t(i)], agg.gamma, opts).S;
        const auto& pi = eq.p[std::size_t(i)];
        const auto W = solve_discounted_lyapunov(eq.F, Matrix<Scalar>(pi.transpose() * pi), agg.gamma, opts).S;
        out.state_cost.push_back(discounted_quadratic(S, x, agg.Psi, agg.gamma));
        out.volatility.push_back(discounted_quadratic(W, x, agg.Psi, agg.gamma));
    }
    return out;
}

/// Sum of the players' state-penalizing costs at the equilibrium.
template <typename Scalar>
Scalar nash_social_cost(const AggregateMarket<Scalar>& agg, const NashEquilibrium<Scalar>& eq,
                        const Vector<Scalar>& x0, const SolverOptions<Scalar>& opts = {})
{
    return player_functionals(agg, eq, x0, opts).social_cost();
}

struct EquilibriumPaths
{
    /// state cost = social state cost, control = Euclidean norm of the bid
    /// vector, so the volatility estimate is the players' summed control
    /// energy.
    SimBatch batch;
    /// Clearing price per kept path and step.
    std::vector<std::vector<double>> prices;
};

EquilibriumPaths simulate_equilibrium(const AggregateMarket<double>& agg, const NashEquilibrium<double>& eq,
                                      const VectorXd& x0, const SimConfig& cfg);

/// Mean over paths of the sample variance of the price along each path.
double mean_price_variance(const std::vector<std::vector<double>>& prices);

}  // namespace lqrvol
