#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "lqrvol/capacity.hpp"
#include "lqrvol/functionals.hpp"
#include "lqrvol/reference.hpp"
#include "lqrvol/sim_engine.hpp"

namespace lqrvol
{
/// Price-taking market with an extra renewable supply coordinate y:
/// y+ = sigma_c p + sigma_r y + w, and y feeds the supply row.
template <typename Scalar>
struct RenewableSystem
{
    MarketInstance<Scalar> base;
    Scalar sigma_r = Scalar(0.9);
    Scalar sigma_c = Scalar(0.01);
    Scalar psi_r = 0;
    LqrSystem<Scalar> augmented;

    /// Appends y0 = 0 to a base state.
    Vector<Scalar> lift_state(const Vector<Scalar>& x0) const
    {
        if (x0.size() == 4) return x0;
        if (x0.size() != 3) throw InvalidParameter("x0", "expected a 3- or 4-dimensional state");
        Vector<Scalar> out(4);
        out << x0, Scalar(0);
        return out;
    }
};

template <typename Scalar>
struct RenewableParams
{
    Scalar sigma_r = Scalar(0.9);
    Scalar sigma_c = Scalar(0.01);
    /// Full 4 x 4 penalty; the base Q padded with zeros when empty.
    std::optional<Matrix<Scalar>> Q;
};

template <typename Scalar>
RenewableSystem<Scalar> build_renewable_system(const MarketInstance<Scalar>& base, Scalar psi_r,
                                               const RenewableParams<Scalar>& params = {})
{
    const auto& sys = base.system;
    if (sys.dim() != 3) throw InvalidParameter("base", "must be a 3-dimensional market");
    if (!(params.sigma_r > Scalar(0)) || !std::isfinite(double(params.sigma_r)))
        throw InvalidParameter("sigma_r", "must be positive");
    if (!(params.sigma_c >= Scalar(0)) || !std::isfinite(double(params.sigma_c)))
        throw InvalidParameter("sigma_c", "must be nonnegative");
    if (!(psi_r >= Scalar(0)) || !std::isfinite(double(psi_r))) throw InvalidParameter("psi_r", "must be nonnegative");

    Matrix<Scalar> A = Matrix<Scalar>::Zero(4, 4);
    A.topLeftCorner(3, 3) = sys.A();
    A(1, 3) = 1;
    A(3, 2) = params.sigma_c;
    A(3, 3) = params.sigma_r;
    Vector<Scalar> b = Vector<Scalar>::Zero(4);
    b.head(3) = sys.b();

    Matrix<Scalar> Q = Matrix<Scalar>::Zero(4, 4);
    if (params.Q) {
        if (params.Q->rows() != 4 || params.Q->cols() != 4) throw InvalidParameter("Q", "must be 4 x 4");
        Q = *params.Q;
    } else {
        Q.topLeftCorner(3, 3) = sys.Q();
    }

    Matrix<Scalar> Psi = Matrix<Scalar>::Zero(4, 4);
    Psi.topLeftCorner(3, 3) = sys.noise().covariance();
    Psi(3, 3) = psi_r;
    auto noise = Psi.isZero(0) ? NoiseSpec<Scalar>::none(4) : NoiseSpec<Scalar>::gaussian(Psi);

    auto augmented = LqrSystem<Scalar>::create(std::move(A), std::move(b), std::move(noise), Q, sys.r(), sys.gamma());
    return {base, params.sigma_r, params.sigma_c, psi_r, std::move(augmented)};
}

template <typename Scalar>
struct PsiRow
{
    Scalar psi_r = 0;
    /// Volatility of the policy that reaches the common efficiency target.
    Scalar volatility = 0;
    /// Multiplier that reaches the target.
    Scalar lambda = 0;
    Scalar state_cost = 0;
    /// tr(K Psi) and K(3,3) at the fixed diagnostic multiplier.
    Scalar trace_term = 0;
    Scalar trace_slope = 0;
};

/// For each psi_r, finds the multiplier whose optimal policy attains a common
/// efficiency (by default the efficiency of the largest psi_r at
/// lambda = base r) and reports that policy's volatility: the budget needed
/// to keep efficiency constant. The trace diagnostic is taken at
/// fixed_lambda (base r when unset).
template <typename Scalar>
std::vector<PsiRow<Scalar>> volatility_vs_psi(const MarketInstance<Scalar>& base, const std::vector<double>& psi_grid,
                                              const Vector<Scalar>& x0, const RenewableParams<Scalar>& params = {},
                                              std::optional<Scalar> efficiency_target = std::nullopt,
                                              std::optional<Scalar> fixed_lambda = std::nullopt,
                                              unsigned threads = 1, const SolverOptions<Scalar>& opts = {})
{
    require_increasing(psi_grid, "psi_grid", 1, false);
    const Scalar lambda_fixed = fixed_lambda.value_or(base.system.r());
    if (!(lambda_fixed > Scalar(0))) throw InvalidParameter("fixed_lambda", "must be positive");

    auto state_cost_at = [&](const RenewableSystem<Scalar>& rs, Scalar lambda, Scalar* volatility) {
        const auto sol = solve_riccati_lambda(rs.augmented, lambda, opts);
        const auto rep = evaluate_policy(rs.augmented, sol.gain, rs.lift_state(x0), opts);
        if (volatility) *volatility = rep.volatility;
        return -rep.efficiency;
    };

    Scalar target;
    if (efficiency_target) {
        target = -*efficiency_target;
    } else {
        const auto top = build_renewable_system(base, Scalar(psi_grid.back()), params);
        target = state_cost_at(top, lambda_fixed, nullptr);
    }

    std::vector<PsiRow<Scalar>> rows(psi_grid.size());
    parallel_for(Index(psi_grid.size()), threads, [&](Index i) {
        const Scalar psi = Scalar(psi_grid[std::size_t(i)]);
        const auto rs = build_renewable_system(base, psi, params);
        // The state cost of the optimal policy grows with the multiplier.
        double lo = std::log(1e-10), hi = std::log(1e8);
        if (state_cost_at(rs, Scalar(std::exp(lo)), nullptr) > target ||
            state_cost_at(rs, Scalar(std::exp(hi)), nullptr) < target)
            throw NumericalError("efficiency target is not reachable at psi_r = " + std::to_string(double(psi)));
        while (hi - lo > 1e-13 * (1 + std::abs(lo))) {
            const double mid = 0.5 * (lo + hi);
            if (state_cost_at(rs, Scalar(std::exp(mid)), nullptr) > target)
                hi = mid;
            else
                lo = mid;
        }
        PsiRow<Scalar> row;
        row.psi_r = psi;
        row.lambda = Scalar(std::exp(0.5 * (lo + hi)));
        row.state_cost = state_cost_at(rs, row.lambda, &row.volatility);
        const auto fixed = solve_riccati_lambda(rs.augmented, lambda_fixed, opts);
        row.trace_term = (fixed.K * rs.augmented.noise().covariance()).trace();
        row.trace_slope = fixed.K(3, 3);
        rows[std::size_t(i)] = row;
    });
    return rows;
}

template <typename Scalar>
struct ShrinkageResult
{
    std::vector<double> psi;
    std::vector<CapacityRegion<Scalar>> regions;
    /// True when each region lies below the one for the next smaller psi_r
    /// at every shared alpha.
    bool nested = true;
    double max_violation = 0;
    /// Peak efficiency of the largest-psi region, used for normalization.
    double reference_peak = 0;
};

template <typename Scalar>
ShrinkageResult<Scalar> capacity_shrinkage(const MarketInstance<Scalar>& base, const std::vector<double>& psi_list,
                                           const std::vector<double>& alpha_grid, const Vector<Scalar>& x0,
                                           const RenewableParams<Scalar>& params = {}, unsigned threads = 1,
                                           const DualSearchOptions& search = {},
                                           const SolverOptions<Scalar>& opts = {})
{
    require_increasing(psi_list, "psi_list", 1, false);
    ShrinkageResult<Scalar> out;
    out.psi = psi_list;
    for (double psi : psi_list) {
        const auto rs = build_renewable_system(base, Scalar(psi), params);
        out.regions.push_back(sweep_capacity_region(rs.augmented, alpha_grid, rs.lift_state(x0), threads, search, opts));
    }
    for (std::size_t k = 1; k < out.regions.size(); ++k) {
        const auto& smaller = out.regions[k - 1].points;
        const auto& larger = out.regions[k].points;
        double scale = 0;
        for (const auto& p : smaller) scale = std::max(scale, std::abs(double(p.efficiency_star)));
        for (const auto& pb : larger)
            for (const auto& pa : smaller)
                if (pa.alpha == pb.alpha) {
                    const double excess = double(pb.efficiency_star - pa.efficiency_star);
                    out.max_violation = std::max(out.max_violation, excess);
                    if (excess > 1e-8 * scale) out.nested = false;
                }
    }
    out.reference_peak = peak_efficiency(out.regions.back());
    return out;
}

enum class DeltaSplit {
    /// psi_s fixed, psi_w = psi_s * delta / (1 - delta).
    fixed_supply_variance,
    /// psi_w + psi_s = variance_total.
    fixed_total,
};

/// Nonlinear market with demand-side renewable generation y outside the
/// operator's control:
///   y_t = sigma_rn * P(t mod T) + w_t,  P = v1 off-peak, v2 midday
///   d+ = max(beta d - phi1 p - y, 0)
///   s+ = sigma s + phi2 p + n_s
///   p+ = p + u + xi (d - d+)^2
/// with u from the linear optimum of the base market.
struct DerScenario
{
    MarketParams<double> market = reference_market_params<double>();
    MatrixXd Q = reference_market_Q<double>();
    /// Control weight and discount of the base regulator.
    double r = 0.01;
    double gamma = 0.5;
    double sigma_rn = 1.0;
    double v1 = 0.1;
    double v2 = 0.44;
    int period = 24;
    double xi = 0.05;
    double psi_s = 2.0;
    double variance_total = 2.0;
    DeltaSplit split = DeltaSplit::fixed_supply_variance;
    bool clip_demand = true;

    void validate() const;
    /// (psi_w, psi_s) for a renewable fraction delta in [0, 1).
    std::pair<double, double> variances(double delta) const;
    double profile(long t) const;
    LqrSystem<double> base_system() const;
};

/// Path model for one delta under the given feedback gain on (d, s, p).
PathModel der_model(const DerScenario& scenario, double delta, const RowVectorXd& gain);

struct DerRow
{
    double delta;
    double psi_w;
    double psi_s;
    double volatility;
    double std_error;
    long n_paths_excluded;
};

/// Price volatility against renewable fraction. Every delta reuses the same
/// random stream, so the curve is compared under common random numbers. A
/// missing horizon defaults to 60 steps.
std::vector<DerRow> der_cliff(const DerScenario& scenario, const std::vector<double>& delta_grid, const VectorXd& x0,
                              SimConfig cfg);

}  // namespace lqrvol
