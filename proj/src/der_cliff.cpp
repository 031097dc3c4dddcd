#include <cmath>
#include <memory>

#include "lqrvol/renewables.hpp"

namespace lqrvol
{
void DerScenario::validate() const
{
    for (auto [name, v] : {std::pair{"beta", market.beta}, {"sigma", market.sigma}, {"phi1", market.phi1},
                           {"phi2", market.phi2}, {"xi", xi}, {"psi_s", psi_s}, {"variance_total", variance_total}})
        if (!(v >= 0) || !std::isfinite(v)) throw InvalidParameter(name, "must be a nonnegative real");
    if (!(sigma_rn > 0) || !std::isfinite(sigma_rn)) throw InvalidParameter("sigma_rn", "must be positive");
    if (!(v1 >= 0 && v1 <= 1)) throw InvalidParameter("v1", "must lie in [0, 1]");
    if (!(v2 >= 0 && v2 <= 1)) throw InvalidParameter("v2", "must lie in [0, 1]");
    if (!(v1 <= v2)) throw InvalidParameter("v1", "off-peak level must not exceed the midday level");
    if (period < 1) throw InvalidParameter("period", "must be positive");
    if (Q.rows() != 3 || Q.cols() != 3) throw InvalidParameter("Q", "must be 3 x 3");
}

std::pair<double, double> DerScenario::variances(double delta) const
{
    if (!(delta >= 0 && delta < 1)) throw InvalidParameter("delta", "must lie in [0, 1)");
    if (split == DeltaSplit::fixed_total) return {variance_total * delta, variance_total * (1 - delta)};
    return {psi_s * delta / (1 - delta), psi_s};
}

double DerScenario::profile(long t) const
{
    const double phase = double(t % period);
    const double T = double(period);
    return (phase < 0.3 * T || phase > 0.7 * T) ? v1 : v2;
}

LqrSystem<double> DerScenario::base_system() const
{
    VectorXd psi(3);
    psi << 0, psi_s, 0;
    return build_price_taking_market(market, NoiseSpec<double>::gaussian_diagonal(psi), Q, r, gamma).system;
}

PathModel der_model(const DerScenario& scenario, double delta, const RowVectorXd& gain)
{
    scenario.validate();
    if (gain.size() != 3) throw InvalidParameter("gain", "must act on (demand, supply, price)");
    const auto [psi_w, psi_s] = scenario.variances(delta);
    struct Parts
    {
        DerScenario s;
        RowVectorXd gain;
        MatrixXd Q;
        double sd_w;
        double sd_s;
    };
    auto parts = std::make_shared<const Parts>(Parts{scenario, gain, scenario.Q, std::sqrt(psi_w), std::sqrt(psi_s)});
    PathModel model;
    model.dim = 3;
    model.gamma = scenario.gamma;
    model.r = scenario.r;
    model.make_stepper = [parts](Rng&) {
        return PathStepper([parts](long t, VectorXd& x, Rng& rng) {
            const auto& s = parts->s;
            std::normal_distribution<double> normal;
            const double zw = normal(rng);
            const double zs = normal(rng);
            const double d = x(0), sup = x(1), p = x(2);
            const double u = parts->gain.dot(x.transpose());
            const double state_cost = x.dot(parts->Q * x);
            const double y = s.sigma_rn * s.profile(t) + parts->sd_w * zw;
            double d_next = s.market.beta * d - s.market.phi1 * p - y;
            if (s.clip_demand) d_next = std::max(d_next, 0.0);
            const double s_next = s.market.sigma * sup + s.market.phi2 * p + parts->sd_s * zs;
            const double p_next = p + u + s.xi * (d - d_next) * (d - d_next);
            x << d_next, s_next, p_next;
            return StepCost{state_cost, u};
        });
    };
    return model;
}

std::vector<DerRow> der_cliff(const DerScenario& scenario, const std::vector<double>& delta_grid, const VectorXd& x0,
                              SimConfig cfg)
{
    scenario.validate();
    require_increasing(delta_grid, "delta_grid", 1, false);
    if (x0.size() != 3) throw InvalidParameter("x0", "must be (demand, supply, price)");
    if (!cfg.horizon) cfg.horizon = 60;
    const auto sol = solve_riccati(scenario.base_system());
    std::vector<DerRow> rows;
    for (double delta : delta_grid) {
        const auto [psi_w, psi_s] = scenario.variances(delta);
        const SimBatch batch = simulate(der_model(scenario, delta, sol.gain.gain), x0, cfg);
        rows.push_back({delta, psi_w, psi_s, batch.volatility.mean, batch.volatility.std_error, batch.flagged_paths});
    }
    return rows;
}

}  // namespace lqrvol
