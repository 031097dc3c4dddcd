#include "lqrvol/nash_market.hpp"

#include <memory>

namespace lqrvol
{
EquilibriumPaths simulate_equilibrium(const AggregateMarket<double>& agg, const NashEquilibrium<double>& eq,
                                      const VectorXd& x0, const SimConfig& cfg)
{
    struct Parts
    {
        MatrixXd F;
        MatrixXd P;
        MatrixXd Q;
        MatrixXd noise_factor;
    };
    auto parts = std::make_shared<Parts>();
    parts->F = eq.F;
    parts->P.resize(agg.players(), agg.dim());
    parts->Q = MatrixXd::Zero(agg.dim(), agg.dim());
    for (int i = 0; i < agg.players(); ++i) {
        parts->P.row(i) = eq.p[std::size_t(i)];
        parts->Q += agg.Q[std::size_t(i)];
    }
    parts->noise_factor = psd_sqrt(agg.Psi);

    PathModel model;
    model.dim = agg.dim();
    model.gamma = agg.gamma;
    model.r = agg.r;
    model.make_stepper = [parts](Rng&) {
        return PathStepper([parts, z = VectorXd(parts->F.rows())](long, VectorXd& x, Rng& rng) mutable {
            std::normal_distribution<double> normal;
            const double state_cost = x.dot(parts->Q * x);
            const double energy = (parts->P * x).norm();
            for (Index k = 0; k < z.size(); ++k) z(k) = normal(rng);
            x = parts->F * x + parts->noise_factor * z;
            return StepCost{state_cost, energy};
        });
    };

    EquilibriumPaths out;
    out.batch = simulate(model, agg.lift_state(x0), cfg);
    for (const auto& rec : out.batch.paths) {
        std::vector<double> prices(std::size_t(rec.states.rows()));
        for (Index t = 0; t < rec.states.rows(); ++t)
            prices[std::size_t(t)] = agg.clearing_price(VectorXd(rec.states.row(t).transpose()));
        out.prices.push_back(std::move(prices));
    }
    return out;
}

double mean_price_variance(const std::vector<std::vector<double>>& prices)
{
    double total = 0;
    std::size_t count = 0;
    for (const auto& path : prices) {
        if (path.size() < 2) continue;
        double mean = 0;
        for (double v : path) mean += v;
        mean /= double(path.size());
        double ss = 0;
        for (double v : path) ss += (v - mean) * (v - mean);
        total += ss / double(path.size() - 1);
        ++count;
    }
    return count ? total / double(count) : 0.0;
}

}  // namespace lqrvol
