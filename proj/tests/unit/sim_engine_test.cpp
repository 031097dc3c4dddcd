#include <gtest/gtest.h>

#include "lqrvol/sim_engine.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace lqrvol;

namespace
{
const auto market = reference_market<double>().system;
const VectorXd x0 = reference_market_x0<double>();
}  // namespace

TEST(DeriveHorizon, WorkedExamples)
{
    EXPECT_EQ(derive_horizon(0.5, 1e-6, 1.0), 21);
    EXPECT_EQ(derive_horizon(0.1, 1e-3, 1.0), 4);
    EXPECT_EQ(derive_horizon(0.9, 1e-6, 0.0), 1);
    EXPECT_THROW(derive_horizon(1.0, 1e-6, 1.0), InvalidParameter);
    EXPECT_THROW(derive_horizon(0.5, 0.0, 1.0), InvalidParameter);
}

TEST(SimConfig, Validation)
{
    SimConfig cfg;
    cfg.n_paths = 0;
    EXPECT_THROW(cfg.validate(), InvalidParameter);
    cfg = {};
    cfg.horizon = 0;
    EXPECT_THROW(cfg.validate(), InvalidParameter);
    cfg = {};
    cfg.truncation_eps = 0;
    EXPECT_THROW(cfg.validate(), InvalidParameter);
}

TEST(Simulate, QuietOriginStaysAtZero)
{
    const auto sys = market.with_noise(NoiseSpec<double>::none(3));
    SimConfig cfg;
    cfg.n_paths = 10;
    const auto batch = simulate(sys, solve_riccati(sys).gain, VectorXd::Zero(3), cfg);
    EXPECT_EQ(batch.cost.mean, 0.0);
    EXPECT_EQ(batch.volatility.mean, 0.0);
    EXPECT_EQ(batch.cost.std_error, 0.0);
    EXPECT_EQ(batch.horizon, 1);
}

TEST(Simulate, NoiselessPathMatchesRollout)
{
    const auto sys = market.with_noise(NoiseSpec<double>::none(3));
    const auto gain = solve_riccati(sys).gain;
    SimConfig cfg;
    cfg.n_paths = 2;
    cfg.horizon = 80;
    const auto batch = simulate(sys, gain, x0, cfg);
    const auto [state, energy] = oracle::rollout(sys.A(), sys.b(), sys.Q(), gain.gain, x0, sys.gamma(), 80);
    EXPECT_NEAR(-batch.efficiency.mean, state, 1e-12 * state);
    EXPECT_NEAR(batch.volatility.mean, energy, 1e-12 * energy);
    const auto rep = evaluate_policy(sys, gain, x0);
    EXPECT_NEAR(batch.volatility.mean, rep.volatility, 1e-9 * rep.volatility);
}

TEST(Simulate, ReproducibleAcrossThreadCounts)
{
    const auto gain = solve_riccati(market).gain;
    SimConfig cfg;
    cfg.seed = 17;
    cfg.n_paths = 300;
    cfg.keep_paths = 3;
    const auto a = simulate(market, gain, x0, cfg);
    cfg.threads = 4;
    const auto b = simulate(market, gain, x0, cfg);
    EXPECT_EQ(a.cost.mean, b.cost.mean);
    EXPECT_EQ(a.volatility.std_error, b.volatility.std_error);
    EXPECT_EQ(a.horizon, b.horizon);
    ASSERT_EQ(a.paths.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_TRUE(a.paths[i].states == b.paths[i].states);
    // A different seed gives different draws.
    cfg.seed = 18;
    EXPECT_NE(simulate(market, gain, x0, cfg).cost.mean, a.cost.mean);
}

TEST(Simulate, StandardErrorShrinksWithPaths)
{
    const auto gain = solve_riccati(market).gain;
    SimConfig cfg;
    cfg.seed = 2;
    cfg.horizon = 40;
    cfg.n_paths = 4000;
    const double se1 = simulate(market, gain, x0, cfg).volatility.std_error;
    cfg.n_paths = 8000;
    const double se2 = simulate(market, gain, x0, cfg).volatility.std_error;
    EXPECT_NEAR(se1 / se2, std::sqrt(2.0), 0.1);
}

TEST(Simulate, AutomaticHorizonBoundsTheTruncation)
{
    const auto sys = market.with_noise(NoiseSpec<double>::none(3));
    const auto gain = solve_riccati(sys).gain;
    SimConfig cfg;
    cfg.n_paths = 1;
    cfg.truncation_eps = 1e-6;
    const auto batch = simulate(sys, gain, x0, cfg);
    const MatrixXd F = sys.A() + sys.b() * gain.gain;
    const MatrixXd C = sys.Q() + sys.r() * gain.gain.transpose() * gain.gain;
    const double exact = x0.dot(oracle::lyapunov_kron(F, C, sys.gamma()) * x0);
    EXPECT_LE(std::abs(batch.cost.mean - exact), 2 * cfg.truncation_eps + 1e-13 * exact);
}

TEST(Simulate, DivergingPathsAreFlagged)
{
    const auto sys = fixtures::scalar_system(1e150, 1, 1, 1, 0.5, 1.0);
    SimConfig cfg;
    cfg.n_paths = 20;
    cfg.horizon = 10;
    EXPECT_THROW(simulate(sys, LinearPolicy<double>::zero(1), VectorXd::Ones(1), cfg), SimulationError);
}

TEST(Simulate, MonteCarloAgreesWithClosedForm)
{
    for (double r : {0.01, 1000.0}) {
        const auto sys = reference_market<double>(r).system;
        const auto gain = solve_riccati(sys).gain;
        SimConfig cfg;
        cfg.seed = 5;
        cfg.n_paths = 5000;
        const auto rep = to_report(simulate(sys, gain, x0, cfg), x0);
        const auto exact = evaluate_policy(sys, gain, x0);
        ASSERT_TRUE(rep.std_errors);
        EXPECT_LE(std::abs(rep.volatility - exact.volatility), 3 * (*rep.std_errors)[1]);
        EXPECT_LE(std::abs(rep.efficiency - exact.efficiency), 3 * (*rep.std_errors)[2]);
        EXPECT_EQ(rep.method, EvaluationMethod::monte_carlo);
    }
}

TEST(Simulate, MixtureEndpointsFollowOnePolicy)
{
    const auto g1 = solve_riccati(market).gain;
    const auto g2 = solve_riccati(market.with_r(10.0)).gain;
    SimConfig cfg;
    cfg.seed = 8;
    cfg.n_paths = 50;
    cfg.horizon = 30;
    const auto mixed = simulate(mixture_model(market, {{g1, g2}, 1.0}), x0, cfg);
    const auto pure = simulate(mixture_model(market, {{g1, g1}, 0.5}), x0, cfg);
    EXPECT_EQ(mixed.volatility.mean, pure.volatility.mean);
    EXPECT_THROW(mixture_model(market, {{g1, g2}, 1.5}), InvalidParameter);
}
