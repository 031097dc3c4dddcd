#include <gtest/gtest.h>

#include "lqrvol/functionals.hpp"
#include "lqrvol/reference.hpp"
#include "oracles.hpp"
#include "fixtures.hpp"

using namespace lqrvol;

TEST(Riccati, ScalarMatchesQuadraticRoot)
{
    const auto sys = fixtures::scalar_system(1.1, 1, 1, 1, 0.9);
    const auto sol = solve_riccati(sys);
    EXPECT_NEAR(sol.K(0, 0), oracle::scalar_riccati_root(1.1, 1, 1, 1, 0.9), 1e-8);
}

TEST(Riccati, ScalarRootOverWeightsAndInputGains)
{
    for (double b : {0.5, 1.0, 2.0})
        for (double r : {0.01, 1.0, 100.0}) {
            const auto sys = fixtures::scalar_system(1.1, b, 1, r, 0.9);
            EXPECT_NEAR(solve_riccati(sys).K(0, 0), oracle::scalar_riccati_root(1.1, b, 1, r, 0.9), 1e-7)
                << "b=" << b << " r=" << r;
        }
}

TEST(Riccati, ZeroCostGivesZeroSolution)
{
    auto sys = reference_market<double>().system.with_Q(MatrixXd::Zero(3, 3));
    const auto sol = solve_riccati(sys);
    EXPECT_TRUE(sol.K.isZero(0));
    EXPECT_TRUE(sol.gain.gain.isZero(0));
}

TEST(Riccati, FixedPointDefectAndGainFormula)
{
    const auto sys = reference_market<double>().system;
    const SolverOptions<double> opts;
    const auto sol = solve_riccati(sys, opts);
    EXPECT_LE(riccati_residual(sys.A(), sys.b(), sys.Q(), sys.r(), sys.gamma(), sol.K), 10 * opts.tolerance * (1 + sol.K.norm()));
    EXPECT_TRUE(sol.K.isApprox(sol.K.transpose(), 0));
    EXPECT_GE(min_eigenvalue(sol.K), -1e-9);
    const double g = sys.gamma();
    const RowVectorXd expected = -g / (g * sys.b().dot(sol.K * sys.b()) + sys.r()) * sys.b().transpose() * sol.K * sys.A();
    EXPECT_TRUE(sol.gain.gain.isApprox(expected, 1e-14));
    EXPECT_TRUE(sol.controllable);
}

TEST(Riccati, ValueIterationIsMonotoneFromQ)
{
    const auto sys = reference_market<double>().system;
    const VectorXd x0 = reference_market_x0<double>();
    std::mt19937_64 rng(7);
    std::normal_distribution<double> normal;
    std::vector<VectorXd> probes{x0};
    for (int k = 0; k < 5; ++k) probes.push_back(VectorXd::NullaryExpr(3, [&] { return normal(rng); }));
    MatrixXd K = sys.Q();
    for (int t = 0; t < 60; ++t) {
        const MatrixXd next = riccati_step(sys.A(), sys.b(), sys.Q(), sys.r(), sys.gamma(), K);
        for (const auto& x : probes) EXPECT_GE(quad_form(next, x), quad_form(K, x) - 1e-9 * quad_form(K, x));
        K = next;
    }
}

TEST(Riccati, ClosedLoopIsStable)
{
    for (double r : {0.01, 1.0, 1000.0}) {
        const auto sys = reference_market<double>(r).system;
        const auto sol = solve_riccati(sys);
        EXPECT_LT(spectral_radius(closed_loop(sys, sol.gain)), 1.0) << "r=" << r;
    }
}

TEST(Riccati, ReportsDivergenceWithLastIterate)
{
    const auto sys = reference_market<double>().system;
    SolverOptions<double> opts;
    opts.max_iterations = 2;
    try {
        solve_riccati(sys, opts);
        FAIL() << "expected DivergenceError";
    } catch (const DivergenceError& e) {
        EXPECT_EQ(e.iterations(), 2);
        EXPECT_EQ(e.last_iterate().rows(), 3);
        EXPECT_GT(e.residual(), 0);
    }
}

TEST(Riccati, LambdaMustBePositive)
{
    const auto sys = reference_market<double>().system;
    EXPECT_THROW(solve_riccati_lambda(sys, 0.0), InvalidParameter);
    // lambda = r reproduces solve_riccati exactly.
    EXPECT_EQ(solve_riccati_lambda(sys, sys.r()).K, solve_riccati(sys).K);
}

TEST(Riccati, LongDoubleAgreesWithDouble)
{
    const auto sys = reference_market<long double>().system;
    const auto sol = solve_riccati(sys);
    const auto ref = solve_riccati(reference_market<double>().system);
    EXPECT_LT(double((sol.K.cast<double>() - ref.K).norm() / ref.K.norm()), 1e-9);
    const Vector<long double> x0 = reference_market_x0<long double>();
    EXPECT_NEAR(double(optimal_cost(sys, sol, x0)), optimal_cost(reference_market<double>().system, ref,
                                                                  reference_market_x0<double>()),
                1e-6);
}

TEST(Lyapunov, HandExamples)
{
    const MatrixXd I = MatrixXd::Identity(2, 2);
    EXPECT_TRUE(solve_discounted_lyapunov<double>(0.5 * I, MatrixXd::Zero(2, 2), 0.8).S.isZero(0));
    MatrixXd C(2, 2);
    C << 2, 1, 1, 3;
    EXPECT_TRUE(solve_discounted_lyapunov<double>(MatrixXd::Zero(2, 2), C, 0.8).S.isApprox(C, 1e-14));
    EXPECT_TRUE(solve_discounted_lyapunov<double>(0.5 * I, I, 0.8).S.isApprox(1.25 * I, 1e-9));
}

TEST(Lyapunov, MatchesKroneckerSolve)
{
    std::mt19937_64 rng(3);
    std::normal_distribution<double> normal;
    for (int trial = 0; trial < 5; ++trial) {
        MatrixXd F = MatrixXd::NullaryExpr(4, 4, [&] { return 0.3 * normal(rng); });
        const MatrixXd R = MatrixXd::NullaryExpr(4, 4, [&] { return normal(rng); });
        const MatrixXd C = R * R.transpose();
        const double gamma = 0.9;
        if (gamma * std::pow(spectral_radius(F), 2) >= 0.95) continue;
        const auto sol = solve_discounted_lyapunov(F, C, gamma);
        const MatrixXd W = oracle::lyapunov_kron(F, C, gamma);
        EXPECT_LT((sol.S - W).norm(), 1e-8 * (1 + W.norm()));
    }
}

TEST(Lyapunov, DivergentSumIsAnInstabilityError)
{
    const MatrixXd F = 1.5 * MatrixXd::Identity(2, 2);
    EXPECT_THROW(solve_discounted_lyapunov<double>(F, MatrixXd::Identity(2, 2), 0.5), InstabilityError);
}

TEST(Lyapunov, UnstableButDiscountedIsAcceptedAndFlagged)
{
    const MatrixXd F = 1.2 * MatrixXd::Identity(1, 1);
    const auto sol = solve_discounted_lyapunov<double>(F, MatrixXd::Identity(1, 1), 0.5);
    EXPECT_TRUE(sol.open_loop_unstable);
    EXPECT_NEAR(sol.S(0, 0), 1 / (1 - 0.5 * 1.44), 1e-8);
}

TEST(StatePenalizing, InitializationIndependent)
{
    const auto sys = reference_market<double>().system;
    const auto sol = solve_riccati(sys);
    const MatrixXd from_zero = solve_state_penalizing(sys, sol.gain).S;
    const MatrixXd from_identity =
        solve_state_penalizing(sys, sol.gain, {}, std::optional<MatrixXd>(MatrixXd::Identity(3, 3))).S;
    EXPECT_LE((from_zero - from_identity).norm(), 1e-8);
}
