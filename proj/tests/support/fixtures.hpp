#pragma once

#include <random>

#include "lqrvol/nash_market.hpp"
#include "lqrvol/reference.hpp"

namespace fixtures
{
using namespace lqrvol;

inline LqrSystem<double> scalar_system(double a, double b, double q, double r, double gamma, double psi = 0)
{
    MatrixXd A(1, 1), Q(1, 1), P(1, 1);
    A << a;
    Q << q;
    P << psi;
    VectorXd bv(1);
    bv << b;
    auto noise = psi > 0 ? NoiseSpec<double>::gaussian(P) : NoiseSpec<double>::none(1);
    return LqrSystem<double>::create(A, bv, noise, Q, r, gamma);
}

/// Two-player reference game: one consumer, one producer.
inline MarketSpecPA<double> reference_game(double r = 1.0)
{
    MarketSpecPA<double> spec;
    MatrixXd Ac(3, 3), Ap(2, 2);
    Ac << 0.9, 0, -0.3, 0, 0.8, 0.2, 0, 0, 0;
    Ap << 0.85, 0.3, 0, 0;
    VectorXd qc(3), qp(2);
    qc << 1, 1, 0.1;
    qp << 1, 0.1;
    spec.consumers.push_back({ProsumerKind::consumer, Ac, 0.05 * MatrixXd(qc.asDiagonal())});
    spec.producers.push_back({ProsumerKind::producer, Ap, 0.05 * MatrixXd(qp.asDiagonal())});
    spec.kappa = 0.5;
    spec.r = r;
    spec.gamma = 0.9;
    VectorXd psi(5);
    psi << 1, 1, 0, 1, 0;
    spec.noise_covariance = psi.asDiagonal();
    return spec;
}

inline VectorXd reference_game_x0()
{
    VectorXd x0(5);
    x0 << 10, 10, 5, 10, 5;
    return x0;
}

/// Random gain near `center` that keeps gamma * rho(A + b g)^2 < 1.
inline RowVectorXd stabilizing_perturbation(const LqrSystem<double>& sys, const RowVectorXd& center, double scale,
                                            std::mt19937_64& rng)
{
    std::normal_distribution<double> normal;
    for (;;) {
        RowVectorXd g = center;
        for (Index j = 0; j < g.size(); ++j) g(j) += scale * normal(rng);
        const double rho = spectral_radius(MatrixXd(sys.A() + sys.b() * g));
        if (sys.gamma() * rho * rho < 0.99) return g;
    }
}

}  // namespace fixtures
