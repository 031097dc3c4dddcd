#pragma once

#include "lqrvol/core_model.hpp"

namespace lqrvol
{
/// The published price-taking test market: beta = 0.995, sigma = 0.9,
/// phi1 = 0.5, phi2 = 0.25, gamma = 0.5, noise diag(2, 2, 0) and a positive
/// definite Q with smallest eigenvalue about 0.5.
template <typename Scalar>
MarketParams<Scalar> reference_market_params()
{
    return {Scalar(0.995), Scalar(0.9), Scalar(0.5), Scalar(0.25)};
}

template <typename Scalar>
Matrix<Scalar> reference_market_Q()
{
    Matrix<Scalar> Q(3, 3);
    Q << Scalar(2.38), Scalar(-1.73), Scalar(-0.15),  //
        Scalar(-1.73), Scalar(2.15), Scalar(0.16),    //
        Scalar(-0.15), Scalar(0.16), Scalar(0.52);
    return Q;
}

template <typename Scalar>
Vector<Scalar> reference_market_x0()
{
    Vector<Scalar> x0(3);
    x0 << 25, 25, 50;
    return x0;
}

template <typename Scalar>
MarketInstance<Scalar> reference_market(Scalar r = Scalar(0.01), Scalar gamma = Scalar(0.5))
{
    Vector<Scalar> psi(3);
    psi << 2, 2, 0;
    return build_price_taking_market(reference_market_params<Scalar>(), NoiseSpec<Scalar>::gaussian_diagonal(psi),
                                     reference_market_Q<Scalar>(), r, gamma);
}

}  // namespace lqrvol
