#pragma once

#include <Eigen/Core>

namespace lqrvol
{
using Index = Eigen::Index;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

using MatrixXd = Matrix<double>;
using VectorXd = Vector<double>;
using RowVectorXd = RowVector<double>;

/// Discounted infinite-horizon tail factor gamma / (1 - gamma).
template <typename Scalar>
constexpr Scalar noise_weight(Scalar gamma)
{
    return gamma / (Scalar(1) - gamma);
}

}  // namespace lqrvol
