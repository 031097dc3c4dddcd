#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "lqrvol/errors.hpp"
#include "lqrvol/types.hpp"

namespace lqrvol
{
template <typename Derived>
auto symmetrize(const Eigen::MatrixBase<Derived>& m)
{
    using Scalar = typename Derived::Scalar;
    return Matrix<Scalar>((m + m.transpose()) * Scalar(0.5));
}

template <typename Derived>
typename Derived::Scalar spectral_radius(const Eigen::MatrixBase<Derived>& m)
{
    using Scalar = typename Derived::Scalar;
    if (m.size() == 0) return Scalar(0);
    Eigen::EigenSolver<Matrix<Scalar>> solver(m.eval(), false);
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

template <typename Derived>
typename Derived::Scalar min_eigenvalue(const Eigen::MatrixBase<Derived>& symmetric)
{
    using Scalar = typename Derived::Scalar;
    if (symmetric.size() == 0) return Scalar(0);
    Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> solver(symmetrize(symmetric), Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

/// Numerical rank: singular values above rows * sigma_max * 1e-12 count.
template <typename Derived>
Index numeric_rank(const Eigen::MatrixBase<Derived>& m)
{
    using Scalar = typename Derived::Scalar;
    if (m.size() == 0) return 0;
    Eigen::JacobiSVD<Matrix<Scalar>> svd(m.eval());
    const auto& sv = svd.singularValues();
    const Scalar sigma_max = sv.maxCoeff();
    if (!(sigma_max > Scalar(0))) return 0;
    const Scalar threshold = Scalar(m.rows()) * sigma_max * Scalar(1e-12);
    return (sv.array() > threshold).count();
}

/// Symmetrizes and checks positive semidefiniteness. Eigenvalues down to
/// -1e-10 are accepted and clipped to zero; anything below is rejected.
template <typename Scalar>
Matrix<Scalar> validated_spsd(const Matrix<Scalar>& m, const std::string& name)
{
    if (m.rows() != m.cols()) throw InvalidParameter(name, "matrix must be square");
    if (!m.allFinite()) throw InvalidParameter(name, "matrix has non-finite entries");
    const Scalar scale = Scalar(1) + m.cwiseAbs().maxCoeff();
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > Scalar(1e-8) * scale)
        throw InvalidParameter(name, "matrix must be symmetric");
    Matrix<Scalar> sym = symmetrize(m);
    if (sym.size() == 0) return sym;

    Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> solver(sym);
    const auto& eig = solver.eigenvalues();
    if (eig.minCoeff() < Scalar(-1e-10))
        throw InvalidParameter(name, "matrix is not positive semidefinite (min eigenvalue " +
                                         std::to_string(double(eig.minCoeff())) + ")");
    if (eig.minCoeff() < Scalar(0)) {
        const Matrix<Scalar>& v = solver.eigenvectors();
        sym = v * eig.cwiseMax(Scalar(0)).asDiagonal() * v.transpose();
        sym = symmetrize(sym);
    }
    return sym;
}

/// Symmetric PSD square root; eigenvalues are clipped at zero.
template <typename Scalar>
Matrix<Scalar> psd_sqrt(const Matrix<Scalar>& m)
{
    if (m.size() == 0) return m;
    Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> solver(symmetrize(m));
    const Vector<Scalar> root = solver.eigenvalues().cwiseMax(Scalar(0)).cwiseSqrt();
    return solver.eigenvectors() * root.asDiagonal() * solver.eigenvectors().transpose();
}

template <typename Scalar>
Scalar quad_form(const Matrix<Scalar>& m, const Vector<Scalar>& x)
{
    return x.dot(m * x);
}

/// Discrete chord defect of f over an increasing (possibly non-uniform) grid:
/// 2 * (interpolated chord - f_i). Concave data gives values <= 0; on a
/// uniform grid this equals the ordinary second difference.
template <typename Scalar>
Scalar chord_defect(Scalar x0, Scalar f0, Scalar x1, Scalar f1, Scalar x2, Scalar f2)
{
    const Scalar w = (x2 - x1) / (x2 - x0);
    return Scalar(2) * (w * f0 + (Scalar(1) - w) * f2 - f1);
}

}  // namespace lqrvol
