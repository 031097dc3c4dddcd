#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lqrvol/errors.hpp"
#include "lqrvol/linalg.hpp"
#include "lqrvol/types.hpp"

namespace lqrvol
{
enum class NoiseFamily { gaussian, none };

/// Zero-mean IID state disturbance, described by its covariance.
template <typename Scalar>
class NoiseSpec
{
public:
    static NoiseSpec none(Index dim) { return NoiseSpec(Matrix<Scalar>::Zero(dim, dim), NoiseFamily::none); }

    static NoiseSpec gaussian(const Matrix<Scalar>& covariance)
    {
        return NoiseSpec(validated_spsd(covariance, "noise.covariance"), NoiseFamily::gaussian);
    }

    static NoiseSpec gaussian_diagonal(const Vector<Scalar>& variances)
    {
        return gaussian(Matrix<Scalar>(variances.asDiagonal()));
    }

    const Matrix<Scalar>& covariance() const noexcept { return covariance_; }
    NoiseFamily family() const noexcept { return family_; }
    Index dim() const noexcept { return covariance_.rows(); }
    bool is_zero() const { return family_ == NoiseFamily::none || covariance_.isZero(0); }

    template <typename Other>
    NoiseSpec<Other> cast() const
    {
        NoiseSpec<Other> out = NoiseSpec<Other>::none(dim());
        if (family_ == NoiseFamily::gaussian) out = NoiseSpec<Other>::gaussian(covariance_.template cast<Other>());
        return out;
    }

private:
    NoiseSpec(Matrix<Scalar> covariance, NoiseFamily family) : covariance_(std::move(covariance)), family_(family) {}

    Matrix<Scalar> covariance_;
    NoiseFamily family_;
};

/// Linear state feedback u = gain * x.
template <typename Scalar>
struct LinearPolicy
{
    RowVector<Scalar> gain;

    Index dim() const noexcept { return gain.size(); }
    Scalar operator()(const Vector<Scalar>& x) const { return gain.dot(x.transpose()); }

    static LinearPolicy zero(Index dim) { return {RowVector<Scalar>::Zero(dim)}; }
};

/// The regulator (A, b, noise, Q, r, gamma). Immutable once built; every
/// constructor path validates dimensions and parameter ranges.
template <typename Scalar>
class LqrSystem
{
public:
    static LqrSystem create(Matrix<Scalar> A, Vector<Scalar> b, NoiseSpec<Scalar> noise, const Matrix<Scalar>& Q,
                            Scalar r, Scalar gamma)
    {
        const Index d = A.rows();
        if (d <= 0) throw InvalidParameter("A", "state dimension must be positive");
        if (A.cols() != d) throw InvalidParameter("A", "matrix must be square");
        if (!A.allFinite()) throw InvalidParameter("A", "matrix has non-finite entries");
        if (b.size() != d) throw InvalidParameter("b", "length must equal the state dimension");
        if (!b.allFinite()) throw InvalidParameter("b", "vector has non-finite entries");
        if (noise.dim() != d) throw InvalidParameter("noise", "covariance dimension must equal the state dimension");
        if (Q.rows() != d || Q.cols() != d) throw InvalidParameter("Q", "must be d x d");
        Matrix<Scalar> q = validated_spsd(Q, "Q");
        if (!(r > Scalar(0)) || !std::isfinite(double(r))) throw InvalidParameter("r", "must be a positive real");
        if (!(gamma > Scalar(0) && gamma < Scalar(1))) throw InvalidParameter("gamma", "must lie in (0, 1)");
        return LqrSystem(std::move(A), std::move(b), std::move(noise), std::move(q), r, gamma);
    }

    const Matrix<Scalar>& A() const noexcept { return A_; }
    const Vector<Scalar>& b() const noexcept { return b_; }
    const NoiseSpec<Scalar>& noise() const noexcept { return noise_; }
    const Matrix<Scalar>& Q() const noexcept { return Q_; }
    Scalar r() const noexcept { return r_; }
    Scalar gamma() const noexcept { return gamma_; }
    Index dim() const noexcept { return A_.rows(); }

    LqrSystem with_r(Scalar r) const { return create(A_, b_, noise_, Q_, r, gamma_); }
    LqrSystem with_gamma(Scalar gamma) const { return create(A_, b_, noise_, Q_, r_, gamma); }
    LqrSystem with_Q(const Matrix<Scalar>& Q) const { return create(A_, b_, noise_, Q, r_, gamma_); }
    LqrSystem with_noise(NoiseSpec<Scalar> noise) const { return create(A_, b_, std::move(noise), Q_, r_, gamma_); }

    template <typename Other>
    LqrSystem<Other> cast() const
    {
        return LqrSystem<Other>::create(A_.template cast<Other>(), b_.template cast<Other>(),
                                        noise_.template cast<Other>(), Q_.template cast<Other>(), Other(r_),
                                        Other(gamma_));
    }

private:
    LqrSystem(Matrix<Scalar> A, Vector<Scalar> b, NoiseSpec<Scalar> noise, Matrix<Scalar> Q, Scalar r, Scalar gamma)
        : A_(std::move(A)), b_(std::move(b)), noise_(std::move(noise)), Q_(std::move(Q)), r_(r), gamma_(gamma)
    {
    }

    Matrix<Scalar> A_;
    Vector<Scalar> b_;
    NoiseSpec<Scalar> noise_;
    Matrix<Scalar> Q_;
    Scalar r_;
    Scalar gamma_;
};

/// Coefficients of the price-taking market: demand decay beta, supply decay
/// sigma, demand price sensitivity phi1, supply price sensitivity phi2.
template <typename Scalar>
struct MarketParams
{
    Scalar beta{};
    Scalar sigma{};
    Scalar phi1{};
    Scalar phi2{};

    bool operator==(const MarketParams&) const = default;
};

template <typename Scalar>
struct MarketInstance
{
    LqrSystem<Scalar> system;
    std::vector<std::string> labels;
    std::optional<MarketParams<Scalar>> params;
};

/// A = [[beta, 0, -phi1], [0, sigma, phi2], [0, 0, 1]].
template <typename Scalar>
Matrix<Scalar> price_taking_dynamics(const MarketParams<Scalar>& p)
{
    Matrix<Scalar> A(3, 3);
    A << p.beta, 0, -p.phi1,  //
        0, p.sigma, p.phi2,   //
        0, 0, 1;
    return A;
}

/// Reads (beta, sigma, phi1, phi2) back out of a price-taking dynamics matrix.
template <typename Scalar>
MarketParams<Scalar> market_params_from(const Matrix<Scalar>& A)
{
    if (A.rows() < 3 || A.cols() < 3) throw InvalidParameter("A", "not a price-taking market matrix");
    return {A(0, 0), A(1, 1), -A(0, 2), A(1, 2)};
}

template <typename Scalar>
MarketInstance<Scalar> build_price_taking_market(const MarketParams<Scalar>& params, NoiseSpec<Scalar> noise,
                                                 const Matrix<Scalar>& Q, Scalar r, Scalar gamma)
{
    const std::array<std::pair<const char*, Scalar>, 4> coefficients{
        {{"beta", params.beta}, {"sigma", params.sigma}, {"phi1", params.phi1}, {"phi2", params.phi2}}};
    for (const auto& [name, value] : coefficients)
        if (!(value >= Scalar(0)) || !std::isfinite(double(value)))
            throw InvalidParameter(name, "must be a nonnegative real");

    Vector<Scalar> b(3);
    b << 0, 0, 1;
    auto system = LqrSystem<Scalar>::create(price_taking_dynamics(params), std::move(b), std::move(noise), Q, r, gamma);
    return {std::move(system), {"demand", "supply", "price"}, params};
}

/// Columns [b, Ab, ..., A^(d-1) b].
template <typename Scalar>
Matrix<Scalar> controllability_matrix(const Matrix<Scalar>& A, const Vector<Scalar>& b)
{
    const Index d = A.rows();
    Matrix<Scalar> c(d, d);
    Vector<Scalar> column = b;
    for (Index k = 0; k < d; ++k) {
        c.col(k) = column;
        column = A * column;
    }
    return c;
}

struct ControllabilityReport
{
    Index rank;
    bool controllable;
};

template <typename Scalar>
ControllabilityReport check_controllability(const Matrix<Scalar>& A, const Vector<Scalar>& b)
{
    const Index rank = numeric_rank(controllability_matrix(A, b));
    return {rank, rank == A.rows()};
}

template <typename Scalar>
ControllabilityReport check_controllability(const LqrSystem<Scalar>& sys)
{
    return check_controllability(sys.A(), sys.b());
}

template <typename Scalar>
struct ObservabilityReport
{
    bool observable;
    Scalar min_eigenvalue_Q;
};

/// Positive definite Q is taken as observable outright. Otherwise the pair
/// (A, C) is tested with C = sqrt(Lambda) M built from Q = M^T Lambda M.
template <typename Scalar>
ObservabilityReport<Scalar> check_observability(const Matrix<Scalar>& A, const Matrix<Scalar>& Q)
{
    const Index d = A.rows();
    Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> solver(symmetrize(Q));
    const Vector<Scalar>& eig = solver.eigenvalues();
    const Scalar lambda_min = eig.minCoeff();
    const Scalar threshold = Scalar(1e-10) * std::max(Scalar(1), eig.cwiseAbs().maxCoeff());
    if (lambda_min > threshold) return {true, lambda_min};

    const Matrix<Scalar> C = eig.cwiseMax(Scalar(0)).cwiseSqrt().asDiagonal() * solver.eigenvectors().transpose();
    Matrix<Scalar> obs(d * C.rows(), d);
    Matrix<Scalar> block = C;
    for (Index k = 0; k < d; ++k) {
        obs.middleRows(k * C.rows(), C.rows()) = block;
        block = block * A;
    }
    return {numeric_rank(obs) == d, lambda_min};
}

template <typename Scalar>
ObservabilityReport<Scalar> check_observability(const LqrSystem<Scalar>& sys)
{
    return check_observability(sys.A(), sys.Q());
}

}  // namespace lqrvol
