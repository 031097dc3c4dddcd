#pragma once

#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Core>

namespace lqrvol
{
/// Base for every error raised by the library.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// A named input parameter failed validation.
class InvalidParameter : public Error
{
public:
    InvalidParameter(std::string parameter, const std::string& what)
        : Error("invalid parameter '" + parameter + "': " + what), parameter_(std::move(parameter))
    {
    }

    const std::string& parameter() const noexcept { return parameter_; }

private:
    std::string parameter_;
};

/// Numerical failure in a solver or simulation.
class NumericalError : public Error
{
public:
    using Error::Error;
};

/// A fixed-point iteration did not converge within its iteration budget.
class DivergenceError : public NumericalError
{
public:
    DivergenceError(const std::string& what, Eigen::MatrixXd last_iterate, double residual, long iterations)
        : NumericalError(what + " (iterations=" + std::to_string(iterations) +
                         ", residual=" + std::to_string(residual) + ")"),
          last_iterate_(std::move(last_iterate)),
          residual_(residual),
          iterations_(iterations)
    {
    }

    const Eigen::MatrixXd& last_iterate() const noexcept { return last_iterate_; }
    double residual() const noexcept { return residual_; }
    long iterations() const noexcept { return iterations_; }

private:
    Eigen::MatrixXd last_iterate_;
    double residual_;
    long iterations_;
};

/// Closed loop too unstable for the discounted sums to converge.
class InstabilityError : public NumericalError
{
public:
    InstabilityError(const std::string& what, double spectral_radius)
        : NumericalError(what + " (spectral radius " + std::to_string(spectral_radius) + ")"),
          spectral_radius_(spectral_radius)
    {
    }

    double spectral_radius() const noexcept { return spectral_radius_; }

private:
    double spectral_radius_;
};

/// The dual function kept increasing through every bracket expansion.
class UnboundedDualError : public NumericalError
{
public:
    using NumericalError::NumericalError;
};

/// The joint gain system of the market game is singular.
class DegenerateMarketError : public NumericalError
{
public:
    using NumericalError::NumericalError;
};

/// Too many Monte Carlo paths produced non-finite states.
class SimulationError : public NumericalError
{
public:
    using NumericalError::NumericalError;
};

}  // namespace lqrvol
