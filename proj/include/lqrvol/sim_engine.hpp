#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "lqrvol/capacity.hpp"
#include "lqrvol/core_model.hpp"
#include "lqrvol/types.hpp"

namespace lqrvol
{
using Rng = std::mt19937_64;

/// Generator for one path, keyed by (seed, stream, path). Streams let
/// callers share noise across experiments (common random numbers) or keep
/// them apart.
Rng path_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t path);

struct SimConfig
{
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    long n_paths = 10000;
    /// Fixed horizon; derived from truncation_eps when empty.
    std::optional<long> horizon;
    double truncation_eps = 1e-6;
    unsigned threads = 1;
    /// Number of leading paths whose trajectories are stored.
    long keep_paths = 0;

    void validate() const;
};

struct Estimate
{
    double mean = 0;
    double std_error = 0;
};

struct PathRecord
{
    long path_id = 0;
    /// Row t holds x_t, t = 0..horizon-1.
    MatrixXd states;
    VectorXd controls;
};

struct SimBatch
{
    Estimate cost;
    Estimate volatility;
    Estimate efficiency;
    long horizon = 0;
    long used_paths = 0;
    long flagged_paths = 0;
    SimConfig config;
    std::vector<PathRecord> paths;
};

/// Smallest T >= 1 with gamma^T * bound / (1 - gamma) <= eps.
long derive_horizon(double gamma, double truncation_eps, double cost_scale_bound);

struct StepCost
{
    double state_cost;
    double control;
};

/// Advances x in place from x_t to x_{t+1} and returns the cost terms at
/// time t. One stepper instance serves one path.
using PathStepper = std::function<StepCost(long t, VectorXd& x, Rng& rng)>;
using StepperFactory = std::function<PathStepper(Rng& rng)>;

struct PathModel
{
    Index dim = 0;
    double gamma = 0;
    /// Weight on u^2 in the reported cost.
    double r = 0;
    StepperFactory make_stepper;
};

/// Runs n_paths independent paths of the model from x0 and accumulates the
/// discounted sums of x'Qx, u^2 and their r-weighted total. Paths that reach
/// non-finite states are dropped and counted; more than 10% dropped is a
/// SimulationError. Results do not depend on the thread count.
SimBatch simulate(const PathModel& model, const VectorXd& x0, const SimConfig& cfg);

/// x_{t+1} = A x_t + b u_t + n_t under u = gain x.
PathModel linear_model(const LqrSystem<double>& sys, const LinearPolicy<double>& policy);

/// Draws one of the two policies per path at t = 0 (the first with
/// probability mu) and follows it.
PathModel mixture_model(const LqrSystem<double>& sys, const MixturePolicy<double>& mixture);

inline SimBatch simulate(const LqrSystem<double>& sys, const LinearPolicy<double>& policy, const VectorXd& x0,
                         const SimConfig& cfg)
{
    if (x0.size() != sys.dim()) throw InvalidParameter("x0", "length must equal the state dimension");
    return simulate(linear_model(sys, policy), x0, cfg);
}

FunctionalReport<double> to_report(const SimBatch& batch, const VectorXd& x0);

}  // namespace lqrvol
