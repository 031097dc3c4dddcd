#include "lqrvol/sim_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "lqrvol/linalg.hpp"
#include "lqrvol/parallel.hpp"

namespace lqrvol
{
namespace
{
std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t pilot_path = std::numeric_limits<std::uint64_t>::max();
constexpr long pilot_steps = 100;

struct PathTotals
{
    double cost = 0;
    double volatility = 0;
    double state = 0;
    bool finite = true;
};

PathTotals run_path(const PathModel& model, const VectorXd& x0, long horizon, Rng& rng, PathRecord* record)
{
    PathStepper step = model.make_stepper(rng);
    VectorXd x = x0;
    PathTotals out;
    double discount = 1;
    if (record) {
        record->states.resize(horizon, x0.size());
        record->controls.resize(horizon);
    }
    for (long t = 0; t < horizon; ++t) {
        if (record) record->states.row(t) = x.transpose();
        const StepCost c = step(t, x, rng);
        if (record) record->controls(t) = c.control;
        const double u2 = c.control * c.control;
        out.state += discount * c.state_cost;
        out.volatility += discount * u2;
        discount *= model.gamma;
        if (!std::isfinite(c.state_cost) || !std::isfinite(c.control) || !x.allFinite()) {
            out.finite = false;
            return out;
        }
    }
    out.cost = out.state + model.r * out.volatility;
    return out;
}

Estimate estimate(const std::vector<double>& values)
{
    Estimate e;
    const double n = double(values.size());
    if (values.empty()) return e;
    for (double v : values) e.mean += v;
    e.mean /= n;
    if (values.size() > 1) {
        double ss = 0;
        for (double v : values) ss += (v - e.mean) * (v - e.mean);
        e.std_error = std::sqrt(ss / (n - 1)) / std::sqrt(n);
    }
    return e;
}

long auto_horizon(const PathModel& model, const VectorXd& x0, const SimConfig& cfg)
{
    Rng rng = path_rng(cfg.seed, cfg.stream, pilot_path);
    PathStepper step = model.make_stepper(rng);
    VectorXd x = x0;
    double worst = 0;
    for (long t = 0; t < pilot_steps; ++t) {
        const StepCost c = step(t, x, rng);
        const double u2 = c.control * c.control;
        const double per_step = std::max(c.state_cost + model.r * u2, u2);
        if (!std::isfinite(per_step) || !x.allFinite())
            throw SimulationError("pilot path diverged; cannot derive a horizon");
        worst = std::max(worst, per_step);
    }
    return derive_horizon(model.gamma, cfg.truncation_eps, 10 * worst);
}

}  // namespace

Rng path_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t path)
{
    const std::uint64_t key = splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ path);
    return Rng(key);
}

void SimConfig::validate() const
{
    if (n_paths < 1) throw InvalidParameter("n_paths", "must be positive");
    if (horizon && *horizon < 1) throw InvalidParameter("horizon", "must be positive");
    if (!(truncation_eps > 0)) throw InvalidParameter("truncation_eps", "must be positive");
    if (keep_paths < 0) throw InvalidParameter("keep_paths", "must be nonnegative");
}

long derive_horizon(double gamma, double truncation_eps, double cost_scale_bound)
{
    if (!(gamma > 0 && gamma < 1)) throw InvalidParameter("gamma", "must lie in (0, 1)");
    if (!(truncation_eps > 0)) throw InvalidParameter("truncation_eps", "must be positive");
    if (!(cost_scale_bound >= 0) || !std::isfinite(cost_scale_bound))
        throw InvalidParameter("cost_scale_bound", "must be a nonnegative real");
    if (cost_scale_bound == 0) return 1;
    const double tail = cost_scale_bound / (1 - gamma);
    long T = 1;
    double g = gamma;
    while (g * tail > truncation_eps) {
        g *= gamma;
        ++T;
    }
    return T;
}

SimBatch simulate(const PathModel& model, const VectorXd& x0, const SimConfig& cfg)
{
    cfg.validate();
    if (x0.size() != model.dim) throw InvalidParameter("x0", "length must equal the state dimension");
    if (!x0.allFinite()) throw InvalidParameter("x0", "has non-finite entries");

    SimBatch batch;
    batch.config = cfg;
    batch.horizon = cfg.horizon ? *cfg.horizon : auto_horizon(model, x0, cfg);

    const std::size_t n = std::size_t(cfg.n_paths);
    const std::size_t kept = std::size_t(std::min(cfg.keep_paths, cfg.n_paths));
    std::vector<PathTotals> totals(n);
    std::vector<PathRecord> records(kept);
    parallel_for(Index(n), cfg.threads, [&](Index i) {
        Rng rng = path_rng(cfg.seed, cfg.stream, std::uint64_t(i));
        PathRecord* rec = std::size_t(i) < kept ? &records[std::size_t(i)] : nullptr;
        if (rec) rec->path_id = long(i);
        totals[std::size_t(i)] = run_path(model, x0, batch.horizon, rng, rec);
    });

    std::vector<double> cost, vol, eff;
    cost.reserve(n);
    vol.reserve(n);
    eff.reserve(n);
    for (const auto& p : totals) {
        if (!p.finite) {
            ++batch.flagged_paths;
            continue;
        }
        cost.push_back(p.cost);
        vol.push_back(p.volatility);
        eff.push_back(-p.state);
    }
    if (double(batch.flagged_paths) > 0.1 * double(n))
        throw SimulationError(std::to_string(batch.flagged_paths) + " of " + std::to_string(n) +
                              " paths reached non-finite states");
    batch.used_paths = long(cost.size());
    batch.cost = estimate(cost);
    batch.volatility = estimate(vol);
    batch.efficiency = estimate(eff);
    batch.paths = std::move(records);
    return batch;
}

namespace
{
struct LinearParts
{
    MatrixXd A;
    VectorXd b;
    MatrixXd Q;
    MatrixXd noise_factor;
};

std::shared_ptr<const LinearParts> linear_parts(const LqrSystem<double>& sys)
{
    return std::make_shared<const LinearParts>(LinearParts{sys.A(), sys.b(), sys.Q(), psd_sqrt(sys.noise().covariance())});
}

PathStepper linear_stepper(std::shared_ptr<const LinearParts> parts, RowVectorXd gain)
{
    const Index d = gain.size();
    return [parts = std::move(parts), gain = std::move(gain), z = VectorXd(d)](long, VectorXd& x, Rng& rng) mutable {
        std::normal_distribution<double> normal;
        const double u = gain.dot(x.transpose());
        const double state_cost = x.dot(parts->Q * x);
        for (Index k = 0; k < z.size(); ++k) z(k) = normal(rng);
        x = parts->A * x + parts->b * u + parts->noise_factor * z;
        return StepCost{state_cost, u};
    };
}

}  // namespace

PathModel linear_model(const LqrSystem<double>& sys, const LinearPolicy<double>& policy)
{
    if (policy.dim() != sys.dim()) throw InvalidParameter("policy", "gain length must equal the state dimension");
    PathModel model;
    model.dim = sys.dim();
    model.gamma = sys.gamma();
    model.r = sys.r();
    model.make_stepper = [parts = linear_parts(sys), gain = policy.gain](Rng&) { return linear_stepper(parts, gain); };
    return model;
}

PathModel mixture_model(const LqrSystem<double>& sys, const MixturePolicy<double>& mixture)
{
    for (const auto& p : mixture.policies)
        if (p.dim() != sys.dim()) throw InvalidParameter("policy", "gain length must equal the state dimension");
    if (!(mixture.mu >= 0 && mixture.mu <= 1)) throw InvalidParameter("mu", "must lie in [0, 1]");
    PathModel model;
    model.dim = sys.dim();
    model.gamma = sys.gamma();
    model.r = sys.r();
    model.make_stepper = [parts = linear_parts(sys), mixture](Rng& rng) {
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        const bool first = unit(rng) < mixture.mu;
        return linear_stepper(parts, mixture.policies[first ? 0 : 1].gain);
    };
    return model;
}

FunctionalReport<double> to_report(const SimBatch& batch, const VectorXd& x0)
{
    FunctionalReport<double> rep;
    rep.cost = batch.cost.mean;
    rep.volatility = batch.volatility.mean;
    rep.efficiency = batch.efficiency.mean;
    rep.x0 = x0;
    rep.method = EvaluationMethod::monte_carlo;
    rep.std_errors = std::array<double, 3>{batch.cost.std_error, batch.volatility.std_error, batch.efficiency.std_error};
    return rep;
}

}  // namespace lqrvol
