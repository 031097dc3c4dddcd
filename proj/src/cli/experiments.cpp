#include "experiments.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

#include "lqrvol/capacity.hpp"
#include "lqrvol/functionals.hpp"
#include "lqrvol/grids.hpp"
#include "lqrvol/nash_market.hpp"
#include "lqrvol/renewables.hpp"
#include "lqrvol/sim_engine.hpp"

namespace lqrvol::cli
{
using nlohmann::json;

namespace
{
const std::vector<std::string> capacity_columns{"alpha",          "lambda_star",         "L_star",
                                                "efficiency_star", "achieved_volatility", "constraint_active",
                                                "normalized_efficiency"};

std::vector<std::string> with_prefix(std::string first, const std::vector<std::string>& rest)
{
    std::vector<std::string> out{std::move(first)};
    out.insert(out.end(), rest.begin(), rest.end());
    return out;
}

}  // namespace

const std::vector<ExperimentInfo>& experiment_registry()
{
    static const std::vector<ExperimentInfo> registry{
        {"riccati", "none (single solve)",
         "Solve the discounted Riccati equation and evaluate the optimal policy",
         {"market|system"},
         {{"", {"quantity", "i", "j", "value"}}}},
        {"concavity_scan", "Fig. 2",
         "Optimal or state-penalizing cost over a grid of control weights r",
         {"market|system", "params.functional"},
         {{"", {"r", "value", "d1", "d2"}}}},
        {"qalpha_profile", "Fig. 3",
         "Dual function q_alpha over a grid of multipliers, with the golden-section optimum",
         {"market|system", "params.alpha"},
         {{"", {"lambda", "q", "d1", "d2"}}}},
        {"capacity_sweep", "Fig. 4",
         "Pareto boundary of the volatility/efficiency capacity region for one or more discount factors",
         {"market|system", "params.gammas"},
         {{"", with_prefix("gamma", capacity_columns)}}},
        {"nash", "Fig. 5",
         "Price-anticipating market: equilibrium certificate, social cost over r, equilibrium price paths",
         {"nash_market", "x0"},
         {{"", {"r", "J_N", "d1", "d2", "spectral_radius", "max_residual", "best_response_error", "iterations"}},
          {"_prices", {"r", "path_id", "t", "alpha_t"}}}},
        {"renewables_sweep", "Fig. 7",
         "Volatility needed to hold efficiency as renewable variance grows, and capacity-region shrinkage",
         {"market", "params.psi_grid"},
         {{"", {"psi_r", "volatility", "trace_term", "trace_slope", "lambda", "state_cost"}},
          {"_capacity", with_prefix("psi_r", capacity_columns)}}},
        {"der_cliff", "Fig. 8",
         "Monte Carlo price volatility of the nonlinear distributed-renewables market against renewable fraction",
         {"params.delta_grid", "sim"},
         {{"", {"delta", "psi_w", "psi_s", "volatility", "std_error", "n_paths_excluded"}}}},
        {"simulate", "none (sample-path comparison)",
         "Closed-form functionals against Monte Carlo estimates of the optimal policy for several r",
         {"market|system", "params.r_values", "sim"},
         {{"", {"r", "functional", "closed_form", "mc_mean", "mc_std_error", "z_score", "horizon", "n_paths"}},
          {"_paths", {"r", "path_id", "t", "state", "value"}}}},
    };
    return registry;
}

namespace
{
const OutputSchema& schema(const std::string& experiment, const std::string& suffix)
{
    for (const auto& info : experiment_registry())
        if (info.name == experiment)
            for (const auto& o : info.outputs)
                if (o.suffix == suffix) return o;
    throw std::logic_error("no schema for " + experiment + suffix);
}

CsvTable table_for(const std::string& experiment, const std::string& suffix = "")
{
    return CsvTable(schema(experiment, suffix).columns);
}

json shape_json(const CurveShape& s)
{
    return {{"scale", s.scale},
            {"min_d1", s.min_d1},
            {"max_d2", s.max_d2},
            {"max_d2_relative", s.scale > 0 ? s.max_d2 / s.scale : 0.0},
            {"increasing", s.increasing},
            {"concave", s.concave}};
}

json vector_json(const VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Section params_of(const Section& root)
{
    if (root.has("params")) return root.child("params");
    return Section(YAML::Node(YAML::NodeType::Map), "params", std::make_shared<const std::string>(""));
}

std::vector<double> grid_or(const Section& params, const std::string& key, std::vector<double> fallback)
{
    return params.has(key) ? params.grid(key) : std::move(fallback);
}

void add_difference_rows(CsvTable& table, const std::vector<DifferenceRow>& rows)
{
    for (const auto& r : rows) table.add_row({r.x, r.value, r.d1, r.d2});
}

void add_capacity_rows(CsvTable& table, double lead, const CapacityRegion<double>& region, double reference_peak)
{
    const auto norm = normalized_efficiency(region, reference_peak);
    for (std::size_t i = 0; i < region.points.size(); ++i) {
        const auto& p = region.points[i];
        table.add_row({lead, p.alpha, p.lambda_star, p.L_star, p.efficiency_star, p.achieved_volatility,
                       (long long)(p.constraint_active), norm[i]});
    }
}

json region_json(const CapacityRegion<double>& region)
{
    double slack = 0;
    for (const auto& p : region.points)
        if (p.constraint_active) slack = std::max(slack, std::abs(p.achieved_volatility - p.alpha) / p.alpha);
    json failures = json::array();
    for (const auto& f : region.failures) failures.push_back({{"alpha", f.alpha}, {"error", f.message}});
    return {{"points", region.points.size()},
            {"boundary", shape_json(region.boundary)},
            {"lambda_nonincreasing", region.lambda_nonincreasing},
            {"max_relative_slackness", slack},
            {"failures", failures}};
}

// --- experiments ----------------------------------------------------------

ExperimentResult riccati(const Scenario& sc)
{
    const Section root = sc.section();
    const auto market = parse_system(root);
    const auto& sys = market.system;
    const VectorXd x0 = parse_x0(root, sys.dim());
    const auto sol = solve_riccati(sys);
    const auto rep = evaluate_policy(sys, sol.gain, x0);
    const auto ctrl = check_controllability(sys);
    const auto obs = check_observability(sys);
    const double rho = spectral_radius(closed_loop(sys, sol.gain));

    CsvTable t = table_for("riccati");
    const CsvCell blank = std::string();
    for (Index i = 0; i < sys.dim(); ++i)
        for (Index j = 0; j < sys.dim(); ++j) t.add_row({std::string("K"), (long long)i, (long long)j, sol.K(i, j)});
    for (Index j = 0; j < sys.dim(); ++j) t.add_row({std::string("gain"), blank, (long long)j, sol.gain.gain(j)});
    const double opt = optimal_cost(sys, sol, x0);
    for (auto [name, value] : std::initializer_list<std::pair<const char*, double>>{
             {"optimal_cost", opt},
             {"cost", rep.cost},
             {"volatility", rep.volatility},
             {"efficiency", rep.efficiency},
             {"closed_loop_spectral_radius", rho},
             {"residual", sol.residual},
             {"iterations", double(sol.iterations)}})
        t.add_row({std::string(name), blank, blank, value});

    json summary{{"iterations", sol.iterations},
                 {"residual", sol.residual},
                 {"controllable", ctrl.controllable},
                 {"controllability_rank", ctrl.rank},
                 {"observable", obs.observable},
                 {"closed_loop_spectral_radius", rho},
                 {"optimal_cost", opt},
                 {"cost_minus_optimal", rep.cost - opt}};
    return {{{"", std::move(t)}}, summary};
}

ExperimentResult concavity(const Scenario& sc)
{
    const Section root = sc.section();
    const Section params = params_of(root);
    const auto market = parse_system(root);
    const VectorXd x0 = parse_x0(root, market.system.dim());
    const std::string name = params.text_or("functional", "optimal_cost");
    ScanFunctional which;
    if (name == "optimal_cost")
        which = ScanFunctional::optimal_cost;
    else if (name == "state_penalizing")
        which = ScanFunctional::state_penalizing;
    else
        params.fail("functional", "expected optimal_cost or state_penalizing");
    const auto r_grid = grid_or(params, "r_grid", logspace(-2, 3, 25));
    const auto rows = concavity_scan(market.system, r_grid, which, x0, sc.threads);
    CsvTable t = table_for("concavity_scan");
    add_difference_rows(t, rows);
    return {{{"", std::move(t)}}, {{"functional", name}, {"shape", shape_json(curve_shape(rows))}}};
}

ExperimentResult qalpha(const Scenario& sc)
{
    const Section root = sc.section();
    const Section params = params_of(root);
    const auto market = parse_system(root);
    const auto& sys = market.system;
    const VectorXd x0 = parse_x0(root, sys.dim());
    const double alpha = params.number_or("alpha", 27);
    if (!(alpha > 0)) params.fail("alpha", "must be positive");
    const auto grid = grid_or(params, "lambda_grid", logspace(-3, 2, 50));
    require_increasing(grid, "lambda_grid", 3, true);

    std::vector<double> q(grid.size());
    parallel_for(Index(grid.size()), sc.threads,
                 [&](Index i) { q[std::size_t(i)] = q_alpha(sys, alpha, grid[std::size_t(i)], x0); });
    const auto rows = difference_table(grid, q);
    CsvTable t = table_for("qalpha_profile");
    add_difference_rows(t, rows);

    const auto best = std::max_element(q.begin(), q.end());
    // Rises then falls, never rises again.
    bool single_peaked = true, falling = false;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].d1 <= 0)
            falling = true;
        else if (falling)
            single_peaked = false;
    }
    const auto point = solve_constrained(sys, alpha, x0);
    return {{{"", std::move(t)}},
            {{"alpha", alpha},
             {"shape", shape_json(curve_shape(rows))},
             {"single_peaked", single_peaked},
             {"grid_argmax", grid[std::size_t(best - q.begin())]},
             {"grid_max", *best},
             {"lambda_star", point.lambda_star},
             {"L_star", point.L_star},
             {"achieved_volatility", point.achieved_volatility},
             {"constraint_active", point.constraint_active}}};
}

ExperimentResult capacity(const Scenario& sc)
{
    const Section root = sc.section();
    const Section params = params_of(root);
    const auto market = parse_system(root);
    const VectorXd x0 = parse_x0(root, market.system.dim());
    std::vector<double> gammas;
    if (params.has("gammas")) {
        const VectorXd g = params.vector("gammas");
        gammas.assign(g.data(), g.data() + g.size());
    } else {
        gammas = {market.system.gamma()};
    }
    if (gammas.empty()) params.fail("gammas", "needs at least one discount factor");
    std::vector<LqrSystem<double>> systems;
    for (double g : gammas) {
        try {
            systems.push_back(market.system.with_gamma(g));
        } catch (const InvalidParameter& e) {
            params.fail("gammas", e.what());
        }
    }
    const auto alpha_grid = params.has("alpha_grid")
                                ? params.grid("alpha_grid")
                                : default_alpha_grid(systems.front(), x0, int(params.integer_or("alpha_points", 40)));

    std::vector<CapacityRegion<double>> regions;
    for (const auto& s : systems) regions.push_back(sweep_capacity_region(s, alpha_grid, x0, sc.threads));

    std::size_t ref = 0;
    if (params.has("normalize_to")) {
        const double g = params.number("normalize_to");
        const auto it = std::find(gammas.begin(), gammas.end(), g);
        if (it == gammas.end()) params.fail("normalize_to", "must be one of the listed gammas");
        ref = std::size_t(it - gammas.begin());
    }
    const double peak = peak_efficiency(regions[ref]);

    CsvTable t = table_for("capacity_sweep");
    json per_gamma = json::array();
    for (std::size_t k = 0; k < regions.size(); ++k) {
        add_capacity_rows(t, gammas[k], regions[k], peak);
        json j = region_json(regions[k]);
        j["gamma"] = gammas[k];
        per_gamma.push_back(j);
    }
    // Pointwise ordering of the boundaries, smaller gamma first.
    std::vector<std::size_t> order(gammas.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return gammas[a] < gammas[b]; });
    bool dominates = true;
    for (std::size_t k = 1; k < order.size(); ++k) {
        const auto& hi = regions[order[k - 1]].points;
        const auto& lo = regions[order[k]].points;
        for (const auto& a : hi)
            for (const auto& b : lo)
                if (a.alpha == b.alpha && b.efficiency_star > a.efficiency_star + 1e-8 * std::abs(a.efficiency_star))
                    dominates = false;
    }
    return {{{"", std::move(t)}},
            {{"regions", per_gamma}, {"smaller_gamma_dominates", dominates}, {"normalized_to_gamma", gammas[ref]}}};
}

ExperimentResult nash(const Scenario& sc)
{
    const Section root = sc.section();
    const Section params = params_of(root);
    const auto spec = parse_nash_market(root);
    const VectorXd x0 = root.vector("x0");
    if (x0.size() != spec.market_dim()) root.fail("x0", "must have " + std::to_string(spec.market_dim()) + " entries");
    const auto r_grid = grid_or(params, "r_grid", logspace(-1, 2, 15));
    require_increasing(r_grid, "r_grid", 3, true);

    struct Solved
    {
        double J;
        NashEquilibrium<double> eq;
        double br_error;
    };
    std::vector<std::optional<Solved>> solved(r_grid.size());
    parallel_for(Index(r_grid.size()), sc.threads, [&](Index i) {
        const auto agg = assemble_aggregate(spec.with_r(r_grid[std::size_t(i)]));
        auto eq = solve_nash(agg);
        double br = 0;
        for (int p = 0; p < agg.players(); ++p)
            br = std::max(br, (best_response(agg, eq.p, p) - eq.p[std::size_t(p)]).cwiseAbs().maxCoeff());
        const double J = nash_social_cost(agg, eq, x0);
        solved[std::size_t(i)] = Solved{J, std::move(eq), br};
    });

    std::vector<double> J;
    for (const auto& s : solved) J.push_back(s->J);
    const auto rows = difference_table(r_grid, J);
    CsvTable t = table_for("nash");
    double worst_residual = 0, worst_br = 0, worst_rho = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& s = *solved[i];
        t.add_row({rows[i].x, rows[i].value, rows[i].d1, rows[i].d2, s.eq.spectral_radius_F, s.eq.max_residual(),
                   s.br_error, (long long)s.eq.iterations});
        worst_residual = std::max(worst_residual, s.eq.max_residual());
        worst_br = std::max(worst_br, s.br_error);
        worst_rho = std::max(worst_rho, s.eq.spectral_radius_F);
    }

    std::vector<double> price_r{0.1, 1, 10, 100};
    if (params.has("price_r")) {
        const VectorXd v = params.vector("price_r");
        price_r.assign(v.data(), v.data() + v.size());
    }
    const long price_paths = params.integer_or("price_paths", 100);
    const long price_horizon = params.integer_or("price_horizon", 48);
    if (price_paths < 0) params.fail("price_paths", "must be nonnegative");
    if (price_horizon < 1) params.fail("price_horizon", "must be positive");
    CsvTable prices = table_for("nash", "_prices");
    json variances = json::array();
    for (std::size_t k = 0; k < price_r.size() && price_paths > 0; ++k) {
        AggregateMarket<double> agg;
        try {
            agg = assemble_aggregate(spec.with_r(price_r[k]));
        } catch (const InvalidParameter& e) {
            params.fail("price_r", e.what());
        }
        const auto eq = solve_nash(agg);
        SimConfig cfg;
        cfg.seed = sc.seed;
        cfg.stream = k;
        cfg.n_paths = price_paths;
        cfg.horizon = price_horizon;
        cfg.keep_paths = price_paths;
        cfg.threads = sc.threads;
        const auto sim = simulate_equilibrium(agg, eq, x0, cfg);
        for (std::size_t p = 0; p < sim.prices.size(); ++p)
            for (std::size_t s = 0; s < sim.prices[p].size(); ++s)
                prices.add_row({price_r[k], (long long)p, (long long)s, sim.prices[p][s]});
        variances.push_back({{"r", price_r[k]}, {"mean_price_variance", mean_price_variance(sim.prices)}});
    }

    return {{{"", std::move(t)}, {"_prices", std::move(prices)}},
            {{"shape", shape_json(curve_shape(rows))},
             {"J_first_below_last", J.front() < J.back()},
             {"max_residual", worst_residual},
             {"max_best_response_error", worst_br},
             {"max_spectral_radius", worst_rho},
             {"price_variance", variances}}};
}

ExperimentResult renewables(const Scenario& sc)
{
    const Section root = sc.section();
    const Section params = params_of(root);
    const auto base = parse_system(root);
    if (base.system.dim() != 3) root.fail("market", "renewables need a 3-dimensional market");
    const VectorXd x0 = parse_x0(root, 3);
    RenewableParams<double> rp;
    rp.sigma_r = params.number_or("sigma_r", rp.sigma_r);
    rp.sigma_c = params.number_or("sigma_c", rp.sigma_c);
    if (params.has("Q")) rp.Q = params.matrix("Q");
    const auto psi_grid = grid_or(params, "psi_grid", {0.5, 1, 2, 4, 8});
    std::optional<double> target, fixed;
    if (params.has("efficiency_target")) target = params.number("efficiency_target");
    if (params.has("fixed_lambda")) fixed = params.number("fixed_lambda");
    const auto rows = volatility_vs_psi(base, psi_grid, x0, rp, target, fixed, sc.threads);

    CsvTable t = table_for("renewables_sweep");
    bool increasing = true, positive_slope = true;
    double affine_defect = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        t.add_row({r.psi_r, r.volatility, r.trace_term, r.trace_slope, r.lambda, r.state_cost});
        positive_slope = positive_slope && r.trace_slope > 0;
        if (i > 0) {
            increasing = increasing && r.volatility > rows[i - 1].volatility;
            const double predicted = rows[0].trace_term + rows[0].trace_slope * (r.psi_r - rows[0].psi_r);
            affine_defect = std::max(affine_defect, std::abs(r.trace_term - predicted) / std::max(1.0, std::abs(r.trace_term)));
        }
    }

    std::vector<double> cap_psi{0.5, 8.0};
    if (params.has("capacity_psi")) {
        const VectorXd v = params.vector("capacity_psi");
        cap_psi.assign(v.data(), v.data() + v.size());
    }
    json cap_summary;
    CsvTable cap = table_for("renewables_sweep", "_capacity");
    if (!cap_psi.empty()) {
        std::vector<double> alpha_grid;
        if (params.has("alpha_grid")) {
            alpha_grid = params.grid("alpha_grid");
        } else {
            const auto first = build_renewable_system(base, cap_psi.front(), rp);
            alpha_grid = default_alpha_grid(first.augmented, first.lift_state(x0),
                                            int(params.integer_or("alpha_points", 40)));
        }
        const auto shrink = capacity_shrinkage(base, cap_psi, alpha_grid, x0, rp, sc.threads);
        json regions = json::array();
        for (std::size_t k = 0; k < shrink.regions.size(); ++k) {
            add_capacity_rows(cap, shrink.psi[k], shrink.regions[k], shrink.reference_peak);
            json j = region_json(shrink.regions[k]);
            j["psi_r"] = shrink.psi[k];
            regions.push_back(j);
        }
        cap_summary = {{"regions", regions}, {"nested", shrink.nested}, {"max_violation", shrink.max_violation}};
    }
    return {{{"", std::move(t)}, {"_capacity", std::move(cap)}},
            {{"volatility_strictly_increasing", increasing},
             {"trace_slope_positive", positive_slope},
             {"trace_affine_defect", affine_defect},
             {"capacity", cap_summary}}};
}

ExperimentResult der(const Scenario& sc)
{
    const Section root = sc.section();
    const Section params = params_of(root);
    DerScenario s;
    if (root.has("market")) {
        const auto m = parse_system(root);
        if (!m.params) root.fail("market", "must be a price-taking market");
        s.market = *m.params;
        s.Q = m.system.Q();
        s.gamma = m.system.gamma();
    }
    s.r = params.number_or("r", s.r);
    s.sigma_rn = params.number_or("sigma_rn", s.sigma_rn);
    s.v1 = params.number_or("v1", s.v1);
    s.v2 = params.number_or("v2", s.v2);
    s.period = int(params.integer_or("period", s.period));
    s.xi = params.number_or("xi", s.xi);
    s.psi_s = params.number_or("psi_s", s.psi_s);
    s.variance_total = params.number_or("variance_total", s.variance_total);
    s.clip_demand = params.flag_or("clip_demand", s.clip_demand);
    const std::string split = params.text_or("variance_split", "fixed_supply_variance");
    if (split == "fixed_supply_variance")
        s.split = DeltaSplit::fixed_supply_variance;
    else if (split == "fixed_total")
        s.split = DeltaSplit::fixed_total;
    else
        params.fail("variance_split", "expected fixed_supply_variance or fixed_total");
    try {
        s.validate();
    } catch (const InvalidParameter& e) {
        params.fail(e.parameter(), e.what());
    }
    VectorXd x0(3);
    x0 << 1, 1, 2;
    if (root.has("x0")) x0 = parse_x0(root, 3);
    const auto deltas = grid_or(params, "delta_grid", linspace(0, 0.9, 10));
    const auto rows = der_cliff(s, deltas, x0, parse_sim(root, sc));

    CsvTable t = table_for("der_cliff");
    bool increasing = true;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        t.add_row({r.delta, r.psi_w, r.psi_s, r.volatility, r.std_error, (long long)r.n_paths_excluded});
        if (i > 0) increasing = increasing && r.volatility > rows[i - 1].volatility;
    }
    double ratio = 0;
    if (rows.size() >= 3) {
        const double first = rows[1].volatility - rows[0].volatility;
        const double last = rows.back().volatility - rows[rows.size() - 2].volatility;
        ratio = first != 0 ? last / first : 0;
    }
    return {{{"", std::move(t)}}, {{"strictly_increasing", increasing}, {"last_over_first_increment", ratio}}};
}

ExperimentResult simulate_experiment(const Scenario& sc)
{
    const Section root = sc.section();
    const Section params = params_of(root);
    const auto market = parse_system(root);
    const VectorXd x0 = parse_x0(root, market.system.dim());
    std::vector<double> r_values{0.01, 1, 1000};
    if (params.has("r_values")) {
        const VectorXd v = params.vector("r_values");
        r_values.assign(v.data(), v.data() + v.size());
    }
    const long dump = params.integer_or("dump_paths", 0);
    if (dump < 0) params.fail("dump_paths", "must be nonnegative");
    SimConfig cfg = parse_sim(root, sc);
    cfg.keep_paths = dump;

    CsvTable t = table_for("simulate");
    CsvTable paths = table_for("simulate", "_paths");
    json per_r = json::array();
    std::vector<double> vols;
    for (std::size_t k = 0; k < r_values.size(); ++k) {
        LqrSystem<double> sys = market.system;
        try {
            sys = market.system.with_r(r_values[k]);
        } catch (const InvalidParameter& e) {
            params.fail("r_values", e.what());
        }
        const auto sol = solve_riccati(sys);
        const auto closed = evaluate_policy(sys, sol.gain, x0);
        SimConfig c = cfg;
        c.stream = cfg.stream + k;
        const auto batch = simulate(sys, sol.gain, x0, c);
        double worst_z = 0;
        for (auto [name, cf, est] : std::initializer_list<std::tuple<const char*, double, Estimate>>{
                 {"cost", closed.cost, batch.cost},
                 {"volatility", closed.volatility, batch.volatility},
                 {"efficiency", closed.efficiency, batch.efficiency}}) {
            const double z = est.std_error > 0 ? (est.mean - cf) / est.std_error : 0.0;
            worst_z = std::max(worst_z, std::abs(z));
            t.add_row({r_values[k], std::string(name), cf, est.mean, est.std_error, z, (long long)batch.horizon,
                       (long long)batch.used_paths});
        }
        for (const auto& rec : batch.paths)
            for (Index step = 0; step < rec.states.rows(); ++step) {
                for (Index j = 0; j < rec.states.cols(); ++j)
                    paths.add_row({r_values[k], (long long)rec.path_id, (long long)step,
                                   market.labels[std::size_t(j)], rec.states(step, j)});
                paths.add_row({r_values[k], (long long)rec.path_id, (long long)step, std::string("u"),
                               rec.controls(step)});
            }
        vols.push_back(closed.volatility);
        per_r.push_back({{"r", r_values[k]}, {"max_abs_z", worst_z}, {"horizon", batch.horizon},
                         {"flagged_paths", batch.flagged_paths}});
    }
    std::vector<OutputFile> files{{"", std::move(t)}};
    if (dump > 0) files.push_back({"_paths", std::move(paths)});
    return {std::move(files),
            {{"per_r", per_r}, {"volatility_first_over_last", vols.back() > 0 ? vols.front() / vols.back() : 0.0}}};
}

}  // namespace

ExperimentResult run_experiment(const Scenario& scenario)
{
    static const std::map<std::string, std::function<ExperimentResult(const Scenario&)>> runners{
        {"riccati", riccati},         {"concavity_scan", concavity},     {"qalpha_profile", qalpha},
        {"capacity_sweep", capacity}, {"nash", nash},                   {"renewables_sweep", renewables},
        {"der_cliff", der},           {"simulate", simulate_experiment}};
    return runners.at(scenario.experiment)(scenario);
}

}  // namespace lqrvol::cli
