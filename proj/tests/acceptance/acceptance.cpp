// Acceptance checks. Each criterion prints one PASS/FAIL line followed by
// indented detail; the exit status is nonzero if any requested criterion
// fails. Run with criterion ids (AC1 AC2a ...) or none for all.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "lqrvol/capacity.hpp"
#include "lqrvol/cli.hpp"
#include "lqrvol/functionals.hpp"
#include "lqrvol/nash_market.hpp"
#include "lqrvol/reference.hpp"
#include "lqrvol/renewables.hpp"
#include "lqrvol/sim_engine.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace lqrvol;
namespace fs = std::filesystem;

namespace
{
struct Outcome
{
    bool pass = true;
    std::vector<std::string> notes;

    void check(bool ok, const std::string& what)
    {
        pass = pass && ok;
        notes.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
    }
};

std::string fmt(const char* f, double a)
{
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

std::string fmt(const char* f, double a, double b)
{
    char buf[160];
    std::snprintf(buf, sizeof buf, f, a, b);
    return buf;
}

std::string fmt(const char* f, double a, double b, double c)
{
    char buf[200];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

const auto market = reference_market<double>().system;
const VectorXd x0 = reference_market_x0<double>();

Outcome ac1()
{
    Outcome o;
    const auto sys = fixtures::scalar_system(1.1, 1, 1, 1, 0.9);
    const double k = solve_riccati(sys).K(0, 0);
    const double root = oracle::scalar_riccati_root(1.1, 1, 1, 1, 0.9);
    o.check(std::abs(k - root) <= 1e-8, fmt("scalar K = %.12g, quadratic root = %.12g, |diff| = %.2e", k, root,
                                           std::abs(k - root)));

    oracle::Quadratic v{MatrixXd::Zero(3, 3), 0.0};
    const MatrixXd& Psi = market.noise().covariance();
    double vi = 0, prev = -1;
    for (int it = 0; it < 10000 && std::abs(vi - prev) > 1e-14 * std::abs(vi); ++it) {
        v = oracle::schur_bellman(market.A(), market.b(), market.Q(), market.r(), market.gamma(), Psi, v);
        prev = vi;
        vi = x0.dot(v.M * x0) + v.c;
    }
    const double closed = optimal_cost(market, x0);
    const double rel = std::abs(vi - closed) / closed;
    o.check(rel <= 1e-6, fmt("T^k v0 = %.10g, optimal_cost = %.10g, relative diff %.2e", vi, closed, rel));
    return o;
}

Outcome concavity(ScanFunctional which)
{
    Outcome o;
    const auto rows = concavity_scan(market, logspace(-2, 3, 25), which, x0);
    const auto shape = curve_shape(rows, 1e-6);
    o.check(shape.increasing, fmt("min first difference %.4e (must be > 0)", shape.min_d1));
    o.check(shape.concave, fmt("max second difference %.4e vs allowed %.4e (relative %.2e)", shape.max_d2,
                               1e-6 * shape.scale, shape.max_d2 / shape.scale));
    for (const auto& r : rows)
        if (!std::isnan(r.d2) && r.d2 > 1e-6 * shape.scale)
            o.notes.push_back(fmt("  convex at r = %.4g: d2 = %.4e, value = %.6g", r.x, r.d2, r.value));
    return o;
}

Outcome ac3()
{
    Outcome o;
    const double alpha = 27;
    const auto grid = logspace(-3, 2, 50);
    std::vector<double> q;
    for (double l : grid) q.push_back(q_alpha(market, alpha, l, x0));
    const auto rows = difference_table(grid, q);
    const auto shape = curve_shape(rows, 1e-6);
    int sign_changes = 0;
    for (std::size_t i = 2; i < rows.size(); ++i)
        if ((rows[i].d1 > 0) != (rows[i - 1].d1 > 0)) ++sign_changes;
    o.check(sign_changes <= 1, fmt("first differences change sign %g time(s)", sign_changes));
    o.check(shape.concave, fmt("max second difference %.4e vs allowed %.4e", shape.max_d2, 1e-6 * shape.scale));

    const auto point = solve_constrained(market, alpha, x0);
    std::vector<double> dense = logspace(-3, 2, 2000);
    for (int k = -500; k <= 500; ++k) dense.push_back(point.lambda_star * std::exp(2e-5 * k));
    std::sort(dense.begin(), dense.end());
    const auto [at, sup] = oracle::grid_max(dense, [&](double l) { return q_alpha(market, alpha, l, x0); });
    const double rel = std::abs(point.L_star - sup) / std::abs(sup);
    o.check(rel <= 1e-6, fmt("golden L* = %.10g, dense sup = %.10g, relative diff %.2e", point.L_star, sup, rel));
    o.notes.push_back(fmt("lambda* = %.6g, grid argmax = %.6g", point.lambda_star, at));
    return o;
}

Outcome ac4()
{
    Outcome o;
    const auto grid = default_alpha_grid(market, x0, 40);
    const auto r05 = sweep_capacity_region(market, grid, x0);
    const auto r09 = sweep_capacity_region(market.with_gamma(0.9), grid, x0);
    for (const auto* reg : {&r05, &r09}) {
        const std::string g = fmt("gamma %.1f", reg->gamma);
        o.check(reg->failures.empty() && reg->points.size() == 40, g + ": all 40 points solved");
        o.check(reg->boundary.nondecreasing, g + fmt(": boundary nondecreasing (min d1 %.3e)", reg->boundary.min_d1));
        o.check(reg->boundary.concave, g + fmt(": boundary concave (max d2 %.3e, scale %.3e)", reg->boundary.max_d2,
                                               reg->boundary.scale));
        double worst = 0;
        for (const auto& p : reg->points)
            if (p.lambda_star > 0) worst = std::max(worst, std::abs(p.achieved_volatility - p.alpha) / p.alpha);
        o.check(worst <= 0.02, g + fmt(": worst |V - alpha| / alpha = %.3e over active points", worst));
    }
    bool dominates = r05.points.size() == r09.points.size();
    double worst_gap = INFINITY;
    for (std::size_t i = 0; i < r05.points.size() && dominates; ++i) {
        const double gap = r05.points[i].efficiency_star - r09.points[i].efficiency_star;
        worst_gap = std::min(worst_gap, gap);
        dominates = gap >= 0;
    }
    o.check(dominates, fmt("gamma 0.5 boundary dominates gamma 0.9 (smallest gap %.4e)", worst_gap));
    return o;
}

Outcome ac5()
{
    Outcome o;
    ParetoPoint<double> ends[2];
    const double alphas[2] = {20.0, 400.0};
    for (int k = 0; k < 2; ++k) {
        const auto p = solve_constrained(market, alphas[k], x0);
        const auto rep = evaluate_policy(market, p.policy, x0);
        ends[k] = {rep.volatility, rep.efficiency, p.policy};
        o.notes.push_back(fmt("boundary point alpha = %g: V = %.6g, E = %.6g", alphas[k], rep.volatility,
                              rep.efficiency));
    }
    for (double mu : {0.25, 0.5, 0.75}) {
        const auto mix = mixture_policy(ends[0], ends[1], mu);
        SimConfig cfg;
        cfg.seed = 505;
        cfg.stream = std::uint64_t(mu * 100);
        cfg.n_paths = 10000;
        const auto batch = simulate(mixture_model(market, mix.policy), x0, cfg);
        const double zv = (batch.volatility.mean - mix.volatility) / batch.volatility.std_error;
        const double ze = (batch.efficiency.mean - mix.efficiency) / batch.efficiency.std_error;
        o.check(std::abs(zv) <= 3, fmt("mu %.2f volatility: MC %.6g vs %.6g", mu, batch.volatility.mean,
                                       mix.volatility) + fmt(" (z = %.2f)", zv));
        o.check(std::abs(ze) <= 3, fmt("mu %.2f efficiency: MC %.6g vs %.6g", mu, batch.efficiency.mean,
                                       mix.efficiency) + fmt(" (z = %.2f)", ze));
    }
    return o;
}

Outcome ac6()
{
    Outcome o;
    std::vector<double> vols;
    std::uint64_t stream = 0;
    for (double r : {0.01, 1.0, 1000.0}) {
        const auto sys = market.with_r(r);
        const auto gain = solve_riccati(sys).gain;
        const auto exact = evaluate_policy(sys, gain, x0);
        SimConfig cfg;
        cfg.seed = 606;
        cfg.stream = stream++;
        cfg.n_paths = 10000;
        const auto batch = simulate(sys, gain, x0, cfg);
        const std::pair<const char*, std::pair<double, Estimate>> items[] = {
            {"cost", {exact.cost, batch.cost}},
            {"volatility", {exact.volatility, batch.volatility}},
            {"efficiency", {exact.efficiency, batch.efficiency}}};
        for (const auto& [name, pr] : items) {
            const auto& [cf, est] = pr;
            const double z = est.std_error > 0 ? (est.mean - cf) / est.std_error : (est.mean == cf ? 0 : INFINITY);
            o.check(std::abs(z) <= 3, fmt("r = %g ", r) + name + fmt(": closed %.6g, MC %.6g", cf, est.mean) +
                                          fmt(" (z = %.2f)", z));
        }
        o.notes.push_back(fmt("r = %g horizon %g", r, double(batch.horizon)));
        vols.push_back(exact.volatility);
    }
    const double ratio = vols.front() / vols.back();
    o.check(ratio >= 1e3, fmt("V(0.01) = %.6g, V(1000) = %.6g, ratio %.3e", vols.front(), vols.back(), ratio));
    return o;
}

Outcome ac7()
{
    Outcome o;
    const auto agg = assemble_aggregate(fixtures::reference_game());
    const auto eq = solve_nash(agg);
    o.check(eq.max_residual() <= 1e-8, fmt("max coupled-equation residual %.3e", eq.max_residual()));
    o.check(eq.spectral_radius_F < 1, fmt("rho(F) = %.6f", eq.spectral_radius_F));
    double br = 0;
    for (int i = 0; i < agg.players(); ++i)
        br = std::max(br, (best_response(agg, eq.p, i) - eq.p[std::size_t(i)]).cwiseAbs().maxCoeff());
    o.check(br <= 1e-6, fmt("best-response deviation %.3e", br));

    const auto grid = logspace(-1, 2, 15);
    std::vector<double> J;
    for (double r : grid) {
        const auto a = assemble_aggregate(fixtures::reference_game(r));
        J.push_back(nash_social_cost(a, solve_nash(a), fixtures::reference_game_x0()));
    }
    const auto shape = curve_shape(difference_table(grid, J), 1e-6);
    o.check(shape.nondecreasing, fmt("J^N nondecreasing (min d1 %.4e)", shape.min_d1));
    o.check(shape.concave, fmt("J^N concave (max d2 %.4e, allowed %.4e)", shape.max_d2, 1e-6 * shape.scale));
    o.check(J.front() < J.back(), fmt("J^N(0.1) = %.6g < J^N(100) = %.6g", J.front(), J.back()));
    return o;
}

Outcome ac8()
{
    Outcome o;
    const auto base = reference_market<double>();
    const std::vector<double> psi{0.5, 1, 2, 4, 8};
    const auto rows = volatility_vs_psi(base, psi, x0);
    bool inc = true;
    std::string vols;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (i > 0) inc = inc && rows[i].volatility > rows[i - 1].volatility;
        vols += fmt(" %.6g", rows[i].volatility);
    }
    o.check(inc, "volatility strictly increasing:" + vols);
    double defect = 0;
    for (const auto& r : rows)
        defect = std::max(defect, std::abs(r.trace_term - (rows[0].trace_term + rows[0].trace_slope * (r.psi_r - 0.5))) /
                                      std::abs(r.trace_term));
    o.check(rows[0].trace_slope > 0 && defect <= 1e-9,
            fmt("trace term affine: slope %.6g, worst relative defect %.2e", rows[0].trace_slope, defect));

    const auto first = build_renewable_system(base, 0.5);
    const auto grid = default_alpha_grid(first.augmented, first.lift_state(x0), 40);
    const auto shrink = capacity_shrinkage(base, {0.5, 8.0}, grid, x0);
    o.check(shrink.nested && shrink.regions[0].points.size() == shrink.regions[1].points.size(),
            fmt("psi 8 region inside psi 0.5 region (max excess %.3e)", shrink.max_violation));
    return o;
}

Outcome ac9()
{
    Outcome o;
    DerScenario s;
    SimConfig cfg;
    cfg.seed = 2024;
    cfg.n_paths = 10000;
    VectorXd start(3);
    start << 1, 1, 2;
    const auto grid = linspace(0, 0.9, 10);
    const auto rows = der_cliff(s, grid, start, cfg);
    bool inc = true;
    std::string vols;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (i > 0) inc = inc && rows[i].volatility > rows[i - 1].volatility;
        vols += fmt(" %.5g", rows[i].volatility);
    }
    o.check(inc, "volatility strictly increasing:" + vols);
    const double first = rows[1].volatility - rows[0].volatility;
    const double last = rows.back().volatility - rows[rows.size() - 2].volatility;
    o.check(last >= 2 * first, fmt("last increment %.4g vs first %.4g (ratio %.2f)", last, first, last / first));
    cfg.threads = 4;
    const auto again = der_cliff(s, grid, start, cfg);
    bool same = true;
    for (std::size_t i = 0; i < rows.size(); ++i) same = same && rows[i].volatility == again[i].volatility;
    o.check(same, "rerun with the same seed (4 threads) is bit-identical");
    return o;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome ac10()
{
    Outcome o;
    const fs::path scenarios = LQRVOL_SCENARIO_DIR;
    const fs::path work = fs::temp_directory_path() / "lqrvol_ac10";
    fs::remove_all(work);
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(scenarios))
        if (e.path().extension() == ".yaml") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    o.check(!files.empty(), fmt("%g shipped scenarios found", double(files.size())));
    for (const auto& f : files) {
        std::map<unsigned, std::map<std::string, std::string>> outputs;
        bool ran = true;
        for (unsigned threads : {1u, 4u}) {
            cli::RunOptions opts;
            opts.out_dir = work / std::to_string(threads);
            opts.threads = threads;
            const auto rep = cli::run_scenario(f, opts);
            ran = ran && rep.exit_code == cli::exit_success;
            if (rep.exit_code != cli::exit_success) o.notes.push_back("  " + rep.message);
            for (const auto& w : rep.written)
                if (w.extension() == ".csv") outputs[threads][w.filename().string()] = slurp(w);
        }
        const bool same = ran && !outputs[1].empty() && outputs[1] == outputs[4];
        o.check(same, f.filename().string() + fmt(": %g CSV file(s) byte-identical at 1 and 4 threads",
                                                  double(outputs[1].size())));
    }
    fs::remove_all(work);
    return o;
}

struct Criterion
{
    std::string id;
    std::string title;
    double budget_seconds;
    std::function<Outcome()> run;
};

const std::vector<Criterion> criteria{
    {"AC1", "Riccati oracle equivalence", 1, ac1},
    {"AC2a", "J*_r nondecreasing and concave in r", 10, [] { return concavity(ScanFunctional::optimal_cost); }},
    {"AC2b", "J_sp,r nondecreasing and concave in r", 10,
     [] { return concavity(ScanFunctional::state_penalizing); }},
    {"AC3", "q_alpha concave, golden-section L* matches dense grid", 10, ac3},
    {"AC4", "Pareto boundary shape, discount dominance, slackness", 60, ac4},
    {"AC5", "mixture policies achieve convex combinations", 60, ac5},
    {"AC6", "closed form vs Monte Carlo, volatility contrast", 90, ac6},
    {"AC7", "Nash certificate and social-cost scan", 60, ac7},
    {"AC8", "renewable variance raises volatility, regions nest", 120, ac8},
    {"AC9", "volatility cliff under distributed renewables", 120, ac9},
    {"AC10", "scenario outputs reproducible across thread counts", INFINITY, ac10},
};

}  // namespace

int main(int argc, char** argv)
{
    std::vector<std::string> wanted(argv + 1, argv + argc);
    bool all_pass = true;
    int ran = 0;
    for (const auto& c : criteria) {
        if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), c.id) == wanted.end()) continue;
        ++ran;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.check(false, std::string("threw: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (std::isfinite(c.budget_seconds))
            o.check(secs < c.budget_seconds, fmt("runtime %.2f s (budget %g s)", secs, c.budget_seconds));
        std::printf("%s %s: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", c.id.c_str(), c.title.c_str(), secs);
        for (const auto& n : o.notes) std::printf("    %s\n", n.c_str());
        std::fflush(stdout);
        all_pass = all_pass && o.pass;
    }
    if (ran == 0) {
        std::fprintf(stderr, "no matching criterion\n");
        return 2;
    }
    return all_pass ? 0 : 1;
}
