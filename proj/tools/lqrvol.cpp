#include <iostream>

#include <CLI11.hpp>

#include "lqrvol/cli.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"Volatility/efficiency experiments for linear-quadratic market regulation"};
    app.require_subcommand(1);

    std::string scenario;
    lqrvol::cli::RunOptions options;
    std::uint64_t seed = 0;
    unsigned threads = 0;
    std::string out_dir = options.out_dir.string();
    auto* run = app.add_subcommand("run", "Run a scenario file and write its CSVs and manifest");
    run->add_option("scenario", scenario, "Scenario YAML file")->required();
    auto* seed_opt = run->add_option("--seed", seed, "Override the scenario seed");
    run->add_option("--out-dir", out_dir, "Output directory")->capture_default_str();
    run->add_option("--override", options.overrides, "key.path=value (repeatable)");
    auto* threads_opt = run->add_option("--threads", threads, "Worker thread cap (0 = all cores)");

    auto* list = app.add_subcommand("list", "List the available experiments");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : lqrvol::cli::exit_config_error;
    }

    if (list->parsed()) {
        lqrvol::cli::print_experiment_list(std::cout);
        return 0;
    }
    if (*seed_opt) options.seed = seed;
    if (*threads_opt) options.threads = threads;
    options.out_dir = out_dir;
    const auto report = lqrvol::cli::run_scenario(scenario, options);
    (report.exit_code == 0 ? std::cout : std::cerr) << report.message << '\n';
    return report.exit_code;
}
