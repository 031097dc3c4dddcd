#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lqrvol/errors.hpp"

namespace lqrvol::cli
{
enum ExitCode : int { exit_success = 0, exit_io_error = 1, exit_config_error = 2, exit_numerical_failure = 3 };

/// Unreadable, malformed or inconsistent scenario input.
class ConfigError : public Error
{
public:
    using Error::Error;
};

struct OutputSchema
{
    /// File name suffix appended to the scenario name ("" for the main CSV).
    std::string suffix;
    std::vector<std::string> columns;
};

struct ExperimentInfo
{
    std::string name;
    std::string figure;
    std::string description;
    std::vector<std::string> required_keys;
    std::vector<OutputSchema> outputs;
};

const std::vector<ExperimentInfo>& experiment_registry();

struct RunOptions
{
    std::optional<std::uint64_t> seed;
    std::filesystem::path out_dir = "out";
    std::vector<std::string> overrides;
    std::optional<unsigned> threads;
};

struct RunReport
{
    int exit_code = exit_success;
    std::vector<std::filesystem::path> written;
    std::string message;
};

/// Loads a scenario, runs its experiment, and writes the CSVs and a
/// manifest into out_dir. Never throws; failures come back as exit codes.
RunReport run_scenario(const std::filesystem::path& scenario_file, const RunOptions& options);

void print_experiment_list(std::ostream& out);

}  // namespace lqrvol::cli
