#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "lqrvol/csv.hpp"
#include "scenario.hpp"

namespace lqrvol::cli
{
struct OutputFile
{
    std::string suffix;
    CsvTable table;
};

struct ExperimentResult
{
    std::vector<OutputFile> files;
    nlohmann::json summary;
};

ExperimentResult run_experiment(const Scenario& scenario);

}  // namespace lqrvol::cli
