#include <chrono>
#include <ctime>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "experiments.hpp"
#include "lqrvol/version.hpp"

namespace lqrvol::cli
{
namespace
{
nlohmann::json yaml_to_json(const YAML::Node& node)
{
    switch (node.Type()) {
        case YAML::NodeType::Map: {
            nlohmann::json out = nlohmann::json::object();
            for (const auto& kv : node) out[kv.first.as<std::string>()] = yaml_to_json(kv.second);
            return out;
        }
        case YAML::NodeType::Sequence: {
            nlohmann::json out = nlohmann::json::array();
            for (const auto& item : node) out.push_back(yaml_to_json(item));
            return out;
        }
        case YAML::NodeType::Scalar: {
            if (node.Tag() == "!") return node.Scalar();  // quoted
            long long i;
            double d;
            bool b;
            if (YAML::convert<long long>::decode(node, i)) return i;
            if (YAML::convert<double>::decode(node, d)) return d;
            if (YAML::convert<bool>::decode(node, b)) return b;
            return node.Scalar();
        }
        default:
            return nullptr;
    }
}

std::string utc_timestamp()
{
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream out;
    out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return out.str();
}

}  // namespace

void print_experiment_list(std::ostream& out)
{
    for (const auto& info : experiment_registry()) {
        out << info.name << "  [" << info.figure << "]\n    " << info.description << "\n    requires:";
        for (const auto& k : info.required_keys) out << ' ' << k;
        out << '\n';
        for (const auto& o : info.outputs) {
            out << "    <name>" << o.suffix << ".csv:";
            for (std::size_t i = 0; i < o.columns.size(); ++i) out << (i ? "," : " ") << o.columns[i];
            out << '\n';
        }
    }
}

RunReport run_scenario(const std::filesystem::path& scenario_file, const RunOptions& options)
{
    RunReport report;
    const auto started = std::chrono::steady_clock::now();
    const std::string started_at = utc_timestamp();
    try {
        Scenario sc = load_scenario(scenario_file, options.overrides);
        if (options.seed) sc.seed = *options.seed;
        if (options.threads) sc.threads = *options.threads;

        ExperimentResult result = run_experiment(sc);
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

        nlohmann::json manifest{{"scenario", sc.name},
                                {"experiment", sc.experiment},
                                {"source", scenario_file.string()},
                                {"seed", sc.seed},
                                {"threads", sc.threads},
                                {"overrides", options.overrides},
                                {"inputs", yaml_to_json(sc.root)},
                                {"library_version", library_version},
                                {"started_at", started_at},
                                {"wall_time_seconds", wall},
                                {"results", result.summary}};
        nlohmann::json outputs = nlohmann::json::array();
        for (const auto& f : result.files) {
            const auto path = options.out_dir / (sc.name + f.suffix + ".csv");
            write_file_atomic(path, f.table.str());
            report.written.push_back(path);
            outputs.push_back(path.filename().string());
        }
        manifest["outputs"] = outputs;
        const auto manifest_path = options.out_dir / (sc.name + ".manifest.json");
        write_file_atomic(manifest_path, manifest.dump(2) + "\n");
        report.written.push_back(manifest_path);
        report.message = sc.name + ": wrote " + std::to_string(result.files.size()) + " CSV file(s) to " +
                         options.out_dir.string();
    } catch (const ConfigError& e) {
        report.exit_code = exit_config_error;
        report.message = std::string("config error: ") + e.what();
    } catch (const InvalidParameter& e) {
        report.exit_code = exit_config_error;
        report.message = std::string("config error: ") + e.what();
    } catch (const NumericalError& e) {
        report.exit_code = exit_numerical_failure;
        report.message = std::string("numerical failure: ") + e.what();
    } catch (const std::exception& e) {
        report.exit_code = exit_io_error;
        report.message = std::string("error: ") + e.what();
    }
    return report;
}

}  // namespace lqrvol::cli
