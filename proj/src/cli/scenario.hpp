#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "lqrvol/cli.hpp"
#include "lqrvol/core_model.hpp"
#include "lqrvol/nash_market.hpp"

namespace lqrvol::cli
{
/// A YAML mapping plus the dotted path and file it came from, so every
/// lookup failure can name its position.
class Section
{
public:
    Section(YAML::Node node, std::string path, std::shared_ptr<const std::string> file);

    bool has(const std::string& key) const;
    Section child(const std::string& key) const;
    std::optional<Section> optional_child(const std::string& key) const;
    /// Entries of a list of mappings.
    std::vector<Section> children(const std::string& key) const;
    const YAML::Node& node() const noexcept { return node_; }
    const std::string& path() const noexcept { return path_; }

    double number(const std::string& key) const;
    double number_or(const std::string& key, double fallback) const;
    long integer(const std::string& key) const;
    long integer_or(const std::string& key, long fallback) const;
    std::string text(const std::string& key) const;
    std::string text_or(const std::string& key, const std::string& fallback) const;
    bool flag_or(const std::string& key, bool fallback) const;
    VectorXd vector(const std::string& key) const;
    MatrixXd matrix(const std::string& key) const;
    /// Either an explicit list or one of {logspace: [lo_exp, hi_exp, n]},
    /// {linspace: [lo, hi, n]}, {geomspace: [lo, hi, n]}.
    std::vector<double> grid(const std::string& key) const;

    [[noreturn]] void fail(const std::string& key, const std::string& message) const;

private:
    std::string key_path(const std::string& key) const;
    YAML::Node required(const std::string& key) const;

    YAML::Node node_;
    std::string path_;
    std::shared_ptr<const std::string> file_;
};

struct Scenario
{
    std::string name;
    std::string experiment;
    std::filesystem::path source;
    YAML::Node root;
    std::uint64_t seed = 0;
    unsigned threads = 1;

    Section section() const;
};

/// Parses the file, applies key.path=value overrides, and checks the
/// top-level keys every experiment shares.
Scenario load_scenario(const std::filesystem::path& file, const std::vector<std::string>& overrides);

/// System from a `system` section (A, b, Q, noise, r, gamma) or a `market`
/// section (price-taking coefficients, optionally starting from the
/// reference preset).
MarketInstance<double> parse_system(const Section& root);
NoiseSpec<double> parse_noise(const Section& parent, Index dim);
VectorXd parse_x0(const Section& root, Index dim);
SimConfig parse_sim(const Section& root, const Scenario& scenario);
MarketSpecPA<double> parse_nash_market(const Section& root);

}  // namespace lqrvol::cli
