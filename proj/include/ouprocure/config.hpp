#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "ouprocure/mvn.hpp"
#include "ouprocure/process.hpp"

namespace ouprocure {

enum class OutputFormat { csv, json };

OutputFormat parse_output_format(const std::string& name);

struct SolverSettings {
    std::optional<double> eps;          ///< default_eps(params) when unset
    std::optional<double> mvn_abs_tol;  ///< eps / 100 when unset
    std::uint64_t mvn_seed = MvnAccuracy{}.rng_seed;
};

struct SimulationSettings {
    std::size_t n_paths = 100'000;
    std::uint64_t seed = 1;
};

struct OutputSettings {
    OutputFormat format = OutputFormat::csv;
    std::string path;  ///< empty writes to standard output
};

struct RunConfig {
    ProcessParams process;
    HoldingSchedule holding;
    /// Coefficient of the linear_in_remaining rule when the schedule came
    /// from that rule.
    std::optional<double> holding_rule;
    SolverSettings solver;
    SimulationSettings simulation;
    OutputSettings output;

    [[nodiscard]] double eps() const;
    [[nodiscard]] MvnAccuracy accuracy() const;

    /// Re-validates every field. Throws ConfigError.
    void validate() const;
};

/// Command-line values that take precedence over the file.
struct ConfigOverrides {
    std::optional<double> theta;
    std::optional<double> kappa;
    std::optional<double> sigma;
    std::optional<double> dt;
    std::optional<int> n_steps;
    std::optional<double> holding_linear;
    std::optional<double> eps;
    std::optional<double> mvn_abs_tol;
    std::optional<std::size_t> n_paths;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> format;
    std::optional<std::string> out;
};

/// Parses a JSON document:
///
///   {
///     "process":    {"theta": 10, "kappa": 0.5, "sigma": 1, "dt": 1, "n_steps": 15},
///     "holding":    {"linear_in_remaining": 0.01}   or   [0.15, 0.14, ...],
///     "solver":     {"eps": 1e-6, "mvn_abs_tol": 1e-8, "mvn_seed": 7},
///     "simulation": {"n_paths": 100000, "seed": 1},
///     "output":     {"format": "csv", "path": "b.csv"}
///   }
///
/// "horizon" may replace "n_steps" when it is a whole multiple of dt. Only
/// "process" and "holding" are required. Errors name the offending field.
RunConfig parse_config(const std::string& json_text, const ConfigOverrides& overrides = {});

/// Reads `path` (if non-empty) and applies `overrides`. With an empty path
/// the configuration is built from the overrides alone.
RunConfig load_config(const std::filesystem::path& path, const ConfigOverrides& overrides = {});

}  // namespace ouprocure
