#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include "ouprocure/config.hpp"

namespace ouprocure {

using Cell = std::variant<double, std::int64_t, bool, std::string>;

/// Column-oriented result of a command. CSV has a header row; JSON is an
/// array of records keyed by column name. Non-finite numbers are written as
/// inf/-inf/nan in CSV and null in JSON.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void add_row(std::vector<Cell> row);
    void write_csv(std::ostream& out) const;
    void write_json(std::ostream& out) const;
    void write(std::ostream& out, OutputFormat format) const;
};

/// Columns: n, t, b, x_lower, upper, iterations, gap.
Table cmd_solve(const RunConfig& cfg);

enum class SweepParameter { theta, sigma, dt_K_scale, holding_scale };

SweepParameter parse_sweep_parameter(const std::string& name);

struct Sweep {
    SweepParameter parameter = SweepParameter::theta;
    std::vector<double> values;
};

/// Columns: parameter, value, n, t, b, b_shifted.
///
/// sigma and dt_K_scale solve with theta = 0 and the schedules
///   sigma:       h_{t_i} = sigma * (t_N - t_i) / 10
///   dt_K_scale:  dt = C dt_0, kappa = kappa_0 / C, h_{t_i} = (N - i) / (10 sqrt(dt));
/// b_shifted adds the configured theta back. theta and holding_scale keep the
/// configured schedule (scaled by the value for holding_scale), with
/// b_shifted = b.
Table cmd_curves(const RunConfig& cfg, const Sweep& sweep);

struct ValueRange {
    int step = 0;
    std::optional<double> x_min;  ///< default x^L(t_n) - sigma
    std::optional<double> x_max;  ///< default x^H + 3 sigma
    int n_points = 50;
};

/// Columns: x, continuation, purchase, in_stopping_region, b, x_lower, x_upper.
Table cmd_value(const RunConfig& cfg, const ValueRange& range);

/// Monte Carlo crossing statistics under the solved thresholds next to the
/// analytic values. Columns: i, t, p_mc, p_se, p, e_mc, e_se, e, hits.
Table cmd_simulate(const RunConfig& cfg, double x, int n);

enum class CheckStatus { pass, fail, inconclusive };

std::string to_string(CheckStatus s);

struct CheckResult {
    std::string name;
    CheckStatus status = CheckStatus::pass;
    double delta = 0.0;
    double tolerance = 0.0;
    double std_error = 0.0;
    std::string detail;
};

struct VerifyOptions {
    std::optional<double> x0;  ///< default theta + 2 sigma
    /// Debug aid: add this much to b(t_5) before running the checks.
    double corrupt_b5 = 0.0;
};

struct VerifyReport {
    std::vector<CheckResult> checks;

    [[nodiscard]] bool passed() const;
    [[nodiscard]] Table table() const;
};

/// Cross-checks the analytic engine against Monte Carlo and the grid DP.
VerifyReport cmd_verify(const RunConfig& cfg, const VerifyOptions& options = {});

}  // namespace ouprocure
