// Command-line front end: solve, curves, value, simulate, verify.
//
// Exit codes: 0 success, 1 validation or usage error, 2 solver error,
// 3 verification failure.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ouprocure/commands.hpp"
#include "ouprocure/config.hpp"
#include "ouprocure/errors.hpp"

namespace {

using namespace ouprocure;

constexpr int kExitValidation = 1;
constexpr int kExitSolver = 2;
constexpr int kExitVerification = 3;

struct CommonOptions {
    std::string config_path;
    ConfigOverrides overrides;
};

void add_common(CLI::App& cmd, CommonOptions& opts) {
    cmd.add_option("--config", opts.config_path, "JSON run configuration");
    cmd.add_option("--out", opts.overrides.out, "Output file (default: standard output)");
    cmd.add_option("--format", opts.overrides.format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    cmd.add_option("--seed", opts.overrides.seed, "Monte Carlo seed");
    cmd.add_option("--eps", opts.overrides.eps, "Bisection tolerance on the cost gap");
    cmd.add_option("--mvn-abs-tol", opts.overrides.mvn_abs_tol, "Orthant probability tolerance");
    cmd.add_option("--paths", opts.overrides.n_paths, "Monte Carlo paths");
    cmd.add_option("--theta", opts.overrides.theta, "Long-run mean price");
    cmd.add_option("--kappa", opts.overrides.kappa, "Reversion rate");
    cmd.add_option("--sigma", opts.overrides.sigma, "Volatility");
    cmd.add_option("--dt", opts.overrides.dt, "Step length");
    cmd.add_option("--steps", opts.overrides.n_steps, "Number of steps N");
    cmd.add_option("--holding-linear", opts.overrides.holding_linear,
                   "Holding rate h_t = c (T - t)");
}

void emit(const Table& table, const RunConfig& cfg) {
    if (cfg.output.path.empty()) {
        table.write(std::cout, cfg.output.format);
        return;
    }
    std::ofstream out(cfg.output.path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + cfg.output.path);
    table.write(out, cfg.output.format);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Optimal purchase thresholds for a mean-reverting price"};
    app.require_subcommand(1);

    CommonOptions solve_opts, curves_opts, value_opts, simulate_opts, verify_opts;

    auto* solve = app.add_subcommand("solve", "Threshold table b(t_n)");
    add_common(*solve, solve_opts);

    auto* curves = app.add_subcommand("curves", "Threshold curves over a parameter sweep");
    add_common(*curves, curves_opts);
    std::string sweep_name;
    std::vector<double> sweep_values;
    curves->add_option("--param", sweep_name, "theta, sigma, dt_K_scale or holding_scale")
        ->required();
    curves->add_option("--values", sweep_values, "Sweep values")->required()->delimiter(',');

    auto* value_cmd = app.add_subcommand("value", "Continuation value curve at one step");
    add_common(*value_cmd, value_opts);
    ValueRange range;
    value_cmd->add_option("--step", range.step, "Step n")->required();
    value_cmd->add_option("--x-min", range.x_min, "Lower end of the price range");
    value_cmd->add_option("--x-max", range.x_max, "Upper end of the price range");
    value_cmd->add_option("--points", range.n_points, "Number of prices");

    auto* simulate = app.add_subcommand("simulate", "Monte Carlo crossing statistics");
    add_common(*simulate, simulate_opts);
    std::optional<double> sim_x;
    int sim_step = 0;
    simulate->add_option("--x", sim_x, "Start price (default theta + 2 sigma)");
    simulate->add_option("--step", sim_step, "Start step");

    auto* verify = app.add_subcommand("verify", "Cross-check against Monte Carlo and grid DP");
    add_common(*verify, verify_opts);
    VerifyOptions verify_options;
    verify->add_option("--x", verify_options.x0, "Start price (default theta + 2 sigma)");
    verify->add_option("--debug-corrupt-b5", verify_options.corrupt_b5,
                       "Add this amount to b(t_5) before checking");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    try {
        if (*solve) {
            const RunConfig cfg = load_config(solve_opts.config_path, solve_opts.overrides);
            emit(cmd_solve(cfg), cfg);
        } else if (*curves) {
            const RunConfig cfg = load_config(curves_opts.config_path, curves_opts.overrides);
            emit(cmd_curves(cfg, {parse_sweep_parameter(sweep_name), sweep_values}), cfg);
        } else if (*value_cmd) {
            const RunConfig cfg = load_config(value_opts.config_path, value_opts.overrides);
            emit(cmd_value(cfg, range), cfg);
        } else if (*simulate) {
            const RunConfig cfg = load_config(simulate_opts.config_path, simulate_opts.overrides);
            const double x = sim_x.value_or(cfg.process.theta + 2.0 * cfg.process.sigma);
            emit(cmd_simulate(cfg, x, sim_step), cfg);
        } else if (*verify) {
            const RunConfig cfg = load_config(verify_opts.config_path, verify_opts.overrides);
            const VerifyReport report = cmd_verify(cfg, verify_options);
            emit(report.table(), cfg);
            if (!report.passed()) {
                std::cerr << "verification failed\n";
                return kExitVerification;
            }
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const ArgumentError& e) {
        std::cerr << "invalid argument: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitSolver;
    }
    return 0;
}
