#include "ouprocure/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ouprocure/errors.hpp"
#include "ouprocure/solver.hpp"

namespace ouprocure {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::string& where, const std::set<std::string>& known) {
    for (const auto& [key, _] : obj.items()) {
        if (!known.contains(key)) throw ConfigError("unknown field " + where + "." + key);
    }
}

const json& section(const json& root, const std::string& name) {
    static const json empty = json::object();
    if (!root.contains(name)) return empty;
    const json& s = root.at(name);
    if (!s.is_object() && name != "holding") throw ConfigError(name + " must be an object");
    return s;
}

template <typename T>
std::optional<T> get(const json& obj, const std::string& where, const std::string& key) {
    if (!obj.contains(key)) return std::nullopt;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(where + "." + key + " has the wrong type");
    }
}

template <typename T>
T require(const json& obj, const std::string& where, const std::string& key) {
    auto v = get<T>(obj, where, key);
    if (!v) throw ConfigError("missing field " + where + "." + key);
    return *v;
}

int steps_from_horizon(double horizon, double dt) {
    const double steps = horizon / dt;
    const double rounded = std::round(steps);
    if (!(rounded >= 1.0) || std::abs(steps - rounded) > 1e-9 * std::max(1.0, steps)) {
        std::ostringstream msg;
        msg << "process.horizon " << horizon << " is not a positive multiple of dt " << dt;
        throw ConfigError(msg.str());
    }
    return static_cast<int>(rounded);
}

}  // namespace

OutputFormat parse_output_format(const std::string& name) {
    if (name == "csv") return OutputFormat::csv;
    if (name == "json") return OutputFormat::json;
    throw ConfigError("output.format must be csv or json, got '" + name + "'");
}

double RunConfig::eps() const { return solver.eps.value_or(default_eps(process)); }

MvnAccuracy RunConfig::accuracy() const {
    MvnAccuracy acc;
    acc.abs_tol = solver.mvn_abs_tol.value_or(eps() / 100.0);
    acc.rng_seed = solver.mvn_seed;
    return acc;
}

void RunConfig::validate() const {
    try {
        process.validate();
        holding.validate(process);
        accuracy().validate();
    } catch (const ArgumentError& e) {
        throw ConfigError(e.what());
    }
    if (!(eps() > 0.0)) throw ConfigError("solver.eps must be positive");
    if (accuracy().abs_tol > eps() / 100.0) {
        throw ConfigError("solver.mvn_abs_tol must not exceed solver.eps / 100");
    }
    if (simulation.n_paths < 1) throw ConfigError("simulation.n_paths must be positive");
}

RunConfig parse_config(const std::string& json_text, const ConfigOverrides& overrides) {
    json root;
    try {
        root = json_text.empty() ? json::object() : json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!root.is_object()) throw ConfigError("config must be a JSON object");
    reject_unknown(root, "config", {"process", "holding", "solver", "simulation", "output"});

    RunConfig cfg;

    const json& proc = section(root, "process");
    reject_unknown(proc, "process", {"theta", "kappa", "sigma", "dt", "n_steps", "horizon"});
    auto field = [&](std::optional<double> flag, const std::string& key) {
        if (flag) return *flag;
        return require<double>(proc, "process", key);
    };
    cfg.process.theta = field(overrides.theta, "theta");
    cfg.process.kappa = field(overrides.kappa, "kappa");
    cfg.process.sigma = field(overrides.sigma, "sigma");
    cfg.process.dt = field(overrides.dt, "dt");
    if (overrides.n_steps) {
        cfg.process.n_steps = *overrides.n_steps;
    } else {
        const auto steps = get<int>(proc, "process", "n_steps");
        const auto horizon = get<double>(proc, "process", "horizon");
        if (steps && horizon) throw ConfigError("process: give n_steps or horizon, not both");
        if (!steps && !horizon) throw ConfigError("missing field process.n_steps (or process.horizon)");
        cfg.process.n_steps = steps ? *steps : steps_from_horizon(*horizon, cfg.process.dt);
    }
    try {
        cfg.process.validate();
    } catch (const ArgumentError& e) {
        throw ConfigError(e.what());
    }

    if (overrides.holding_linear) {
        cfg.holding_rule = *overrides.holding_linear;
    } else if (!root.contains("holding")) {
        throw ConfigError("missing field holding");
    } else {
        const json& h = root.at("holding");
        if (h.is_array()) {
            try {
                cfg.holding = HoldingSchedule(h.get<std::vector<double>>());
            } catch (const json::exception&) {
                throw ConfigError("holding must be an array of numbers");
            }
        } else if (h.is_object()) {
            reject_unknown(h, "holding", {"linear_in_remaining", "values"});
            const auto rule = get<double>(h, "holding", "linear_in_remaining");
            const auto values = get<std::vector<double>>(h, "holding", "values");
            if (rule.has_value() == values.has_value()) {
                throw ConfigError("holding: give exactly one of linear_in_remaining and values");
            }
            if (rule) {
                cfg.holding_rule = *rule;
            } else {
                cfg.holding = HoldingSchedule(*values);
            }
        } else {
            throw ConfigError("holding must be an array or an object");
        }
    }
    if (cfg.holding_rule) {
        cfg.holding = HoldingSchedule::linear_in_remaining(cfg.process, *cfg.holding_rule);
    }

    const json& solver = section(root, "solver");
    reject_unknown(solver, "solver", {"eps", "mvn_abs_tol", "mvn_seed"});
    cfg.solver.eps = overrides.eps ? overrides.eps : get<double>(solver, "solver", "eps");
    cfg.solver.mvn_abs_tol =
        overrides.mvn_abs_tol ? overrides.mvn_abs_tol : get<double>(solver, "solver", "mvn_abs_tol");
    if (auto s = get<std::uint64_t>(solver, "solver", "mvn_seed")) cfg.solver.mvn_seed = *s;

    const json& sim = section(root, "simulation");
    reject_unknown(sim, "simulation", {"n_paths", "seed"});
    if (auto n = get<std::size_t>(sim, "simulation", "n_paths")) cfg.simulation.n_paths = *n;
    if (auto s = get<std::uint64_t>(sim, "simulation", "seed")) cfg.simulation.seed = *s;
    if (overrides.n_paths) cfg.simulation.n_paths = *overrides.n_paths;
    if (overrides.seed) cfg.simulation.seed = *overrides.seed;

    const json& out = section(root, "output");
    reject_unknown(out, "output", {"format", "path"});
    if (auto f = get<std::string>(out, "output", "format")) cfg.output.format = parse_output_format(*f);
    if (auto p = get<std::string>(out, "output", "path")) cfg.output.path = *p;
    if (overrides.format) cfg.output.format = parse_output_format(*overrides.format);
    if (overrides.out) cfg.output.path = *overrides.out;

    cfg.validate();
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path, const ConfigOverrides& overrides) {
    if (path.empty()) return parse_config("", overrides);
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str(), overrides);
}

}  // namespace ouprocure
