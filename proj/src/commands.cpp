#include "ouprocure/commands.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "ouprocure/crossing.hpp"
#include "ouprocure/errors.hpp"
#include "ouprocure/oracle.hpp"
#include "ouprocure/solver.hpp"

namespace ouprocure {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Comparisons against Monte Carlo use this many standard errors.
constexpr double kSeMultiple = 4.0;
// A check whose 4-SE band is wider than its resolution cannot confirm
// agreement and is reported as inconclusive instead of passed.
constexpr double kProbResolution = 0.01;
constexpr double kOvershootResolution = 0.05;
constexpr double kCostResolution = 0.02;
constexpr double kMinOvershootCheckProb = 0.01;
constexpr double kPerturbation = 0.25;
constexpr int kCorruptedStep = 5;

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

ThresholdFunction solve_config(const RunConfig& cfg) {
    return solve_thresholds(cfg.process, cfg.holding, cfg.eps(), cfg.accuracy());
}

// Solve with replaced process parameters and schedule, keeping the solver
// settings; eps falls back to the default of the new parameters.
ThresholdFunction solve_variant(const RunConfig& cfg, const ProcessParams& params,
                                const HoldingSchedule& h) {
    RunConfig variant = cfg;
    variant.process = params;
    variant.holding = h;
    return solve_config(variant);
}

std::vector<double> linspace(double lo, double hi, int count) {
    std::vector<double> xs(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
        xs[static_cast<std::size_t>(k)] =
            count == 1 ? lo : lo + (hi - lo) * static_cast<double>(k) / (count - 1);
    }
    return xs;
}

CheckStatus classify(double delta_excess, double std_error, double resolution) {
    if (delta_excess > 0.0) return CheckStatus::fail;
    if (kSeMultiple * std_error > resolution) return CheckStatus::inconclusive;
    return CheckStatus::pass;
}

}  // namespace

void Table::add_row(std::vector<Cell> row) {
    if (row.size() != columns.size()) throw ArgumentError("table row width differs from header");
    rows.push_back(std::move(row));
}

void Table::write_csv(std::ostream& out) const {
    for (std::size_t c = 0; c < columns.size(); ++c) {
        out << (c ? "," : "") << csv_escape(columns[c]);
    }
    out << '\n';
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out << ',';
            std::visit(
                [&](const auto& v) {
                    using T = std::decay_t<decltype(v)>;
                    if constexpr (std::is_same_v<T, double>) {
                        out << format_double(v);
                    } else if constexpr (std::is_same_v<T, bool>) {
                        out << (v ? "true" : "false");
                    } else if constexpr (std::is_same_v<T, std::string>) {
                        out << csv_escape(v);
                    } else {
                        out << v;
                    }
                },
                row[c]);
        }
        out << '\n';
    }
}

void Table::write_json(std::ostream& out) const {
    nlohmann::ordered_json records = nlohmann::ordered_json::array();
    for (const auto& row : rows) {
        nlohmann::ordered_json rec = nlohmann::ordered_json::object();
        for (std::size_t c = 0; c < row.size(); ++c) {
            std::visit(
                [&](const auto& v) {
                    using T = std::decay_t<decltype(v)>;
                    if constexpr (std::is_same_v<T, double>) {
                        rec[columns[c]] = std::isfinite(v) ? nlohmann::ordered_json(v) : nullptr;
                    } else {
                        rec[columns[c]] = v;
                    }
                },
                row[c]);
        }
        records.push_back(std::move(rec));
    }
    out << records.dump(2) << '\n';
}

void Table::write(std::ostream& out, OutputFormat format) const {
    if (format == OutputFormat::json) {
        write_json(out);
    } else {
        write_csv(out);
    }
}

Table cmd_solve(const RunConfig& cfg) {
    const ThresholdFunction b = solve_config(cfg);
    const ProcessParams& p = cfg.process;
    Table t{{"n", "t", "b", "x_lower", "upper", "iterations", "gap"}, {}};
    for (int n = 0; n <= p.n_steps; ++n) {
        const auto un = static_cast<std::size_t>(n);
        const BisectionRecord& rec = b.records[un];
        const bool last = n == p.n_steps;
        t.add_row({std::int64_t{n}, n * p.dt, b[un], last ? kNaN : rec.bracket.lower,
                   last ? std::numeric_limits<double>::infinity() : rec.bracket.upper,
                   std::int64_t{rec.iterations}, last ? kNaN : rec.gap});
    }
    return t;
}

SweepParameter parse_sweep_parameter(const std::string& name) {
    if (name == "theta") return SweepParameter::theta;
    if (name == "sigma") return SweepParameter::sigma;
    if (name == "dt_K_scale") return SweepParameter::dt_K_scale;
    if (name == "holding_scale") return SweepParameter::holding_scale;
    throw ArgumentError("unknown sweep parameter '" + name +
                        "' (expected theta, sigma, dt_K_scale or holding_scale)");
}

Table cmd_curves(const RunConfig& cfg, const Sweep& sweep) {
    if (sweep.values.empty()) throw ArgumentError("curves: sweep needs at least one value");
    static const char* names[] = {"theta", "sigma", "dt_K_scale", "holding_scale"};
    const std::string name = names[static_cast<int>(sweep.parameter)];
    Table t{{"parameter", "value", "n", "t", "b", "b_shifted"}, {}};
    for (double v : sweep.values) {
        ProcessParams p = cfg.process;
        HoldingSchedule h = cfg.holding;
        double shift = 0.0;
        switch (sweep.parameter) {
            case SweepParameter::theta:
                p.theta = v;
                break;
            case SweepParameter::holding_scale:
                h = cfg.holding.scaled(v);
                break;
            case SweepParameter::sigma:
                p.theta = 0.0;
                p.sigma = v;
                h = HoldingSchedule::linear_in_remaining(p, 0.1 * v);
                shift = cfg.process.theta;
                break;
            case SweepParameter::dt_K_scale:
                if (!(v > 0.0)) throw ArgumentError("curves: dt_K_scale values must be positive");
                p.theta = 0.0;
                p.dt = cfg.process.dt * v;
                p.kappa = cfg.process.kappa / v;
                h = HoldingSchedule::linear_in_steps_remaining(p, 0.1 / std::sqrt(p.dt));
                shift = cfg.process.theta;
                break;
        }
        const ThresholdFunction b = solve_variant(cfg, p, h);
        for (int n = 0; n <= p.n_steps; ++n) {
            const double bn = b[static_cast<std::size_t>(n)];
            t.add_row({name, v, std::int64_t{n}, n * p.dt, bn, bn + shift});
        }
    }
    return t;
}

Table cmd_value(const RunConfig& cfg, const ValueRange& range) {
    const ProcessParams& p = cfg.process;
    if (range.step < 0 || range.step >= p.n_steps) {
        throw ArgumentError("value: step must lie in [0, N - 1]");
    }
    if (range.n_points < 2) throw ArgumentError("value: at least two points required");
    const ThresholdFunction b = solve_config(cfg);
    const auto n = static_cast<std::size_t>(range.step);
    const double x_lower = lower_price_bound(p, cfg.holding, range.step, b[n + 1]);
    const double x_upper = upper_price_bound(p, cfg.holding);
    const double lo = range.x_min.value_or(x_lower - p.sigma);
    const double hi = range.x_max.value_or(x_upper + 3.0 * p.sigma);
    if (!(lo < hi)) throw ArgumentError("value: x range is empty");
    const double tail = holding_tail(cfg.holding, p.dt, range.step);
    const MvnAccuracy acc = cfg.accuracy();
    Table t{{"x", "continuation", "purchase", "in_stopping_region", "b", "x_lower", "x_upper"}, {}};
    for (double x : linspace(lo, hi, range.n_points)) {
        t.add_row({x, continuation_value(p, cfg.holding, x, range.step, b.b, acc), x + tail,
                   x <= b[n], b[n], x_lower, x_upper});
    }
    return t;
}

Table cmd_simulate(const RunConfig& cfg, double x, int n) {
    const ProcessParams& p = cfg.process;
    const ThresholdFunction b = solve_config(cfg);
    const McCrossingStats mc =
        mc_crossing_stats(p, b.b, x, n, cfg.simulation.n_paths, cfg.simulation.seed);
    const CrossingDistribution dist = crossing_distribution(p, x, n, b.b, cfg.accuracy());
    Table t{{"i", "t", "p_mc", "p_se", "p", "e_mc", "e_se", "e", "hits"}, {}};
    for (std::size_t k = 0; k < mc.steps.size(); ++k) {
        const CrossingEstimate& est = mc.steps[k];
        t.add_row({std::int64_t{est.step}, est.step * p.dt, est.prob.mean, est.prob.std_error,
                   dist.probs[k], est.overshoot.mean, est.overshoot.std_error, dist.overshoots[k],
                   static_cast<std::int64_t>(est.hits)});
    }
    return t;
}

std::string to_string(CheckStatus s) {
    switch (s) {
        case CheckStatus::pass: return "pass";
        case CheckStatus::fail: return "fail";
        case CheckStatus::inconclusive: return "inconclusive";
    }
    return "fail";
}

bool VerifyReport::passed() const {
    return std::none_of(checks.begin(), checks.end(),
                        [](const CheckResult& c) { return c.status == CheckStatus::fail; });
}

Table VerifyReport::table() const {
    Table t{{"check", "status", "delta", "tolerance", "std_error", "detail"}, {}};
    for (const auto& c : checks) {
        t.add_row({c.name, to_string(c.status), c.delta, c.tolerance, c.std_error, c.detail});
    }
    return t;
}

VerifyReport cmd_verify(const RunConfig& cfg, const VerifyOptions& options) {
    const ProcessParams& p = cfg.process;
    const HoldingSchedule& h = cfg.holding;
    const MvnAccuracy acc = cfg.accuracy();
    const std::size_t n_paths = cfg.simulation.n_paths;
    const std::uint64_t seed = cfg.simulation.seed;
    const double x0 = options.x0.value_or(p.theta + 2.0 * p.sigma);

    ThresholdFunction b = solve_config(cfg);
    if (options.corrupt_b5 != 0.0) {
        if (p.n_steps <= kCorruptedStep) {
            throw ArgumentError("verify: corrupting b(t_5) needs N > 5");
        }
        b.b[kCorruptedStep] += options.corrupt_b5;
    }

    VerifyReport report;
    auto add = [&](std::string name, CheckStatus status, double delta, double tol, double se,
                   std::string detail = {}) {
        report.checks.push_back({std::move(name), status, delta, tol, se, std::move(detail)});
    };

    // Crossing distribution against simulated first crossings.
    const CrossingDistribution dist = crossing_distribution(p, x0, 0, b.b, acc);
    double total = 0.0;
    for (double q : dist.probs) total += q;
    const double closure_tol = 10.0 * acc.abs_tol;
    add("probability_closure", std::abs(total - 1.0) <= closure_tol ? CheckStatus::pass : CheckStatus::fail,
        total - 1.0, closure_tol, 0.0);

    const McCrossingStats mc = mc_crossing_stats(p, b.b, x0, 0, n_paths, seed);
    for (std::size_t k = 0; k < mc.steps.size(); ++k) {
        const CrossingEstimate& est = mc.steps[k];
        const std::string suffix = "_" + std::to_string(est.step);
        const double prob = dist.probs[k];
        const double null_se = std::sqrt(prob * (1.0 - prob) / static_cast<double>(n_paths));
        const double se = std::max(null_se, est.prob.std_error);
        const double delta = est.prob.mean - prob;
        add("crossing_probability" + suffix,
            classify(std::abs(delta) - kSeMultiple * se, se, kProbResolution), delta,
            kSeMultiple * se, se);
        if (prob >= kMinOvershootCheckProb) {
            const double ose = est.overshoot.std_error;
            const double odelta = est.overshoot.mean - dist.overshoots[k];
            const CheckStatus st = std::isfinite(ose)
                                       ? classify(std::abs(odelta) - kSeMultiple * ose, ose,
                                                  kOvershootResolution)
                                       : CheckStatus::inconclusive;
            add("overshoot" + suffix, st, odelta, kSeMultiple * ose, ose);
        }
    }

    // Grid backward induction.
    const GridSpec spec = GridSpec::defaults_for(p);
    const GridSolution grid = grid_dp_solve(p, h, spec);
    GridSpec coarse_spec = spec;
    coarse_spec.n_points = spec.n_points / 2;
    const GridSolution coarse = grid_dp_solve(p, h, coarse_spec);
    double threshold_gap = 0.0;
    int worst_step = 0;
    for (int n = 0; n < p.n_steps; ++n) {
        const double d = std::abs(grid.thresholds[static_cast<std::size_t>(n)] - b[static_cast<std::size_t>(n)]);
        if (d > threshold_gap) {
            threshold_gap = d;
            worst_step = n;
        }
    }
    const double threshold_tol = std::max(spec.step(), 1e-2);
    add("grid_thresholds", threshold_gap <= threshold_tol ? CheckStatus::pass : CheckStatus::fail,
        threshold_gap, threshold_tol, 0.0, "worst step " + std::to_string(worst_step));

    const double sd = stationary_stddev(p);
    double value_gap = 0.0;
    double interp_bound = 0.0;
    for (double x : linspace(b[0] + 0.1 * sd, p.theta + 3.0 * sd, 10)) {
        const double fine = grid.value_at(0, x);
        value_gap = std::max(value_gap, std::abs(fine - value(p, h, x, 0, b.b, acc)));
        interp_bound = std::max(interp_bound, std::abs(fine - coarse.value_at(0, x)));
    }
    const double value_tol = std::max(2.0 * interp_bound, 1e-3);
    add("grid_values", value_gap <= value_tol ? CheckStatus::pass : CheckStatus::fail, value_gap,
        value_tol, 0.0);

    // Policy costs.
    const Policy optimal = Policy::threshold(b);
    const McEstimate cost = mc_policy_cost(p, h, optimal, x0, 0, n_paths, seed);
    const double v0 = value(p, h, x0, 0, b.b, acc);
    add("policy_value",
        classify(std::abs(cost.mean - v0) - kSeMultiple * cost.std_error, cost.std_error,
                 kCostResolution),
        cost.mean - v0, kSeMultiple * cost.std_error, cost.std_error);

    ThresholdFunction grid_b = b;
    grid_b.b = grid.thresholds;
    const std::pair<const char*, Policy> rivals[] = {
        {"dominance_buy_now", Policy::buy_now()},
        {"dominance_buy_at_deadline", Policy::buy_at_deadline()},
        {"dominance_grid_policy", Policy::threshold(grid_b)},
    };
    for (const auto& [name, rival] : rivals) {
        const McEstimate d = mc_policy_cost_difference(p, h, optimal, rival, x0, 0, n_paths, seed);
        add(name, classify(d.mean - kSeMultiple * d.std_error, d.std_error, kCostResolution), d.mean,
            kSeMultiple * d.std_error, d.std_error, "cost(b) - cost(rival)");
    }
    for (double shift : {kPerturbation, -kPerturbation}) {
        ThresholdFunction moved = b;
        for (int n = 0; n < p.n_steps; ++n) moved.b[static_cast<std::size_t>(n)] += shift;
        const McEstimate d = mc_policy_cost_difference(p, h, Policy::threshold(moved), optimal, x0,
                                                       0, n_paths, seed);
        add(shift > 0 ? "perturbation_plus" : "perturbation_minus",
            classify(-d.mean - kSeMultiple * d.std_error, d.std_error, kCostResolution), d.mean,
            kSeMultiple * d.std_error, d.std_error, "cost(b shifted) - cost(b)");
    }
    return report;
}

}  // namespace ouprocure
