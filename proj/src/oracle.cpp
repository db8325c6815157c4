#include "ouprocure/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ouprocure/errors.hpp"
#include "ouprocure/mvn.hpp"
#include "ouprocure/quadrature.hpp"

namespace ouprocure {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_start(const ProcessParams& params, int n, std::size_t n_paths) {
    if (n < 0 || n >= params.n_steps) throw ArgumentError("Monte Carlo start step out of range");
    if (n_paths < kMinMcPaths) {
        throw ArgumentError("Monte Carlo estimates need at least 1000 paths");
    }
}

// Welford accumulator.
struct Moments {
    std::size_t count = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double v) {
        ++count;
        const double delta = v - mean;
        mean += delta / static_cast<double>(count);
        m2 += delta * (v - mean);
    }
    [[nodiscard]] double std_error() const {
        if (count < 2) return std::numeric_limits<double>::infinity();
        return std::sqrt(m2 / static_cast<double>(count - 1) / static_cast<double>(count));
    }
};

}  // namespace

Policy Policy::threshold(ThresholdFunction b) {
    Policy p;
    p.kind = Kind::threshold;
    p.thresholds = std::move(b);
    return p;
}

Policy Policy::buy_now() {
    Policy p;
    p.kind = Kind::buy_now;
    return p;
}

Policy Policy::buy_at_deadline() {
    Policy p;
    p.kind = Kind::buy_at_deadline;
    return p;
}

Policy Policy::fixed_level(double c) {
    Policy p;
    p.kind = Kind::fixed_level;
    p.level = c;
    return p;
}

bool Policy::purchases(int n, int n_steps, double x) const {
    if (n >= n_steps) return true;
    switch (kind) {
        case Kind::threshold: return x <= thresholds.b.at(static_cast<std::size_t>(n));
        case Kind::buy_now: return true;
        case Kind::buy_at_deadline: return false;
        case Kind::fixed_level: return x <= level;
    }
    return true;
}

McCrossingStats mc_crossing_stats(const ProcessParams& params, std::span<const double> boundary,
                                  double x, int n, std::size_t n_paths, std::uint64_t seed) {
    check_start(params, n, n_paths);
    if (boundary.size() != static_cast<std::size_t>(params.n_steps) + 1) {
        throw ArgumentError("mc_crossing_stats: boundary must have N + 1 entries");
    }
    const auto horizon = static_cast<std::size_t>(params.n_steps - n);
    std::vector<Moments> at_step(horizon);
    std::vector<double> path(horizon + 1);
    for (std::size_t p = 0; p < n_paths; ++p) {
        simulate_path(params, x, n, seed, p, path);
        for (std::size_t c = 1; c <= horizon; ++c) {
            const auto i = static_cast<std::size_t>(n) + c;
            if (c == horizon || path[c] <= boundary[i]) {
                at_step[c - 1].add(path[c]);
                break;
            }
        }
    }
    McCrossingStats stats;
    stats.start_step = n;
    stats.start_price = x;
    stats.steps.resize(horizon);
    const auto total = static_cast<double>(n_paths);
    for (std::size_t k = 0; k < horizon; ++k) {
        CrossingEstimate& est = stats.steps[k];
        est.step = n + 1 + static_cast<int>(k);
        est.hits = at_step[k].count;
        const double p = static_cast<double>(est.hits) / total;
        est.prob = {p, std::sqrt(p * (1.0 - p) / total), n_paths, seed};
        est.overshoot = {est.hits > 0 ? at_step[k].mean : kNaN, at_step[k].std_error(), n_paths,
                         seed};
    }
    return stats;
}

namespace {

std::vector<double> holding_tails(const ProcessParams& params, const HoldingSchedule& h) {
    std::vector<double> tails(static_cast<std::size_t>(params.n_steps) + 1);
    for (int m = 0; m <= params.n_steps; ++m) {
        tails[static_cast<std::size_t>(m)] = holding_tail(h, params.dt, m);
    }
    return tails;
}

// Cost of `policy` along one path whose column 0 is the start step n0.
double path_cost(const Policy& policy, int n_steps, int n0, std::span<const double> path,
                 const std::vector<double>& tails) {
    for (std::size_t c = 0; c < path.size(); ++c) {
        const int step = n0 + static_cast<int>(c);
        if (policy.purchases(step, n_steps, path[c])) {
            return path[c] + tails[static_cast<std::size_t>(step)];
        }
    }
    return path.back();
}

}  // namespace

McEstimate mc_policy_cost(const ProcessParams& params, const HoldingSchedule& h,
                          const Policy& policy, double x0, int n0, std::size_t n_paths,
                          std::uint64_t seed) {
    check_start(params, n0, n_paths);
    h.validate(params);
    const std::vector<double> tails = holding_tails(params, h);
    if (policy.purchases(n0, params.n_steps, x0)) {
        return {x0 + tails[static_cast<std::size_t>(n0)], 0.0, n_paths, seed};
    }
    std::vector<double> path(static_cast<std::size_t>(params.n_steps - n0) + 1);
    Moments cost;
    for (std::size_t p = 0; p < n_paths; ++p) {
        simulate_path(params, x0, n0, seed, p, path);
        cost.add(path_cost(policy, params.n_steps, n0, path, tails));
    }
    return {cost.mean, cost.std_error(), n_paths, seed};
}

McEstimate mc_policy_cost_difference(const ProcessParams& params, const HoldingSchedule& h,
                                     const Policy& first, const Policy& second, double x0, int n0,
                                     std::size_t n_paths, std::uint64_t seed) {
    check_start(params, n0, n_paths);
    h.validate(params);
    const std::vector<double> tails = holding_tails(params, h);
    std::vector<double> path(static_cast<std::size_t>(params.n_steps - n0) + 1);
    Moments diff;
    for (std::size_t p = 0; p < n_paths; ++p) {
        simulate_path(params, x0, n0, seed, p, path);
        diff.add(path_cost(first, params.n_steps, n0, path, tails) -
                 path_cost(second, params.n_steps, n0, path, tails));
    }
    const double se = diff.m2 > 0.0 ? diff.std_error() : 0.0;
    return {diff.mean, se, n_paths, seed};
}

double stationary_stddev(const ProcessParams& params) {
    const double a = params.decay();
    return std::sqrt(params.dt * params.sigma * params.sigma / (1.0 - a * a));
}

GridSpec GridSpec::defaults_for(const ProcessParams& params) {
    const double spread = 8.0 * stationary_stddev(params);
    return {params.theta - spread, params.theta + spread, 2048, 64, TransitionRule::exact_linear};
}

void GridSpec::validate(const ProcessParams& params) const {
    if (!(x_min < x_max)) throw ArgumentError("grid: x_min must be below x_max");
    if (n_points < 64) throw ArgumentError("grid: at least 64 nodes required");
    if (transition == TransitionRule::gauss_hermite && quad_points < 2) throw ArgumentError("grid: at least 2 quadrature nodes required");
    const double spread = 6.0 * stationary_stddev(params);
    if (x_min > params.theta - spread || x_max < params.theta + spread) {
        throw ArgumentError("grid must span theta +- 6 stationary standard deviations");
    }
}

namespace {

// Piecewise-linear interpolation on a uniform grid; slope 1 below the grid
// (stopping region) and `upper_slope` above it.
double interpolate(const std::vector<double>& nodes, const std::vector<double>& values,
                   double upper_slope, double x) {
    const double x0 = nodes.front();
    const double x1 = nodes.back();
    if (x <= x0) return values.front() + (x - x0);
    if (x >= x1) return values.back() + upper_slope * (x - x1);
    const double h = (x1 - x0) / static_cast<double>(nodes.size() - 1);
    auto j = static_cast<std::size_t>((x - x0) / h);
    j = std::min(j, nodes.size() - 2);
    const double t = (x - nodes[j]) / h;
    return values[j] + t * (values[j + 1] - values[j]);
}

// E[L(Y)] for Y ~ N(mean, sd^2) and L the interpolant above. On a piece
// alpha + beta y over [lo, hi] with u = (y - mean) / sd,
//   E[(alpha + beta Y) 1{lo < Y <= hi}]
//     = (alpha + beta mean)(Phi(u_hi) - Phi(u_lo)) + beta sd (phi(u_lo) - phi(u_hi)).
double linear_gaussian_expectation(const std::vector<double>& nodes,
                                   const std::vector<double>& values, double upper_slope,
                                   double mean, double sd) {
    constexpr double kCut = 12.0;
    const std::size_t last = nodes.size() - 1;
    auto piece = [&](double alpha, double beta, double u_lo, double u_hi) {
        const double mass = std_normal_cdf(u_hi) - std_normal_cdf(u_lo);
        return (alpha + beta * mean) * mass +
               beta * sd * (std_normal_pdf(u_lo) - std_normal_pdf(u_hi));
    };
    const double inf = std::numeric_limits<double>::infinity();
    const double u_first = (nodes.front() - mean) / sd;
    const double u_last = (nodes.back() - mean) / sd;
    double total = 0.0;
    // Slope-one ray below the grid and the asymptotic ray above it.
    if (u_first > -kCut) {
        total += piece(values.front() - nodes.front(), 1.0, -inf, u_first);
    }
    if (u_last < kCut) {
        total += piece(values.back() - upper_slope * nodes.back(), upper_slope, u_last, inf);
    }
    const double step = (nodes.back() - nodes.front()) / static_cast<double>(last);
    const double lo_x = std::max(nodes.front(), mean - kCut * sd);
    const double hi_x = std::min(nodes.back(), mean + kCut * sd);
    if (lo_x >= hi_x) return total;
    const auto j0 = std::min(static_cast<std::size_t>((lo_x - nodes.front()) / step), last - 1);
    const auto j1 = std::min(static_cast<std::size_t>(std::ceil((hi_x - nodes.front()) / step)), last);
    double u_prev = (nodes[j0] - mean) / sd;
    double cdf_prev = std_normal_cdf(u_prev);
    double pdf_prev = std_normal_pdf(u_prev);
    for (std::size_t j = j0; j < j1; ++j) {
        const double u_next = (nodes[j + 1] - mean) / sd;
        const double cdf_next = std_normal_cdf(u_next);
        const double pdf_next = std_normal_pdf(u_next);
        const double beta = (values[j + 1] - values[j]) / step;
        const double alpha = values[j] - beta * nodes[j];
        total += (alpha + beta * mean) * (cdf_next - cdf_prev) + beta * sd * (pdf_prev - pdf_next);
        u_prev = u_next;
        cdf_prev = cdf_next;
        pdf_prev = pdf_next;
    }
    return total;
}

}  // namespace

double GridSolution::value_at(int n, double x) const {
    return interpolate(nodes, value.at(static_cast<std::size_t>(n)),
                       std::pow(decay, n_steps - n), x);
}

double GridSolution::continuation_at(int n, double x) const {
    return interpolate(nodes, continuation.at(static_cast<std::size_t>(n)),
                       std::pow(decay, n_steps - n), x);
}

GridSolution grid_dp_solve(const ProcessParams& params, const HoldingSchedule& h,
                           const GridSpec& grid) {
    params.validate();
    h.validate(params);
    grid.validate(params);

    GridSolution sol;
    sol.grid = grid;
    sol.decay = params.decay();
    sol.n_steps = params.n_steps;
    const auto points = static_cast<std::size_t>(grid.n_points);
    sol.nodes.resize(points);
    for (std::size_t j = 0; j < points; ++j) {
        sol.nodes[j] = grid.x_min + grid.step() * static_cast<double>(j);
    }
    const auto steps = static_cast<std::size_t>(params.n_steps);
    sol.value.assign(steps + 1, std::vector<double>(points));
    sol.continuation.assign(steps, std::vector<double>(points));
    sol.thresholds.assign(steps + 1, std::numeric_limits<double>::infinity());
    sol.value[steps] = sol.nodes;

    const bool exact = grid.transition == TransitionRule::exact_linear;
    const QuadratureRule rule =
        exact ? QuadratureRule{} : gauss_hermite_normal(grid.quad_points);
    const double noise = params.sigma * std::sqrt(params.dt);
    const double a = params.decay();
    for (int n = params.n_steps - 1; n >= 0; --n) {
        const auto un = static_cast<std::size_t>(n);
        const double tail = holding_tail(h, params.dt, n);
        const double upper_slope = std::pow(a, params.n_steps - n - 1);
        const auto& next = sol.value[un + 1];
        auto& cont = sol.continuation[un];
        auto& val = sol.value[un];
        for (std::size_t j = 0; j < points; ++j) {
            const double mean = params.theta + (sol.nodes[j] - params.theta) * a;
            double expectation = 0.0;
            if (exact) {
                expectation = linear_gaussian_expectation(sol.nodes, next, upper_slope, mean, noise);
            } else {
                for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
                    expectation += rule.weights[q] * interpolate(sol.nodes, next, upper_slope,
                                                                 mean + noise * rule.nodes[q]);
                }
            }
            cont[j] = expectation;
            val[j] = std::min(expectation, sol.nodes[j] + tail);
        }
        // The gap x + H_n - V^C(x) increases in x; locate its first sign change.
        double root = std::numeric_limits<double>::quiet_NaN();
        for (std::size_t j = 0; j + 1 < points; ++j) {
            const double g0 = sol.nodes[j] + tail - cont[j];
            const double g1 = sol.nodes[j + 1] + tail - cont[j + 1];
            if (g0 <= 0.0 && g1 > 0.0) {
                root = sol.nodes[j] + (sol.nodes[j + 1] - sol.nodes[j]) * (-g0) / (g1 - g0);
                break;
            }
        }
        if (std::isnan(root)) {
            std::ostringstream msg;
            msg << "grid_dp_solve: threshold at step " << n << " not bracketed by [" << grid.x_min
                << ", " << grid.x_max << "]; widen the grid";
            throw OracleError(msg.str());
        }
        sol.thresholds[un] = root;
    }
    return sol;
}

}  // namespace ouprocure
