#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ouprocure/process.hpp"
#include "ouprocure/solver.hpp"

namespace ouprocure {

/// A purchasing rule evaluated step by step along a price path.
struct Policy {
    enum class Kind { threshold, buy_now, buy_at_deadline, fixed_level };

    Kind kind = Kind::buy_at_deadline;
    ThresholdFunction thresholds;  ///< used by Kind::threshold
    double level = 0.0;            ///< used by Kind::fixed_level

    static Policy threshold(ThresholdFunction b);
    static Policy buy_now();
    static Policy buy_at_deadline();
    static Policy fixed_level(double c);

    /// Whether the item is bought at step n when the price is x. Always true
    /// at the deadline.
    [[nodiscard]] bool purchases(int n, int n_steps, double x) const;
};

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n_paths = 0;
    std::uint64_t seed = 0;
};

/// Monte Carlo estimate of Pr(tau = t_i) and of E(X_{t_i} | tau = t_i).
struct CrossingEstimate {
    int step = 0;
    std::size_t hits = 0;
    McEstimate prob;
    /// NaN mean when no path crossed at this step.
    McEstimate overshoot;
};

struct McCrossingStats {
    int start_step = 0;
    double start_price = 0.0;
    std::vector<CrossingEstimate> steps;  ///< i = start_step + 1 .. N
};

inline constexpr std::size_t kMinMcPaths = 1000;

/// Crossing-time frequencies and mean crossing prices under `boundary`.
McCrossingStats mc_crossing_stats(const ProcessParams& params, std::span<const double> boundary,
                                  double x, int n, std::size_t n_paths, std::uint64_t seed);

/// Expected purchase price plus remaining holding cost under `policy`,
/// starting at (x0, t_{n0}).
McEstimate mc_policy_cost(const ProcessParams& params, const HoldingSchedule& h,
                          const Policy& policy, double x0, int n0, std::size_t n_paths,
                          std::uint64_t seed);

/// Mean of cost(first) - cost(second) over common price paths, with the
/// standard error of the paired difference.
McEstimate mc_policy_cost_difference(const ProcessParams& params, const HoldingSchedule& h,
                                     const Policy& first, const Policy& second, double x0, int n0,
                                     std::size_t n_paths, std::uint64_t seed);

/// How the one-step expectation of the interpolated value is computed.
enum class TransitionRule {
    /// Closed-form Gaussian expectation of the piecewise-linear interpolant.
    exact_linear,
    /// Gauss-Hermite quadrature with quad_points nodes.
    gauss_hermite,
};

struct GridSpec {
    double x_min = 0.0;
    double x_max = 1.0;
    int n_points = 2048;
    int quad_points = 64;
    TransitionRule transition = TransitionRule::exact_linear;

    /// theta +- 8 stationary standard deviations, 2048 nodes, exact transition.
    static GridSpec defaults_for(const ProcessParams& params);

    [[nodiscard]] double step() const { return (x_max - x_min) / (n_points - 1); }
    void validate(const ProcessParams& params) const;
};

/// Stationary standard deviation of the price, sqrt(dt sigma^2 / (1 - a^2)).
double stationary_stddev(const ProcessParams& params);

struct GridSolution {
    GridSpec grid;
    std::vector<double> nodes;
    /// value[n][j] = V(nodes[j], t_n), n = 0..N
    std::vector<std::vector<double>> value;
    /// continuation[n][j] = V^C(nodes[j], t_n), n = 0..N-1
    std::vector<std::vector<double>> continuation;
    /// b_grid[n]; +inf at N
    std::vector<double> thresholds;

    /// Linear interpolation of V(., t_n) with the asymptotic extrapolation.
    [[nodiscard]] double value_at(int n, double x) const;
    [[nodiscard]] double continuation_at(int n, double x) const;

    double decay = 0.0;
    int n_steps = 0;
};

/// Backward induction on a price grid. Throws OracleError if a threshold is not bracketed by the grid.
GridSolution grid_dp_solve(const ProcessParams& params, const HoldingSchedule& h,
                           const GridSpec& grid);

}  // namespace ouprocure
