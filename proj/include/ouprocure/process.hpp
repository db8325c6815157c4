#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace ouprocure {

/// Parameters of the discretized mean-reverting price process
///
///   X_t = theta * kappa * dt + (1 - kappa * dt) * X_{t-dt} + sigma * eps_t,
///   eps_t ~ N(0, dt),
///
/// observed on the grid t_n = n * dt for n = 0..n_steps.
struct ProcessParams {
    double theta = 0.0;   ///< long-run mean price
    double kappa = 1.0;   ///< reversion rate (1/time)
    double sigma = 1.0;   ///< volatility (price / sqrt(time))
    double dt = 1.0;      ///< step length
    int n_steps = 1;      ///< horizon in steps, T = n_steps * dt

    /// One-step autoregressive coefficient 1 - dt * kappa.
    [[nodiscard]] double decay() const noexcept { return 1.0 - dt * kappa; }

    [[nodiscard]] double horizon() const noexcept { return dt * n_steps; }

    /// Throws ArgumentError naming the violated constraint.
    void validate() const;
};

/// Per-period holding cost rates h_{t_0} .. h_{t_{N-1}} (cost per unit time).
class HoldingSchedule {
public:
    HoldingSchedule() = default;
    explicit HoldingSchedule(std::vector<double> rates);

    /// h_{t_i} = coefficient * (t_N - t_i) with t_N - t_i measured in time units.
    static HoldingSchedule linear_in_remaining(const ProcessParams& params, double coefficient);

    /// h_{t_i} = coefficient * (N - i), counting remaining steps.
    static HoldingSchedule linear_in_steps_remaining(const ProcessParams& params,
                                                     double coefficient);

    [[nodiscard]] std::span<const double> rates() const noexcept { return rates_; }
    [[nodiscard]] std::size_t size() const noexcept { return rates_.size(); }
    [[nodiscard]] double operator[](std::size_t i) const { return rates_.at(i); }

    /// Pointwise scaled copy.
    [[nodiscard]] HoldingSchedule scaled(double factor) const;

    /// Weakly decreasing, nonnegative, one entry per period of `params`.
    void validate(const ProcessParams& params) const;

private:
    std::vector<double> rates_;
};

/// mu_{t_n,t_i}(x) = theta + (x - theta)(1 - dt K)^{i-n}.
double conditional_mean(const ProcessParams& params, double x, int n, int i);

/// sigma_{t_n,t_i}^2, the variance of X_{t_i} given X_{t_n}.
double conditional_variance(const ProcessParams& params, int n, int i);

/// Square root of conditional_variance.
double conditional_stddev(const ProcessParams& params, int n, int i);

/// Correlation between the standardized prices Z_{t_n,t_l} and Z_{t_n,t_k}
/// (n < l <= k). Does not depend on the start price or on sigma.
double standardized_covariance(const ProcessParams& params, int n, int l, int k);

/// Correlation matrix of (Z_{t_n,t_{n+1}}, ..., Z_{t_n,t_i}), order i - n.
Eigen::MatrixXd covariance_matrix(const ProcessParams& params, int n, int i);

/// Standardized thresholds beta_{t_n,t_l}(x) for l = n+1..i.
///
/// `boundary` is indexed by step and must cover steps n+1..i. Infinite
/// thresholds map to infinite levels. With `exclude_last` the entry for t_i
/// is replaced by -inf.
std::vector<double> standardized_thresholds(const ProcessParams& params, double x, int n, int i,
                                            std::span<const double> boundary, bool exclude_last);

/// Row-major matrix of simulated prices: one row per path, one column per
/// step from n0 to N (column 0 is the start price).
struct PathMatrix {
    std::size_t n_paths = 0;
    std::size_t n_cols = 0;
    std::vector<double> values;

    [[nodiscard]] double operator()(std::size_t path, std::size_t col) const {
        return values[path * n_cols + col];
    }
    [[nodiscard]] std::span<const double> row(std::size_t path) const {
        return {values.data() + path * n_cols, n_cols};
    }
};

/// Engine for one path. Keyed by (seed, path index) only, so any partition of
/// the path range over workers reproduces the same draws.
std::mt19937_64 path_engine(std::uint64_t seed, std::uint64_t path);

/// Fills `out` (length N - n0 + 1) with one path starting at x0 at step n0.
void simulate_path(const ProcessParams& params, double x0, int n0, std::uint64_t seed,
                   std::uint64_t path, std::span<double> out);

PathMatrix simulate_paths(const ProcessParams& params, double x0, int n0, std::size_t n_paths,
                          std::uint64_t seed);

}  // namespace ouprocure
