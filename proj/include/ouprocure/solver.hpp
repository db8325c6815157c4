#pragma once

#include <span>
#include <vector>

#include "ouprocure/mvn.hpp"
#include "ouprocure/process.hpp"

namespace ouprocure {

/// Bisection bracket for the threshold at one step.
struct BracketBounds {
    double lower = 0.0;
    double upper = 0.0;
};

/// Diagnostics of the threshold search at one step.
struct BisectionRecord {
    int step = 0;
    BracketBounds bracket;
    int iterations = 0;
    /// x + H_n - V^C(x, t_n) at the returned threshold
    double gap = 0.0;
};

/// Purchase thresholds b(t_0..t_N); b[N] = +inf.
struct ThresholdFunction {
    std::vector<double> b;
    double eps = 0.0;
    /// One record per step, indexed by step (empty bracket at N).
    std::vector<BisectionRecord> records;

    [[nodiscard]] std::span<const double> values() const noexcept { return b; }
    [[nodiscard]] int n_steps() const noexcept { return static_cast<int>(b.size()) - 1; }
    [[nodiscard]] double operator[](std::size_t n) const { return b.at(n); }
};

/// V(x, T) = x.
double terminal_value(double x) noexcept;

/// H_n = dt * sum_{i=n}^{N-1} h_{t_i}; H_N = 0.
double holding_tail(const HoldingSchedule& h, double dt, int n);

/// Expected cost of waiting at (x, t_n) and following `boundary` afterwards.
double continuation_value(const ProcessParams& params, const HoldingSchedule& h, double x, int n,
                          std::span<const double> boundary, const MvnAccuracy& acc);

/// Optimal cost at (x, t_n) given the boundary; x <= b(t_n) purchases.
double value(const ProcessParams& params, const HoldingSchedule& h, double x, int n,
             std::span<const double> boundary, const MvnAccuracy& acc);

/// b(t_{N-1}) = theta - h_{t_{N-1}} / kappa.
double last_period_threshold(const ProcessParams& params, const HoldingSchedule& h);

/// Price above which purchasing is never optimal before the deadline,
/// theta - h_{t_{N-1}} / kappa.
double upper_price_bound(const ProcessParams& params, const HoldingSchedule& h);

/// Price x^L(t_n) below which purchasing is always optimal. `b_next` may be
/// +inf (at n = N - 1).
double lower_price_bound(const ProcessParams& params, const HoldingSchedule& h, int n,
                         double b_next);

/// Bracket [x^L(t_n), min(b(t_{n+1}), x^H)] for the threshold at step n.
BracketBounds threshold_bounds(const ProcessParams& params, const HoldingSchedule& h, int n,
                               double b_next);

/// 1e-6 * max(1, |theta|).
double default_eps(const ProcessParams& params) noexcept;

inline constexpr int kDefaultMaxBisections = 200;
/// Doublings of the bracket allowed when 1 - dt K <= 0.
inline constexpr int kMaxBracketExpansions = 40;

/// Backward bisection for the optimal thresholds. Requires
/// acc.abs_tol <= eps / 100. Throws SolverError when a bracket does not
/// contain a sign change or the iteration cap is exceeded. When
/// 1 - dt K <= 0 the closed-form bracket is widened until the gap changes
/// sign.
ThresholdFunction solve_thresholds(const ProcessParams& params, const HoldingSchedule& h,
                                   double eps, const MvnAccuracy& acc,
                                   int max_iterations = kDefaultMaxBisections);

}  // namespace ouprocure
