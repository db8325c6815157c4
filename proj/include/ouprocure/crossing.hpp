#pragma once

#include <span>
#include <vector>

#include "ouprocure/mvn.hpp"
#include "ouprocure/process.hpp"

namespace ouprocure {

/// Distribution of the first crossing time tau (first step after n where the
/// price is at or below the boundary) for a walk started at price x at step n.
/// Entry k of every vector refers to step i = start_step + 1 + k.
struct CrossingDistribution {
    int start_step = 0;
    double start_price = 0.0;
    /// Pr(tau = t_i)
    std::vector<double> probs;
    /// E(X_{t_i} | tau = t_i); NaN where probs[k] < 1e-12
    std::vector<double> overshoots;
    /// probs[k] * overshoots[k], assembled without dividing by probs[k]
    std::vector<double> weighted_overshoots;
    /// Pr(tau > t_i)
    std::vector<double> survivals;

    [[nodiscard]] int step_of(std::size_t k) const { return start_step + 1 + static_cast<int>(k); }
};

/// Survival probability of the event {tau > t_i} (or {tau > t_{i-1}} with
/// exclude_last) together with the numerator of the truncated mean of the
/// standardized price at t_i on that event:
///
///   tallis = sum_l corr(Z_i, Z_l) phi(beta_l) F(-A_l, M_l).
struct SurvivorMoments {
    double survival = 0.0;
    double tallis = 0.0;
};

SurvivorMoments survivor_moments(const ProcessParams& params, double x, int n, int i,
                                 std::span<const double> boundary, bool exclude_last,
                                 const MvnAccuracy& acc);

/// Pr(tau = t_i) as the difference of two orthant probabilities.
double crossing_probability(const ProcessParams& params, double x, int n, int i,
                            std::span<const double> boundary, const MvnAccuracy& acc);

/// E(X_{t_i} | tau > t_i), or E(X_{t_i} | tau > t_{i-1}) with exclude_last.
/// Throws DegenerateConditioningError if the conditioning event has
/// probability below 1e-300.
double truncated_survivor_mean(const ProcessParams& params, double x, int n, int i,
                               std::span<const double> boundary, bool exclude_last,
                               const MvnAccuracy& acc);

/// Pr(tau = t_i | tau > t_{i-1}).
double conditional_crossing_probability(const ProcessParams& params, double x, int n, int i,
                                        std::span<const double> boundary,
                                        const MvnAccuracy& acc);

/// E(X_{t_i} | tau = t_i) by the total expectation identity. Throws
/// DegenerateConditioningError when Pr(tau = t_i) < 1e-12; callers that
/// only need the product with the probability should use
/// crossing_distribution().weighted_overshoots.
double overshoot_expectation(const ProcessParams& params, double x, int n, int i,
                             std::span<const double> boundary, const MvnAccuracy& acc);

/// All crossing probabilities, survivals and overshoots for i = n+1..N.
CrossingDistribution crossing_distribution(const ProcessParams& params, double x, int n,
                                           std::span<const double> boundary,
                                           const MvnAccuracy& acc);

}  // namespace ouprocure
