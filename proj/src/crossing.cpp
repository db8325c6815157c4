#include "ouprocure/crossing.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "ouprocure/errors.hpp"

namespace ouprocure {

namespace {

constexpr double kMinOvershootProb = 1e-12;
constexpr double kMinSurvival = 1e-300;

void check_boundary(const ProcessParams& params, int n, int i, std::span<const double> boundary) {
    if (n < 0 || i <= n || i > params.n_steps) {
        std::ostringstream msg;
        msg << "crossing: require 0 <= n < i <= N, got n=" << n << ", i=" << i;
        throw ArgumentError(msg.str());
    }
    if (boundary.size() != static_cast<std::size_t>(params.n_steps) + 1) {
        throw ArgumentError("crossing: boundary must have N + 1 entries");
    }
    for (int l = n + 1; l <= i; ++l) {
        if (std::isnan(boundary[static_cast<std::size_t>(l)])) {
            throw ArgumentError("crossing: boundary undefined at step " + std::to_string(l));
        }
    }
}

std::vector<double> negated(std::span<const double> v) {
    std::vector<double> out(v.size());
    for (std::size_t k = 0; k < v.size(); ++k) out[k] = -v[k];
    return out;
}

// Both variants share the correlation matrix and the partial correlation
// matrices, so they are computed together.
struct MomentPair {
    SurvivorMoments full;
    SurvivorMoments before;
};

MomentPair moment_pair(const ProcessParams& params, double x, int n, int i,
                       std::span<const double> boundary, const MvnAccuracy& acc,
                       bool want_full, bool want_before) {
    const Eigen::MatrixXd corr = covariance_matrix(params, n, i);
    const std::vector<double> beta = standardized_thresholds(params, x, n, i, boundary, false);
    const std::vector<double> beta_hat = standardized_thresholds(params, x, n, i, boundary, true);
    const auto d = static_cast<Eigen::Index>(beta.size());
    const Eigen::Index last = d - 1;

    MomentPair out;
    if (want_full) out.full.survival = mvn_cdf(negated(beta), corr, acc);
    if (want_before) out.before.survival = mvn_cdf(negated(beta_hat), corr, acc);

    for (Eigen::Index l = 0; l < d; ++l) {
        const double level = beta[static_cast<std::size_t>(l)];
        const double density = std_normal_pdf(level);
        if (density == 0.0) continue;
        const double weight = corr(last, l) * density;
        if (d == 1) {
            // No remaining coordinates: the empty orthant has probability one.
            if (want_full) out.full.tallis += weight;
            continue;
        }
        const Eigen::MatrixXd partial = partial_correlation_matrix(corr, l);
        if (want_full) {
            const auto alpha = conditional_truncation_coords(beta, corr, l, false);
            out.full.tallis += weight * mvn_cdf(negated(alpha), partial, acc);
        }
        if (want_before && l != last) {
            const auto alpha_hat = conditional_truncation_coords(beta_hat, corr, l, true);
            out.before.tallis += weight * mvn_cdf(negated(alpha_hat), partial, acc);
        }
    }
    return out;
}

}  // namespace

SurvivorMoments survivor_moments(const ProcessParams& params, double x, int n, int i,
                                 std::span<const double> boundary, bool exclude_last,
                                 const MvnAccuracy& acc) {
    check_boundary(params, n, i, boundary);
    const MomentPair pair = moment_pair(params, x, n, i, boundary, acc, !exclude_last, exclude_last);
    return exclude_last ? pair.before : pair.full;
}

double crossing_probability(const ProcessParams& params, double x, int n, int i,
                            std::span<const double> boundary, const MvnAccuracy& acc) {
    check_boundary(params, n, i, boundary);
    const Eigen::MatrixXd corr = covariance_matrix(params, n, i);
    const auto beta = standardized_thresholds(params, x, n, i, boundary, false);
    const auto beta_hat = standardized_thresholds(params, x, n, i, boundary, true);
    const double p = mvn_cdf(negated(beta_hat), corr, acc) - mvn_cdf(negated(beta), corr, acc);
    return std::max(p, 0.0);
}

double truncated_survivor_mean(const ProcessParams& params, double x, int n, int i,
                               std::span<const double> boundary, bool exclude_last,
                               const MvnAccuracy& acc) {
    const SurvivorMoments m = survivor_moments(params, x, n, i, boundary, exclude_last, acc);
    if (!(m.survival >= kMinSurvival)) {
        throw DegenerateConditioningError("truncated_survivor_mean: conditioning event has zero probability");
    }
    return conditional_mean(params, x, n, i) +
           conditional_stddev(params, n, i) * m.tallis / m.survival;
}

double conditional_crossing_probability(const ProcessParams& params, double x, int n, int i,
                                        std::span<const double> boundary,
                                        const MvnAccuracy& acc) {
    check_boundary(params, n, i, boundary);
    const Eigen::MatrixXd corr = covariance_matrix(params, n, i);
    const auto beta = standardized_thresholds(params, x, n, i, boundary, false);
    const auto beta_hat = standardized_thresholds(params, x, n, i, boundary, true);
    const double before = mvn_cdf(negated(beta_hat), corr, acc);
    if (!(before >= kMinSurvival)) {
        throw DegenerateConditioningError(
            "conditional_crossing_probability: zero survival up to the previous step");
    }
    const double p = std::max(before - mvn_cdf(negated(beta), corr, acc), 0.0);
    return std::min(p / before, 1.0);
}

double overshoot_expectation(const ProcessParams& params, double x, int n, int i,
                             std::span<const double> boundary, const MvnAccuracy& acc) {
    check_boundary(params, n, i, boundary);
    const MomentPair m = moment_pair(params, x, n, i, boundary, acc, true, true);
    const double p = m.before.survival - m.full.survival;
    if (!(p >= kMinOvershootProb)) {
        std::ostringstream msg;
        msg << "overshoot_expectation: crossing probability " << p << " at step " << i
            << " is below " << kMinOvershootProb;
        throw DegenerateConditioningError(msg.str());
    }
    // [E(X|tau>t_{i-1}) - (1 - P(.|tau>t_{i-1})) E(X|tau>t_i)] / P(.|tau>t_{i-1}),
    // multiplied through by the survival up to t_{i-1}.
    const double mu = conditional_mean(params, x, n, i);
    const double sd = conditional_stddev(params, n, i);
    return mu + sd * (m.before.tallis - m.full.tallis) / p;
}

CrossingDistribution crossing_distribution(const ProcessParams& params, double x, int n,
                                           std::span<const double> boundary,
                                           const MvnAccuracy& acc) {
    check_boundary(params, n, params.n_steps, boundary);
    CrossingDistribution dist;
    dist.start_step = n;
    dist.start_price = x;
    const auto count = static_cast<std::size_t>(params.n_steps - n);
    dist.probs.resize(count);
    dist.overshoots.resize(count);
    dist.weighted_overshoots.resize(count);
    dist.survivals.resize(count);
    for (std::size_t k = 0; k < count; ++k) {
        const int i = n + 1 + static_cast<int>(k);
        const MomentPair m = moment_pair(params, x, n, i, boundary, acc, true, true);
        const double mu = conditional_mean(params, x, n, i);
        const double sd = conditional_stddev(params, n, i);
        const double p = std::max(m.before.survival - m.full.survival, 0.0);
        const double weighted = mu * (m.before.survival - m.full.survival) +
                                sd * (m.before.tallis - m.full.tallis);
        dist.probs[k] = p;
        dist.survivals[k] = m.full.survival;
        dist.weighted_overshoots[k] = weighted;
        dist.overshoots[k] =
            p >= kMinOvershootProb ? weighted / p : std::numeric_limits<double>::quiet_NaN();
    }
    return dist;
}

}  // namespace ouprocure
