#include "ouprocure/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ouprocure/crossing.hpp"
#include "ouprocure/errors.hpp"

namespace ouprocure {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_step(const ProcessParams& params, int n, int max_step, const char* what) {
    if (n < 0 || n > max_step) {
        std::ostringstream msg;
        msg << what << ": step " << n << " outside [0, " << max_step << "] (N=" << params.n_steps
            << ")";
        throw ArgumentError(msg.str());
    }
}

}  // namespace

double terminal_value(double x) noexcept { return x; }

double holding_tail(const HoldingSchedule& h, double dt, int n) {
    const auto rates = h.rates();
    if (n < 0 || static_cast<std::size_t>(n) > rates.size()) {
        throw ArgumentError("holding_tail: step out of range");
    }
    double total = 0.0;
    for (std::size_t i = static_cast<std::size_t>(n); i < rates.size(); ++i) total += rates[i];
    return dt * total;
}

double continuation_value(const ProcessParams& params, const HoldingSchedule& h, double x, int n,
                          std::span<const double> boundary, const MvnAccuracy& acc) {
    check_step(params, n, params.n_steps - 1, "continuation_value");
    const CrossingDistribution dist = crossing_distribution(params, x, n, boundary, acc);
    double total = 0.0;
    for (std::size_t k = 0; k < dist.probs.size(); ++k) {
        const int i = dist.step_of(k);
        total += dist.weighted_overshoots[k] + dist.probs[k] * holding_tail(h, params.dt, i);
    }
    return total;
}

double value(const ProcessParams& params, const HoldingSchedule& h, double x, int n,
             std::span<const double> boundary, const MvnAccuracy& acc) {
    check_step(params, n, params.n_steps, "value");
    if (n == params.n_steps) return terminal_value(x);
    const double purchase = x + holding_tail(h, params.dt, n);
    if (boundary.size() > static_cast<std::size_t>(n) && x <= boundary[static_cast<std::size_t>(n)]) {
        return purchase;
    }
    return std::min(continuation_value(params, h, x, n, boundary, acc), purchase);
}

double last_period_threshold(const ProcessParams& params, const HoldingSchedule& h) {
    if (h.size() != static_cast<std::size_t>(params.n_steps)) {
        throw ArgumentError("last_period_threshold: holding schedule length differs from N");
    }
    return params.theta - h[h.size() - 1] / params.kappa;
}

double upper_price_bound(const ProcessParams& params, const HoldingSchedule& h) {
    return last_period_threshold(params, h);
}

double lower_price_bound(const ProcessParams& params, const HoldingSchedule& h, int n,
                         double b_next) {
    check_step(params, n, params.n_steps - 1, "lower_price_bound");
    const double rate = params.dt * params.kappa;
    const double a = params.decay();
    const double noise_bound =
        (params.theta * rate - params.sigma * std::sqrt(params.dt) -
         h[static_cast<std::size_t>(n)] * params.dt) /
        rate;
    // The first candidate inverts the one-step mean, which only preserves
    // order for a positive autoregressive coefficient.
    if (a <= 0.0 || std::isinf(b_next)) return noise_bound;
    return std::min((b_next - params.theta * rate) / a, noise_bound);
}

BracketBounds threshold_bounds(const ProcessParams& params, const HoldingSchedule& h, int n,
                               double b_next) {
    BracketBounds bounds;
    bounds.lower = lower_price_bound(params, h, n, b_next);
    bounds.upper = std::min(b_next, upper_price_bound(params, h));
    if (!(bounds.lower <= bounds.upper)) {
        std::ostringstream msg;
        msg << "threshold_bounds: lower bound " << bounds.lower << " exceeds upper bound "
            << bounds.upper << " at step " << n;
        throw SolverError(msg.str());
    }
    return bounds;
}

double default_eps(const ProcessParams& params) noexcept {
    return 1e-6 * std::max(1.0, std::abs(params.theta));
}

ThresholdFunction solve_thresholds(const ProcessParams& params, const HoldingSchedule& h,
                                   double eps, const MvnAccuracy& acc, int max_iterations) {
    params.validate();
    h.validate(params);
    acc.validate();
    if (!(eps > 0.0)) throw ArgumentError("solve_thresholds: eps must be positive");
    if (acc.abs_tol > eps / 100.0) {
        std::ostringstream msg;
        msg << "solve_thresholds: mvn abs_tol " << acc.abs_tol << " must not exceed eps/100 = "
            << eps / 100.0;
        throw ArgumentError(msg.str());
    }

    const int last = params.n_steps;
    ThresholdFunction result;
    result.eps = eps;
    result.b.assign(static_cast<std::size_t>(last) + 1, std::numeric_limits<double>::quiet_NaN());
    result.records.resize(static_cast<std::size_t>(last) + 1);
    result.b[static_cast<std::size_t>(last)] = kInf;
    result.records[static_cast<std::size_t>(last)].step = last;

    const bool oscillating = params.decay() <= 0.0;
    const int pre = last - 1;
    result.b[static_cast<std::size_t>(pre)] = last_period_threshold(params, h);
    result.records[static_cast<std::size_t>(pre)] = {
        pre, {lower_price_bound(params, h, pre, kInf), upper_price_bound(params, h)}, 0, 0.0};

    for (int n = last - 2; n >= 0; --n) {
        const double tail = holding_tail(h, params.dt, n);
        auto gap = [&](double x) {
            return x + tail - continuation_value(params, h, x, n, result.b, acc);
        };
        const double b_next = result.b[static_cast<std::size_t>(n + 1)];
        BracketBounds bracket;
        if (oscillating) {
            bracket.lower = lower_price_bound(params, h, n, b_next);
            bracket.upper = std::min(b_next, upper_price_bound(params, h));
            if (bracket.lower > bracket.upper) std::swap(bracket.lower, bracket.upper);
        } else {
            bracket = threshold_bounds(params, h, n, b_next);
        }
        double gap_lo = gap(bracket.lower);
        double gap_hi = gap(bracket.upper);
        if (oscillating) {
            // The closed-form bracket needs a positive autoregressive
            // coefficient. The gap is still increasing in x, so widen it.
            double width = params.sigma * std::sqrt(params.dt);
            for (int k = 0; k < kMaxBracketExpansions && (gap_lo > eps || gap_hi < -eps); ++k) {
                if (gap_lo > eps) {
                    bracket.lower -= width;
                    gap_lo = gap(bracket.lower);
                }
                if (gap_hi < -eps) {
                    bracket.upper += width;
                    gap_hi = gap(bracket.upper);
                }
                width *= 2.0;
            }
        }
        double lo = bracket.lower;
        double hi = bracket.upper;
        if (gap_lo > eps || gap_hi < -eps) {
            std::ostringstream msg;
            msg << "solve_thresholds: no sign change at step " << n << " on [" << lo << ", " << hi
                << "], gaps " << gap_lo << " and " << gap_hi;
            throw SolverError(msg.str());
        }

        double x;
        double g;
        int iterations = 0;
        if (std::abs(gap_hi) <= eps) {
            // Ties resolve towards the larger price (closed stopping region).
            x = hi;
            g = gap_hi;
        } else if (std::abs(gap_lo) <= eps) {
            x = lo;
            g = gap_lo;
        } else {
            while (true) {
                if (iterations == max_iterations) {
                    std::ostringstream msg;
                    msg << "solve_thresholds: iteration cap " << max_iterations
                        << " reached at step " << n << " with bracket [" << lo << ", " << hi << "]";
                    throw SolverError(msg.str());
                }
                ++iterations;
                x = 0.5 * (lo + hi);
                g = gap(x);
                if (std::abs(g) <= eps) break;
                if (g > 0.0) {
                    hi = x;
                } else {
                    lo = x;
                }
                if (hi - lo <= eps / 10.0) break;
            }
        }
        result.b[static_cast<std::size_t>(n)] = x;
        result.records[static_cast<std::size_t>(n)] = {n, bracket, iterations, g};
    }
    return result;
}

}  // namespace ouprocure
