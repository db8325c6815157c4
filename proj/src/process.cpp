#include "ouprocure/process.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "ouprocure/errors.hpp"

namespace ouprocure {

namespace {

void check_order(const ProcessParams& params, int n, int i, const char* what) {
    if (n < 0 || i <= n || i > params.n_steps) {
        std::ostringstream msg;
        msg << what << ": require 0 <= n < i <= N, got n=" << n << ", i=" << i
            << ", N=" << params.n_steps;
        throw ArgumentError(msg.str());
    }
}

// (1 - a^{2m}) / (1 - a^2), the variance growth factor after m steps.
double variance_factor(double a, int m) {
    const double a2 = a * a;
    return (1.0 - std::pow(a2, m)) / (1.0 - a2);
}

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

void ProcessParams::validate() const {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw ArgumentError("process.sigma must be positive and finite");
    }
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw ArgumentError("process.dt must be positive and finite");
    }
    if (n_steps < 1) {
        throw ArgumentError("process.n_steps must be at least 1");
    }
    if (!std::isfinite(theta) || !std::isfinite(kappa)) {
        throw ArgumentError("process.theta and process.kappa must be finite");
    }
    if (!(std::abs(1.0 - dt * kappa) < 1.0)) {
        std::ostringstream msg;
        msg << "stationarity constraint |1 - dt*kappa| < 1 violated (dt=" << dt
            << ", kappa=" << kappa << ")";
        throw ArgumentError(msg.str());
    }
}

HoldingSchedule::HoldingSchedule(std::vector<double> rates) : rates_(std::move(rates)) {}

HoldingSchedule HoldingSchedule::linear_in_remaining(const ProcessParams& params,
                                                     double coefficient) {
    std::vector<double> rates(static_cast<std::size_t>(params.n_steps));
    for (int i = 0; i < params.n_steps; ++i) {
        rates[static_cast<std::size_t>(i)] = coefficient * (params.n_steps - i) * params.dt;
    }
    return HoldingSchedule(std::move(rates));
}

HoldingSchedule HoldingSchedule::linear_in_steps_remaining(const ProcessParams& params,
                                                           double coefficient) {
    std::vector<double> rates(static_cast<std::size_t>(params.n_steps));
    for (int i = 0; i < params.n_steps; ++i) {
        rates[static_cast<std::size_t>(i)] = coefficient * (params.n_steps - i);
    }
    return HoldingSchedule(std::move(rates));
}

HoldingSchedule HoldingSchedule::scaled(double factor) const {
    std::vector<double> out(rates_);
    for (double& h : out) h *= factor;
    return HoldingSchedule(std::move(out));
}

void HoldingSchedule::validate(const ProcessParams& params) const {
    if (rates_.size() != static_cast<std::size_t>(params.n_steps)) {
        std::ostringstream msg;
        msg << "holding schedule has " << rates_.size() << " entries, expected N = "
            << params.n_steps;
        throw ArgumentError(msg.str());
    }
    for (std::size_t i = 0; i < rates_.size(); ++i) {
        if (!(rates_[i] >= 0.0) || !std::isfinite(rates_[i])) {
            throw ArgumentError("holding rate h[" + std::to_string(i) +
                                "] must be finite and nonnegative");
        }
        if (i + 1 < rates_.size() && rates_[i + 1] > rates_[i]) {
            throw ArgumentError("holding schedule must be weakly decreasing, but h[" +
                                std::to_string(i + 1) + "] > h[" + std::to_string(i) + "]");
        }
    }
}

double conditional_mean(const ProcessParams& params, double x, int n, int i) {
    check_order(params, n, i, "conditional_mean");
    return params.theta + (x - params.theta) * std::pow(params.decay(), i - n);
}

double conditional_variance(const ProcessParams& params, int n, int i) {
    check_order(params, n, i, "conditional_variance");
    return params.dt * params.sigma * params.sigma * variance_factor(params.decay(), i - n);
}

double conditional_stddev(const ProcessParams& params, int n, int i) {
    return std::sqrt(conditional_variance(params, n, i));
}

double standardized_covariance(const ProcessParams& params, int n, int l, int k) {
    check_order(params, n, l, "standardized_covariance");
    if (k < l || k > params.n_steps) {
        throw ArgumentError("standardized_covariance: require l <= k <= N");
    }
    if (k == l) return 1.0;
    // dt sigma^2 cancels against sigma_{t_n,t_l} sigma_{t_n,t_k}.
    const double a = params.decay();
    return std::pow(a, k - l) *
           std::sqrt(variance_factor(a, l - n) / variance_factor(a, k - n));
}

Eigen::MatrixXd covariance_matrix(const ProcessParams& params, int n, int i) {
    check_order(params, n, i, "covariance_matrix");
    const int d = i - n;
    Eigen::MatrixXd sigma(d, d);
    for (int r = 0; r < d; ++r) {
        sigma(r, r) = 1.0;
        for (int c = r + 1; c < d; ++c) {
            const double v = standardized_covariance(params, n, n + 1 + r, n + 1 + c);
            sigma(r, c) = v;
            sigma(c, r) = v;
        }
    }
    return sigma;
}

std::vector<double> standardized_thresholds(const ProcessParams& params, double x, int n, int i,
                                            std::span<const double> boundary, bool exclude_last) {
    check_order(params, n, i, "standardized_thresholds");
    if (boundary.size() < static_cast<std::size_t>(i) + 1) {
        throw ArgumentError("standardized_thresholds: boundary does not cover step i");
    }
    std::vector<double> beta;
    beta.reserve(static_cast<std::size_t>(i - n));
    for (int l = n + 1; l <= i; ++l) {
        const double b = boundary[static_cast<std::size_t>(l)];
        if (std::isinf(b)) {
            beta.push_back(b);
        } else {
            beta.push_back((b - conditional_mean(params, x, n, l)) /
                           conditional_stddev(params, n, l));
        }
    }
    if (exclude_last) beta.back() = -std::numeric_limits<double>::infinity();
    return beta;
}

std::mt19937_64 path_engine(std::uint64_t seed, std::uint64_t path) {
    return std::mt19937_64(splitmix64(splitmix64(seed) ^ path));
}

void simulate_path(const ProcessParams& params, double x0, int n0, std::uint64_t seed,
                   std::uint64_t path, std::span<double> out) {
    auto engine = path_engine(seed, path);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double drift = params.theta * params.kappa * params.dt;
    const double a = params.decay();
    const double noise_scale = params.sigma * std::sqrt(params.dt);
    const std::size_t cols = static_cast<std::size_t>(params.n_steps - n0) + 1;
    double x = x0;
    out[0] = x;
    for (std::size_t c = 1; c < cols; ++c) {
        x = drift + a * x + noise_scale * normal(engine);
        out[c] = x;
    }
}

PathMatrix simulate_paths(const ProcessParams& params, double x0, int n0, std::size_t n_paths,
                          std::uint64_t seed) {
    if (n_paths < 1) throw ArgumentError("simulate_paths: n_paths must be at least 1");
    if (n0 < 0 || n0 > params.n_steps) throw ArgumentError("simulate_paths: n0 out of range");
    PathMatrix paths;
    paths.n_paths = n_paths;
    paths.n_cols = static_cast<std::size_t>(params.n_steps - n0) + 1;
    paths.values.resize(paths.n_paths * paths.n_cols);
    for (std::size_t p = 0; p < n_paths; ++p) {
        simulate_path(params, x0, n0, seed, p,
                      std::span<double>(paths.values.data() + p * paths.n_cols, paths.n_cols));
    }
    return paths;
}

}  // namespace ouprocure
