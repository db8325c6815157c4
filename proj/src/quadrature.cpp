#include "ouprocure/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "ouprocure/errors.hpp"

namespace ouprocure {

namespace {

QuadratureRule compute_legendre(int m) {
    QuadratureRule rule;
    rule.nodes.resize(static_cast<std::size_t>(m));
    rule.weights.resize(static_cast<std::size_t>(m));
    const int half = (m + 1) / 2;
    for (int k = 0; k < half; ++k) {
        // Newton iteration from the Chebyshev-like initial guess.
        double z = std::cos(std::numbers::pi * (k + 0.75) / (m + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = 0.0;
            for (int j = 1; j <= m; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
            }
            dp = m * (z * p0 - p1) / (z * z - 1.0);
            const double step = p0 / dp;
            z -= step;
            if (std::abs(step) < 1e-16) break;
        }
        const double w = 2.0 / ((1.0 - z * z) * dp * dp);
        const auto lo = static_cast<std::size_t>(k);
        const auto hi = static_cast<std::size_t>(m - 1 - k);
        rule.nodes[lo] = -z;
        rule.nodes[hi] = z;
        rule.weights[lo] = w;
        rule.weights[hi] = w;
    }
    return rule;
}

}  // namespace

const QuadratureRule& gauss_legendre(int m) {
    if (m < 1) throw ArgumentError("gauss_legendre: need at least one node");
    static std::mutex mutex;
    static std::map<int, QuadratureRule> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find(m);
    if (it == cache.end()) it = cache.emplace(m, compute_legendre(m)).first;
    return it->second;
}

QuadratureRule gauss_hermite_normal(int m) {
    if (m < 1) throw ArgumentError("gauss_hermite_normal: need at least one node");
    // Golub-Welsch on the Jacobi matrix of the probabilists' Hermite polynomials.
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(m, m);
    for (int k = 1; k < m; ++k) {
        jacobi(k - 1, k) = std::sqrt(static_cast<double>(k));
        jacobi(k, k - 1) = jacobi(k - 1, k);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
    QuadratureRule rule;
    rule.nodes.resize(static_cast<std::size_t>(m));
    rule.weights.resize(static_cast<std::size_t>(m));
    for (int k = 0; k < m; ++k) {
        rule.nodes[static_cast<std::size_t>(k)] = eig.eigenvalues()(k);
        const double v = eig.eigenvectors()(0, k);
        rule.weights[static_cast<std::size_t>(k)] = v * v;
    }
    return rule;
}

}  // namespace ouprocure
