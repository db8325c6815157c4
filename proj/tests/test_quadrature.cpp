#include <doctest.h>

#include <cmath>
#include <numeric>

#include "ouprocure/quadrature.hpp"

using namespace ouprocure;

TEST_CASE("Gauss-Legendre integrates polynomials of degree 2m - 1 exactly") {
    for (int m : {1, 2, 5, 16, 64, 200}) {
        const QuadratureRule& rule = gauss_legendre(m);
        REQUIRE(rule.nodes.size() == static_cast<std::size_t>(m));
        for (int degree = 0; degree <= std::min(2 * m - 1, 40); ++degree) {
            double sum = 0.0;
            for (int k = 0; k < m; ++k) sum += rule.weights[k] * std::pow(rule.nodes[k], degree);
            const double exact = degree % 2 ? 0.0 : 2.0 / (degree + 1);
            CHECK(sum == doctest::Approx(exact).epsilon(1e-12));
        }
    }
    CHECK(&gauss_legendre(12) == &gauss_legendre(12));
}

TEST_CASE("Gauss-Hermite rule reproduces standard normal moments") {
    for (int m : {2, 8, 32, 64}) {
        const QuadratureRule rule = gauss_hermite_normal(m);
        CHECK(std::accumulate(rule.weights.begin(), rule.weights.end(), 0.0) ==
              doctest::Approx(1.0).epsilon(1e-13));
        double double_factorial = 1.0;
        for (int k = 1; 2 * k <= std::min(2 * m - 1, 16); ++k) {
            double_factorial *= 2 * k - 1;
            double even = 0.0, odd = 0.0;
            for (int j = 0; j < m; ++j) {
                even += rule.weights[j] * std::pow(rule.nodes[j], 2 * k);
                odd += rule.weights[j] * std::pow(rule.nodes[j], 2 * k - 1);
            }
            CHECK(even == doctest::Approx(double_factorial).epsilon(1e-10));
            CHECK(std::abs(odd) <= 1e-10 * double_factorial);
        }
    }
}
