#include <doctest.h>

#include <cmath>

#include <Eigen/Eigenvalues>

#include "ouprocure/errors.hpp"
#include "ouprocure/process.hpp"
#include "test_support.hpp"

using namespace ouprocure;
using testing::kInf;

TEST_CASE("process parameters enforce stationarity") {
    ProcessParams p{10.0, 2.5, 1.0, 1.0, 5};
    CHECK_THROWS_AS(p.validate(), ArgumentError);
    try {
        p.validate();
    } catch (const ArgumentError& e) {
        CHECK(std::string(e.what()).find("stationarity") != std::string::npos);
    }
    p.kappa = 2.0;  // 1 - dt K = -1
    CHECK_THROWS_AS(p.validate(), ArgumentError);
    p.kappa = 1.5;  // oscillating but stationary
    CHECK_NOTHROW(p.validate());
    p.kappa = 0.0;  // random walk
    CHECK_THROWS_AS(p.validate(), ArgumentError);

    CHECK_THROWS_AS((ProcessParams{0, 0.5, 0.0, 1, 5}.validate()), ArgumentError);
    CHECK_THROWS_AS((ProcessParams{0, 0.5, 1.0, -1, 5}.validate()), ArgumentError);
    CHECK_THROWS_AS((ProcessParams{0, 0.5, 1.0, 1, 0}.validate()), ArgumentError);
}

TEST_CASE("holding schedule") {
    const ProcessParams p = testing::long_horizon_params();
    const HoldingSchedule h = testing::base_holding(p);
    REQUIRE(h.size() == 15);
    CHECK(h[0] == doctest::Approx(0.15).epsilon(1e-14));
    CHECK(h[14] == doctest::Approx(0.01).epsilon(1e-14));
    CHECK_NOTHROW(h.validate(p));

    CHECK_THROWS_AS(HoldingSchedule({0.1, 0.2}).validate(ProcessParams{0, 0.5, 1, 1, 2}),
                    ArgumentError);
    CHECK_THROWS_AS(HoldingSchedule({0.1}).validate(ProcessParams{0, 0.5, 1, 1, 2}),
                    ArgumentError);
    CHECK_THROWS_AS(HoldingSchedule({0.1, -0.1}).validate(ProcessParams{0, 0.5, 1, 1, 2}),
                    ArgumentError);

    const ProcessParams fine{0.0, 0.4, 1.0, 2.0, 4};
    const HoldingSchedule steps = HoldingSchedule::linear_in_steps_remaining(fine, 0.1);
    CHECK(steps[0] == doctest::Approx(0.4));
    CHECK(steps[3] == doctest::Approx(0.1));
    const HoldingSchedule time = HoldingSchedule::linear_in_remaining(fine, 0.1);
    CHECK(time[0] == doctest::Approx(0.8));
}

TEST_CASE("conditional mean") {
    const ProcessParams p{10.0, 0.5, 1.0, 1.0, 10};
    CHECK(conditional_mean(p, 20.0, 0, 2) == doctest::Approx(12.5));
    CHECK(conditional_mean(p, 20.0, 3, 5) == doctest::Approx(12.5));
    for (int gap = 1; gap <= 10; ++gap) CHECK(conditional_mean(p, 10.0, 0, gap) == 10.0);
    const ProcessParams q{0.0, 0.5, 1.0, 1.0, 3};
    CHECK(conditional_mean(q, 1.0, 0, 1) == doctest::Approx(0.5));
    CHECK_THROWS_AS(conditional_mean(p, 1.0, 2, 2), ArgumentError);
    CHECK_THROWS_AS(conditional_mean(p, 1.0, 3, 2), ArgumentError);
    CHECK_THROWS_AS(conditional_mean(p, 1.0, 0, 11), ArgumentError);
}

TEST_CASE("conditional variance") {
    const ProcessParams p{10.0, 0.5, 1.0, 1.0, 60};
    CHECK(conditional_variance(p, 0, 1) == doctest::Approx(1.0));
    CHECK(conditional_variance(p, 0, 2) == doctest::Approx(1.25));
    CHECK(conditional_variance(p, 0, 60) == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
    const ProcessParams q{0.0, 0.3, 2.0, 0.5, 3};
    CHECK(conditional_variance(q, 1, 2) == doctest::Approx(0.5 * 4.0));
    CHECK_THROWS_AS(conditional_variance(p, 1, 1), ArgumentError);

    SUBCASE("strictly increasing and bounded by the stationary variance") {
        for (double kappa : {0.1, 0.5, 0.9, 1.5}) {
            const ProcessParams r{0.0, kappa, 1.3, 1.0, 40};
            const double a = r.decay();
            const double stationary = r.dt * r.sigma * r.sigma / (1.0 - a * a);
            double prev = 0.0;
            for (int i = 1; i <= 40; ++i) {
                const double v = conditional_variance(r, 0, i);
                CHECK(v > 0.0);
                CHECK(v <= stationary * (1.0 + 1e-14));
                if (v < stationary * (1.0 - 1e-12)) CHECK(v > prev);
                prev = v;
            }
        }
    }
}

TEST_CASE("standardized covariance") {
    const ProcessParams p{10.0, 0.5, 1.0, 1.0, 10};
    CHECK(standardized_covariance(p, 0, 3, 3) == doctest::Approx(1.0));
    CHECK(standardized_covariance(p, 0, 1, 2) == doctest::Approx(0.5 / std::sqrt(1.25)));
    CHECK_THROWS_AS(standardized_covariance(p, 2, 2, 3), ArgumentError);
    CHECK_THROWS_AS(standardized_covariance(p, 0, 3, 2), ArgumentError);

    SUBCASE("strictly decreasing in k") {
        for (int l = 1; l < 9; ++l) {
            double prev = 1.0;
            for (int k = l + 1; k <= 10; ++k) {
                const double c = standardized_covariance(p, 0, l, k);
                CHECK(c < prev);
                CHECK(c > 0.0);
                prev = c;
            }
        }
    }

    SUBCASE("independent of sigma") {
        for (double sigma : {0.5, 2.0}) {
            ProcessParams q = p;
            q.sigma = sigma;
            for (int l = 1; l <= 10; ++l) {
                for (int k = l; k <= 10; ++k) {
                    CHECK(standardized_covariance(q, 0, l, k) ==
                          doctest::Approx(standardized_covariance(p, 0, l, k)).epsilon(1e-14));
                }
            }
        }
    }

    SUBCASE("matches the Monte Carlo correlation of simulated prices") {
        // (Z_1, Z_2) from n = 0: correlation of X_1 and X_2.
        const std::size_t n_paths = 1'000'000;
        const PathMatrix paths = simulate_paths(p, 12.0, 0, n_paths, 99);
        double s1 = 0, s2 = 0, s11 = 0, s22 = 0, s12 = 0;
        for (std::size_t k = 0; k < n_paths; ++k) {
            const double a = paths(k, 1), b = paths(k, 2);
            s1 += a;
            s2 += b;
            s11 += a * a;
            s22 += b * b;
            s12 += a * b;
        }
        const double n = static_cast<double>(n_paths);
        const double cov = s12 / n - s1 / n * s2 / n;
        const double r = cov / std::sqrt((s11 / n - s1 * s1 / n / n) * (s22 / n - s2 * s2 / n / n));
        // Standard error of a sample correlation, (1 - r^2) / sqrt(n).
        const double se = (1.0 - r * r) / std::sqrt(n);
        CHECK(std::abs(r - standardized_covariance(p, 0, 1, 2)) <= 4.0 * se);
    }
}

TEST_CASE("correlation matrix") {
    const ProcessParams p{10.0, 0.5, 1.0, 1.0, 10};
    const Eigen::MatrixXd one = covariance_matrix(p, 3, 4);
    REQUIRE(one.rows() == 1);
    CHECK(one(0, 0) == 1.0);

    const Eigen::MatrixXd two = covariance_matrix(p, 0, 2);
    CHECK(two(0, 1) == doctest::Approx(0.44721).epsilon(1e-5));
    CHECK(two(1, 0) == two(0, 1));

    for (double kappa : {0.05, 0.5, 1.2, 1.95}) {
        const ProcessParams q{0.0, kappa, 1.0, 1.0, 20};
        for (int n : {0, 7}) {
            const Eigen::MatrixXd c = covariance_matrix(q, n, 20);
            CHECK(c.rows() == 20 - n);
            CHECK((c - c.transpose()).cwiseAbs().maxCoeff() == 0.0);
            for (Eigen::Index k = 0; k < c.rows(); ++k) CHECK(c(k, k) == 1.0);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c);
            CHECK(es.eigenvalues().minCoeff() >= -1e-10);
        }
    }
}

TEST_CASE("standardized thresholds") {
    const ProcessParams p = testing::long_horizon_params();
    std::vector<double> b(16, 9.98);
    b[15] = kInf;
    const auto one = standardized_thresholds(p, 12.0, 0, 1, b, false);
    REQUIRE(one.size() == 1);
    CHECK(one[0] == doctest::Approx(-1.02).epsilon(1e-14));

    const auto full = standardized_thresholds(p, 12.0, 10, 15, b, false);
    REQUIRE(full.size() == 5);
    CHECK(full.back() == kInf);
    const auto hat = standardized_thresholds(p, 12.0, 10, 15, b, true);
    CHECK(hat.back() == -kInf);
    for (std::size_t k = 0; k + 1 < hat.size(); ++k) CHECK(hat[k] == full[k]);

    b[3] = -kInf;
    CHECK(standardized_thresholds(p, 12.0, 0, 3, b, false)[2] == -kInf);
    // Levels from a price scale inversely with sigma.
    ProcessParams q = p;
    q.sigma = 2.0;
    CHECK(standardized_thresholds(q, 12.0, 0, 1, b, false)[0] == doctest::Approx(-0.51));
}

TEST_CASE("path simulation") {
    const ProcessParams p{10.0, 0.5, 1.0, 1.0, 8};

    SUBCASE("shape, start and determinism") {
        const PathMatrix a = simulate_paths(p, 12.0, 3, 50, 7);
        const PathMatrix b = simulate_paths(p, 12.0, 3, 50, 7);
        CHECK(a.n_cols == 6);
        CHECK(a.values == b.values);
        for (std::size_t k = 0; k < 50; ++k) CHECK(a(k, 0) == 12.0);
        const PathMatrix c = simulate_paths(p, 12.0, 3, 50, 8);
        CHECK(a.values != c.values);
        // A path depends only on (seed, index): a shorter run is a prefix.
        const PathMatrix prefix = simulate_paths(p, 12.0, 3, 10, 7);
        for (std::size_t k = 0; k < prefix.values.size(); ++k) CHECK(prefix.values[k] == a.values[k]);
    }

    SUBCASE("vanishing noise follows the mean recursion") {
        const ProcessParams q{10.0, 0.5, 1e-12, 1.0, 8};
        const PathMatrix paths = simulate_paths(q, 14.0, 0, 3, 1);
        for (int i = 1; i <= 8; ++i) {
            CHECK(std::abs(paths(2, static_cast<std::size_t>(i)) - conditional_mean(q, 14.0, 0, i)) <= 1e-6);
        }
    }

    SUBCASE("moments match the conditional mean and variance") {
        const std::size_t n_paths = 1'000'000;
        const PathMatrix paths = simulate_paths(p, 12.0, 0, n_paths, 2024);
        for (int i : {1, 3, 8}) {
            double s = 0.0, s2 = 0.0;
            for (std::size_t k = 0; k < n_paths; ++k) {
                const double v = paths(k, static_cast<std::size_t>(i));
                s += v;
                s2 += v * v;
            }
            const double n = static_cast<double>(n_paths);
            const double mean = s / n;
            const double var = (s2 - n * mean * mean) / (n - 1.0);
            const double sd = conditional_stddev(p, 0, i);
            CHECK(std::abs(mean - conditional_mean(p, 12.0, 0, i)) <= 4.0 * sd / 1000.0);
            // Relative standard error of a Gaussian sample variance: sqrt(2 / (n - 1)).
            const double rel_se = std::sqrt(2.0 / (n - 1.0));
            CHECK(std::abs(var / conditional_variance(p, 0, i) - 1.0) <= 5.0 * rel_se);
        }
    }
}
