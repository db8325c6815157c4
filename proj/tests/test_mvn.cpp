#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "ouprocure/errors.hpp"
#include "ouprocure/mvn.hpp"
#include "ouprocure/process.hpp"
#include "test_support.hpp"

using namespace ouprocure;
using testing::kInf;

namespace {

Eigen::MatrixXd bivariate(double rho) {
    Eigen::MatrixXd c(2, 2);
    c << 1.0, rho, rho, 1.0;
    return c;
}

Eigen::MatrixXd equicorrelated(int d, double rho) {
    Eigen::MatrixXd c = Eigen::MatrixXd::Constant(d, d, rho);
    c.diagonal().setOnes();
    return c;
}

MvnAccuracy lattice(double tol = 1e-6) {
    MvnAccuracy acc;
    acc.abs_tol = tol;
    acc.engine = MvnEngine::lattice;
    return acc;
}

Eigen::MatrixXd random_correlation(std::mt19937_64& rng, int d) {
    std::normal_distribution<double> normal;
    Eigen::MatrixXd g(d, d + 2);
    for (Eigen::Index r = 0; r < g.rows(); ++r) {
        for (Eigen::Index c = 0; c < g.cols(); ++c) g(r, c) = normal(rng);
    }
    Eigen::MatrixXd s = g * g.transpose();
    const Eigen::VectorXd inv = s.diagonal().cwiseSqrt().cwiseInverse();
    s = inv.asDiagonal() * s * inv.asDiagonal();
    s.diagonal().setOnes();
    return s;
}

}  // namespace

TEST_CASE("univariate normal functions") {
    CHECK(std_normal_pdf(0.0) == doctest::Approx(0.3989422804).epsilon(1e-10));
    CHECK(std_normal_pdf(kInf) == 0.0);
    CHECK(std_normal_pdf(-kInf) == 0.0);
    for (double z : {0.5, 1.02, 3.0}) CHECK(std_normal_pdf(z) == std_normal_pdf(-z));

    CHECK(std_normal_cdf(0.0) == 0.5);
    CHECK(std_normal_cdf(-kInf) == 0.0);
    CHECK(std_normal_cdf(kInf) == 1.0);
    CHECK(std_normal_cdf(-1.02) == doctest::Approx(0.153864).epsilon(1e-5));
    for (double z = -7.5; z <= 7.5; z += 0.25) {
        CHECK(std::abs(std_normal_cdf(z) - testing::cdf_ref(z)) <= 1e-12);
    }
    // Relative accuracy deep in the lower tail.
    CHECK(std_normal_cdf(-20.0) == doctest::Approx(testing::cdf_ref(-20.0)).epsilon(1e-12));

    for (double p : {1e-12, 1e-6, 0.01, 0.3, 0.5, 0.8, 0.999999}) {
        CHECK(std_normal_cdf(std_normal_quantile(p)) == doctest::Approx(p).epsilon(1e-12));
    }
    CHECK_THROWS_AS(std_normal_quantile(0.0), ArgumentError);
    CHECK_THROWS_AS(std_normal_quantile(1.0), ArgumentError);
}

TEST_CASE("orthant probabilities: limits and closed forms") {
    const MvnAccuracy acc;
    CHECK(mvn_cdf(std::vector<double>{0.0}, Eigen::MatrixXd::Identity(1, 1), acc) == 0.5);
    CHECK(mvn_cdf(std::vector<double>{0.0, 0.0}, Eigen::MatrixXd::Identity(2, 2), acc) ==
          doctest::Approx(0.25).epsilon(1e-10));
    CHECK(mvn_cdf(std::vector<double>{0.0, 0.0}, bivariate(0.44721), acc) ==
          doctest::Approx(0.32379).epsilon(1e-5));

    const Eigen::MatrixXd three = equicorrelated(3, 0.4);
    CHECK(mvn_cdf(std::vector<double>{0.3, -kInf, 1.0}, three, acc) == 0.0);
    CHECK(mvn_cdf(std::vector<double>{kInf, kInf, kInf}, three, acc) == 1.0);
    CHECK(mvn_cdf(std::vector<double>{kInf, 0.7, kInf}, three, acc) ==
          doctest::Approx(std_normal_cdf(0.7)).epsilon(1e-15));
    const double marg = mvn_cdf(std::vector<double>{0.2, kInf, -0.5}, three, acc);
    CHECK(std::abs(marg - testing::bivariate_cdf_ref(0.2, -0.5, 0.4)) <= 1e-8);

    for (double rho : {0.0, 0.3, -0.3, 0.44721, 0.9, -0.95}) {
        CHECK(std::abs(mvn_cdf(std::vector<double>{0.0, 0.0}, bivariate(rho), acc) -
                       testing::bivariate_orthant(rho)) <= 1e-8);
        CHECK(std::abs(mvn_cdf(std::vector<double>{0.0, 0.0}, bivariate(rho), lattice(1e-7)) -
                       testing::bivariate_orthant(rho)) <= 1e-6);
    }
    for (double rho : {0.1, 0.5, 0.8}) {
        const double ref = testing::trivariate_orthant(rho, rho, rho);
        CHECK(std::abs(mvn_cdf(std::vector<double>{0.0, 0.0, 0.0}, equicorrelated(3, rho), acc) - ref) <= 1e-6);
    }
}

TEST_CASE("orthant probabilities: errors") {
    const MvnAccuracy acc;
    CHECK_THROWS_AS(mvn_cdf(std::vector<double>{0.0}, Eigen::MatrixXd::Identity(2, 2), acc),
                    ArgumentError);
    CHECK_THROWS_AS(mvn_cdf(std::vector<double>{std::nan(""), 0.0}, bivariate(0.2), acc),
                    ArgumentError);
    Eigen::MatrixXd bad = equicorrelated(3, 0.9);
    bad(0, 1) = bad(1, 0) = -0.9;
    CHECK_THROWS_AS(mvn_cdf(std::vector<double>{0.0, 0.0, 0.0}, bad, acc), NumericDomainError);
    Eigen::MatrixXd diag = Eigen::MatrixXd::Identity(2, 2);
    diag(1, 1) = 2.0;
    CHECK_THROWS_AS(mvn_cdf(std::vector<double>{0.0, 0.0}, diag, acc), NumericDomainError);
    MvnAccuracy zero;
    zero.abs_tol = 0.0;
    CHECK_THROWS_AS(mvn_cdf(std::vector<double>{0.0, 0.0}, bivariate(0.1), zero), ArgumentError);
    const Eigen::MatrixXd big = equicorrelated(static_cast<int>(kMaxLatticeDim) + 1, 0.3);
    std::vector<double> limits(kMaxLatticeDim + 1, 0.0);
    CHECK_THROWS_AS(mvn_cdf(limits, big, acc), ArgumentError);
}

TEST_CASE("orthant probabilities: properties") {
    const MvnAccuracy acc;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unif(-3.0, 3.0);

    SUBCASE("diagonal matrices factorize") {
        for (int d : {2, 3, 5}) {
            for (int rep = 0; rep < 10; ++rep) {
                std::vector<double> a(static_cast<std::size_t>(d));
                double product = 1.0;
                for (double& v : a) {
                    v = unif(rng);
                    product *= testing::cdf_ref(v);
                }
                CHECK(std::abs(mvn_cdf(a, Eigen::MatrixXd::Identity(d, d), acc) - product) <= acc.abs_tol);
            }
        }
    }

    SUBCASE("monotone in every coordinate") {
        const Eigen::MatrixXd c = equicorrelated(4, 0.35);
        for (int rep = 0; rep < 5; ++rep) {
            std::vector<double> a(4);
            for (double& v : a) v = unif(rng);
            const double base = mvn_cdf(a, c, lattice());
            for (std::size_t k = 0; k < 4; ++k) {
                std::vector<double> bumped = a;
                bumped[k] += 0.5;
                CHECK(mvn_cdf(bumped, c, lattice()) >= base - 2e-6);
            }
        }
    }

    SUBCASE("complement decomposition in two dimensions") {
        for (double rho : {-0.6, 0.2, 0.7}) {
            const double a1 = 0.4, a2 = -0.3;
            const double joint = mvn_cdf(std::vector<double>{a1, a2}, bivariate(rho), acc);
            const double marg = mvn_cdf(std::vector<double>{a1, kInf}, bivariate(rho), acc);
            // Pr(Z1 <= a1, Z2 > a2) = Pr(Z1 <= a1, -Z2 < -a2), correlation -rho.
            const double upper = mvn_cdf(std::vector<double>{a1, -a2}, bivariate(-rho), acc);
            CHECK(std::abs(joint - (marg - upper)) <= 2.0 * acc.abs_tol);
            CHECK(std::abs(joint - testing::bivariate_cdf_ref(a1, a2, rho)) <= 1e-8);
        }
    }

    SUBCASE("agrees with plain Monte Carlo on random matrices") {
        std::normal_distribution<double> normal;
        const std::size_t draws = 10'000'000;
        for (int rep = 0; rep < 5; ++rep) {
            const Eigen::MatrixXd c = random_correlation(rng, 4);
            std::vector<double> a(4);
            for (double& v : a) v = unif(rng) / 2.0;
            const MvnResult est = mvn_cdf_estimate(a, c, acc);
            const Eigen::MatrixXd l = c.llt().matrixL();
            std::size_t hits = 0;
            Eigen::Vector4d z;
            for (std::size_t k = 0; k < draws; ++k) {
                for (int j = 0; j < 4; ++j) z(j) = normal(rng);
                const Eigen::Vector4d x = l * z;
                hits += x(0) <= a[0] && x(1) <= a[1] && x(2) <= a[2] && x(3) <= a[3];
            }
            const double p = static_cast<double>(hits) / static_cast<double>(draws);
            const double se_mc = std::sqrt(p * (1.0 - p) / static_cast<double>(draws));
            const double se = std::hypot(se_mc, est.error / 3.0);
            CHECK(std::abs(p - est.value) <= 4.0 * se);
        }
    }

    SUBCASE("repeatable for a fixed seed") {
        const Eigen::MatrixXd c = random_correlation(rng, 6);
        const std::vector<double> a{0.1, -0.2, 0.5, 1.0, 0.0, -1.0};
        CHECK(mvn_cdf(a, c, lattice()) == mvn_cdf(a, c, lattice()));
    }
}

TEST_CASE("chain recursion agrees with the lattice engine on crossing matrices") {
    for (double kappa : {0.2, 0.5, 1.5}) {
        const ProcessParams p{0.0, kappa, 1.0, 1.0, 12};
        for (int n : {0, 4}) {
            const Eigen::MatrixXd c = covariance_matrix(p, n, 12);
            std::vector<double> a(static_cast<std::size_t>(c.rows()));
            for (std::size_t k = 0; k < a.size(); ++k) a[k] = 0.3 + 0.1 * static_cast<double>(k % 3);
            const MvnResult chain = mvn_cdf_estimate(a, c, MvnAccuracy{});
            const MvnResult lat = mvn_cdf_estimate(a, c, lattice(1e-7));
            CHECK(chain.used_chain_recursion);
            CHECK_FALSE(lat.used_chain_recursion);
            CHECK(std::abs(chain.value - lat.value) <= lat.error + 1e-8);
        }
    }
}

TEST_CASE("partial correlation matrix") {
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(4, 4);
    for (Eigen::Index j = 0; j < 4; ++j) {
        CHECK((partial_correlation_matrix(id, j) - Eigen::MatrixXd::Identity(3, 3)).norm() == 0.0);
    }
    const Eigen::MatrixXd m = partial_correlation_matrix(equicorrelated(3, 0.5), 1);
    REQUIRE(m.rows() == 2);
    CHECK(m(0, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));

    Eigen::MatrixXd singular = equicorrelated(3, 0.2);
    singular(0, 2) = singular(2, 0) = 1.0;
    CHECK_THROWS_AS(partial_correlation_matrix(singular, 0), SingularConditioningError);
    CHECK_THROWS_AS(partial_correlation_matrix(id, 4), ArgumentError);

    std::mt19937_64 rng(11);
    for (int rep = 0; rep < 20; ++rep) {
        const Eigen::MatrixXd c = random_correlation(rng, 6);
        const Eigen::MatrixXd pc = partial_correlation_matrix(c, rep % 6);
        CHECK((pc - pc.transpose()).cwiseAbs().maxCoeff() <= 1e-14);
        for (Eigen::Index k = 0; k < 5; ++k) CHECK(pc(k, k) == 1.0);
        CHECK(pc.cwiseAbs().maxCoeff() <= 1.0);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(pc);
        CHECK(es.eigenvalues().minCoeff() >= -1e-8);
    }
}

TEST_CASE("conditional truncation coordinates") {
    const std::vector<double> beta{0.3, -1.2, 2.0};
    const auto pass = conditional_truncation_coords(beta, Eigen::MatrixXd::Identity(3, 3), 0, false);
    REQUIRE(pass.size() == 2);
    CHECK(pass[0] == -1.2);
    CHECK(pass[1] == 2.0);

    const auto zero = conditional_truncation_coords(std::vector<double>{0.0, 0.0}, bivariate(0.7), 1, false);
    REQUIRE(zero.size() == 1);
    CHECK(zero[0] == 0.0);

    const Eigen::MatrixXd c = equicorrelated(3, 0.5);
    const auto hat = conditional_truncation_coords(beta, c, 0, true);
    REQUIRE(hat.size() == 2);
    CHECK(hat[0] == doctest::Approx((-1.2 - 0.5 * 0.3) / std::sqrt(0.75)));
    CHECK(hat[1] == -kInf);
    CHECK(conditional_truncation_coords(beta, c, 2, true).size() == 2);

    const auto with_inf = conditional_truncation_coords(std::vector<double>{0.3, kInf}, bivariate(0.5), 0, false);
    CHECK(with_inf[0] == kInf);

    CHECK_THROWS_AS(conditional_truncation_coords(std::vector<double>{kInf, 0.0}, bivariate(0.5), 0, false),
                    ArgumentError);
    CHECK_THROWS_AS(conditional_truncation_coords(std::vector<double>{0.0, 0.0}, bivariate(1.0), 0, false),
                    SingularConditioningError);
    CHECK_THROWS_AS(conditional_truncation_coords(beta, c, 3, false), ArgumentError);
}
