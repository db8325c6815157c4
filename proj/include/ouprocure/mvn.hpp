#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace ouprocure {

enum class MvnEngine {
    /// Gauss-Markov recursion when the matrix has chain structure, otherwise
    /// the randomized lattice.
    automatic,
    /// Always use the randomized lattice rule.
    lattice,
};

/// Accuracy controls for orthant probabilities.
struct MvnAccuracy {
    double abs_tol = 1e-8;
    std::size_t sample_budget = 2'000'000;
    std::uint64_t rng_seed = 20240917;
    MvnEngine engine = MvnEngine::automatic;

    void validate() const;
};

struct MvnResult {
    double value = 0.0;
    /// Estimated absolute error (three standard errors for the lattice rule).
    double error = 0.0;
    /// Number of coordinates left after dropping +inf limits.
    std::size_t effective_dim = 0;
    bool used_chain_recursion = false;
};

/// Largest dimension accepted by the lattice engine.
inline constexpr std::size_t kMaxLatticeDim = 25;

double std_normal_pdf(double z);
double std_normal_cdf(double z);
/// Inverse of std_normal_cdf; p in (0, 1).
double std_normal_quantile(double p);

/// Pr(Z_j <= upper_j for all j), Z ~ N(0, corr) with unit-diagonal corr.
///
/// Coordinates with upper_j = +inf are marginalized out; any -inf gives 0.
/// Throws ArgumentError on a dimension mismatch or NaN limit and
/// NumericDomainError when corr is not a correlation matrix (eigenvalue
/// below -1e-8, non-unit diagonal, asymmetry).
double mvn_cdf(std::span<const double> upper, const Eigen::MatrixXd& corr,
               const MvnAccuracy& acc = {});

/// Same as mvn_cdf with diagnostics.
MvnResult mvn_cdf_estimate(std::span<const double> upper, const Eigen::MatrixXd& corr,
                           const MvnAccuracy& acc = {});

/// First-order partial correlation matrix of the remaining variables after
/// removing variable j (0-based).
Eigen::MatrixXd partial_correlation_matrix(const Eigen::MatrixXd& corr, Eigen::Index j);

/// Standardized truncation points of the remaining coordinates given
/// Z_j = beta_j:
///
///   alpha_l = (beta_l - corr(l, j) * beta_j) / sqrt(1 - corr(l, j)^2),  l != j.
///
/// With `exclude_last`, the entry for the last variable is -inf (unless j is
/// the last variable, which then has no entry). beta_j must be finite.
std::vector<double> conditional_truncation_coords(std::span<const double> beta,
                                                  const Eigen::MatrixXd& corr, Eigen::Index j,
                                                  bool exclude_last);

}  // namespace ouprocure
