#include "ouprocure/mvn.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include <boost/math/special_functions/erf.hpp>

#include "ouprocure/errors.hpp"
#include "ouprocure/quadrature.hpp"

namespace ouprocure {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSymmetryTol = 1e-10;
constexpr double kPsdTol = 1e-8;
constexpr double kChainTol = 1e-12;
// Standard-normal mass beyond +-9 is below 1e-18.
constexpr double kChainSpan = 9.0;
constexpr double kSingularPivot = 1e-10;

void check_correlation(const Eigen::MatrixXd& corr) {
    if (corr.rows() != corr.cols()) throw ArgumentError("correlation matrix must be square");
    const Eigen::Index d = corr.rows();
    for (Eigen::Index r = 0; r < d; ++r) {
        if (!(std::abs(corr(r, r) - 1.0) <= kSymmetryTol)) {
            throw NumericDomainError("correlation matrix must have a unit diagonal");
        }
        for (Eigen::Index c = r + 1; c < d; ++c) {
            if (!std::isfinite(corr(r, c)) ||
                !(std::abs(corr(r, c) - corr(c, r)) <= kSymmetryTol)) {
                throw NumericDomainError("correlation matrix must be finite and symmetric");
            }
            if (std::abs(corr(r, c)) > 1.0 + kSymmetryTol) {
                throw NumericDomainError("correlation entries must lie in [-1, 1]");
            }
        }
    }
}

// True when corr(l, m) = prod_{k=l}^{m-1} corr(k, k+1) for every l < m, i.e.
// the variables form a Gauss-Markov chain in index order, with every link
// strictly inside (-1, 1). Such matrices are PSD by construction.
bool is_chain(const Eigen::MatrixXd& corr) {
    const Eigen::Index d = corr.rows();
    for (Eigen::Index k = 0; k + 1 < d; ++k) {
        if (!(std::abs(corr(k, k + 1)) < 1.0 - 1e-12)) return false;
    }
    for (Eigen::Index l = 0; l < d; ++l) {
        double product = 1.0;
        for (Eigen::Index m = l + 1; m < d; ++m) {
            product *= corr(m - 1, m);
            if (std::abs(corr(l, m) - product) > kChainTol) return false;
        }
    }
    return true;
}

void check_psd(const Eigen::MatrixXd& corr) {
    if (corr.rows() < 2) return;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(corr, Eigen::EigenvaluesOnly);
    const double smallest = eig.eigenvalues().minCoeff();
    if (smallest < -kPsdTol) {
        std::ostringstream msg;
        msg << "correlation matrix is not positive semi-definite (smallest eigenvalue "
            << smallest << ")";
        throw NumericDomainError(msg.str());
    }
}

// Gauss-Legendre points per unit of the narrowest Gaussian scale involved.
double chain_node_density(double abs_tol) {
    const double digits = -std::log10(std::clamp(abs_tol, 1e-15, 1e-2));
    return 0.35 + 0.12 * digits;
}

struct ChainNodes {
    std::vector<double> z;
    std::vector<double> w;
};

ChainNodes chain_nodes(double lo, double hi, double width, double density) {
    const double len = hi - lo;
    const int m = std::clamp(static_cast<int>(std::ceil(density * len / width)) + 6, 8, 800);
    const QuadratureRule& rule = gauss_legendre(m);
    ChainNodes out;
    out.z.resize(static_cast<std::size_t>(m));
    out.w.resize(static_cast<std::size_t>(m));
    const double half = 0.5 * len;
    const double mid = 0.5 * (lo + hi);
    for (std::size_t k = 0; k < out.z.size(); ++k) {
        out.z[k] = mid + half * rule.nodes[k];
        out.w[k] = half * rule.weights[k];
    }
    return out;
}

// Orthant probability of a Gauss-Markov chain Z_{k+1} = r_k Z_k + sqrt(1 - r_k^2) W_k
// by Nystrom propagation of the surviving density on Gauss-Legendre nodes.
double chain_orthant(std::span<const double> upper, std::span<const double> links,
                     double abs_tol) {
    const std::size_t d = upper.size();
    std::vector<double> hi(d);
    for (std::size_t k = 0; k < d; ++k) {
        hi[k] = std::min(upper[k], kChainSpan);
        if (hi[k] <= -kChainSpan) return 0.0;
    }
    std::vector<double> cond_sd(links.size());
    for (std::size_t k = 0; k < links.size(); ++k) {
        cond_sd[k] = std::sqrt(1.0 - links[k] * links[k]);
    }
    auto width_for = [&](std::size_t k) {
        double w = 1.0;
        if (k > 0) w = std::min(w, cond_sd[k - 1]);
        if (k + 1 < d && links[k] != 0.0) w = std::min(w, cond_sd[k] / std::abs(links[k]));
        return w;
    };
    const double density = chain_node_density(abs_tol);

    ChainNodes nodes = chain_nodes(-kChainSpan, hi[0], width_for(0), density);
    // mass[k] = quadrature weight times surviving density at node k
    std::vector<double> mass(nodes.z.size());
    for (std::size_t k = 0; k < mass.size(); ++k) {
        mass[k] = nodes.w[k] * std_normal_pdf(nodes.z[k]);
    }
    for (std::size_t step = 1; step < d; ++step) {
        const double r = links[step - 1];
        const double inv_sd = 1.0 / cond_sd[step - 1];
        const double scale = inv_sd / std::sqrt(2.0 * std::numbers::pi);
        ChainNodes next = chain_nodes(-kChainSpan, hi[step], width_for(step), density);
        std::vector<double> next_mass(next.z.size());
        for (std::size_t j = 0; j < next.z.size(); ++j) {
            const double target = next.z[j];
            double acc = 0.0;
            for (std::size_t k = 0; k < nodes.z.size(); ++k) {
                const double u = (target - r * nodes.z[k]) * inv_sd;
                acc += mass[k] * std::exp(-0.5 * u * u);
            }
            next_mass[j] = next.w[j] * scale * acc;
        }
        nodes = std::move(next);
        mass = std::move(next_mass);
    }
    double total = 0.0;
    for (double m : mass) total += m;
    return std::clamp(total, 0.0, 1.0);
}

constexpr std::array<int, kMaxLatticeDim> kPrimes = {2,  3,  5,  7,  11, 13, 17, 19, 23,
                                                     29, 31, 37, 41, 43, 47, 53, 59, 61,
                                                     67, 71, 73, 79, 83, 89, 97};

double canonical(std::mt19937_64& engine) {
    return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

// Separation-of-variables integrand with Genz-Bretz variable prioritization
// and a Richtmyer lattice with random shifts.
MvnResult lattice_orthant(std::vector<double> upper, Eigen::MatrixXd corr,
                          const MvnAccuracy& acc) {
    const auto d = static_cast<Eigen::Index>(upper.size());
    if (upper.size() > kMaxLatticeDim) {
        std::ostringstream msg;
        msg << "mvn_cdf: lattice engine supports at most " << kMaxLatticeDim
            << " free coordinates, got " << upper.size();
        throw ArgumentError(msg.str());
    }
    Eigen::MatrixXd chol = Eigen::MatrixXd::Zero(d, d);
    std::vector<double> expected(upper.size(), 0.0);
    for (Eigen::Index i = 0; i < d; ++i) {
        // Choose the remaining variable with the smallest conditional probability.
        Eigen::Index best = i;
        double best_prob = 2.0;
        for (Eigen::Index j = i; j < d; ++j) {
            double var = corr(j, j);
            double shift = 0.0;
            for (Eigen::Index k = 0; k < i; ++k) {
                var -= chol(j, k) * chol(j, k);
                shift += chol(j, k) * expected[static_cast<std::size_t>(k)];
            }
            const double sd = std::sqrt(std::max(var, 0.0));
            double prob = 1.0;
            if (sd > kSingularPivot) {
                prob = std_normal_cdf((upper[static_cast<std::size_t>(j)] - shift) / sd);
            }
            if (prob < best_prob) {
                best_prob = prob;
                best = j;
            }
        }
        if (best != i) {
            std::swap(upper[static_cast<std::size_t>(i)], upper[static_cast<std::size_t>(best)]);
            corr.row(i).swap(corr.row(best));
            corr.col(i).swap(corr.col(best));
            chol.row(i).swap(chol.row(best));
        }
        double var = corr(i, i);
        double shift = 0.0;
        for (Eigen::Index k = 0; k < i; ++k) {
            var -= chol(i, k) * chol(i, k);
            shift += chol(i, k) * expected[static_cast<std::size_t>(k)];
        }
        if (var <= kSingularPivot * kSingularPivot) {
            chol(i, i) = 0.0;
            expected[static_cast<std::size_t>(i)] = 0.0;
            continue;
        }
        const double sd = std::sqrt(var);
        chol(i, i) = sd;
        for (Eigen::Index j = i + 1; j < d; ++j) {
            double v = corr(j, i);
            for (Eigen::Index k = 0; k < i; ++k) v -= chol(j, k) * chol(i, k);
            chol(j, i) = v / sd;
        }
        const double t = (upper[static_cast<std::size_t>(i)] - shift) / sd;
        const double p = std_normal_cdf(t);
        expected[static_cast<std::size_t>(i)] =
            p > 1e-300 ? -std_normal_pdf(t) / p : t;
    }

    std::vector<double> y(upper.size());
    auto integrand = [&](std::span<const double> u) {
        double f = 1.0;
        for (Eigen::Index i = 0; i < d; ++i) {
            double shift = 0.0;
            for (Eigen::Index k = 0; k < i; ++k) shift += chol(i, k) * y[static_cast<std::size_t>(k)];
            const double b = upper[static_cast<std::size_t>(i)];
            const double sd = chol(i, i);
            double e;
            if (sd == 0.0) {
                e = shift <= b ? 1.0 : 0.0;
            } else {
                e = std_normal_cdf((b - shift) / sd);
            }
            f *= e;
            if (f == 0.0) return 0.0;
            if (i + 1 < d) {
                if (sd == 0.0) {
                    y[static_cast<std::size_t>(i)] = 0.0;
                } else {
                    const double p = std::clamp(u[static_cast<std::size_t>(i)] * e,
                                                std::numeric_limits<double>::min(), 1.0 - 1e-16);
                    y[static_cast<std::size_t>(i)] = std_normal_quantile(p);
                }
            }
        }
        return f;
    };

    const std::size_t dims = upper.size() - 1;
    std::vector<double> generator(dims);
    for (std::size_t j = 0; j < dims; ++j) generator[j] = std::sqrt(static_cast<double>(kPrimes[j]));

    constexpr std::size_t kShifts = 12;
    std::mt19937_64 engine(acc.rng_seed);
    std::vector<std::vector<double>> shifts(kShifts, std::vector<double>(dims));
    for (auto& s : shifts) {
        for (double& v : s) v = canonical(engine);
    }

    std::vector<double> sums(kShifts, 0.0);
    std::vector<double> point(dims);
    std::size_t count = 0;
    std::size_t batch = 256;
    MvnResult result;
    result.effective_dim = upper.size();
    while (true) {
        for (std::size_t s = 0; s < kShifts; ++s) {
            for (std::size_t k = count + 1; k <= count + batch; ++k) {
                for (std::size_t j = 0; j < dims; ++j) {
                    double x = static_cast<double>(k) * generator[j] + shifts[s][j];
                    x -= std::floor(x);
                    point[j] = std::abs(2.0 * x - 1.0);
                }
                sums[s] += integrand(point);
            }
        }
        count += batch;
        double mean = 0.0;
        for (double v : sums) mean += v / static_cast<double>(count);
        mean /= kShifts;
        double var = 0.0;
        for (double v : sums) {
            const double diff = v / static_cast<double>(count) - mean;
            var += diff * diff;
        }
        var /= static_cast<double>(kShifts * (kShifts - 1));
        result.value = std::clamp(mean, 0.0, 1.0);
        result.error = 3.0 * std::sqrt(var);
        if (result.error <= acc.abs_tol || 2 * count * kShifts > acc.sample_budget) break;
        batch = count;
    }
    return result;
}

}  // namespace

void MvnAccuracy::validate() const {
    if (!(abs_tol > 0.0)) throw ArgumentError("mvn abs_tol must be positive");
    if (sample_budget < 1000) throw ArgumentError("mvn sample_budget must be at least 1000");
}

double std_normal_pdf(double z) {
    if (std::isinf(z)) return 0.0;
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double std_normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw ArgumentError("std_normal_quantile: p must lie in (0, 1)");
    return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

MvnResult mvn_cdf_estimate(std::span<const double> upper, const Eigen::MatrixXd& corr,
                           const MvnAccuracy& acc) {
    acc.validate();
    if (static_cast<Eigen::Index>(upper.size()) != corr.rows()) {
        throw ArgumentError("mvn_cdf: limit vector and correlation matrix differ in dimension");
    }
    check_correlation(corr);
    std::vector<Eigen::Index> keep;
    for (std::size_t k = 0; k < upper.size(); ++k) {
        if (std::isnan(upper[k])) throw ArgumentError("mvn_cdf: NaN limit");
        if (upper[k] == -kInf) return {};
        if (upper[k] != kInf) keep.push_back(static_cast<Eigen::Index>(k));
    }
    const auto d = static_cast<Eigen::Index>(keep.size());
    Eigen::MatrixXd reduced(d, d);
    std::vector<double> limits(keep.size());
    for (Eigen::Index r = 0; r < d; ++r) {
        limits[static_cast<std::size_t>(r)] = upper[static_cast<std::size_t>(keep[static_cast<std::size_t>(r)])];
        for (Eigen::Index c = 0; c < d; ++c) {
            reduced(r, c) = corr(keep[static_cast<std::size_t>(r)], keep[static_cast<std::size_t>(c)]);
        }
    }

    MvnResult result;
    result.effective_dim = keep.size();
    if (d == 0) {
        result.value = 1.0;
        return result;
    }
    if (d == 1) {
        result.value = std_normal_cdf(limits[0]);
        return result;
    }
    if (acc.engine == MvnEngine::automatic && is_chain(reduced)) {
        std::vector<double> links(keep.size() - 1);
        for (Eigen::Index k = 0; k + 1 < d; ++k) links[static_cast<std::size_t>(k)] = reduced(k, k + 1);
        result.value = chain_orthant(limits, links, acc.abs_tol);
        result.error = acc.abs_tol;
        result.used_chain_recursion = true;
        return result;
    }
    check_psd(reduced);
    return lattice_orthant(std::move(limits), std::move(reduced), acc);
}

double mvn_cdf(std::span<const double> upper, const Eigen::MatrixXd& corr,
               const MvnAccuracy& acc) {
    return mvn_cdf_estimate(upper, corr, acc).value;
}

Eigen::MatrixXd partial_correlation_matrix(const Eigen::MatrixXd& corr, Eigen::Index j) {
    const Eigen::Index d = corr.rows();
    if (corr.cols() != d) throw ArgumentError("partial_correlation_matrix: matrix must be square");
    if (j < 0 || j >= d) throw ArgumentError("partial_correlation_matrix: index out of range");
    std::vector<double> residual_sd(static_cast<std::size_t>(d), 0.0);
    for (Eigen::Index l = 0; l < d; ++l) {
        if (l == j) continue;
        const double rho = corr(l, j);
        if (std::abs(rho) >= 1.0) {
            throw SingularConditioningError(
                "partial_correlation_matrix: variable perfectly correlated with the removed one");
        }
        residual_sd[static_cast<std::size_t>(l)] = std::sqrt(1.0 - rho * rho);
    }
    Eigen::MatrixXd out(d - 1, d - 1);
    for (Eigen::Index l = 0, r = 0; l < d; ++l) {
        if (l == j) continue;
        for (Eigen::Index m = 0, c = 0; m < d; ++m) {
            if (m == j) continue;
            if (l == m) {
                out(r, c) = 1.0;
            } else {
                const double v = (corr(l, m) - corr(l, j) * corr(m, j)) /
                                 (residual_sd[static_cast<std::size_t>(l)] *
                                  residual_sd[static_cast<std::size_t>(m)]);
                out(r, c) = std::clamp(v, -1.0, 1.0);
            }
            ++c;
        }
        ++r;
    }
    return out;
}

std::vector<double> conditional_truncation_coords(std::span<const double> beta,
                                                  const Eigen::MatrixXd& corr, Eigen::Index j,
                                                  bool exclude_last) {
    const auto d = static_cast<Eigen::Index>(beta.size());
    if (corr.rows() != d || corr.cols() != d) {
        throw ArgumentError("conditional_truncation_coords: dimension mismatch");
    }
    if (j < 0 || j >= d) throw ArgumentError("conditional_truncation_coords: index out of range");
    const double pivot = beta[static_cast<std::size_t>(j)];
    if (!std::isfinite(pivot)) {
        throw ArgumentError("conditional_truncation_coords: conditioning level must be finite");
    }
    std::vector<double> alpha;
    alpha.reserve(beta.size() - 1);
    for (Eigen::Index l = 0; l < d; ++l) {
        if (l == j) continue;
        const double rho = corr(l, j);
        if (std::abs(rho) >= 1.0) {
            throw SingularConditioningError(
                "conditional_truncation_coords: perfectly correlated coordinate");
        }
        if (exclude_last && l == d - 1) {
            alpha.push_back(-kInf);
            continue;
        }
        alpha.push_back((beta[static_cast<std::size_t>(l)] - rho * pivot) /
                        std::sqrt(1.0 - rho * rho));
    }
    return alpha;
}

}  // namespace ouprocure
