#pragma once

#include <vector>

namespace ouprocure {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// m-point Gauss-Legendre rule on [-1, 1]. Rules are cached; the returned
/// reference stays valid for the lifetime of the program.
const QuadratureRule& gauss_legendre(int m);

/// m-point Gauss-Hermite rule for the standard normal weight, i.e.
/// sum_k w_k f(z_k) ~ E[f(Z)], Z ~ N(0, 1). Weights sum to one.
QuadratureRule gauss_hermite_normal(int m);

}  // namespace ouprocure
