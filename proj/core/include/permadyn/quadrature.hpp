#ifndef PERMADYN_QUADRATURE_HPP
#define PERMADYN_QUADRATURE_HPP

#include <vector>

namespace permadyn {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;  // normalized to a probability measure
};

/// Nodes/weights for the standard normal measure (probabilists' Hermite),
/// via the Golub-Welsch eigenproblem.
QuadratureRule gauss_hermite_prob(int n_nodes);

/// Nodes/weights for the Gamma(shape, 1) probability measure (generalized
/// Gauss-Laguerre with alpha = shape - 1).
QuadratureRule gauss_laguerre_gamma(int n_nodes, double shape);

} // namespace permadyn

#endif
