#include "permadyn/quadrature.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace permadyn {

namespace {

/// Golub-Welsch: nodes are eigenvalues of the Jacobi matrix, weights the
/// squared first components of the normalized eigenvectors (times the total
/// mass, which is 1 for a probability measure).
QuadratureRule golub_welsch(const Eigen::VectorXd& diag, const Eigen::VectorXd& subdiag) {
    const int n = static_cast<int>(diag.size());
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        jacobi(i, i) = diag(i);
        if (i + 1 < n) {
            jacobi(i, i + 1) = subdiag(i);
            jacobi(i + 1, i) = subdiag(i);
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
    QuadratureRule rule;
    rule.nodes.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        rule.nodes[static_cast<std::size_t>(i)] = es.eigenvalues()(i);
        const double v0 = es.eigenvectors()(0, i);
        rule.weights[static_cast<std::size_t>(i)] = v0 * v0;
    }
    return rule;
}

} // namespace

QuadratureRule gauss_hermite_prob(int n_nodes) {
    if (n_nodes < 1) throw std::invalid_argument("quadrature needs >= 1 node");
    // probabilists' Hermite recurrence: a_k = 0, b_k = sqrt(k)
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(n_nodes);
    Eigen::VectorXd sub(n_nodes > 1 ? n_nodes - 1 : 0);
    for (int k = 1; k < n_nodes; ++k) sub(k - 1) = std::sqrt(static_cast<double>(k));
    return golub_welsch(diag, sub);
}

QuadratureRule gauss_laguerre_gamma(int n_nodes, double shape) {
    if (n_nodes < 1) throw std::invalid_argument("quadrature needs >= 1 node");
    if (!(shape > 0.0)) throw std::invalid_argument("gamma shape must be positive");
    const double alpha = shape - 1.0;
    Eigen::VectorXd diag(n_nodes);
    Eigen::VectorXd sub(n_nodes > 1 ? n_nodes - 1 : 0);
    for (int k = 0; k < n_nodes; ++k) diag(k) = 2.0 * k + alpha + 1.0;
    for (int k = 1; k < n_nodes; ++k)
        sub(k - 1) = std::sqrt(k * (k + alpha));
    return golub_welsch(diag, sub);
}

} // namespace permadyn
