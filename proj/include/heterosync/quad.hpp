#pragma once
#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "errors.hpp"

// Gaussian quadrature rules via the Golub-Welsch eigenvalue construction on
// the Jacobi matrix of the weight's orthogonal polynomials.

namespace hs {

struct QuadRule {
    std::vector<double> nodes, weights;
};

namespace detail {

// symmetric weight => tie node pairs together exactly
inline void symmetrize_rule(QuadRule& r) {
    int n = int(r.nodes.size());
    for (int k = 0, j = n - 1; k < j; ++k, --j) {
        double x = 0.5 * (r.nodes[j] - r.nodes[k]);
        r.nodes[k] = -x;
        r.nodes[j] = x;
        double w = 0.5 * (r.weights[k] + r.weights[j]);
        r.weights[k] = r.weights[j] = w;
    }
    if (n % 2 == 1) r.nodes[n / 2] = 0.0;
}

inline QuadRule golub_welsch(const std::vector<double>& offdiag, double mu0) {
    int n = int(offdiag.size()) + 1;
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) T(k, k - 1) = T(k - 1, k) = offdiag[k - 1];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    QuadRule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    for (int k = 0; k < n; ++k) {
        r.nodes[k] = es.eigenvalues()[k];
        double v0 = es.eigenvectors()(0, k);
        r.weights[k] = mu0 * v0 * v0;
    }
    symmetrize_rule(r);
    return r;
}

} // namespace detail

// Nodes/weights for ∫ p(x) e^{-x²} dx (physicists' convention), exact for
// polynomials of degree ≤ 2·order−1.
inline QuadRule gauss_hermite_nodes(int order) {
    if (order < 1 || order > 128) throw ConfigError("gauss_hermite_nodes: order must be in [1,128]");
    if (order == 1) return {{0.0}, {std::sqrt(M_PI)}};
    std::vector<double> b(order - 1);
    for (int k = 1; k < order; ++k) b[k - 1] = std::sqrt(k / 2.0);
    return detail::golub_welsch(b, std::sqrt(M_PI));
}

// Nodes/weights for ∫_{-1}^{1} p(x) dx.
inline QuadRule gauss_legendre_nodes(int order) {
    if (order < 1 || order > 128) throw ConfigError("gauss_legendre_nodes: order must be in [1,128]");
    if (order == 1) return {{0.0}, {2.0}};
    std::vector<double> b(order - 1);
    for (int k = 1; k < order; ++k) b[k - 1] = k / std::sqrt(4.0 * k * k - 1.0);
    return detail::golub_welsch(b, 2.0);
}

// standard normal CDF
inline double phi_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

} // namespace hs
