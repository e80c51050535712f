#pragma once
#include <algorithm>
#include <cmath>

#include "errors.hpp"
#include "quad.hpp"

// erf-type transfer function S(x) = erf(g·x + γ) and its Gaussian moments.
// The closure f(μ,v) = E[S(X)], X ~ N(μ,v) has the closed form
// erf((gμ+γ)/√(1+2g²v)): completing the square in the double Gaussian
// integral contributes 2g²v, and f must reduce to a plain expectation that
// high-order quadrature reproduces to machine precision (asserted in tests).

namespace hs {

struct SigmoidSpec {
    double g = 1.0;
    double gamma = 0.0;

    void validate() const {
        if (!(g > 0.0) || !std::isfinite(g)) throw ConfigError("sigmoid gain must be > 0");
        if (!std::isfinite(gamma)) throw ConfigError("sigmoid offset must be finite");
    }
};

inline double sigmoid_eval(const SigmoidSpec& s, double x) { return std::erf(s.g * x + s.gamma); }

// E[S(X)] for X ~ N(mu, v), closed form.
inline double f_moment(const SigmoidSpec& s, double mu, double v) {
    if (v < 0.0) throw ConfigError("f_moment: variance must be >= 0");
    return std::erf((s.g * mu + s.gamma) / std::sqrt(1.0 + 2.0 * s.g * s.g * v));
}

// ∂f/∂μ and ∂f/∂v, used by the equilibrium Jacobian.
inline double f_moment_dmu(const SigmoidSpec& s, double mu, double v) {
    double D = std::sqrt(1.0 + 2.0 * s.g * s.g * v);
    double z = (s.g * mu + s.gamma) / D;
    return (2.0 / std::sqrt(M_PI)) * std::exp(-z * z) * s.g / D;
}

inline double f_moment_dv(const SigmoidSpec& s, double mu, double v) {
    double D2 = 1.0 + 2.0 * s.g * s.g * v;
    double D = std::sqrt(D2);
    double z = (s.g * mu + s.gamma) / D;
    return -(2.0 / std::sqrt(M_PI)) * std::exp(-z * z) * s.g * s.g * (s.g * mu + s.gamma) / (D2 * D);
}

// E[S(X)] for X ~ N(mu, v) by quadrature alone (the oracle side of the
// closure). A single Hermite rule stalls near 1e-2 error once erf saturates
// inside the Gaussian's bulk, so: clip where |g·x+γ| > 7.5 (erf is ±1 there
// to 4e-17) and add the clipped Gaussian mass exactly, then integrate the
// remaining band by composite Gauss-Legendre with `order` nodes per panel
// and panels no wider than the erf transition (1/g) or the Gaussian (√v).
inline double gauss_expectation(const SigmoidSpec& s, double mu, double v, int order = 64) {
    if (v < 0.0) throw ConfigError("gauss_expectation: variance must be >= 0");
    if (v == 0.0) return sigmoid_eval(s, mu);
    const double sd = std::sqrt(v);
    const double a = (-7.5 - s.gamma) / s.g;
    const double b = (7.5 - s.gamma) / s.g;
    double result = -phi_cdf((a - mu) / sd) + 1.0 - phi_cdf((b - mu) / sd);
    double lo = std::max(a, mu - 12.0 * sd);
    double hi = std::min(b, mu + 12.0 * sd);
    if (lo >= hi) return result; // the unsaturated band carries < 2e-33 mass

    static thread_local int cached_order = -1;
    static thread_local QuadRule gl;
    if (cached_order != order) {
        gl = gauss_legendre_nodes(order);
        cached_order = order;
    }
    double panel = std::min(1.5 / s.g, 1.5 * sd);
    int npanels = std::max(1, int(std::ceil((hi - lo) / panel)));
    double h = (hi - lo) / npanels;
    const double inv_norm = 1.0 / (sd * std::sqrt(2.0 * M_PI));
    for (int p = 0; p < npanels; ++p) {
        double c = lo + (p + 0.5) * h, half = 0.5 * h;
        double acc = 0.0;
        for (int k = 0; k < int(gl.nodes.size()); ++k) {
            double x = c + half * gl.nodes[k];
            double z = (x - mu) / sd;
            acc += gl.weights[k] * std::erf(s.g * x + s.gamma) * std::exp(-0.5 * z * z);
        }
        result += half * acc * inv_norm;
    }
    return result;
}

// E[S(X)·S(Y)] for (X,Y) jointly Gaussian with means (mu_u, mu_v) and
// covariance [[c_uu, c_uv], [c_uv, c_vv]], tensorized Gauss-Hermite on the
// Cholesky factor. Correlations are clamped to ±(1−1e-9).
inline double bivariate_sigmoid_moment(const SigmoidSpec& s, double mu_u, double mu_v, double c_uu, double c_vv,
                                       double c_uv, int order = 24) {
    if (order < 20) order = 20;
    if (c_uu < -1e-12 || c_vv < -1e-12) throw NumericError("bivariate_sigmoid_moment: negative variance");
    c_uu = std::max(c_uu, 0.0);
    c_vv = std::max(c_vv, 0.0);
    double scale = std::sqrt(c_uu * c_vv);
    if (scale == 0.0) { // a degenerate marginal is a constant factor
        double su = c_uu == 0.0 ? sigmoid_eval(s, mu_u) : gauss_expectation(s, mu_u, c_uu);
        double sv = c_vv == 0.0 ? sigmoid_eval(s, mu_v) : gauss_expectation(s, mu_v, c_vv);
        return su * sv;
    }
    double rho = std::clamp(c_uv / scale, -1.0 + 1e-9, 1.0 - 1e-9);
    double l11 = std::sqrt(c_uu);
    double l21 = rho * std::sqrt(c_vv);
    double l22 = std::sqrt(c_vv * (1.0 - rho * rho));

    static thread_local int cached_order = -1;
    static thread_local QuadRule gh;
    if (cached_order != order) {
        gh = gauss_hermite_nodes(order);
        cached_order = order;
    }
    const double s2 = std::sqrt(2.0);
    double acc = 0.0;
    for (int i = 0; i < order; ++i) {
        double xi = gh.nodes[i];
        double su = sigmoid_eval(s, mu_u + s2 * l11 * xi);
        double inner = 0.0;
        for (int j = 0; j < order; ++j) inner += gh.weights[j] * sigmoid_eval(s, mu_v + s2 * (l21 * xi + l22 * gh.nodes[j]));
        acc += gh.weights[i] * su * inner;
    }
    return acc / M_PI;
}

} // namespace hs
