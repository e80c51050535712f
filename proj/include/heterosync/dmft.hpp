#pragma once
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "errors.hpp"
#include "model.hpp"
#include "sigmoid.hpp"
#include "threads.hpp"

// Self-consistent Gaussian-process solver for the quenched mean-field:
// mean path mu_a(t) and two-time covariance C_a(t,s) on a uniform grid,
//   C_a(t,s) = e^{-(t+s-2t0)/tau_a} C_a(t0,t0)
//            + sigma^2 sum_b II e^{-(t-u)/tau_a - (s-v)/tau_a} E[S_u S_v] du dv,
// iterated with damped mixing until the map is stationary.

namespace hs {

struct CovarianceGrid {
    std::vector<Eigen::MatrixXd> C; // one symmetric M x M block per population

    int P() const { return int(C.size()); }
    long M() const { return C.empty() ? 0 : C[0].rows(); }
};

struct DmftReport {
    int iterations = 0;
    double residual = 0.0;
    bool converged = false;
    double eta_final = 0.0;
};

struct DmftSolution {
    std::vector<double> time;
    Eigen::MatrixXd mu; // M x P
    CovarianceGrid cov;
    DmftReport report;

    Eigen::MatrixXd equal_time_variance() const {
        Eigen::MatrixXd v(mu.rows(), mu.cols());
        for (int a = 0; a < int(cov.C.size()); ++a) v.col(a) = cov.C[size_t(a)].diagonal();
        return v;
    }
};

namespace detail {

// exponentially weighted cumulative trapezoid along one axis:
// out(i,:) = int_{t0}^{t_i} e^{-(t_i-u)/tau} F(u,:) du (rows), recursively
inline void exp_trapezoid_rows(const Eigen::MatrixXd& F, double h, double tau, Eigen::MatrixXd& out) {
    long M = F.rows();
    out.resize(M, F.cols());
    double w = std::exp(-h / tau);
    out.row(0).setZero();
    for (long i = 1; i < M; ++i) out.row(i) = w * out.row(i - 1) + (0.5 * h) * (w * F.row(i - 1) + F.row(i));
}

inline void enforce_covariance_shape(Eigen::MatrixXd& C) {
    C = 0.5 * (C + C.transpose()).eval();
    long M = C.rows();
    for (long i = 0; i < M; ++i) C(i, i) = std::max(C(i, i), 0.0);
    for (long i = 0; i < M; ++i)
        for (long j = 0; j < i; ++j) {
            double bound = std::sqrt(C(i, i) * C(j, j));
            double c = std::clamp(C(i, j), -bound, bound);
            C(i, j) = C(j, i) = c;
        }
}

} // namespace detail

// one application of the covariance self-consistency map
inline CovarianceGrid dmft_covariance_map(const ModelSpec& m, const std::vector<double>& time,
                                          const Eigen::MatrixXd& mu, const CovarianceGrid& C,
                                          const Eigen::VectorXd& initial_var, int gh_order = 24) {
    int P = m.P();
    long M = long(time.size());
    if (mu.rows() != M || mu.cols() != P || C.P() != P || C.M() != M || initial_var.size() != P)
        throw ConfigError("dmft_covariance_map: grid shape mismatch");
    double h = M > 1 ? time[1] - time[0] : 0.0;

    // E[S(V_u^b) S(V_v^b)] for every pair of grid times, per population
    std::vector<Eigen::MatrixXd> F(static_cast<size_t>(P));
    for (int b = 0; b < P; ++b) {
        auto& Fb = F[size_t(b)];
        Fb.resize(M, M);
        const auto& Cb = C.C[size_t(b)];
        parallel_for(size_t(M), [&](size_t i) {
            for (long j = long(i); j < M; ++j) {
                double v = bivariate_sigmoid_moment(m.sigmoid, mu(long(i), b), mu(j, b), Cb(long(i), long(i)),
                                                    Cb(j, j), Cb(long(i), j), gh_order);
                Fb(long(i), j) = v;
                Fb(j, long(i)) = v;
            }
        });
    }

    double s2 = m.coupling.sigma * m.coupling.sigma;
    CovarianceGrid out;
    out.C.resize(size_t(P));
    for (int a = 0; a < P; ++a) {
        double tau = m.pops[a].tau;
        Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(M, M);
        if (s2 > 0.0) {
            Eigen::MatrixXd tmp, inner;
            for (int b = 0; b < P; ++b) {
                detail::exp_trapezoid_rows(F[size_t(b)], h, tau, tmp);          // over u at fixed v
                detail::exp_trapezoid_rows(tmp.transpose().eval(), h, tau, inner); // over v
                acc += inner.transpose();
            }
        }
        Eigen::MatrixXd Ca(M, M);
        for (long i = 0; i < M; ++i)
            for (long j = 0; j < M; ++j)
                Ca(i, j) = std::exp(-(time[size_t(i)] + time[size_t(j)] - 2.0 * time[0]) / tau) * initial_var[a] +
                           s2 * acc(i, j);
        detail::enforce_covariance_shape(Ca);
        out.C[size_t(a)] = std::move(Ca);
    }
    return out;
}

// mean path given equal-time variances: same mu-equation as the moment ODEs
inline Eigen::MatrixXd dmft_mean_path(const ModelSpec& m, const std::vector<double>& time,
                                      const Eigen::VectorXd& initial_mean, const CovarianceGrid& C) {
    int P = m.P();
    long M = long(time.size());
    Eigen::MatrixXd mu(M, P);
    mu.row(0) = initial_mean.transpose();
    Eigen::MatrixXd diag(M, P);
    for (int a = 0; a < P; ++a) diag.col(a) = C.C[size_t(a)].diagonal();
    auto rhs = [&](const Eigen::VectorXd& x, double t, const Eigen::VectorXd& v) {
        Eigen::VectorXd f(P);
        for (int b = 0; b < P; ++b) f[b] = f_moment(m.sigmoid, x[b], std::max(v[b], 0.0));
        Eigen::VectorXd d = m.coupling.mean_weights * f;
        for (int a = 0; a < P; ++a) d[a] += -x[a] / m.pops[a].tau + m.input(a, t);
        return d;
    };
    for (long i = 0; i + 1 < M; ++i) {
        double h = time[size_t(i) + 1] - time[size_t(i)], t = time[size_t(i)];
        Eigen::VectorXd v0 = diag.row(i).transpose(), v1 = diag.row(i + 1).transpose(), vh = 0.5 * (v0 + v1);
        Eigen::VectorXd x = mu.row(i).transpose();
        Eigen::VectorXd k1 = rhs(x, t, v0);
        Eigen::VectorXd k2 = rhs(x + 0.5 * h * k1, t + 0.5 * h, vh);
        Eigen::VectorXd k3 = rhs(x + 0.5 * h * k2, t + 0.5 * h, vh);
        Eigen::VectorXd k4 = rhs(x + h * k3, t + h, v1);
        mu.row(i + 1) = (x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)).transpose();
        if (!mu.row(i + 1).allFinite() || mu.row(i + 1).cwiseAbs().maxCoeff() > 1e6)
            throw BlowUpError(t + h, "dmft mean path");
    }
    return mu;
}

inline DmftSolution solve_dmft(const ModelSpec& m, const TimeGrid& grid, const Eigen::VectorXd& initial_mean,
                               const Eigen::VectorXd& initial_var, double eta = 0.5, double tol = 1e-6,
                               int max_iter = 200, int gh_order = 24) {
    if (!(eta > 0.0 && eta <= 1.0)) throw ConfigError("solve_dmft: damping must be in (0, 1]");
    if (!(tol > 0.0)) throw ConfigError("solve_dmft: tol must be > 0");
    int P = m.P();
    if (initial_mean.size() != P || initial_var.size() != P) throw ConfigError("solve_dmft: initial law dimension mismatch");
    if (initial_var.minCoeff() < 0.0) throw ConfigError("solve_dmft: initial variance must be >= 0");
    long n = grid.steps();
    DmftSolution sol;
    sol.time.resize(size_t(n) + 1);
    for (long i = 0; i <= n; ++i) sol.time[size_t(i)] = grid.time(i);
    long M = n + 1;

    // C0(t,s) = e^{-|t-s|/tau} * initial_var
    sol.cov.C.resize(size_t(P));
    for (int a = 0; a < P; ++a) {
        auto& Ca = sol.cov.C[size_t(a)];
        Ca.resize(M, M);
        for (long i = 0; i < M; ++i)
            for (long j = 0; j < M; ++j)
                Ca(i, j) = std::exp(-std::abs(sol.time[size_t(i)] - sol.time[size_t(j)]) / m.pops[a].tau) *
                           initial_var[a];
    }

    // halve the damping whenever the residual grows; early iterations often
    // bump once while the transient washes out, so after several consecutive
    // non-increasing steps the damping recovers toward its initial value
    const double eta0 = eta;
    double prev_res = std::numeric_limits<double>::infinity();
    int calm = 0;
    sol.report.eta_final = eta;
    for (int it = 1; it <= max_iter; ++it) {
        sol.mu = dmft_mean_path(m, sol.time, initial_mean, sol.cov);
        CovarianceGrid next = dmft_covariance_map(m, sol.time, sol.mu, sol.cov, initial_var, gh_order);
        double res = 0.0;
        for (int a = 0; a < P; ++a)
            res = std::max(res, (next.C[size_t(a)] - sol.cov.C[size_t(a)]).cwiseAbs().maxCoeff());
        sol.report.iterations = it;
        sol.report.residual = res;
        if (res > prev_res) {
            if (eta > 1.0 / 64.0) eta *= 0.5;
            calm = 0;
        } else if (++calm >= 6 && eta < eta0) {
            eta = std::min(eta0, 2.0 * eta);
            calm = 0;
        }
        sol.report.eta_final = eta;
        prev_res = res;
        for (int a = 0; a < P; ++a)
            sol.cov.C[size_t(a)] = ((1.0 - eta) * sol.cov.C[size_t(a)] + eta * next.C[size_t(a)]).eval();
        if (res < tol) {
            sol.report.converged = true;
            break;
        }
    }
    sol.mu = dmft_mean_path(m, sol.time, initial_mean, sol.cov);
    return sol;
}

} // namespace hs
