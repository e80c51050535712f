#pragma once
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "analysis.hpp"
#include "errors.hpp"
#include "model.hpp"
#include "moments.hpp"
#include "network.hpp"
#include "rng.hpp"

// FitzHugh-Nagumo network with quenched random electrical couplings,
//   v' = f(v) - w + sum_j J_ij (v_j - v_i) + I,  w' = a (b v - w),
//   f(v) = v (1 - v) (v - kappa),
// plus the 2-d Gaussian moment reduction at fixed voltage spread lambda.

namespace hs {

struct FnParams {
    double a = 0.4, b = 2.0, I = 0.5, kappa = 2.0;
    double mean_coupling = 1.5; // Jbar
    double sigma = 0.0;
    long size = 1;

    void validate() const {
        if (!(a > 0.0)) throw ConfigError("fn: a must be > 0");
        if (size < 1) throw ConfigError("fn: size must be >= 1");
        if (!(sigma >= 0.0)) throw ConfigError("fn: sigma must be >= 0");
        for (double x : {b, I, kappa, mean_coupling})
            if (!std::isfinite(x)) throw ConfigError("fn: parameters must be finite");
    }

    // single-population proxy so weight sampling matches the rate model
    ModelSpec weight_model() const {
        ModelSpec m;
        m.pops = {{1.0, 0.0, size}};
        m.coupling.mean_weights = Eigen::MatrixXd::Constant(1, 1, mean_coupling);
        m.coupling.sigma = sigma;
        m.coupling.kind = CouplingKind::Quenched;
        return m;
    }
};

inline double fn_f(const FnParams& p, double v) { return v * (1.0 - v) * (v - p.kappa); }
inline double fn_f_prime(const FnParams& p, double v) { return -3.0 * v * v + 2.0 * (1.0 + p.kappa) * v - p.kappa; }

// unique root of f(v) - b v + I = 0 (w* = b v*); three real roots -> error
inline std::pair<double, double> fn_single_equilibrium(const FnParams& p) {
    // -v^3 + (1+kappa) v^2 - (kappa + b) v + I = 0, normalized v^3 + c2 v^2 + c1 v + c0 = 0
    double c2 = -(1.0 + p.kappa), c1 = p.kappa + p.b, c0 = -p.I;
    double q = (3.0 * c1 - c2 * c2) / 9.0;
    double r = (9.0 * c2 * c1 - 27.0 * c0 - 2.0 * c2 * c2 * c2) / 54.0;
    double disc = q * q * q + r * r; // < 0 means three distinct real roots
    if (disc < 0.0) throw ConfigError("fn_single_equilibrium: three real roots, equilibrium ambiguous");
    auto g = [&](double v) { return fn_f(p, v) - p.b * v + p.I; };
    double lo = -1.0, hi = 1.0;
    while (g(lo) < 0.0) lo -= std::max(1.0, std::abs(lo)); // cubic -> +inf as v -> -inf
    while (g(hi) > 0.0) hi += std::max(1.0, std::abs(hi));
    double v = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        double gv = g(v);
        if (gv > 0.0) lo = v;
        else hi = v;
        double slope = fn_f_prime(p, v) - p.b;
        double vn = slope != 0.0 ? v - gv / slope : 0.5 * (lo + hi);
        if (!(vn > lo && vn < hi)) vn = 0.5 * (lo + hi); // safeguard: fall back to bisection
        if (std::abs(vn - v) < 1e-15 * std::max(1.0, std::abs(v)) && std::abs(gv) < 1e-13) {
            v = vn;
            break;
        }
        v = vn;
    }
    if (std::abs(g(v)) >= 1e-12) throw NumericError("fn_single_equilibrium: root refinement failed");
    return {v, p.b * v};
}

struct FnState {
    Eigen::VectorXd v, w;
};

struct FnStats {
    PopulationStats v, w;
};

// i.i.d. Gaussian start around (m0v, m0w)
inline FnState initial_fn_state(const FnParams& p, std::uint64_t master_seed, double m0v, double v0v, double m0w,
                                double v0w) {
    if (v0v < 0.0 || v0w < 0.0) throw ConfigError("fn initial variance must be >= 0");
    SeededStream s(master_seed, stream_id(StreamKind::InitState, 0, 0));
    FnState st;
    st.v.resize(p.size);
    st.w.resize(p.size);
    for (long i = 0; i < p.size; ++i) {
        st.v[i] = m0v + std::sqrt(v0v) * s.normal(std::uint64_t(i));
        st.w[i] = m0w + std::sqrt(v0w) * s.normal(std::uint64_t(p.size + i));
    }
    return st;
}

// Coupling written as J(v - vbar) - rowsum .* (v - vbar): identical algebra
// (the constant shift cancels), but a uniform state gives an exact zero
// instead of catastrophic cancellation between J*v and rowsum*v.
inline FnStats simulate_fn_network(const FnParams& p, const WeightMatrix& W, const FnState& initial,
                                   const TimeGrid& grid, const SimOptions& opts = {}) {
    long N = p.size;
    if (W.J.rows() != N || initial.v.size() != N || initial.w.size() != N)
        throw ConfigError("simulate_fn_network: dimension mismatch");
    long n = grid.steps();
    long rows = n / opts.record_stride + 1;
    auto tracked = detail::pick_tracked(W.layout, opts.tracked_per_pop);
    auto sv = detail::make_stats(W.layout, rows, tracked, 1);
    auto sw = detail::make_stats(W.layout, rows, tracked, 1);

    // same mean/disorder split as the quenched rhs: the all-ones mean block
    // acts through sum(d), the remainder G through a single-precision matvec
    double mean_entry = p.mean_coupling / double(N);
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> G;
    Eigen::VectorXd grs; // disorder row sums, kept double
    double worst = 0.0;
    for (long i = 0; i < N; ++i)
        for (long j = 0; j < N; ++j) worst = std::max(worst, std::abs(W.J(i, j) - mean_entry));
    bool has_disorder = worst > 0.0;
    if (has_disorder) {
        G.resize(N, N);
        grs = Eigen::VectorXd::Zero(N);
        for (long i = 0; i < N; ++i)
            for (long j = 0; j < N; ++j) {
                double g = W.J(i, j) - mean_entry;
                G(i, j) = float(g);
                grs[i] += g;
            }
    }

    Eigen::VectorXd v = initial.v, w = initial.w;
    Eigen::VectorXd kv1(N), kv2(N), kv3(N), kv4(N), kw1(N), kw2(N), kw3(N), kw4(N), tv(N), tw(N), d(N);
    Eigen::VectorXf df(N), Gd(N);
    auto rhs = [&](const Eigen::VectorXd& vv, const Eigen::VectorXd& ww, Eigen::VectorXd& dv, Eigen::VectorXd& dw) {
        double vbar = vv.mean();
        d = vv.array() - vbar;
        double dsum = d.sum();
        if (has_disorder) {
            df = d.cast<float>();
            parallel_ranges(size_t(N), [&](size_t first, size_t last) {
                long len = long(last - first);
                Gd.segment(long(first), len).noalias() = G.middleRows(long(first), len) * df;
            });
        }
        parallel_ranges(size_t(N), [&](size_t first, size_t last) {
            for (size_t i = first; i < last; ++i) {
                long li = long(i);
                double couple = mean_entry * dsum - p.mean_coupling * d[li];
                if (has_disorder) couple += double(Gd[li]) - grs[li] * d[li];
                dv[li] = couple + fn_f(p, vv[li]) - ww[li] + p.I;
                dw[li] = p.a * (p.b * vv[li] - ww[li]);
            }
        });
    };

    long row = 0;
    detail::stats_row(W.layout, v, grid.t0, tracked, row, sv);
    detail::stats_row(W.layout, w, grid.t0, tracked, row, sw);
    ++row;
    for (long i = 0; i < n; ++i) {
        double t = grid.time(i), h = grid.dt;
        rhs(v, w, kv1, kw1);
        tv = v + 0.5 * h * kv1;
        tw = w + 0.5 * h * kw1;
        rhs(tv, tw, kv2, kw2);
        tv = v + 0.5 * h * kv2;
        tw = w + 0.5 * h * kw2;
        rhs(tv, tw, kv3, kw3);
        tv = v + h * kv3;
        tw = w + h * kw3;
        rhs(tv, tw, kv4, kw4);
        v += (h / 6.0) * (kv1 + 2.0 * kv2 + 2.0 * kv3 + kv4);
        w += (h / 6.0) * (kw1 + 2.0 * kw2 + 2.0 * kw3 + kw4);
        detail::check_network_state(v, t + h);
        detail::check_network_state(w, t + h);
        if ((i + 1) % opts.record_stride == 0) {
            detail::stats_row(W.layout, v, grid.time(i + 1), tracked, row, sv);
            detail::stats_row(W.layout, w, grid.time(i + 1), tracked, row, sw);
            ++row;
        }
    }
    for (auto* s : {&sv, &sw}) {
        s->time.resize(size_t(row));
        s->mean.conservativeResize(row, Eigen::NoChange);
        s->var.conservativeResize(row, Eigen::NoChange);
        s->traces.conservativeResize(row, Eigen::NoChange);
    }
    return {std::move(sv), std::move(sw)};
}

// raw vector field at a given state, for residual checks
inline void fn_network_rhs(const FnParams& p, const WeightMatrix& W, const Eigen::VectorXd& v,
                           const Eigen::VectorXd& w, Eigen::VectorXd& dv, Eigen::VectorXd& dw) {
    Eigen::VectorXd rowsum = W.J.rowwise().sum();
    double vbar = v.mean();
    Eigen::VectorXd d = v.array() - vbar;
    dv = W.J * d - rowsum.cwiseProduct(d);
    dw.resize(v.size());
    for (long i = 0; i < v.size(); ++i) {
        dv[i] += fn_f(p, v[i]) - w[i] + p.I;
        dw[i] = p.a * (p.b * v[i] - w[i]);
    }
}

enum class FnVariant { PaperPrinted, GaussianDerived };

struct FnMomentState {
    double mu_v = 0.0, mu_w = 0.0;
    double lambda = 0.0; // fixed voltage spread, a parameter
};

// mu_v' = f(mu_v) + lambda^2 (1 + kappa -+ 3 mu_v) - mu_w + I
// GaussianDerived carries the "-3 mu_v" of E[f(V)], V ~ N(mu_v, lambda^2);
// PaperPrinted carries "+3 mu_v".
inline std::pair<double, double> fn_moment_rhs(const FnParams& p, const FnMomentState& s,
                                               FnVariant variant = FnVariant::GaussianDerived) {
    if (s.lambda < 0.0) throw ConfigError("fn_moment_rhs: lambda must be >= 0");
    double l2 = s.lambda * s.lambda;
    double third = variant == FnVariant::GaussianDerived ? -3.0 * s.mu_v : 3.0 * s.mu_v;
    double dmu_v = fn_f(p, s.mu_v) + l2 * (1.0 + p.kappa + third) - s.mu_w + p.I;
    double dmu_w = p.a * (p.b * s.mu_v - s.mu_w);
    return {dmu_v, dmu_w};
}

inline Eigen::Matrix2d fn_moment_jacobian(const FnParams& p, const FnMomentState& s, FnVariant variant) {
    double l2 = s.lambda * s.lambda;
    Eigen::Matrix2d J;
    J(0, 0) = fn_f_prime(p, s.mu_v) + (variant == FnVariant::GaussianDerived ? -3.0 * l2 : 3.0 * l2);
    J(0, 1) = -1.0;
    J(1, 0) = p.a * p.b;
    J(1, 1) = -p.a;
    return J;
}

struct FnMomentTrajectory {
    std::vector<double> time;
    std::vector<double> mu_v, mu_w;
};

inline FnMomentTrajectory integrate_fn_moments(const FnParams& p, FnMomentState s, const TimeGrid& grid,
                                               FnVariant variant) {
    long n = grid.steps();
    FnMomentTrajectory out;
    out.time.resize(size_t(n) + 1);
    out.mu_v.resize(size_t(n) + 1);
    out.mu_w.resize(size_t(n) + 1);
    auto put = [&](long i) {
        out.time[size_t(i)] = grid.time(i);
        out.mu_v[size_t(i)] = s.mu_v;
        out.mu_w[size_t(i)] = s.mu_w;
    };
    put(0);
    for (long i = 0; i < n; ++i) {
        double h = grid.dt;
        auto step = [&](const FnMomentState& x) { return fn_moment_rhs(p, x, variant); };
        auto [k1v, k1w] = step(s);
        auto [k2v, k2w] = step({s.mu_v + 0.5 * h * k1v, s.mu_w + 0.5 * h * k1w, s.lambda});
        auto [k3v, k3w] = step({s.mu_v + 0.5 * h * k2v, s.mu_w + 0.5 * h * k2w, s.lambda});
        auto [k4v, k4w] = step({s.mu_v + h * k3v, s.mu_w + h * k3w, s.lambda});
        s.mu_v += (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        s.mu_w += (h / 6.0) * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
        if (!std::isfinite(s.mu_v) || !std::isfinite(s.mu_w) || std::abs(s.mu_v) > 1e6)
            throw BlowUpError(grid.time(i + 1), "fn moment state");
        put(i + 1);
    }
    return out;
}

// equilibria of the 2-d moment system by multi-start Newton
inline std::vector<std::pair<Eigen::Vector2d, bool>> fn_moment_equilibria(const FnParams& p, double lambda,
                                                                          FnVariant variant) {
    std::vector<std::pair<Eigen::Vector2d, bool>> found;
    for (int iv = 0; iv < 9; ++iv)
        for (int iw = 0; iw < 9; ++iw) {
            Eigen::Vector2d x(-2.0 + 5.0 * iv / 8.0, -4.0 + 10.0 * iw / 8.0);
            bool ok = false;
            for (int it = 0; it < 60; ++it) {
                auto [fv, fw] = fn_moment_rhs(p, {x[0], x[1], lambda}, variant);
                Eigen::Vector2d F(fv, fw);
                if (F.lpNorm<Eigen::Infinity>() < 1e-12) {
                    ok = true;
                    break;
                }
                Eigen::Vector2d step = fn_moment_jacobian(p, {x[0], x[1], lambda}, variant).partialPivLu().solve(F);
                if (!step.allFinite()) break;
                double len = step.lpNorm<Eigen::Infinity>();
                if (len > 5.0) step *= 5.0 / len;
                x -= step;
                if (std::abs(x[0]) > 1e3) break;
            }
            if (!ok) continue;
            bool dup = false;
            for (auto& r : found)
                if ((r.first - x).lpNorm<Eigen::Infinity>() < 1e-6) {
                    dup = true;
                    break;
                }
            if (dup) continue;
            Eigen::Matrix2d J = fn_moment_jacobian(p, {x[0], x[1], lambda}, variant);
            double tr = J.trace(), det = J.determinant();
            bool stable = tr < 0.0 && det > 0.0;
            found.emplace_back(x, stable);
        }
    return found;
}

// per-lambda classification of the moment system, same thresholds as the
// rate-model scan; probes the FN equilibrium and a displaced start
inline std::vector<RegimeLabel> fn_moment_sweep(const FnParams& p, const std::vector<double>& lambda_grid,
                                                FnVariant variant = FnVariant::GaussianDerived,
                                                double transient = kDefaultTransient,
                                                double window = kDefaultWindow) {
    if (!std::is_sorted(lambda_grid.begin(), lambda_grid.end()))
        throw ConfigError("fn_moment_sweep: lambda grid must be sorted");
    auto [vstar, wstar] = fn_single_equilibrium(p);
    std::vector<RegimeLabel> out(lambda_grid.size());
    parallel_for(lambda_grid.size(), [&](size_t k) {
        double lambda = lambda_grid[k];
        RegimeLabel label;
        auto eqs = fn_moment_equilibria(p, lambda, variant);
        label.equilibria = int(eqs.size());
        std::vector<FnMomentState> ics;
        for (auto& e : eqs) {
            if (ics.size() >= 3) break;
            ics.push_back({e.first[0] + 1e-4, e.first[1], lambda});
        }
        ics.push_back({vstar, wstar, lambda});
        ics.push_back({vstar + 1.0, wstar, lambda});
        bool any_osc = false, any_stat = false;
        for (auto& ic : ics) {
            double W = window;
            OscillationReport rep;
            try {
                for (;;) {
                    TimeGrid g{0.0, transient + W, 1e-2};
                    auto traj = integrate_fn_moments(p, ic, g, variant);
                    rep = detect_oscillation(traj.mu_v, g.dt, transient);
                    bool more = rep.amplitude > kAmplitudeThreshold && (rep.crossings < 5 || rep.period * 10.0 > W);
                    if (!more || W >= 3200.0) break;
                    W *= 4.0;
                }
            } catch (const BlowUpError&) {
                label.kind = RegimeKind::Divergent;
                out[k] = label;
                return;
            }
            if (rep.periodic) {
                any_osc = true;
                if (rep.amplitude > label.amplitude) {
                    label.amplitude = rep.amplitude;
                    label.period = rep.period;
                }
            } else if (rep.amplitude < kAmplitudeThreshold) {
                any_stat = true;
            }
        }
        if (any_osc && any_stat) label.kind = RegimeKind::Bistable;
        else if (any_osc) label.kind = RegimeKind::Oscillatory;
        else if (label.equilibria >= 2) label.kind = RegimeKind::MultiEquilibria;
        else label.kind = RegimeKind::Stationary;
        out[k] = label;
    });
    return out;
}

// time-averaged cross-neuron standard deviation of v past the transient
inline double empirical_lambda(const PopulationStats& stats_v, double transient) {
    size_t k = 0;
    double acc = 0.0;
    size_t count = 0;
    for (; k < stats_v.time.size(); ++k)
        if (stats_v.time[k] >= transient) {
            acc += std::sqrt(std::max(stats_v.var(long(k), 0), 0.0));
            ++count;
        }
    if (count == 0) throw ConfigError("empirical_lambda: no samples past transient");
    return acc / double(count);
}

} // namespace hs
