#pragma once
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "analysis.hpp"
#include "errors.hpp"
#include "model.hpp"
#include "sigmoid.hpp"
#include "threads.hpp"

// Closed moment ODEs of the stochastic-synaptic-noise mean-field limit:
//   mu'_a = -mu_a/tau_a + sum_b Jbar_ab f(mu_b, v_b) + I_a(t)
//   v'_a  = -2 v_a/tau_a + sigma^2 sum_b f(mu_b, v_b)^2
// plus equilibrium search, linear stability, and (sigma, I1) regime scans.

namespace hs {

struct MomentState {
    Eigen::VectorXd mu, var;
};

struct MomentDeriv {
    Eigen::VectorXd dmu, dvar;
};

inline MomentDeriv moment_rhs(const ModelSpec& m, const MomentState& s, double t) {
    int P = m.P();
    Eigen::VectorXd f(P);
    for (int b = 0; b < P; ++b) f[b] = f_moment(m.sigmoid, s.mu[b], std::max(s.var[b], 0.0));
    MomentDeriv d;
    d.dmu = m.coupling.mean_weights * f;
    d.dvar.resize(P);
    double s2 = m.coupling.sigma * m.coupling.sigma;
    double fsq = f.squaredNorm();
    for (int a = 0; a < P; ++a) {
        d.dmu[a] += -s.mu[a] / m.pops[a].tau + m.input(a, t);
        d.dvar[a] = -2.0 * s.var[a] / m.pops[a].tau + s2 * fsq;
    }
    return d;
}

// analytic Jacobian in the state ordering (mu_1..mu_P, v_1..v_P)
inline Eigen::MatrixXd jacobian(const ModelSpec& m, const MomentState& s) {
    int P = m.P();
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(2 * P, 2 * P);
    double s2 = m.coupling.sigma * m.coupling.sigma;
    for (int b = 0; b < P; ++b) {
        double vb = std::max(s.var[b], 0.0);
        double f = f_moment(m.sigmoid, s.mu[b], vb);
        double fm = f_moment_dmu(m.sigmoid, s.mu[b], vb);
        double fv = f_moment_dv(m.sigmoid, s.mu[b], vb);
        for (int a = 0; a < P; ++a) {
            J(a, b) += m.coupling.mean_weights(a, b) * fm;
            J(a, P + b) += m.coupling.mean_weights(a, b) * fv;
            J(P + a, b) += 2.0 * s2 * f * fm;
            J(P + a, P + b) += 2.0 * s2 * f * fv;
        }
    }
    for (int a = 0; a < P; ++a) {
        J(a, a) -= 1.0 / m.pops[a].tau;
        J(P + a, P + a) -= 2.0 / m.pops[a].tau;
    }
    return J;
}

struct MomentTrajectory {
    std::vector<double> time;
    Eigen::MatrixXd mu, var; // (steps+1) x P
};

namespace detail {
inline void rk4_moment_step(const ModelSpec& m, MomentState& s, double t, double dt) {
    auto k1 = moment_rhs(m, s, t);
    MomentState s2{s.mu + 0.5 * dt * k1.dmu, s.var + 0.5 * dt * k1.dvar};
    auto k2 = moment_rhs(m, s2, t + 0.5 * dt);
    MomentState s3{s.mu + 0.5 * dt * k2.dmu, s.var + 0.5 * dt * k2.dvar};
    auto k3 = moment_rhs(m, s3, t + 0.5 * dt);
    MomentState s4{s.mu + dt * k3.dmu, s.var + dt * k3.dvar};
    auto k4 = moment_rhs(m, s4, t + dt);
    s.mu += (dt / 6.0) * (k1.dmu + 2.0 * k2.dmu + 2.0 * k3.dmu + k4.dmu);
    s.var += (dt / 6.0) * (k1.dvar + 2.0 * k2.dvar + 2.0 * k3.dvar + k4.dvar);
}

inline void check_moment_state(const MomentState& s, double t) {
    if (!s.mu.allFinite() || !s.var.allFinite() || s.mu.cwiseAbs().maxCoeff() > 1e6)
        throw BlowUpError(t, "moment state");
    if (s.var.minCoeff() < -1e-12) throw NumericError("moment variance left the admissible region");
}
} // namespace detail

inline MomentTrajectory integrate_moments(const ModelSpec& m, const MomentState& initial, const TimeGrid& grid) {
    int P = m.P();
    if (initial.mu.size() != P || initial.var.size() != P) throw ConfigError("initial state dimension mismatch");
    if (initial.var.minCoeff() < 0.0) throw ConfigError("initial variances must be >= 0");
    long n = grid.steps();
    MomentTrajectory out;
    out.time.resize(size_t(n) + 1);
    out.mu.resize(n + 1, P);
    out.var.resize(n + 1, P);
    MomentState s = initial;
    out.time[0] = grid.t0;
    out.mu.row(0) = s.mu.transpose();
    out.var.row(0) = s.var.transpose();
    for (long i = 0; i < n; ++i) {
        double t = grid.time(i);
        detail::rk4_moment_step(m, s, t, grid.dt);
        detail::check_moment_state(s, t + grid.dt);
        s.var = s.var.cwiseMax(0.0);
        out.time[size_t(i) + 1] = grid.time(i + 1);
        out.mu.row(i + 1) = s.mu.transpose();
        out.var.row(i + 1) = s.var.transpose();
    }
    return out;
}

struct EquilibriumRecord {
    MomentState state;
    Eigen::VectorXcd eigenvalues;
    bool stable = false;
};

struct SearchBox {
    Eigen::VectorXd mu_lo, mu_hi, var_lo, var_hi; // per population
};

// seed box from the analytic bounds: |mu| <= 5, v in [0, tau sigma^2 P / 2]
inline SearchBox default_search_box(const ModelSpec& m) {
    int P = m.P();
    SearchBox b;
    b.mu_lo = Eigen::VectorXd::Constant(P, -5.0);
    b.mu_hi = Eigen::VectorXd::Constant(P, 5.0);
    b.var_lo = Eigen::VectorXd::Zero(P);
    b.var_hi.resize(P);
    double s2 = m.coupling.sigma * m.coupling.sigma;
    for (int a = 0; a < P; ++a) b.var_hi[a] = m.pops[a].tau * s2 * double(P) / 2.0;
    return b;
}

inline std::vector<EquilibriumRecord> find_equilibria(const ModelSpec& m, const SearchBox& box, int n_starts = 9) {
    if (n_starts < 1) throw ConfigError("find_equilibria: n_starts must be >= 1");
    int P = m.P();
    int dims = 2 * P;
    auto coord = [&](int d, int k) {
        double lo = d < P ? box.mu_lo[d] : box.var_lo[d - P];
        double hi = d < P ? box.mu_hi[d] : box.var_hi[d - P];
        if (n_starts == 1) return 0.5 * (lo + hi);
        return lo + (hi - lo) * double(k) / double(n_starts - 1);
    };
    long total = 1;
    for (int d = 0; d < dims; ++d) total *= n_starts;

    std::vector<EquilibriumRecord> found;
    auto rhs_vec = [&](const Eigen::VectorXd& x) {
        MomentState s{x.head(P), x.tail(P)};
        auto d = moment_rhs(m, s, 0.0);
        Eigen::VectorXd F(dims);
        F << d.dmu, d.dvar;
        return F;
    };
    for (long idx = 0; idx < total; ++idx) {
        Eigen::VectorXd x(dims);
        long rem = idx;
        for (int d = 0; d < dims; ++d) {
            x[d] = coord(d, int(rem % n_starts));
            rem /= n_starts;
        }
        bool ok = false;
        for (int it = 0; it < 60; ++it) {
            Eigen::VectorXd F = rhs_vec(x);
            if (!F.allFinite()) break;
            if (F.lpNorm<Eigen::Infinity>() < 1e-12) {
                ok = true;
                break;
            }
            MomentState s{x.head(P), x.tail(P)};
            Eigen::MatrixXd J = jacobian(m, s);
            Eigen::VectorXd step = J.partialPivLu().solve(F);
            if (!step.allFinite()) break;
            double cap = 10.0; // long Newton steps out of a flat region explode
            double len = step.lpNorm<Eigen::Infinity>();
            if (len > cap) step *= cap / len;
            x -= step;
            if (x.head(P).cwiseAbs().maxCoeff() > 1e4) break;
        }
        if (!ok) continue;
        if (x.tail(P).minCoeff() < -1e-9) continue;
        for (int a = 0; a < P; ++a) x[P + a] = std::max(x[P + a], 0.0);
        if (rhs_vec(x).lpNorm<Eigen::Infinity>() >= 1e-10) continue;
        bool dup = false;
        for (auto& r : found) {
            Eigen::VectorXd y(dims);
            y << r.state.mu, r.state.var;
            if ((y - x).lpNorm<Eigen::Infinity>() < 1e-6) {
                dup = true;
                break;
            }
        }
        if (dup) continue;
        EquilibriumRecord rec;
        rec.state = MomentState{x.head(P), x.tail(P)};
        Eigen::EigenSolver<Eigen::MatrixXd> es(jacobian(m, rec.state));
        rec.eigenvalues = es.eigenvalues();
        rec.stable = (rec.eigenvalues.real().array() < 0.0).all();
        found.push_back(std::move(rec));
    }
    return found;
}

enum class RegimeKind { Stationary, Oscillatory, Bistable, MultiEquilibria, Divergent };

struct RegimeLabel {
    RegimeKind kind = RegimeKind::Stationary;
    int equilibria = 0;     // deduplicated count from the Newton scan
    double amplitude = 0.0; // peak-to-peak of mu_1 on the attractor
    double period = 0.0;    // zero-crossing period when oscillatory
};

inline const char* regime_name(RegimeKind k) {
    switch (k) {
        case RegimeKind::Stationary: return "Stationary";
        case RegimeKind::Oscillatory: return "Oscillatory";
        case RegimeKind::Bistable: return "Bistable";
        case RegimeKind::MultiEquilibria: return "MultiEquilibria";
        case RegimeKind::Divergent: return "Divergent";
    }
    return "?";
}

// Five deterministic probes: each equilibrium nudged off itself, then
// origin-centered states. A cycle coexisting with an attracting equilibrium
// (one probe stays put, another ends on the cycle) is Bistable; several
// equilibria without any cycle is MultiEquilibria.
inline RegimeLabel classify_regime(const ModelSpec& m, double transient = kDefaultTransient,
                                   double window = kDefaultWindow, double threshold = kAmplitudeThreshold) {
    int P = m.P();
    auto eqs = find_equilibria(m, default_search_box(m));
    RegimeLabel label;
    label.equilibria = int(eqs.size());

    std::vector<MomentState> ics;
    for (auto& e : eqs) {
        if (int(ics.size()) >= 3) break;
        MomentState s = e.state;
        s.mu.array() += 1e-4;
        ics.push_back(s);
    }
    const double fills[][2] = {{0.0, 0.0}, {0.1, 0.01}, {-0.1, 0.01}, {0.5, 0.0}, {-0.5, 0.0}};
    for (auto& f : fills) {
        if (int(ics.size()) >= 5) break;
        ics.push_back({Eigen::VectorXd::Constant(P, f[0]), Eigen::VectorXd::Constant(P, f[1])});
    }

    bool any_osc = false, any_stat = false;
    for (auto& ic : ics) {
        double W = window, T = transient;
        OscillationReport rep;
        try {
            for (;;) {
                TimeGrid g{0.0, T + W, 1e-2};
                auto traj = integrate_moments(m, ic, g);
                std::vector<double> mu1(traj.mu.col(0).data(), traj.mu.col(0).data() + traj.mu.rows());
                rep = detect_oscillation(mu1, g.dt, T, threshold);
                // a slowly decaying spiral can look periodic over a fixed window;
                // compare peak-to-peak of first vs last third and push the
                // transient out until the tail is the attractor
                if (rep.periodic && rep.crossings >= 8 && T < 32.0 * transient) {
                    auto skip = size_t(std::llround(T / g.dt));
                    size_t n = size_t(traj.mu.rows()) - skip, third = n / 3;
                    auto ptp = [&](size_t a, size_t b) {
                        double lo = mu1[skip + a], hi = lo;
                        for (size_t k = a; k < b; ++k) { lo = std::min(lo, mu1[skip + k]); hi = std::max(hi, mu1[skip + k]); }
                        return hi - lo;
                    };
                    if (ptp(n - third, n) < 0.7 * ptp(0, third)) { T *= 2.0; continue; }
                }
                // slow cycles near onset: lengthen until >= 10 periods fit
                bool need_more = rep.amplitude > threshold && (rep.crossings < 5 || rep.period * 10.0 > W);
                if (!need_more || W >= 3200.0) break;
                W *= 4.0;
            }
        } catch (const BlowUpError&) {
            label.kind = RegimeKind::Divergent;
            return label;
        }
        if (rep.periodic) {
            any_osc = true;
            if (rep.amplitude > label.amplitude) {
                label.amplitude = rep.amplitude;
                label.period = rep.period;
            }
        } else if (rep.amplitude < threshold) {
            any_stat = true;
        }
    }
    if (any_osc && any_stat) label.kind = RegimeKind::Bistable;
    else if (any_osc) label.kind = RegimeKind::Oscillatory;
    // the three-fixed-point band gets its own label; other stationary
    // configurations (1 node, or saturated-pair coexistence) stay Stationary
    else if (label.equilibria == 3) label.kind = RegimeKind::MultiEquilibria;
    else label.kind = RegimeKind::Stationary;
    return label;
}

inline RegimeLabel classify_regime_at(const ModelSpec& base, double sigma, double input1) {
    ModelSpec m = base;
    m.coupling.sigma = sigma;
    m.pops[0].input = input1;
    return classify_regime(m);
}

struct RegimeDiagram {
    std::vector<double> sigma_grid, input_grid;
    std::vector<RegimeLabel> labels; // row-major over (sigma, input)

    const RegimeLabel& at(size_t i_sigma, size_t j_input) const { return labels[i_sigma * input_grid.size() + j_input]; }
};

inline RegimeDiagram scan_diagram(const ModelSpec& base, std::vector<double> sigma_grid,
                                  std::vector<double> input_grid) {
    if (sigma_grid.empty() || input_grid.empty()) throw ConfigError("scan_diagram: grids must be non-empty");
    if (!std::is_sorted(sigma_grid.begin(), sigma_grid.end()) ||
        !std::is_sorted(input_grid.begin(), input_grid.end()))
        throw ConfigError("scan_diagram: grids must be sorted");
    RegimeDiagram d;
    d.sigma_grid = std::move(sigma_grid);
    d.input_grid = std::move(input_grid);
    size_t n = d.sigma_grid.size() * d.input_grid.size();
    d.labels.resize(n);
    parallel_for(n, [&](size_t k) {
        size_t i = k / d.input_grid.size(), j = k % d.input_grid.size();
        d.labels[k] = classify_regime_at(base, d.sigma_grid[i], d.input_grid[j]);
    });
    return d;
}

} // namespace hs
