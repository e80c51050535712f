#pragma once
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "errors.hpp"
#include "model.hpp"
#include "rng.hpp"
#include "sigmoid.hpp"
#include "threads.hpp"

// Microscopic simulators: quenched random weights (deterministic ODEs,
// classical 4th order) and stochastic synaptic noise (Euler-Maruyama).
// All randomness is addressed by (stream, index) so trajectories are
// bit-identical across thread counts.

namespace hs {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr long kMaxDenseNeurons = 8000; // 512 MB of dense weights

struct PopLayout {
    std::vector<int> pmap;      // neuron -> population
    std::vector<long> offsets;  // size P+1
    long N = 0;

    static PopLayout of(const ModelSpec& m) {
        PopLayout L;
        L.offsets.resize(m.pops.size() + 1, 0);
        for (size_t a = 0; a < m.pops.size(); ++a) L.offsets[a + 1] = L.offsets[a] + m.pops[a].size;
        L.N = L.offsets.back();
        L.pmap.resize(size_t(L.N));
        for (size_t a = 0; a < m.pops.size(); ++a)
            std::fill(L.pmap.begin() + L.offsets[a], L.pmap.begin() + L.offsets[a + 1], int(a));
        return L;
    }
};

struct WeightMatrix {
    RowMat J;
    PopLayout layout;
};

inline WeightMatrix sample_weights(const ModelSpec& m, std::uint64_t master_seed) {
    auto L = PopLayout::of(m);
    if (L.N > kMaxDenseNeurons)
        throw ConfigError("sample_weights: dense storage capped at total N = " + std::to_string(kMaxDenseNeurons) +
                          ", requested " + std::to_string(L.N));
    WeightMatrix W;
    W.layout = L;
    W.J.resize(L.N, L.N);
    int P = m.P();
    Eigen::VectorXd inv_n(P), noise(P);
    for (int b = 0; b < P; ++b) {
        inv_n[b] = 1.0 / double(m.pops[b].size);
        noise[b] = m.coupling.sigma / std::sqrt(double(m.pops[b].size));
    }
    parallel_ranges(size_t(L.N), [&](size_t first, size_t last) {
        for (size_t i = first; i < last; ++i) {
            SeededStream row(master_seed, stream_id(StreamKind::Weights, 0, std::uint64_t(i)));
            int pi = L.pmap[i];
            double* out = W.J.data() + i * size_t(L.N);
            for (long j = 0; j < L.N; ++j) {
                int pj = L.pmap[size_t(j)];
                double mean = m.coupling.mean_weights(pi, pj) * inv_n[pj];
                out[j] = m.coupling.sigma == 0.0 ? mean : mean + noise[pj] * row.normal(std::uint64_t(j));
            }
        }
    });
    return W;
}

// i.i.d. Normal(m0_a, v0_a) initial conditions, one deviate per neuron
inline Eigen::VectorXd initial_network_state(const ModelSpec& m, std::uint64_t master_seed,
                                             const Eigen::VectorXd& m0, const Eigen::VectorXd& v0) {
    auto L = PopLayout::of(m);
    if (m0.size() != m.P() || v0.size() != m.P()) throw ConfigError("initial law dimension mismatch");
    if (v0.minCoeff() < 0.0) throw ConfigError("initial variance must be >= 0");
    SeededStream s(master_seed, stream_id(StreamKind::InitState, 0, 0));
    Eigen::VectorXd V(L.N);
    for (long i = 0; i < L.N; ++i) {
        int p = L.pmap[size_t(i)];
        V[i] = m0[p] + std::sqrt(v0[p]) * s.normal(std::uint64_t(i));
    }
    return V;
}

struct PopulationStats {
    std::vector<double> time;
    Eigen::MatrixXd mean, var; // rows: recorded times, cols: populations
    Eigen::MatrixXd traces;    // rows: recorded times, cols: tracked neurons
    std::vector<long> tracked; // global neuron indices behind `traces`
};

struct SimOptions {
    long record_stride = 1;
    int tracked_per_pop = 8;
};

namespace detail {

inline std::vector<long> pick_tracked(const PopLayout& L, int per_pop) {
    std::vector<long> idx;
    for (size_t a = 0; a + 1 < L.offsets.size(); ++a) {
        long n = std::min<long>(per_pop, L.offsets[a + 1] - L.offsets[a]);
        for (long k = 0; k < n; ++k) idx.push_back(L.offsets[a] + k);
    }
    return idx;
}

inline void stats_row(const PopLayout& L, const Eigen::VectorXd& V, double t, const std::vector<long>& tracked,
                      long row, PopulationStats& st) {
    st.time[size_t(row)] = t;
    for (size_t a = 0; a + 1 < L.offsets.size(); ++a) {
        long off = L.offsets[a], n = L.offsets[a + 1] - off;
        auto seg = V.segment(off, n);
        double mean = seg.mean();
        st.mean(row, long(a)) = mean;
        st.var(row, long(a)) = n > 1 ? (seg.array() - mean).square().sum() / double(n - 1) : 0.0;
    }
    for (size_t k = 0; k < tracked.size(); ++k) st.traces(row, long(k)) = V[tracked[k]];
}

inline PopulationStats make_stats(const PopLayout& L, long rows, const std::vector<long>& tracked, int P) {
    PopulationStats st;
    st.time.resize(size_t(rows));
    st.mean.resize(rows, P);
    st.var.resize(rows, P);
    st.traces.resize(rows, long(tracked.size()));
    st.tracked = tracked;
    (void)L;
    return st;
}

inline void check_network_state(const Eigen::VectorXd& V, double t) {
    if (!V.allFinite() || V.cwiseAbs().maxCoeff() > 1e6) throw BlowUpError(t, "network state");
}

} // namespace detail

// unbiased per-population mean/variance for a sequence of states
inline PopulationStats empirical_stats(const std::vector<Eigen::VectorXd>& states, const ModelSpec& m,
                                       const std::vector<double>& times, int tracked_per_pop = 0) {
    auto L = PopLayout::of(m);
    if (states.size() != times.size()) throw ConfigError("empirical_stats: state/time length mismatch");
    auto tracked = detail::pick_tracked(L, tracked_per_pop);
    auto st = detail::make_stats(L, long(states.size()), tracked, m.P());
    for (size_t r = 0; r < states.size(); ++r) {
        if (states[r].size() != L.N) throw ConfigError("empirical_stats: state dimension mismatch");
        detail::stats_row(L, states[r], times[r], tracked, long(r), st);
    }
    return st;
}

namespace detail {

// dV = -V/tau + J S(V) + I(t). J is split once into its exact population
// block means (applied through population sums, in double) plus the
// remainder, stored single-precision: J S then costs half the memory
// traffic of a double matvec, which dominates the step. The remainder is
// O(sigma/sqrt(N)) so the cast costs ~1e-7 relative on the disorder term
// only; a block-mean-exact matrix (sigma=0) short-circuits it entirely.
struct QuenchedRhs {
    using FloatRowMat = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const ModelSpec& m;
    const PopLayout& L;
    Eigen::MatrixXd mean_block; // P x P, entry (a,b) = block mean of J
    FloatRowMat G;              // J minus block means; empty when exactly zero
    bool has_disorder = false;
    Eigen::VectorXd S, tau_inv;
    Eigen::VectorXf Sf, Gd;

    explicit QuenchedRhs(const ModelSpec& model, const WeightMatrix& weights) : m(model), L(weights.layout) {
        int P = m.P();
        mean_block.resize(P, P);
        for (int a = 0; a < P; ++a)
            for (int b = 0; b < P; ++b) mean_block(a, b) = m.coupling.mean_weights(a, b) / double(m.pops[b].size);
        double worst = 0.0;
        for (long i = 0; i < L.N; ++i)
            for (long j = 0; j < L.N; ++j)
                worst = std::max(worst, std::abs(weights.J(i, j) - mean_block(L.pmap[size_t(i)], L.pmap[size_t(j)])));
        has_disorder = worst > 0.0;
        if (has_disorder) {
            G.resize(L.N, L.N);
            parallel_ranges(size_t(L.N), [&](size_t first, size_t last) {
                for (size_t i = first; i < last; ++i)
                    for (long j = 0; j < L.N; ++j)
                        G(long(i), j) = float(weights.J(long(i), j) - mean_block(L.pmap[i], L.pmap[size_t(j)]));
            });
            Sf.resize(L.N);
            Gd.resize(L.N);
        }
        S.resize(L.N);
        tau_inv.resize(L.N);
        for (long i = 0; i < L.N; ++i) tau_inv[i] = 1.0 / m.pops[L.pmap[size_t(i)]].tau;
    }

    void operator()(const Eigen::VectorXd& V, double t, Eigen::VectorXd& dV) {
        int P = m.P();
        Eigen::VectorXd inputs(P), popsum(P);
        for (int a = 0; a < P; ++a) inputs[a] = m.input(a, t);
        parallel_ranges(size_t(L.N), [&](size_t first, size_t last) {
            for (size_t i = first; i < last; ++i) S[long(i)] = sigmoid_eval(m.sigmoid, V[long(i)]);
        });
        for (int b = 0; b < P; ++b) popsum[b] = S.segment(L.offsets[b], L.offsets[b + 1] - L.offsets[b]).sum();
        Eigen::VectorXd pop_drive = mean_block * popsum; // per receiving population
        if (has_disorder) {
            Sf = S.cast<float>();
            parallel_ranges(size_t(L.N), [&](size_t first, size_t last) {
                long n = long(last - first);
                Gd.segment(long(first), n).noalias() = G.middleRows(long(first), n) * Sf;
            });
        }
        parallel_ranges(size_t(L.N), [&](size_t first, size_t last) {
            for (size_t i = first; i < last; ++i) {
                double d = -V[long(i)] * tau_inv[long(i)] + pop_drive[L.pmap[i]] + inputs[L.pmap[i]];
                if (has_disorder) d += double(Gd[long(i)]);
                dV[long(i)] = d;
            }
        });
    }
};

} // namespace detail

inline PopulationStats simulate_quenched(const ModelSpec& m, const WeightMatrix& W, const Eigen::VectorXd& initial,
                                         const TimeGrid& grid, const SimOptions& opts = {}) {
    const auto& L = W.layout;
    if (initial.size() != L.N || W.J.rows() != L.N || W.J.cols() != L.N)
        throw ConfigError("simulate_quenched: dimension mismatch");
    long n = grid.steps();
    long rows = n / opts.record_stride + 1;
    auto tracked = detail::pick_tracked(L, opts.tracked_per_pop);
    auto st = detail::make_stats(L, rows, tracked, m.P());

    detail::QuenchedRhs rhs(m, W);
    Eigen::VectorXd V = initial, k1(L.N), k2(L.N), k3(L.N), k4(L.N), tmp(L.N);
    long row = 0;
    detail::stats_row(L, V, grid.t0, tracked, row++, st);
    for (long i = 0; i < n; ++i) {
        double t = grid.time(i), h = grid.dt;
        rhs(V, t, k1);
        tmp = V + 0.5 * h * k1;
        rhs(tmp, t + 0.5 * h, k2);
        tmp = V + 0.5 * h * k2;
        rhs(tmp, t + 0.5 * h, k3);
        tmp = V + h * k3;
        rhs(tmp, t + h, k4);
        V += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        detail::check_network_state(V, t + h);
        if ((i + 1) % opts.record_stride == 0) detail::stats_row(L, V, grid.time(i + 1), tracked, row++, st);
    }
    st.time.resize(size_t(row));
    st.mean.conservativeResize(row, Eigen::NoChange);
    st.var.conservativeResize(row, Eigen::NoChange);
    st.traces.conservativeResize(row, Eigen::NoChange);
    return st;
}

// Euler-Maruyama for the Langevin network: per step, each neuron receives an
// independent increment sigma * Sbar_b * sqrt(dt) per presynaptic population,
// with Sbar_b the empirical mean rate of population b at step start (Ito).
inline PopulationStats simulate_stochastic(const ModelSpec& m, const Eigen::VectorXd& initial, const TimeGrid& grid,
                                           std::uint64_t master_seed, const SimOptions& opts = {}) {
    if (m.coupling.kind != CouplingKind::StochasticNoise)
        throw ConfigError("simulate_stochastic: coupling kind must be StochasticNoise");
    auto L = PopLayout::of(m);
    if (initial.size() != L.N) throw ConfigError("simulate_stochastic: dimension mismatch");
    int P = m.P();
    long n = grid.steps();
    long rows = n / opts.record_stride + 1;
    auto tracked = detail::pick_tracked(L, opts.tracked_per_pop);
    auto st = detail::make_stats(L, rows, tracked, P);

    Eigen::VectorXd V = initial, S(L.N), sbar(P), inputs(P);
    double sqdt = std::sqrt(grid.dt);
    long row = 0;
    detail::stats_row(L, V, grid.t0, tracked, row++, st);
    for (long k = 0; k < n; ++k) {
        double t = grid.time(k);
        parallel_ranges(size_t(L.N), [&](size_t first, size_t last) {
            for (size_t i = first; i < last; ++i) S[long(i)] = sigmoid_eval(m.sigmoid, V[long(i)]);
        });
        for (int b = 0; b < P; ++b) sbar[b] = S.segment(L.offsets[b], L.offsets[b + 1] - L.offsets[b]).mean();
        for (int a = 0; a < P; ++a) inputs[a] = m.input(a, t);
        parallel_ranges(size_t(L.N), [&](size_t first, size_t last) {
            std::vector<double> z(static_cast<size_t>(P));
            for (size_t i = first; i < last; ++i) {
                int p = L.pmap[i];
                double drift = -V[long(i)] / m.pops[p].tau + inputs[p];
                for (int b = 0; b < P; ++b) drift += m.coupling.mean_weights(p, b) * sbar[b];
                double dW = 0.0;
                if (m.coupling.sigma > 0.0) {
                    SeededStream ns(master_seed, stream_id(StreamKind::NetNoise, 0, std::uint64_t(i)));
                    ns.fill_normal(z.data(), size_t(P), std::uint64_t(k) * std::uint64_t(P));
                    for (int b = 0; b < P; ++b) dW += m.coupling.sigma * sbar[b] * z[size_t(b)];
                }
                V[long(i)] += grid.dt * drift + sqdt * dW;
            }
        });
        detail::check_network_state(V, t + grid.dt);
        if ((k + 1) % opts.record_stride == 0) detail::stats_row(L, V, grid.time(k + 1), tracked, row++, st);
    }
    st.time.resize(size_t(row));
    st.mean.conservativeResize(row, Eigen::NoChange);
    st.var.conservativeResize(row, Eigen::NoChange);
    st.traces.conservativeResize(row, Eigen::NoChange);
    return st;
}

} // namespace hs
