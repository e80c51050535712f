#pragma once
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "errors.hpp"
#include "model.hpp"

// Trajectory diagnostics: oscillation detection by zero-crossings, a
// variance-ratio synchrony index, and twin-trajectory divergence rates.

namespace hs {

struct OscillationReport {
    bool periodic = false;
    double amplitude = 0.0; // peak-to-peak after transient
    double period = 0.0;    // mean zero-crossing interval x 2
    double period_cv = std::numeric_limits<double>::infinity();
    int crossings = 0;
};

constexpr double kAmplitudeThreshold = 1e-3;
constexpr double kDefaultTransient = 100.0;
constexpr double kDefaultWindow = 200.0;

// Crossing times of the mean-subtracted signal, linearly interpolated.
inline std::vector<double> zero_crossing_times(const std::vector<double>& x, double dt, double t0 = 0.0) {
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= double(x.size());
    std::vector<double> out;
    for (size_t i = 0; i + 1 < x.size(); ++i) {
        double a = x[i] - mean, b = x[i + 1] - mean;
        if (a == 0.0 && b == 0.0) continue;
        if ((a <= 0.0 && b > 0.0) || (a >= 0.0 && b < 0.0))
            out.push_back(t0 + dt * (double(i) + a / (a - b)));
    }
    return out;
}

inline OscillationReport detect_oscillation(const std::vector<double>& signal, double dt,
                                            double transient = kDefaultTransient,
                                            double threshold = kAmplitudeThreshold) {
    size_t skip = size_t(std::llround(transient / dt));
    if (signal.size() < skip + 10) throw ConfigError("detect_oscillation: series shorter than transient window");
    std::vector<double> x(signal.begin() + skip, signal.end());
    OscillationReport rep;
    auto [mn, mx] = std::minmax_element(x.begin(), x.end());
    rep.amplitude = *mx - *mn;
    auto t = zero_crossing_times(x, dt);
    rep.crossings = int(t.size());
    if (t.size() < 5) return rep;
    rep.period = 2.0 * (t.back() - t.front()) / double(t.size() - 1);
    // CV over full-period estimates (same-direction crossing pairs); the
    // half-interval sequence of anharmonic cycles alternates and would
    // inflate the CV even for perfectly periodic signals
    double s = 0.0, s2 = 0.0;
    size_t n = t.size() - 2;
    for (size_t k = 0; k < n; ++k) {
        double u = t[k + 2] - t[k];
        s += u;
        s2 += u * u;
    }
    double m = s / double(n);
    double var = std::max(0.0, s2 / double(n) - m * m);
    rep.period_cv = m > 0 ? std::sqrt(var) / m : std::numeric_limits<double>::infinity();
    rep.periodic = rep.amplitude > threshold && rep.period_cv < 0.05;
    return rep;
}

struct SynchronyReport {
    double index = 0.0; // Var_t(population mean) / mean_k(Var_t(trace k))
    bool degenerate = false;
};

// traces: rows = time samples, cols = units
inline SynchronyReport synchrony_index(const Eigen::MatrixXd& traces, double dt, double transient = kDefaultTransient) {
    if (traces.cols() < 2) throw ConfigError("synchrony_index: need at least two traces");
    long skip = std::llround(transient / dt);
    if (traces.rows() <= skip + 1) throw ConfigError("synchrony_index: series shorter than transient window");
    Eigen::MatrixXd w = traces.bottomRows(traces.rows() - skip);
    long T = w.rows();
    Eigen::VectorXd colmean = w.colwise().mean();
    Eigen::MatrixXd c = w.rowwise() - colmean.transpose();
    double denom = c.array().square().colwise().sum().mean() / double(T);
    SynchronyReport rep;
    if (denom <= 1e-300) {
        rep.degenerate = true;
        return rep;
    }
    Eigen::VectorXd popmean = c.rowwise().mean();
    double num = popmean.squaredNorm() / double(T);
    rep.index = num / denom;
    return rep;
}

struct ChaosReport {
    double divergence_rate = 0.0; // 1/time
    double delta0 = 0.0;
    double fit_t0 = 0.0, fit_t1 = 0.0;
    double r2 = 0.0;
};

// slope/intercept/R^2 of y against t
inline std::tuple<double, double, double> log_linear_fit(const std::vector<double>& t, const std::vector<double>& y) {
    size_t n = t.size();
    if (n < 3) throw NumericError("log_linear_fit: need at least 3 points");
    double st = 0, sy = 0, stt = 0, sty = 0, syy = 0;
    for (size_t i = 0; i < n; ++i) {
        st += t[i];
        sy += y[i];
        stt += t[i] * t[i];
        sty += t[i] * y[i];
        syy += y[i] * y[i];
    }
    double dn = double(n);
    double cov = sty - st * sy / dn;
    double vt = stt - st * st / dn;
    double vy = syy - sy * sy / dn;
    if (vt <= 0) throw NumericError("log_linear_fit: degenerate abscissa");
    double slope = cov / vt;
    double intercept = (sy - slope * st) / dn;
    double r2 = vy > 0 ? cov * cov / (vt * vy) : 1.0;
    return {slope, intercept, r2};
}

// Fit of log separation against time, ending at the first sample where the
// distance exceeds `saturation` (default: three decades above delta0=1e-8).
inline ChaosReport divergence_rate_from_distance(const std::vector<double>& dist, double dt, double delta0,
                                                 double saturation = 1e-2) {
    ChaosReport rep;
    rep.delta0 = delta0;
    size_t end = dist.size();
    for (size_t i = 0; i < dist.size(); ++i)
        if (dist[i] > saturation) {
            end = i + 1;
            break;
        }
    if (end < 10) throw NumericError("divergence_rate: separation saturated immediately");
    std::vector<double> t, y;
    t.reserve(end);
    y.reserve(end);
    for (size_t i = 0; i < end; ++i) {
        if (dist[i] <= 0) continue;
        t.push_back(dt * double(i));
        y.push_back(std::log(dist[i]));
    }
    auto [slope, intercept, r2] = log_linear_fit(t, y);
    (void)intercept;
    rep.divergence_rate = slope;
    rep.fit_t0 = t.front();
    rep.fit_t1 = t.back();
    rep.r2 = r2;
    return rep;
}

// Twin-trajectory divergence: run(initial) must deterministically return a
// (steps+1) x dim trajectory matrix.
template <class RunFn>
ChaosReport divergence_rate(RunFn&& run, const Eigen::VectorXd& initial, double delta0, double dt,
                            int perturb_index = 0, double saturation = 1e-2) {
    Eigen::MatrixXd base = run(initial);
    Eigen::VectorXd shifted = initial;
    shifted[perturb_index] += delta0;
    Eigen::MatrixXd twin = run(shifted);
    if (base.rows() != twin.rows() || base.cols() != twin.cols())
        throw NumericError("divergence_rate: twin trajectories have mismatched shapes");
    std::vector<double> dist(size_t(base.rows()));
    for (long i = 0; i < base.rows(); ++i) dist[size_t(i)] = (base.row(i) - twin.row(i)).norm();
    return divergence_rate_from_distance(dist, dt, delta0, saturation);
}

} // namespace hs
