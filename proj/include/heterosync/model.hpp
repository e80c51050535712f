#pragma once
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "errors.hpp"
#include "sigmoid.hpp"

// Parameter types shared by every solver: populations, coupling disorder,
// time grids, optional time-dependent inputs.

namespace hs {

struct PopulationSpec {
    double tau = 1.0;   // membrane time constant
    double input = 0.0; // constant drive I_alpha
    long size = 1;      // neuron count (microscopic sims only)

    void validate() const {
        if (!(tau > 0.0) || !std::isfinite(tau)) throw ConfigError("population tau must be > 0");
        if (!std::isfinite(input)) throw ConfigError("population input must be finite");
        if (size < 1) throw ConfigError("population size must be >= 1");
    }
};

enum class CouplingKind { Quenched, StochasticNoise };

struct CouplingSpec {
    Eigen::MatrixXd mean_weights; // P x P effective weights
    double sigma = 0.0;           // disorder level
    CouplingKind kind = CouplingKind::StochasticNoise;

    void validate(int P) const {
        if (mean_weights.rows() != P || mean_weights.cols() != P)
            throw ConfigError("mean_weights must be P x P");
        if (!mean_weights.allFinite()) throw ConfigError("mean_weights must be finite");
        if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ConfigError("sigma must be >= 0");
    }
};

struct TimeGrid {
    double t0 = 0.0, t_end = 1.0, dt = 1e-2;

    long steps() const {
        double r = (t_end - t0) / dt;
        long n = std::lround(r);
        if (n < 1 || std::abs(r - double(n)) > 1e-9 * std::max(1.0, std::abs(r)))
            throw ConfigError("time span must be a positive integer multiple of dt");
        return n;
    }
    double time(long i) const { return t0 + double(i) * dt; }
    void validate() const {
        if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt must be > 0");
        if (!(t_end > t0)) throw ConfigError("t_end must exceed t0");
        (void)steps();
    }
};

// optional piecewise-linear drive; constant extension outside the knots
struct InputTable {
    std::vector<double> t, value;

    bool empty() const { return t.empty(); }
    void validate() const {
        if (t.size() != value.size()) throw ConfigError("input table: time/value length mismatch");
        for (size_t i = 0; i + 1 < t.size(); ++i)
            if (!(t[i] < t[i + 1])) throw ConfigError("input table: times must be strictly increasing");
        for (double x : value)
            if (!std::isfinite(x)) throw ConfigError("input table: values must be finite");
    }
    double eval(double time) const {
        if (t.empty()) return 0.0;
        if (time <= t.front()) return value.front();
        if (time >= t.back()) return value.back();
        auto it = std::upper_bound(t.begin(), t.end(), time);
        size_t j = size_t(it - t.begin());
        double w = (time - t[j - 1]) / (t[j] - t[j - 1]);
        return (1.0 - w) * value[j - 1] + w * value[j];
    }
};

struct ModelSpec {
    std::vector<PopulationSpec> pops;
    CouplingSpec coupling;
    SigmoidSpec sigmoid;
    std::vector<InputTable> input_tables; // optional; index < P overrides the constant

    int P() const { return int(pops.size()); }

    double input(int alpha, double time) const {
        if (alpha < int(input_tables.size()) && !input_tables[alpha].empty())
            return input_tables[alpha].eval(time);
        return pops[alpha].input;
    }

    void validate() const {
        if (pops.empty()) throw ConfigError("model needs at least one population");
        for (auto& p : pops) p.validate();
        coupling.validate(P());
        sigmoid.validate();
        if (int(input_tables.size()) > P()) throw ConfigError("more input tables than populations");
        for (auto& tab : input_tables) tab.validate();
    }
};

// two-population parameter set used throughout: J = [[15,-12],[16,-5]],
// I = (input1, -3), tau = 1, S = erf
inline ModelSpec two_pop_model(double sigma, double input1, CouplingKind kind = CouplingKind::StochasticNoise) {
    ModelSpec m;
    m.pops = {{1.0, input1, 1}, {1.0, -3.0, 1}};
    m.coupling.mean_weights.resize(2, 2);
    m.coupling.mean_weights << 15.0, -12.0, 16.0, -5.0;
    m.coupling.sigma = sigma;
    m.coupling.kind = kind;
    return m;
}

} // namespace hs
