#pragma once
#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "fhn.hpp"
#include "model.hpp"

// Flat key=value experiment configuration with dotted keys. '#' starts a
// comment. Unknown keys are a hard error; every absent key has a documented
// default. parse(serialize(c)) reproduces c exactly.

namespace hs {

namespace detail {

struct KvStore {
    std::map<std::string, std::string> kv;
    std::set<std::string> used;

    static std::string trim(const std::string& s) {
        size_t a = s.find_first_not_of(" \t\r\n");
        if (a == std::string::npos) return "";
        size_t b = s.find_last_not_of(" \t\r\n");
        return s.substr(a, b - a + 1);
    }

    static KvStore parse(const std::string& text) {
        KvStore st;
        std::istringstream in(text);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            line = trim(line);
            if (line.empty()) continue;
            auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
            std::string key = trim(line.substr(0, eq));
            std::string value = trim(line.substr(eq + 1));
            if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
            if (!st.kv.emplace(key, value).second)
                throw ConfigError("config: duplicate key '" + key + "'");
        }
        return st;
    }

    bool has(const std::string& key) {
        auto it = kv.find(key);
        if (it == kv.end()) return false;
        used.insert(key);
        return true;
    }
    std::string raw(const std::string& key) {
        used.insert(key);
        return kv.at(key);
    }
    std::string str(const std::string& key, const std::string& dflt) { return has(key) ? raw(key) : dflt; }
    double num(const std::string& key, double dflt) {
        if (!has(key)) return dflt;
        return parse_num(key, raw(key));
    }
    long integer(const std::string& key, long dflt) {
        if (!has(key)) return dflt;
        const std::string& s = kv.at(key);
        size_t pos = 0;
        long v = 0;
        try {
            v = std::stol(s, &pos);
        } catch (...) {
            throw ConfigError("config: key '" + key + "' is not an integer: '" + s + "'");
        }
        if (pos != s.size()) throw ConfigError("config: key '" + key + "' is not an integer: '" + s + "'");
        return v;
    }
    bool flag(const std::string& key, bool dflt) {
        if (!has(key)) return dflt;
        std::string s = raw(key);
        if (s == "true" || s == "1") return true;
        if (s == "false" || s == "0") return false;
        throw ConfigError("config: key '" + key + "' must be true/false");
    }
    double parse_num(const std::string& key, const std::string& s) {
        size_t pos = 0;
        double v = 0;
        try {
            v = std::stod(s, &pos);
        } catch (...) {
            throw ConfigError("config: key '" + key + "' is not a number: '" + s + "'");
        }
        if (pos != s.size()) throw ConfigError("config: key '" + key + "' is not a number: '" + s + "'");
        return v;
    }
    // "a,b,c" or "lo:step:hi" (inclusive) or a single number
    std::vector<double> grid(const std::string& key, const std::vector<double>& dflt) {
        if (!has(key)) return dflt;
        std::string s = raw(key);
        std::vector<double> out;
        if (s.find(':') != std::string::npos) {
            std::vector<std::string> parts;
            std::istringstream ss(s);
            std::string tok;
            while (std::getline(ss, tok, ':')) parts.push_back(trim(tok));
            if (parts.size() != 3) throw ConfigError("config: key '" + key + "' range must be lo:step:hi");
            double lo = parse_num(key, parts[0]), step = parse_num(key, parts[1]), hi = parse_num(key, parts[2]);
            if (!(step > 0.0)) throw ConfigError("config: key '" + key + "' range step must be > 0");
            long n = std::lround((hi - lo) / step);
            for (long i = 0; i <= n; ++i) {
                double x = lo + double(i) * step;
                if (x > hi + 1e-9 * std::max(1.0, std::abs(hi))) break;
                out.push_back(x);
            }
            if (out.empty()) throw ConfigError("config: key '" + key + "' range is empty");
            return out;
        }
        std::istringstream ss(s);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            tok = trim(tok);
            if (!tok.empty()) out.push_back(parse_num(key, tok));
        }
        if (out.empty()) throw ConfigError("config: key '" + key + "' has no values");
        return out;
    }

    void reject_unknown() const {
        for (auto& [k, v] : kv)
            if (!used.count(k)) throw ConfigError("config: unknown key '" + k + "'");
    }
};

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace detail

enum class ExperimentKind { Moments, NetworkQuenched, NetworkStochastic, Dmft, FhnNetwork, FhnMoments, Scan };

inline const char* kind_name(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::Moments: return "moments";
        case ExperimentKind::NetworkQuenched: return "network-quenched";
        case ExperimentKind::NetworkStochastic: return "network-stochastic";
        case ExperimentKind::Dmft: return "dmft";
        case ExperimentKind::FhnNetwork: return "fhn-network";
        case ExperimentKind::FhnMoments: return "fhn-moments";
        case ExperimentKind::Scan: return "scan";
    }
    return "?";
}

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::Moments;
    std::string out = "out";
    std::uint64_t seed = 42;

    ModelSpec model;
    TimeGrid grid;
    Eigen::VectorXd init_mu, init_v;   // moment integrations
    Eigen::VectorXd init_m0, init_v0;  // network initial law
    long record_stride = 1;
    int tracked = 8;

    // non-empty: run the experiment once per listed disorder value
    std::vector<double> sigma_list;

    std::vector<double> scan_sigma, scan_input;

    double dmft_eta = 0.5, dmft_tol = 1e-6;
    int dmft_max_iter = 200, dmft_gh_order = 24;
    bool dmft_dump_cov = false;

    FnParams fn;
    std::vector<double> fn_lambda;
    FnVariant fn_variant = FnVariant::GaussianDerived;
    double fn_m0v = 0.0, fn_v0v = 0.01, fn_m0w = 0.0, fn_v0w = 0.01;

    static ExperimentConfig parse_text(const std::string& text);
    static ExperimentConfig parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot read config file: " + path);
        std::ostringstream ss;
        ss << in.rdbuf();
        return parse_text(ss.str());
    }
    std::string serialize() const;
};

inline ExperimentConfig ExperimentConfig::parse_text(const std::string& text) {
    auto st = detail::KvStore::parse(text);
    ExperimentConfig c;
    std::string kind = st.str("kind", "moments");
    if (kind == "moments") c.kind = ExperimentKind::Moments;
    else if (kind == "network-quenched") c.kind = ExperimentKind::NetworkQuenched;
    else if (kind == "network-stochastic") c.kind = ExperimentKind::NetworkStochastic;
    else if (kind == "dmft") c.kind = ExperimentKind::Dmft;
    else if (kind == "fhn-network") c.kind = ExperimentKind::FhnNetwork;
    else if (kind == "fhn-moments") c.kind = ExperimentKind::FhnMoments;
    else if (kind == "scan") c.kind = ExperimentKind::Scan;
    else throw ConfigError("config: unknown kind '" + kind + "'");

    c.out = st.str("out", "out");
    long seed = st.integer("seed", 42);
    if (seed < 0) throw ConfigError("config: seed must be >= 0");
    c.seed = std::uint64_t(seed);

    bool is_fn = c.kind == ExperimentKind::FhnNetwork || c.kind == ExperimentKind::FhnMoments;

    // rate-model block (defaults: the two-population set J=[[15,-12],[16,-5]],
    // I=(0,-3), tau=1)
    long P = st.integer("populations", 2);
    if (P < 1 || P > 16) throw ConfigError("config: populations must be in [1,16]");
    c.model.pops.resize(size_t(P));
    Eigen::MatrixXd J_default = Eigen::MatrixXd::Zero(P, P);
    Eigen::VectorXd I_default = Eigen::VectorXd::Zero(P);
    if (P == 2) {
        J_default << 15.0, -12.0, 16.0, -5.0;
        I_default << 0.0, -3.0;
    }
    for (long k = 0; k < P; ++k) {
        std::string pre = "pop." + std::to_string(k + 1) + ".";
        auto& p = c.model.pops[size_t(k)];
        p.tau = st.num(pre + "tau", 1.0);
        p.input = st.num(pre + "input", I_default[k]);
        p.size = st.integer(pre + "size", 1000);
    }
    c.model.coupling.mean_weights.resize(P, P);
    for (long a = 0; a < P; ++a)
        for (long b = 0; b < P; ++b)
            c.model.coupling.mean_weights(a, b) =
                st.num("coupling.j." + std::to_string(a + 1) + "." + std::to_string(b + 1), J_default(a, b));
    c.model.coupling.sigma = st.num("coupling.sigma", 0.0);
    std::string ck = st.str("coupling.kind", c.kind == ExperimentKind::NetworkQuenched ||
                                                     c.kind == ExperimentKind::Dmft
                                                 ? "quenched"
                                                 : "stochastic");
    if (ck == "quenched") c.model.coupling.kind = CouplingKind::Quenched;
    else if (ck == "stochastic") c.model.coupling.kind = CouplingKind::StochasticNoise;
    else throw ConfigError("config: coupling.kind must be quenched or stochastic");
    c.model.sigmoid.g = st.num("sigmoid.g", 1.0);
    c.model.sigmoid.gamma = st.num("sigmoid.gamma", 0.0);
    for (long k = 0; k < P; ++k) {
        std::string pre = "input." + std::to_string(k + 1) + ".";
        if (st.has(pre + "t") || st.has(pre + "value")) {
            InputTable tab;
            tab.t = st.grid(pre + "t", {});
            tab.value = st.grid(pre + "value", {});
            c.model.input_tables.resize(size_t(P));
            c.model.input_tables[size_t(k)] = std::move(tab);
        }
    }

    double dt_default = c.kind == ExperimentKind::NetworkStochastic ? 1e-3
                        : c.kind == ExperimentKind::Dmft            ? 5e-2
                                                                    : 1e-2;
    double tend_default = c.kind == ExperimentKind::NetworkStochastic ? 50.0
                          : c.kind == ExperimentKind::Dmft            ? 20.0
                                                                      : 300.0;
    c.grid.t0 = st.num("grid.t0", 0.0);
    c.grid.t_end = st.num("grid.t_end", tend_default);
    c.grid.dt = st.num("grid.dt", dt_default);

    c.init_mu.resize(P);
    c.init_v.resize(P);
    c.init_m0.resize(P);
    c.init_v0.resize(P);
    for (long k = 0; k < P; ++k) {
        std::string i = std::to_string(k + 1);
        c.init_mu[k] = st.num("init.mu." + i, 0.0);
        c.init_v[k] = st.num("init.v." + i, 0.0);
        c.init_m0[k] = st.num("init.m0." + i, 0.0);
        c.init_v0[k] = st.num("init.v0." + i, 0.01);
    }
    c.record_stride = st.integer("record.stride", 1);
    if (c.record_stride < 1) throw ConfigError("config: record.stride must be >= 1");
    c.tracked = int(st.integer("record.tracked", 8));
    if (c.tracked < 0) throw ConfigError("config: record.tracked must be >= 0");

    c.sigma_list = st.grid("sigma.list", {});
    for (double s : c.sigma_list)
        if (!(s >= 0.0)) throw ConfigError("config: sigma.list entries must be >= 0");

    c.scan_sigma = st.grid("scan.sigma", {0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0});
    c.scan_input = st.grid("scan.input1", {-10.0, -5.0, 0.0, 5.0, 10.0});

    c.dmft_eta = st.num("dmft.eta", 0.5);
    c.dmft_tol = st.num("dmft.tol", 1e-6);
    c.dmft_max_iter = int(st.integer("dmft.max_iter", 200));
    c.dmft_gh_order = int(st.integer("dmft.gh_order", 24));
    c.dmft_dump_cov = st.flag("dmft.dump_cov", false);

    c.fn.a = st.num("fn.a", 0.4);
    c.fn.b = st.num("fn.b", 2.0);
    c.fn.I = st.num("fn.i", 0.5);
    c.fn.kappa = st.num("fn.kappa", 2.0);
    c.fn.mean_coupling = st.num("fn.jbar", 1.5);
    c.fn.sigma = st.num("fn.sigma", 0.0);
    c.fn.size = st.integer("fn.n", 2000);
    c.fn_lambda = st.grid("fn.lambda", {0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5});
    std::string var = st.str("fn.variant", "derived");
    if (var == "derived") c.fn_variant = FnVariant::GaussianDerived;
    else if (var == "printed") c.fn_variant = FnVariant::PaperPrinted;
    else throw ConfigError("config: fn.variant must be derived or printed");
    if (is_fn) c.fn.validate();
    double vstar = 0.0, wstar = 0.0;
    if (is_fn && (!st.kv.count("fn.m0v") || !st.kv.count("fn.m0w"))) {
        auto eq = fn_single_equilibrium(c.fn); // default start: the FN rest state
        vstar = eq.first;
        wstar = eq.second;
    }
    c.fn_m0v = st.num("fn.m0v", vstar);
    c.fn_v0v = st.num("fn.v0v", 0.01);
    c.fn_m0w = st.num("fn.m0w", wstar);
    c.fn_v0w = st.num("fn.v0w", 0.01);

    st.reject_unknown();
    if (!is_fn) c.model.validate();
    c.grid.validate();
    return c;
}

inline std::string ExperimentConfig::serialize() const {
    using detail::fmt;
    std::ostringstream o;
    o << "kind = " << kind_name(kind) << "\n";
    o << "out = " << out << "\n";
    o << "seed = " << seed << "\n";
    long P = model.P();
    o << "populations = " << P << "\n";
    for (long k = 0; k < P; ++k) {
        std::string pre = "pop." + std::to_string(k + 1) + ".";
        o << pre << "tau = " << fmt(model.pops[size_t(k)].tau) << "\n";
        o << pre << "input = " << fmt(model.pops[size_t(k)].input) << "\n";
        o << pre << "size = " << model.pops[size_t(k)].size << "\n";
    }
    for (long a = 0; a < P; ++a)
        for (long b = 0; b < P; ++b)
            o << "coupling.j." << a + 1 << "." << b + 1 << " = " << fmt(model.coupling.mean_weights(a, b)) << "\n";
    o << "coupling.sigma = " << fmt(model.coupling.sigma) << "\n";
    o << "coupling.kind = " << (model.coupling.kind == CouplingKind::Quenched ? "quenched" : "stochastic") << "\n";
    o << "sigmoid.g = " << fmt(model.sigmoid.g) << "\n";
    o << "sigmoid.gamma = " << fmt(model.sigmoid.gamma) << "\n";
    for (size_t k = 0; k < model.input_tables.size(); ++k) {
        const auto& tab = model.input_tables[k];
        if (tab.empty()) continue;
        std::string pre = "input." + std::to_string(k + 1) + ".";
        auto join = [](const std::vector<double>& v) {
            std::string s;
            for (size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt(v[i]);
            return s;
        };
        o << pre << "t = " << join(tab.t) << "\n";
        o << pre << "value = " << join(tab.value) << "\n";
    }
    o << "grid.t0 = " << fmt(grid.t0) << "\n";
    o << "grid.t_end = " << fmt(grid.t_end) << "\n";
    o << "grid.dt = " << fmt(grid.dt) << "\n";
    for (long k = 0; k < P; ++k) {
        std::string i = std::to_string(k + 1);
        o << "init.mu." << i << " = " << fmt(init_mu[k]) << "\n";
        o << "init.v." << i << " = " << fmt(init_v[k]) << "\n";
        o << "init.m0." << i << " = " << fmt(init_m0[k]) << "\n";
        o << "init.v0." << i << " = " << fmt(init_v0[k]) << "\n";
    }
    o << "record.stride = " << record_stride << "\n";
    o << "record.tracked = " << tracked << "\n";
    auto join = [](const std::vector<double>& v) {
        std::string s;
        for (size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + detail::fmt(v[i]);
        return s;
    };
    if (!sigma_list.empty()) o << "sigma.list = " << join(sigma_list) << "\n";
    o << "scan.sigma = " << join(scan_sigma) << "\n";
    o << "scan.input1 = " << join(scan_input) << "\n";
    o << "dmft.eta = " << fmt(dmft_eta) << "\n";
    o << "dmft.tol = " << fmt(dmft_tol) << "\n";
    o << "dmft.max_iter = " << dmft_max_iter << "\n";
    o << "dmft.gh_order = " << dmft_gh_order << "\n";
    o << "dmft.dump_cov = " << (dmft_dump_cov ? "true" : "false") << "\n";
    o << "fn.a = " << fmt(fn.a) << "\n";
    o << "fn.b = " << fmt(fn.b) << "\n";
    o << "fn.i = " << fmt(fn.I) << "\n";
    o << "fn.kappa = " << fmt(fn.kappa) << "\n";
    o << "fn.jbar = " << fmt(fn.mean_coupling) << "\n";
    o << "fn.sigma = " << fmt(fn.sigma) << "\n";
    o << "fn.n = " << fn.size << "\n";
    o << "fn.lambda = " << join(fn_lambda) << "\n";
    o << "fn.variant = " << (fn_variant == FnVariant::GaussianDerived ? "derived" : "printed") << "\n";
    o << "fn.m0v = " << fmt(fn_m0v) << "\n";
    o << "fn.v0v = " << fmt(fn_v0v) << "\n";
    o << "fn.m0w = " << fmt(fn_m0w) << "\n";
    o << "fn.v0w = " << fmt(fn_v0w) << "\n";
    return o.str();
}

} // namespace hs
