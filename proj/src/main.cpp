// heterosync command line: run experiment configs, emit built-in presets,
// and verify presets against their expected behaviour.
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "heterosync/analysis.hpp"
#include "heterosync/config.hpp"
#include "heterosync/csv.hpp"
#include "heterosync/dmft.hpp"
#include "heterosync/fhn.hpp"
#include "heterosync/moments.hpp"
#include "heterosync/network.hpp"

namespace fs = std::filesystem;
using namespace hs;

static const char* kArtifactVersion = "heterosync 0.1.0";

// FNV-1a over the normalized config text; stable across runs and platforms
static std::string config_hash(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// hash the experiment, not its destination: drop the out= line first
static std::string experiment_hash(const ExperimentConfig& cfg) {
    std::istringstream in(cfg.serialize());
    std::string line, kept;
    while (std::getline(in, line))
        if (line.rfind("out =", 0) != 0) kept += line + "\n";
    return config_hash(kept);
}

struct RunCtx {
    ExperimentConfig cfg;
    fs::path outdir;
    std::string hash;
    std::vector<std::string> written;

    explicit RunCtx(ExperimentConfig c) : cfg(std::move(c)), outdir(cfg.out) {
        hash = experiment_hash(cfg);
        fs::create_directories(outdir);
    }

    ResultTable table() const {
        ResultTable t;
        t.meta.emplace_back("artifact", kArtifactVersion);
        t.meta.emplace_back("kind", kind_name(cfg.kind));
        t.meta.emplace_back("seed", std::to_string(cfg.seed));
        t.meta.emplace_back("config", hash);
        return t;
    }

    void emit(const std::string& name, const ResultTable& t) {
        fs::path p = outdir / name;
        write_table(p.string(), t);
        written.push_back(p.string());
    }
};

// experiments that accept sigma.list run once per entry
static std::vector<double> effective_sigmas(const ExperimentConfig& c, double single) {
    if (c.sigma_list.empty()) return {single};
    return c.sigma_list;
}

static std::string suffix(size_t k, size_t n) { return n > 1 ? "-s" + std::to_string(k + 1) : ""; }

static std::string regime_text(const RegimeLabel& l) {
    std::ostringstream o;
    o << regime_name(l.kind);
    if (l.kind == RegimeKind::MultiEquilibria) o << "(" << l.equilibria << ")";
    o << " amplitude=" << detail::fmt(l.amplitude) << " period=" << detail::fmt(l.period) << " equilibria="
      << l.equilibria;
    return o.str();
}

// trailing-window oscillation/synchrony summary for simulated traces; the
// summary is advisory, so short grids simply omit it
static void annotate_series(ResultTable& t, const std::vector<double>& mean1, const Eigen::MatrixXd& traces,
                            double dt_rec, double span) {
    double transient = std::min(kDefaultTransient, 0.5 * span);
    try {
        auto rep = detect_oscillation(mean1, dt_rec, transient);
        t.meta.emplace_back("oscillatory", rep.periodic ? "true" : "false");
        t.meta.emplace_back("amplitude", detail::fmt(rep.amplitude));
        t.meta.emplace_back("period", detail::fmt(rep.period));
    } catch (const ConfigError&) {
    }
    if (traces.cols() >= 2) {
        try {
            auto sy = synchrony_index(traces, dt_rec, transient);
            if (!sy.degenerate) t.meta.emplace_back("synchrony", detail::fmt(sy.index));
        } catch (const ConfigError&) {
        }
    }
}

static void run_moments(RunCtx& c) {
    auto sigmas = effective_sigmas(c.cfg, c.cfg.model.coupling.sigma);
    long P = c.cfg.model.P();
    for (size_t k = 0; k < sigmas.size(); ++k) {
        ModelSpec m = c.cfg.model;
        m.coupling.sigma = sigmas[k];
        auto traj = integrate_moments(m, {c.cfg.init_mu, c.cfg.init_v}, c.cfg.grid);
        auto label = classify_regime(m);
        ResultTable t = c.table();
        t.meta.emplace_back("sigma", detail::fmt(sigmas[k]));
        t.meta.emplace_back("regime", regime_text(label));
        t.columns.push_back("t");
        for (long a = 0; a < P; ++a) t.columns.push_back("mu" + std::to_string(a + 1));
        for (long a = 0; a < P; ++a) t.columns.push_back("v" + std::to_string(a + 1));
        for (size_t i = 0; i < traj.time.size(); i += size_t(c.cfg.record_stride)) {
            std::vector<double> row{traj.time[i]};
            for (long a = 0; a < P; ++a) row.push_back(traj.mu(long(i), a));
            for (long a = 0; a < P; ++a) row.push_back(traj.var(long(i), a));
            t.rows.push_back(std::move(row));
        }
        c.emit("moments" + suffix(k, sigmas.size()) + ".csv", t);
    }
}

static void run_scan(RunCtx& c) {
    auto d = scan_diagram(c.cfg.model, c.cfg.scan_sigma, c.cfg.scan_input);
    ResultTable t = c.table();
    t.meta.emplace_back("regime_codes", "0=Stationary 1=Oscillatory 2=Bistable 3=MultiEquilibria 4=Divergent");
    t.columns = {"sigma", "I1", "regime", "amplitude", "period"};
    for (size_t i = 0; i < d.sigma_grid.size(); ++i)
        for (size_t j = 0; j < d.input_grid.size(); ++j) {
            const auto& l = d.at(i, j);
            t.add_row({d.sigma_grid[i], d.input_grid[j], double(int(l.kind)), l.amplitude, l.period});
        }
    c.emit("scan.csv", t);
}

static void run_network(RunCtx& c, bool quenched) {
    auto sigmas = effective_sigmas(c.cfg, c.cfg.model.coupling.sigma);
    long P = c.cfg.model.P();
    SimOptions opts{c.cfg.record_stride, c.cfg.tracked};
    for (size_t k = 0; k < sigmas.size(); ++k) {
        ModelSpec m = c.cfg.model;
        m.coupling.sigma = sigmas[k];
        m.coupling.kind = quenched ? CouplingKind::Quenched : CouplingKind::StochasticNoise;
        auto V0 = initial_network_state(m, c.cfg.seed, c.cfg.init_m0, c.cfg.init_v0);
        PopulationStats st;
        if (quenched) {
            auto W = sample_weights(m, c.cfg.seed);
            st = simulate_quenched(m, W, V0, c.cfg.grid, opts);
        } else {
            st = simulate_stochastic(m, V0, c.cfg.grid, c.cfg.seed, opts);
        }
        double dt_rec = c.cfg.grid.dt * double(c.cfg.record_stride);
        std::vector<double> mean1(st.mean.rows());
        for (long i = 0; i < st.mean.rows(); ++i) mean1[size_t(i)] = st.mean(i, 0);

        ResultTable t = c.table();
        t.meta.emplace_back("sigma", detail::fmt(sigmas[k]));
        annotate_series(t, mean1, st.traces, dt_rec, c.cfg.grid.t_end - c.cfg.grid.t0);
        t.columns.push_back("t");
        for (long a = 0; a < P; ++a) t.columns.push_back("mean" + std::to_string(a + 1));
        for (long a = 0; a < P; ++a) t.columns.push_back("var" + std::to_string(a + 1));
        for (size_t i = 0; i < st.time.size(); ++i) {
            std::vector<double> row{st.time[i]};
            for (long a = 0; a < P; ++a) row.push_back(st.mean(long(i), a));
            for (long a = 0; a < P; ++a) row.push_back(st.var(long(i), a));
            t.rows.push_back(std::move(row));
        }
        c.emit("stats" + suffix(k, sigmas.size()) + ".csv", t);

        ResultTable tr = c.table();
        tr.meta.emplace_back("sigma", detail::fmt(sigmas[k]));
        tr.columns.push_back("t");
        for (long j : st.tracked) tr.columns.push_back("n" + std::to_string(j));
        for (size_t i = 0; i < st.time.size(); ++i) {
            std::vector<double> row{st.time[i]};
            for (long j = 0; j < st.traces.cols(); ++j) row.push_back(st.traces(long(i), j));
            tr.rows.push_back(std::move(row));
        }
        c.emit("traces" + suffix(k, sigmas.size()) + ".csv", tr);
    }
}

static void run_dmft(RunCtx& c) {
    const auto& cfg = c.cfg;
    auto sol = solve_dmft(cfg.model, cfg.grid, cfg.init_mu, cfg.init_v, cfg.dmft_eta, cfg.dmft_tol,
                          cfg.dmft_max_iter, cfg.dmft_gh_order);
    long P = cfg.model.P();
    ResultTable t = c.table();
    t.meta.emplace_back("sigma", detail::fmt(cfg.model.coupling.sigma));
    t.meta.emplace_back("iterations", std::to_string(sol.report.iterations));
    t.meta.emplace_back("residual", detail::fmt(sol.report.residual));
    t.meta.emplace_back("converged", sol.report.converged ? "true" : "false");
    t.meta.emplace_back("eta_final", detail::fmt(sol.report.eta_final));
    t.columns.push_back("t");
    for (long a = 0; a < P; ++a) t.columns.push_back("mu" + std::to_string(a + 1));
    for (long a = 0; a < P; ++a) t.columns.push_back("var" + std::to_string(a + 1));
    Eigen::MatrixXd var = sol.equal_time_variance();
    for (size_t i = 0; i < sol.time.size(); ++i) {
        std::vector<double> row{sol.time[i]};
        for (long a = 0; a < P; ++a) row.push_back(sol.mu(long(i), a));
        for (long a = 0; a < P; ++a) row.push_back(var(long(i), a));
        t.rows.push_back(std::move(row));
    }
    c.emit("dmft.csv", t);

    if (cfg.dmft_dump_cov) {
        for (long a = 0; a < P; ++a) {
            ResultTable tc = c.table();
            tc.meta.emplace_back("population", std::to_string(a + 1));
            tc.columns.push_back("t");
            for (size_t j = 0; j < sol.time.size(); ++j) tc.columns.push_back("c" + std::to_string(j));
            const auto& C = sol.cov.C[size_t(a)];
            for (size_t i = 0; i < sol.time.size(); ++i) {
                std::vector<double> row{sol.time[i]};
                for (long j = 0; j < C.cols(); ++j) row.push_back(C(long(i), j));
                tc.rows.push_back(std::move(row));
            }
            c.emit("cov-p" + std::to_string(a + 1) + ".csv", tc);
        }
    }
    if (!sol.report.converged)
        throw NumericError("dmft did not converge: residual " + detail::fmt(sol.report.residual) + " after " +
                           std::to_string(sol.report.iterations) + " iterations");
}

static void run_fhn_network(RunCtx& c) {
    auto sigmas = effective_sigmas(c.cfg, c.cfg.fn.sigma);
    SimOptions opts{c.cfg.record_stride, c.cfg.tracked};
    for (size_t k = 0; k < sigmas.size(); ++k) {
        FnParams p = c.cfg.fn;
        p.sigma = sigmas[k];
        auto W = sample_weights(p.weight_model(), c.cfg.seed);
        auto st = initial_fn_state(p, c.cfg.seed, c.cfg.fn_m0v, c.cfg.fn_v0v, c.cfg.fn_m0w, c.cfg.fn_v0w);
        auto stats = simulate_fn_network(p, W, st, c.cfg.grid, opts);
        double dt_rec = c.cfg.grid.dt * double(c.cfg.record_stride);
        double span = c.cfg.grid.t_end - c.cfg.grid.t0;

        const char* names[2] = {"fn-v", "fn-w"};
        const PopulationStats* parts[2] = {&stats.v, &stats.w};
        for (int q = 0; q < 2; ++q) {
            const auto& ps = *parts[q];
            ResultTable t = c.table();
            t.meta.emplace_back("sigma", detail::fmt(sigmas[k]));
            std::vector<double> mean1(ps.mean.rows());
            for (long i = 0; i < ps.mean.rows(); ++i) mean1[size_t(i)] = ps.mean(i, 0);
            annotate_series(t, mean1, ps.traces, dt_rec, span);
            t.columns = {"t", "mean", "var"};
            for (long j : ps.tracked) t.columns.push_back("n" + std::to_string(j));
            for (size_t i = 0; i < ps.time.size(); ++i) {
                std::vector<double> row{ps.time[i], ps.mean(long(i), 0), ps.var(long(i), 0)};
                for (long j = 0; j < ps.traces.cols(); ++j) row.push_back(ps.traces(long(i), j));
                t.rows.push_back(std::move(row));
            }
            c.emit(std::string(names[q]) + suffix(k, sigmas.size()) + ".csv", t);
        }
    }
}

static void run_fhn_moments(RunCtx& c) {
    auto labels = fn_moment_sweep(c.cfg.fn, c.cfg.fn_lambda, c.cfg.fn_variant);
    ResultTable t = c.table();
    t.meta.emplace_back("variant", c.cfg.fn_variant == FnVariant::GaussianDerived ? "derived" : "printed");
    t.meta.emplace_back("regime_codes", "0=Stationary 1=Oscillatory 2=Bistable 3=MultiEquilibria 4=Divergent");
    t.columns = {"lambda", "regime", "amplitude", "period"};
    std::string window = "none";
    double lo = 0.0, hi = 0.0;
    for (size_t k = 0; k < labels.size(); ++k) {
        const auto& l = labels[k];
        t.add_row({c.cfg.fn_lambda[k], double(int(l.kind)), l.amplitude, l.period});
        if (l.kind == RegimeKind::Oscillatory) {
            if (window == "none") lo = c.cfg.fn_lambda[k];
            hi = c.cfg.fn_lambda[k];
            window = "[" + detail::fmt(lo) + ", " + detail::fmt(hi) + "]";
        }
    }
    t.meta.emplace_back("oscillatory_window", window);
    c.emit("fn-sweep.csv", t);
}

static RunCtx execute(const ExperimentConfig& cfg) {
    RunCtx c(cfg);
    switch (cfg.kind) {
        case ExperimentKind::Moments: run_moments(c); break;
        case ExperimentKind::Scan: run_scan(c); break;
        case ExperimentKind::NetworkQuenched: run_network(c, true); break;
        case ExperimentKind::NetworkStochastic: run_network(c, false); break;
        case ExperimentKind::Dmft: run_dmft(c); break;
        case ExperimentKind::FhnNetwork: run_fhn_network(c); break;
        case ExperimentKind::FhnMoments: run_fhn_moments(c); break;
    }
    // echo the effective config next to the outputs so runs are replayable
    std::ofstream echo((c.outdir / "config.cfg").string());
    echo << cfg.serialize();
    return c;
}

static int run_config(const ExperimentConfig& cfg) {
    auto c = execute(cfg);
    for (auto& p : c.written) std::cout << p << "\n";
    return 0;
}

// ---------------------------------------------------------------- presets

static const std::map<std::string, std::string>& builtin_presets() {
    static const std::map<std::string, std::string> presets = {
        {"fig1-scan",
         "# regime diagram of the two-population rate model over (sigma, I1)\n"
         "kind = scan\n"
         "out = fig1-scan-out\n"
         "scan.sigma = 0:0.5:6\n"
         "scan.input1 = -9:3:9\n"},
        {"fig2-left",
         "# moment trajectories across the three disorder regimes\n"
         "kind = moments\n"
         "out = fig2-left-out\n"
         "sigma.list = 0.5,1.5,6\n"
         "grid.t_end = 200\n"
         "init.v.1 = 0.01\n"
         "init.v.2 = 0.01\n"
         "record.stride = 10\n"},
        {"fig2-right",
         "# quenched-disorder network simulations across the same regimes\n"
         "kind = network-quenched\n"
         "out = fig2-right-out\n"
         "sigma.list = 0.9,1.6,3\n"
         "pop.1.size = 2000\n"
         "pop.2.size = 2000\n"
         "grid.t_end = 100\n"
         "grid.dt = 0.05\n"
         "init.v0.1 = 0.01\n"
         "init.v0.2 = 0.01\n"},
        {"fig3-network",
         "# FitzHugh-Nagumo network at weak, moderate, and strong disorder\n"
         "kind = fhn-network\n"
         "out = fig3-network-out\n"
         "sigma.list = 0.5,1,3\n"
         "fn.n = 2000\n"
         "grid.t_end = 100\n"
         "grid.dt = 0.02\n"},
        {"fig3d-sweep",
         "# FitzHugh-Nagumo moment reduction swept over the voltage spread\n"
         "kind = fhn-moments\n"
         "out = fig3d-sweep-out\n"
         "fn.lambda = 0:0.1:1.5\n"
         "fn.variant = printed\n"},
    };
    return presets;
}

static const std::string& preset_text(const std::string& name) {
    const auto& p = builtin_presets();
    auto it = p.find(name);
    if (it == p.end()) {
        std::string known;
        for (auto& [k, v] : p) known += (known.empty() ? "" : ", ") + k;
        throw ConfigError("unknown preset '" + name + "' (available: " + known + ")");
    }
    return it->second;
}

// ----------------------------------------------------------------- verify

struct Checks {
    int passed = 0, failed = 0;

    void expect(bool ok, const std::string& what, const std::string& detail = "") {
        (ok ? passed : failed)++;
        std::cout << (ok ? "PASS  " : "FAIL  ") << what;
        if (!detail.empty()) std::cout << "  [" << detail << "]";
        std::cout << "\n";
    }
};

static std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    if (!f) return "<unreadable " + p.string() + ">";
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

// run the same config twice into separate directories and compare every
// emitted byte (the config echo differs by its out= line, so skip it)
static void check_reproducible(Checks& ck, ExperimentConfig cfg, const fs::path& scratch) {
    ExperimentConfig a = cfg, b = cfg;
    a.out = (scratch / "rep-a").string();
    b.out = (scratch / "rep-b").string();
    auto ca = execute(a), cb = execute(b);
    bool ok = ca.written.size() == cb.written.size();
    std::string detail = ok ? "" : "file count differs";
    for (size_t i = 0; ok && i < ca.written.size(); ++i)
        if (slurp(ca.written[i]) != slurp(cb.written[i])) {
            ok = false;
            detail = fs::path(ca.written[i]).filename().string() + " differs";
        }
    ck.expect(ok, "byte-identical re-run", detail);
}

static void check_roundtrip(Checks& ck, const std::string& text) {
    auto c = ExperimentConfig::parse_text(text);
    auto echoed = c.serialize();
    auto again = ExperimentConfig::parse_text(echoed).serialize();
    ck.expect(echoed == again, "config round-trip");
}

static int verify_preset(const std::string& name) {
    const std::string& text = preset_text(name);
    auto cfg = ExperimentConfig::parse_text(text);
    fs::path scratch = fs::path(cfg.out) / "verify";
    fs::create_directories(scratch);
    Checks ck;
    check_roundtrip(ck, text);

    if (name == "fig2-left") {
        const RegimeKind want[3] = {RegimeKind::Stationary, RegimeKind::Oscillatory, RegimeKind::Stationary};
        for (size_t k = 0; k < cfg.sigma_list.size(); ++k) {
            auto l = classify_regime_at(cfg.model, cfg.sigma_list[k], cfg.model.pops[0].input);
            ck.expect(l.kind == want[k], "sigma=" + detail::fmt(cfg.sigma_list[k]) + " regime", regime_text(l));
        }
        ExperimentConfig one = cfg;
        one.sigma_list = {1.5};
        check_reproducible(ck, one, scratch);
    } else if (name == "fig2-right") {
        ExperimentConfig one = cfg;
        one.sigma_list = {1.6};
        one.out = (scratch / "s16").string();
        RunCtx c(one);
        run_network(c, true);
        // read back the emitted stats table's summary lines
        std::ifstream in(c.written[0]);
        std::string line, osc, syn;
        while (std::getline(in, line) && line.rfind("# ", 0) == 0) {
            if (line.find("oscillatory = ") != std::string::npos) osc = line.substr(line.find("= ") + 2);
            if (line.find("synchrony = ") != std::string::npos) syn = line.substr(line.find("= ") + 2);
        }
        ck.expect(osc == "true", "sigma=1.6 oscillatory mean", "oscillatory = " + osc);
        ck.expect(!syn.empty() && std::stod(syn) > 0.5, "sigma=1.6 synchrony > 0.5", "synchrony = " + syn);
        check_reproducible(ck, one, scratch);
    } else if (name == "fig1-scan") {
        auto d = scan_diagram(cfg.model, cfg.scan_sigma, cfg.scan_input);
        int osc = 0, multi = 0;
        for (const auto& l : d.labels) {
            osc += l.kind == RegimeKind::Oscillatory;
            multi += l.kind == RegimeKind::MultiEquilibria;
        }
        ck.expect(osc > 0, "oscillatory region present", std::to_string(osc) + " grid points");
        ck.expect(multi > 0, "multi-equilibria region present", std::to_string(multi) + " grid points");
        size_t i = 0, j = 0;
        while (i < cfg.scan_sigma.size() && cfg.scan_sigma[i] != 1.5) ++i;
        while (j < cfg.scan_input.size() && cfg.scan_input[j] != 0.0) ++j;
        if (i < cfg.scan_sigma.size() && j < cfg.scan_input.size()) {
            auto l = classify_regime_at(cfg.model, 1.5, 0.0);
            ck.expect(l.kind == d.at(i, j).kind, "pointwise classification matches diagram", regime_text(l));
        }
    } else if (name == "fig3-network") {
        ExperimentConfig one = cfg;
        one.sigma_list = {1.0};
        one.out = (scratch / "s10").string();
        RunCtx c(one);
        run_fhn_network(c);
        std::ifstream in(c.written[0]); // fn-v.csv
        std::string line, osc, syn;
        while (std::getline(in, line) && line.rfind("# ", 0) == 0) {
            if (line.find("oscillatory = ") != std::string::npos) osc = line.substr(line.find("= ") + 2);
            if (line.find("synchrony = ") != std::string::npos) syn = line.substr(line.find("= ") + 2);
        }
        ck.expect(osc == "true", "sigma=1 oscillatory mean voltage", "oscillatory = " + osc);
        ck.expect(!syn.empty() && std::stod(syn) > 0.5, "sigma=1 synchrony > 0.5", "synchrony = " + syn);
        check_reproducible(ck, one, scratch);
    } else if (name == "fig3d-sweep") {
        auto labels = fn_moment_sweep(cfg.fn, cfg.fn_lambda, cfg.fn_variant);
        ck.expect(labels.front().kind == RegimeKind::Stationary, "lambda=0 stationary",
                  regime_text(labels.front()));
        double lo = 0, hi = 0;
        bool any = false;
        for (size_t k = 0; k < labels.size(); ++k)
            if (labels[k].kind == RegimeKind::Oscillatory) {
                if (!any) lo = cfg.fn_lambda[k];
                hi = cfg.fn_lambda[k];
                any = true;
            }
        ck.expect(any, "oscillatory lambda window exists",
                  any ? "[" + detail::fmt(lo) + ", " + detail::fmt(hi) + "]" : "empty");
    }

    std::cout << name << ": " << ck.passed << "/" << (ck.passed + ck.failed) << " assertions passed\n";
    return ck.failed == 0 ? 0 : 2;
}

// ------------------------------------------------------------------- main

int main(int argc, char** argv) {
    CLI::App app{"heterogeneously connected neural network toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    auto* run = app.add_subcommand("run", "run an experiment config");
    run->add_option("config", config_path, "path to a key=value config file")->required();

    std::string preset_name, preset_out = ".";
    auto* preset = app.add_subcommand("preset", "write a built-in preset config");
    preset->add_option("name", preset_name, "preset name")->required();
    preset->add_option("--out", preset_out, "directory for the emitted config");

    std::string verify_name;
    auto* verify = app.add_subcommand("verify", "run a preset's self-checks");
    verify->add_option("name", verify_name, "preset name")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1; // bad invocation is a config error
    }

    try {
        if (run->parsed()) return run_config(ExperimentConfig::parse_file(config_path));
        if (preset->parsed()) {
            const std::string& text = preset_text(preset_name);
            fs::create_directories(preset_out);
            fs::path p = fs::path(preset_out) / (preset_name + ".cfg");
            std::ofstream out(p);
            if (!out) throw ConfigError("cannot write " + p.string());
            out << text;
            std::cout << p.string() << "\n";
            return 0;
        }
        if (verify->parsed()) return verify_preset(verify_name);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const NumericError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
