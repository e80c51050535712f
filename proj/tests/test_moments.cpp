#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "heterosync/moments.hpp"

using namespace hs;
using doctest::Approx;

namespace {
ModelSpec fig_model(double sigma, double input1 = 0.0) {
    ModelSpec m = two_pop_model(sigma, input1, CouplingKind::Quenched);
    return m;
}
} // namespace

TEST_CASE("moment_rhs matches the closed erf form") {
    ModelSpec m = fig_model(0.7);
    MomentState s;
    s.mu = Eigen::Vector2d(1.0, -0.5);
    s.var = Eigen::Vector2d(3.0, 0.25);
    auto d = moment_rhs(m, s, 0.0);
    double f1 = std::erf(1.0 / std::sqrt(1.0 + 2.0 * 3.0));
    double f2 = std::erf(-0.5 / std::sqrt(1.0 + 2.0 * 0.25));
    CHECK(d.dmu[0] == Approx(-1.0 + 15.0 * f1 - 12.0 * f2).epsilon(1e-14));
    CHECK(d.dmu[1] == Approx(0.5 + 16.0 * f1 - 5.0 * f2 - 3.0).epsilon(1e-14));
    // the variance source is sigma^2 sum_b f_b^2, not weighted by Jbar
    double src = 0.49 * (f1 * f1 + f2 * f2);
    CHECK(d.dvar[0] == Approx(-2.0 * 3.0 + src).epsilon(1e-14));
    CHECK(d.dvar[1] == Approx(-2.0 * 0.25 + src).epsilon(1e-14));
}

TEST_CASE("uncoupled jacobian has eigenvalues -1/tau and -2/tau") {
    // sigma must vanish too: the sigma^2 f^2 drive couples mu into the
    // variance channel even with zero mean weights
    ModelSpec m = fig_model(0.0);
    m.coupling.mean_weights.setZero();
    m.pops[0].tau = 2.0;
    m.pops[1].tau = 0.5;
    MomentState s;
    s.mu = Eigen::Vector2d(0.3, -0.1);
    s.var = Eigen::Vector2d(0.2, 0.6);
    Eigen::VectorXcd ev = jacobian(m, s).eigenvalues();
    std::vector<double> re(4);
    for (int i = 0; i < 4; ++i) {
        CHECK(std::abs(ev[i].imag()) < 1e-12);
        re[size_t(i)] = ev[i].real();
    }
    std::sort(re.begin(), re.end());
    CHECK(re[0] == Approx(-4.0).epsilon(1e-10)); // -2/0.5
    CHECK(re[1] == Approx(-2.0).epsilon(1e-10)); // -1/0.5 and -2/2.0 coincide
    CHECK(re[2] == Approx(-1.0).epsilon(1e-10));
    CHECK(re[3] == Approx(-0.5).epsilon(1e-10)); // -1/2.0
}

TEST_CASE("jacobian matches central differences below 1e-6") {
    ModelSpec m = fig_model(1.1, -2.0);
    MomentState s;
    s.mu = Eigen::Vector2d(0.8, -1.4);
    s.var = Eigen::Vector2d(0.9, 0.15);
    Eigen::MatrixXd J = jacobian(m, s);
    double h = 1e-6;
    auto flat_rhs = [&](const Eigen::Vector4d& x) {
        MomentState q;
        q.mu = x.head<2>();
        q.var = x.tail<2>();
        auto d = moment_rhs(m, q, 0.0);
        Eigen::Vector4d out;
        out << d.dmu, d.dvar;
        return out;
    };
    Eigen::Vector4d x0;
    x0 << s.mu, s.var;
    for (int j = 0; j < 4; ++j) {
        Eigen::Vector4d xp = x0, xm = x0;
        xp[j] += h;
        xm[j] -= h;
        Eigen::Vector4d col = (flat_rhs(xp) - flat_rhs(xm)) / (2 * h);
        for (int i = 0; i < 4; ++i) CHECK(std::abs(J(i, j) - col[i]) < 1e-6);
    }
}

TEST_CASE("decoupled single population integrates to the exact exponential") {
    ModelSpec m;
    m.pops = {{1.0, 2.0, 1}};
    m.coupling.mean_weights = Eigen::MatrixXd::Zero(1, 1);
    m.coupling.sigma = 0.0;
    MomentState s0;
    s0.mu = Eigen::VectorXd::Zero(1);
    s0.var = Eigen::VectorXd::Constant(1, 0.3);
    TimeGrid g{0.0, 5.0, 1e-3};
    auto traj = integrate_moments(m, s0, g);
    for (size_t i : {100ul, 2500ul, 5000ul}) {
        double t = traj.time[i];
        CHECK(traj.mu(long(i), 0) == Approx(2.0 * (1.0 - std::exp(-t))).epsilon(1e-10));
        CHECK(traj.var(long(i), 0) == Approx(0.3 * std::exp(-2.0 * t)).epsilon(1e-10));
    }
}

TEST_CASE("rk4 global error decays 16x per dt halving") {
    ModelSpec m = fig_model(1.5);
    MomentState s0;
    s0.mu = Eigen::Vector2d(0.1, -0.2);
    s0.var = Eigen::Vector2d(0.01, 0.02);
    auto endpoint = [&](double dt) {
        auto traj = integrate_moments(m, s0, {0.0, 2.0, dt});
        long r = traj.mu.rows() - 1;
        Eigen::Vector4d x;
        x << traj.mu(r, 0), traj.mu(r, 1), traj.var(r, 0), traj.var(r, 1);
        return x;
    };
    Eigen::Vector4d a = endpoint(0.05), b = endpoint(0.025), c = endpoint(0.0125);
    double ratio = (a - b).norm() / (b - c).norm();
    CHECK(ratio > 12.0);
    CHECK(ratio < 20.0);
}

TEST_CASE("newton scan keeps converged roots outside the seeding box") {
    // at sigma=0.5 the only attracting states are saturated nodes with
    // |mu_2| ~ 8..14, far outside the seed box; they must still be reported
    auto eqs = find_equilibria(fig_model(0.5), default_search_box(fig_model(0.5)));
    bool any_stable = false;
    for (const auto& e : eqs) any_stable = any_stable || e.stable;
    CHECK(eqs.size() == 5);
    CHECK(any_stable);
}

TEST_CASE("three-fixed-point wedge at weak disorder") {
    ModelSpec m = fig_model(0.1, -5.0);
    auto eqs = find_equilibria(m, default_search_box(m));
    CHECK(eqs.size() == 3);
    int stable = 0;
    for (const auto& e : eqs) stable += e.stable;
    CHECK(stable == 1);
    for (const auto& e : eqs) {
        auto d = moment_rhs(m, e.state, 0.0);
        CHECK(d.dmu.lpNorm<Eigen::Infinity>() < 1e-9);
        CHECK(d.dvar.lpNorm<Eigen::Infinity>() < 1e-9);
    }
}

TEST_CASE("integration started at a stable equilibrium stays put") {
    ModelSpec m = fig_model(0.1, -5.0);
    auto eqs = find_equilibria(m, default_search_box(m));
    for (const auto& e : eqs) {
        if (!e.stable) continue;
        auto traj = integrate_moments(m, e.state, {0.0, 20.0, 1e-2});
        long r = traj.mu.rows() - 1;
        CHECK(std::abs(traj.mu(r, 0) - e.state.mu[0]) < 1e-8);
        CHECK(std::abs(traj.mu(r, 1) - e.state.mu[1]) < 1e-8);
    }
}

TEST_CASE("regime classification across the disorder axis") {
    auto weak = classify_regime(fig_model(0.5));
    CHECK(weak.kind == RegimeKind::Stationary);
    auto mid = classify_regime(fig_model(1.5));
    CHECK(mid.kind == RegimeKind::Oscillatory);
    CHECK(mid.amplitude > 1.0);
    CHECK(mid.period == Approx(7.681).epsilon(0.02));
    auto strong = classify_regime(fig_model(6.0));
    CHECK(strong.kind == RegimeKind::Stationary);
}

TEST_CASE("three-equilibria band is labelled MultiEquilibria") {
    auto l = classify_regime_at(fig_model(0.0), 0.1, -5.0);
    CHECK(l.kind == RegimeKind::MultiEquilibria);
    CHECK(l.equilibria == 3);
}

TEST_CASE("scan diagram agrees with pointwise classification and repeats exactly") {
    ModelSpec base = fig_model(0.0);
    auto d = scan_diagram(base, {0.1, 1.5}, {-5.0, 0.0});
    CHECK(d.at(0, 0).kind == RegimeKind::MultiEquilibria);
    CHECK(d.at(1, 1).kind == RegimeKind::Oscillatory);
    auto d2 = scan_diagram(base, {0.1, 1.5}, {-5.0, 0.0});
    for (size_t k = 0; k < d.labels.size(); ++k) {
        CHECK(d.labels[k].kind == d2.labels[k].kind);
        CHECK(d.labels[k].amplitude == d2.labels[k].amplitude);
        CHECK(d.labels[k].period == d2.labels[k].period);
        RegimeLabel p = classify_regime_at(base, d.sigma_grid[k / 2], d.input_grid[k % 2]);
        CHECK(p.kind == d.labels[k].kind);
    }
}

TEST_CASE("grids must be sorted and non-empty") {
    ModelSpec base = fig_model(0.0);
    CHECK_THROWS_AS(scan_diagram(base, {}, {0.0}), ConfigError);
    CHECK_THROWS_AS(scan_diagram(base, {1.0, 0.5}, {0.0}), ConfigError);
}
