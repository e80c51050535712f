#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "heterosync/moments.hpp"
#include "heterosync/network.hpp"

using namespace hs;
using doctest::Approx;

TEST_CASE("sampled weights have the prescribed block mean and variance") {
    ModelSpec m;
    m.pops = {{1.0, 0.0, 1000}};
    m.coupling.mean_weights = Eigen::MatrixXd::Constant(1, 1, 2.0);
    m.coupling.sigma = 1.0;
    m.coupling.kind = CouplingKind::Quenched;
    auto W = sample_weights(m, 42);
    REQUIRE(W.J.rows() == 1000);
    double mean = W.J.mean();
    double var = (W.J.array() - mean).square().mean();
    // entries are Jbar/N + sigma/sqrt(N) xi: mean 2e-3, variance 1e-3
    CHECK(std::abs(mean - 2e-3) < 4.0 * std::sqrt(1e-3 / 1e6)); // 4 se
    CHECK(var > 0.9e-3);
    CHECK(var < 1.1e-3);
}

TEST_CASE("weight sampling is reproducible and seed-sensitive") {
    ModelSpec m = two_pop_model(0.8, 0.0, CouplingKind::Quenched);
    m.pops[0].size = 40;
    m.pops[1].size = 30;
    auto a = sample_weights(m, 7), b = sample_weights(m, 7), c = sample_weights(m, 8);
    CHECK((a.J - b.J).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.J - c.J).cwiseAbs().maxCoeff() > 0.0);
    CHECK(a.layout.N == 70);
    CHECK(a.layout.offsets == std::vector<long>{0, 40, 70});
}

TEST_CASE("zero disorder: quenched network equals the moment equations") {
    ModelSpec m = two_pop_model(0.0, 0.0, CouplingKind::Quenched);
    m.pops[0].size = 40;
    m.pops[1].size = 40;
    Eigen::VectorXd m0(2), v0(2);
    m0 << 0.2, -0.4;
    v0 << 0.0, 0.0;
    auto W = sample_weights(m, 3);
    auto V0 = initial_network_state(m, 3, m0, v0);
    TimeGrid g{0.0, 10.0, 1e-2};
    auto st = simulate_quenched(m, W, V0, g);
    MomentState s0;
    s0.mu = m0;
    s0.var = v0;
    auto traj = integrate_moments(m, s0, g);
    double worst = 0.0;
    for (long i = 0; i < st.mean.rows(); ++i)
        for (int a = 0; a < 2; ++a) worst = std::max(worst, std::abs(st.mean(i, a) - traj.mu(i, a)));
    CHECK(worst < 1e-9);
}

TEST_CASE("single uncoupled neuron charges like an RC circuit") {
    ModelSpec m;
    m.pops = {{1.0, 2.5, 1}};
    m.coupling.mean_weights = Eigen::MatrixXd::Zero(1, 1);
    m.coupling.sigma = 0.0;
    m.coupling.kind = CouplingKind::Quenched;
    auto W = sample_weights(m, 1);
    Eigen::VectorXd V0 = Eigen::VectorXd::Zero(1);
    auto st = simulate_quenched(m, W, V0, {0.0, 6.0, 1e-3});
    for (size_t i : {1000ul, 3000ul, 6000ul}) {
        double t = st.time[i];
        CHECK(st.mean(long(i), 0) == Approx(2.5 * (1.0 - std::exp(-t))).epsilon(1e-9));
    }
}

TEST_CASE("population statistics are invariant under relabelling neurons") {
    ModelSpec m = two_pop_model(0.8, 0.0, CouplingKind::Quenched);
    m.pops[0].size = 30;
    m.pops[1].size = 30;
    auto W = sample_weights(m, 5);
    Eigen::VectorXd m0(2), v0(2);
    m0 << 0.0, -0.5;
    v0 << 0.04, 0.04;
    auto V0 = initial_network_state(m, 5, m0, v0);

    // permute within each population, consistently on rows, columns, state
    std::vector<long> perm(60);
    std::iota(perm.begin(), perm.end(), 0);
    std::reverse(perm.begin(), perm.begin() + 30);
    std::reverse(perm.begin() + 30, perm.end());
    WeightMatrix W2;
    W2.layout = W.layout;
    W2.J.resize(60, 60);
    Eigen::VectorXd V02(60);
    for (long i = 0; i < 60; ++i) {
        V02[i] = V0[perm[size_t(i)]];
        for (long j = 0; j < 60; ++j) W2.J(i, j) = W.J(perm[size_t(i)], perm[size_t(j)]);
    }
    TimeGrid g{0.0, 5.0, 1e-2};
    auto a = simulate_quenched(m, W, V0, g);
    auto b = simulate_quenched(m, W2, V02, g);
    // float disorder product and reordered reductions: equal to ~1e-6 only
    CHECK((a.mean - b.mean).cwiseAbs().maxCoeff() < 1e-6);
    CHECK((a.var - b.var).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("quenched simulation is bitwise repeatable") {
    ModelSpec m = two_pop_model(1.2, 0.0, CouplingKind::Quenched);
    m.pops[0].size = 50;
    m.pops[1].size = 50;
    auto W = sample_weights(m, 11);
    auto V0 = initial_network_state(m, 11, Eigen::VectorXd::Zero(2), Eigen::VectorXd::Constant(2, 0.01));
    TimeGrid g{0.0, 3.0, 1e-2};
    auto a = simulate_quenched(m, W, V0, g);
    auto b = simulate_quenched(m, W, V0, g);
    CHECK((a.mean - b.mean).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.var - b.var).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.traces - b.traces).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("stochastic-noise network at sigma=0 follows the mean field") {
    ModelSpec m = two_pop_model(0.0, 0.0, CouplingKind::StochasticNoise);
    m.pops[0].size = 50;
    m.pops[1].size = 50;
    Eigen::VectorXd m0 = Eigen::VectorXd::Zero(2), v0 = Eigen::VectorXd::Zero(2);
    auto V0 = initial_network_state(m, 2, m0, v0);
    TimeGrid g{0.0, 2.0, 1e-4};
    auto st = simulate_stochastic(m, V0, g, 2);
    MomentState s0;
    s0.mu = m0;
    s0.var = v0;
    auto traj = integrate_moments(m, s0, {0.0, 2.0, 1e-2});
    // Euler-Maruyama is first order: compare endpoints loosely
    long r = st.mean.rows() - 1, q = traj.mu.rows() - 1;
    CHECK(st.mean(r, 0) == Approx(traj.mu(q, 0)).epsilon(5e-3));
    CHECK(st.mean(r, 1) == Approx(traj.mu(q, 1)).epsilon(5e-3));
}

TEST_CASE("stochastic runs are reproducible per seed and stride-consistent") {
    ModelSpec m = two_pop_model(0.6, 0.0, CouplingKind::StochasticNoise);
    m.pops[0].size = 20;
    m.pops[1].size = 20;
    auto V0 = initial_network_state(m, 9, Eigen::VectorXd::Zero(2), Eigen::VectorXd::Constant(2, 0.01));
    TimeGrid g{0.0, 1.0, 1e-3};
    auto a = simulate_stochastic(m, V0, g, 9);
    auto b = simulate_stochastic(m, V0, g, 9);
    auto c = simulate_stochastic(m, V0, g, 10);
    CHECK((a.mean - b.mean).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.mean - c.mean).cwiseAbs().maxCoeff() > 0.0);
    SimOptions strided{10, 4};
    auto d = simulate_stochastic(m, V0, g, 9, strided);
    REQUIRE(d.time.size() == 101);
    CHECK(d.mean(50, 0) == a.mean(500, 0)); // identical path, sparser records
    CHECK(d.traces.cols() == 8);
}

TEST_CASE("runaway drive raises a blow-up error") {
    ModelSpec m;
    m.pops = {{1.0, 0.0, 2}};
    m.coupling.mean_weights = Eigen::MatrixXd::Constant(1, 1, 5e6);
    m.coupling.sigma = 0.0;
    m.coupling.kind = CouplingKind::Quenched;
    auto W = sample_weights(m, 1);
    Eigen::VectorXd V0 = Eigen::VectorXd::Constant(2, 1.0);
    CHECK_THROWS_AS(simulate_quenched(m, W, V0, {0.0, 10.0, 1e-2}), BlowUpError);
}

TEST_CASE("empirical statistics use the unbiased estimator") {
    ModelSpec m;
    m.pops = {{1.0, 0.0, 2}};
    m.coupling.mean_weights = Eigen::MatrixXd::Zero(1, 1);
    Eigen::VectorXd s1(2);
    s1 << -1.0, 1.0;
    auto st = empirical_stats({s1}, m, {0.0});
    CHECK(st.mean(0, 0) == 0.0);
    CHECK(st.var(0, 0) == 2.0);
}

TEST_CASE("tracked trace columns follow population offsets") {
    ModelSpec m = two_pop_model(0.5, 0.0, CouplingKind::Quenched);
    m.pops[0].size = 5;
    m.pops[1].size = 12;
    auto W = sample_weights(m, 4);
    auto V0 = initial_network_state(m, 4, Eigen::VectorXd::Zero(2), Eigen::VectorXd::Constant(2, 0.01));
    SimOptions opts{1, 8};
    auto st = simulate_quenched(m, W, V0, {0.0, 0.1, 1e-2}, opts);
    // population 1 has only 5 neurons to track, population 2 gives 8
    CHECK(st.tracked == std::vector<long>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12});
    CHECK(st.traces(0, 0) == V0[0]);
    CHECK(st.traces(0, 5) == V0[5]);
}
