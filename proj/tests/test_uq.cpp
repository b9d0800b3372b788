#include "gpcsim/uq/ac.hpp"
#include "gpcsim/uq/collocation.hpp"
#include "gpcsim/uq/galerkin.hpp"
#include "gpcsim/uq/monte_carlo.hpp"
#include "gpcsim/uq/stochastic_testing.hpp"

#include "oracles.hpp"

#include <catch_amalgamated.hpp>

#include <numbers>
#include <random>

using namespace gpcsim;
using Catch::Matchers::ContainsSubstring;

namespace {

std::string doc(const std::string& name) { return std::string(GPCSIM_DOCS_DIR) + "/" + name; }

NewtonConfig tight() {
    NewtonConfig c;
    c.abstol = 1e-14;
    c.reltol = 1e-13;
    return c;
}

double rel(const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return (a - b).norm() / b.norm(); }

// A current source into two random resistors in series: v(a) = I (R1 + R2),
// which is linear in both germs.
constexpr const char* linear_net = R"(
.random r1 gauss(1k,100)
.random r2 uniform(400,600)
I1 0 a 1m
R1 a b r1
R2 b 0 r2
)";

Eigen::VectorXd random_coeffs(Eigen::Index n, Eigen::Index K, unsigned seed, double scale) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::VectorXd X(n * K);
    for (Eigen::Index i = 0; i < X.size(); ++i) X(i) = u(rng) * (i < n ? 0.5 : scale);
    return X;
}

} // namespace

TEST_CASE("ST residual at p = 0 is the deterministic residual at the single node", "[st]") {
    const auto c = StochasticCircuit::from_file(doc("cs_amp.cir"));
    const GpcBasisSet basis(c.germs(), 0);
    const StProblem st(c, select_testing_nodes(basis));
    const NodalProblem nominal(c, st.nodes().nodes[0]);
    const Eigen::VectorXd x = random_coeffs(c.size(), 1, 3, 0.0);
    Eigen::VectorXd Q1, F1, Q2, F2;
    st.evaluate(x, Q1, F1);
    nominal.evaluate(x, Q2, F2);
    CHECK(Q1 == Q2);
    CHECK(F1 == F2);
    CHECK(st.excitation(1e-4) == nominal.excitation(1e-4));
}

TEST_CASE("ST residual on the RC testbench matches a hand-written MNA residual", "[st]") {
    const auto c = StochasticCircuit::from_file(doc("rc_uniform.cir"));
    const GpcBasisSet basis(c.germs(), 3);
    const StProblem st(c, select_testing_nodes(basis));
    const auto K = static_cast<Eigen::Index>(basis.size());
    const Eigen::Index vin = c.state_index("in"), vout = c.state_index("out"), ib = c.state_index("i(V1)");
    const Eigen::VectorXd X = random_coeffs(3, K, 11, 0.05);
    const double t = 0.37e-3, alpha = 2.5e5;
    Eigen::VectorXd Q, F;
    st.evaluate(X, Q, F);
    const Eigen::VectorXd R = alpha * Q + F - st.excitation(t);
    const double u = std::sin(2.0 * std::numbers::pi * 1e3 * t);
    for (Eigen::Index m = 0; m < K; ++m) {
        const Eigen::VectorXd& xi = st.nodes().nodes[static_cast<std::size_t>(m)];
        // x(xi) = sum_k X_k H_k(xi), with H evaluated through the basis rows.
        Eigen::Vector3d x = Eigen::Vector3d::Zero();
        const Eigen::VectorXd h = basis.eval(xi);
        for (Eigen::Index k = 0; k < K; ++k) x += h(k) * X.segment(k * 3, 3);
        const double Rv = 1000.0 + 200.0 * xi(0), C = 159e-9;
        const double g = (x(vin) - x(vout)) / Rv;
        Eigen::Vector3d expect;
        expect(vin) = g + x(ib);
        expect(vout) = -g + alpha * C * x(vout);
        expect(ib) = x(vin) - u;
        const Eigen::VectorXd got = R.segment(m * 3, 3);
        CHECK((got - expect).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + expect.cwiseAbs().maxCoeff()));
    }
}

TEST_CASE("ST residual vanishes at the exact coefficients of a linear circuit", "[st]") {
    const auto c = StochasticCircuit::from_text(linear_net);
    const GpcBasisSet basis(c.germs(), 2);
    const StProblem st(c, select_testing_nodes(basis));
    const auto n = c.size();
    Eigen::VectorXd X = Eigen::VectorXd::Zero(n * static_cast<Eigen::Index>(basis.size()));
    // v(a) = 1m (1000 + 100 xi1 + 500 + 100 xi2), v(b) = 1m (500 + 100 xi2).
    // H for (1,0) is xi1; for (0,1) it is sqrt(3) xi2.
    const Eigen::Index a = c.state_index("a"), b = c.state_index("b");
    const Eigen::Index k10 = 2, k01 = 1;
    REQUIRE(basis.indices()[k10] == MultiIndex{1, 0});
    REQUIRE(basis.indices()[k01] == MultiIndex{0, 1});
    X(a) = 1.5;
    X(b) = 0.5;
    X(k10 * n + a) = 0.1;
    X(k01 * n + a) = 0.1 / std::sqrt(3.0);
    X(k01 * n + b) = 0.1 / std::sqrt(3.0);
    Eigen::VectorXd Q, F;
    st.evaluate(X, Q, F);
    CHECK((F - st.dc_excitation()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("decoupled Newton step equals the dense coupled solve", "[st]") {
    for (const char* name : {"cs_amp.cir", "diode_dc.cir"}) {
        const auto c = StochasticCircuit::from_file(doc(name));
        for (int p = 1; p <= 3; ++p) {
            const GpcBasisSet basis(c.germs(), p);
            const StProblem st(c, select_testing_nodes(basis));
            const auto K = static_cast<Eigen::Index>(basis.size());
            Eigen::VectorXd X = st.lift(run_nodal(c, c.germ_mean(), Analysis::dc(), {}, {}).x[0]);
            X += 0.01 * random_coeffs(c.size(), K, 5, 1.0);
            for (double alpha : {0.0, 1e6}) {
                Eigen::VectorXd Q, F;
                st.evaluate(X, Q, F);
                const Eigen::VectorXd R = alpha * Q + F - st.dc_excitation();
                const Eigen::VectorXd fast = st.linearize(X, alpha)->solve(R);
                const Eigen::VectorXd dense = st.coupled_jacobian(X, alpha).partialPivLu().solve(R);
                INFO(name << " p=" << p << " alpha=" << alpha);
                CHECK(rel(fast, dense) < 1e-9);
            }
        }
    }
}

TEST_CASE("finite-difference Jacobian of the ST residual factors as J~ (Phi kron I)", "[st]") {
    for (const char* name : {"diode_dc.cir", "cs_amp.cir"}) {
        const auto c = StochasticCircuit::from_file(doc(name));
        const GpcBasisSet basis(c.germs(), 2);
        const StProblem st(c, select_testing_nodes(basis));
        Eigen::VectorXd X = st.lift(run_nodal(c, c.germ_mean(), Analysis::dc(), {}, {}).x[0]);
        X += 0.01 * random_coeffs(c.size(), static_cast<Eigen::Index>(basis.size()), 9, 1.0);
        const double alpha = 1e5;
        const Eigen::MatrixXd J = st.coupled_jacobian(X, alpha);
        Eigen::VectorXd Q, F;
        for (Eigen::Index j = 0; j < X.size(); ++j) {
            const double h = 1e-7 * std::max(1.0, std::abs(X(j)));
            Eigen::VectorXd Xp = X, Xm = X;
            Xp(j) += h;
            Xm(j) -= h;
            st.evaluate(Xp, Q, F);
            const Eigen::VectorXd Rp = alpha * Q + F;
            st.evaluate(Xm, Q, F);
            const Eigen::VectorXd Rm = alpha * Q + F;
            const Eigen::VectorXd fd = (Rp - Rm) / (2.0 * h);
            INFO(name << " column " << j);
            CHECK((fd - J.col(j)).norm() <= 1e-5 * J.col(j).norm() + 1e-8);
        }
    }
}

TEST_CASE("decoupled step by hand for n = 1, K = 2", "[st]") {
    // One node fed by a current source through a Gaussian resistor.
    const auto c = StochasticCircuit::from_text(".random r gauss(1k,100)\nI1 0 a 1m\nR1 a 0 r\n");
    const GpcBasisSet basis(c.germs(), 1);
    const StProblem st(c, select_testing_nodes(basis));
    const double x1 = st.nodes().nodes[0](0), x2 = st.nodes().nodes[1](0);
    // Two-point Gauss-Hermite rule: xi = -1, +1.
    CHECK(std::abs(std::abs(x1) - 1.0) < 1e-12);
    CHECK(std::abs(x1 + x2) < 1e-12);
    const Eigen::Vector2d rhs(0.3, -0.7);
    const Eigen::VectorXd X = Eigen::Vector2d(0.2, 0.05);
    const Eigen::VectorXd got = st.linearize(X, 0.0)->solve(rhs);
    // Block m is the conductance 1/R(xi_m), so z_m = r_m R(xi_m); then
    // X0 + X1 xi_m = z_m gives X1 = (z2 - z1) / (x2 - x1) and X0 = z1 - X1 x1.
    const double z1 = rhs(0) * (1000.0 + 100.0 * x1), z2 = rhs(1) * (1000.0 + 100.0 * x2);
    const double X1 = (z2 - z1) / (x2 - x1), X0 = z1 - X1 * x1;
    CHECK(std::abs(got(0) - X0) < 1e-9 * std::abs(X0));
    CHECK(std::abs(got(1) - X1) < 1e-9 * std::abs(X1));
}

TEST_CASE("a singular Jacobian block names its testing node", "[st]") {
    std::vector<Eigen::MatrixXd> blocks{Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Zero(2, 2)};
    const Eigen::MatrixXd phi_inv = Eigen::MatrixXd::Identity(2, 2);
    CHECK_THROWS_WITH(StDecoupledSolve(blocks, phi_inv, nullptr), ContainsSubstring("testing node 1"));
}

TEST_CASE("linear circuit: ST, SG and SC recover the exact coefficients", "[st][sg][sc]") {
    const auto c = StochasticCircuit::from_text(linear_net);
    const Eigen::Index a = c.state_index("a");
    for (int p = 1; p <= 3; ++p) {
        const GpcBasisSet basis(c.germs(), p);
        const auto st = st_solve(c, basis, Analysis::dc());
        const auto sg = sg_solve(c, basis, Analysis::dc());
        const auto sc = sc_solve(c, basis, Analysis::dc());
        CHECK((st.coeffs[0] - sg.coeffs[0]).norm() < 1e-8);
        CHECK((st.coeffs[0] - sc.coeffs[0]).norm() < 1e-8);
        CHECK(std::abs(st.coeffs[0](a, 0) - 1.5) < 1e-9);
        CHECK(std::abs(st.coeffs[0](a, 2) - 0.1) < 1e-9);
        CHECK(std::abs(st.coeffs[0](a, 1) - 0.1 / std::sqrt(3.0)) < 1e-9);
        CHECK(st.coeffs[0].rightCols(st.coeffs[0].cols() - 3).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("SG input blocks: B in the constant block, zero elsewhere", "[sg]") {
    const auto c = StochasticCircuit::from_file(doc("cs_amp.cir"));
    const GpcBasisSet basis(c.germs(), 3);
    const SgProblem sg(c, basis);
    const Eigen::VectorXd& w = sg.input_weights();
    CHECK(std::abs(w(0) - 1.0) < 1e-13);
    CHECK(w.tail(w.size() - 1).cwiseAbs().maxCoeff() < 1e-13);
    const Eigen::VectorXd b = sg.dc_excitation();
    CHECK((b.head(c.size()) - c.dc_excitation()).norm() < 1e-13);
}

TEST_CASE("SG Jacobian matches finite differences of the Galerkin residual", "[sg]") {
    const auto c = StochasticCircuit::from_file(doc("diode_dc.cir"));
    const GpcBasisSet basis(c.germs(), 2);
    const SgProblem sg(c, basis);
    Eigen::VectorXd X = sg.lift(run_nodal(c, c.germ_mean(), Analysis::dc(), {}, {}).x[0]);
    X += 0.01 * random_coeffs(c.size(), static_cast<Eigen::Index>(basis.size()), 17, 1.0);
    const Eigen::MatrixXd J = sg.coupled_jacobian(X, 0.0);
    Eigen::VectorXd Q, F1, F2;
    for (Eigen::Index j = 0; j < X.size(); ++j) {
        const double h = 1e-7 * std::max(1.0, std::abs(X(j)));
        Eigen::VectorXd Xp = X, Xm = X;
        Xp(j) += h;
        Xm(j) -= h;
        sg.evaluate(Xp, Q, F1);
        sg.evaluate(Xm, Q, F2);
        const Eigen::VectorXd fd = (F1 - F2) / (2.0 * h);
        CHECK((fd - J.col(j)).norm() <= 1e-5 * J.col(j).norm() + 1e-8);
    }
}

TEST_CASE("p = 0: every method reproduces the nominal simulation", "[st][sg][sc][mc]") {
    SolverOptions o;
    o.newton = tight();
    SECTION("DC") {
        for (const char* name : {"diode_dc.cir", "cs_amp.cir", "bjt_feedback.cir"}) {
            const auto c = StochasticCircuit::from_file(doc(name));
            const Eigen::VectorXd nominal = run_nodal(c, c.germ_mean(), Analysis::dc(), o.newton, {}).x[0];
            const auto st = st_solve(c, 0, Analysis::dc(), o);
            const auto sg = sg_solve(c, 0, Analysis::dc(), o);
            const auto sc = sc_solve(c, 0, Analysis::dc(), o);
            MonteCarloOptions mc;
            mc.samples = 1;
            mc.mean_point = true;
            const auto ens = mc_solve(c, mc, Analysis::dc(), o);
            INFO(name);
            const double scale = nominal.cwiseAbs().maxCoeff();
            CHECK((st.coeffs[0].col(0) - nominal).cwiseAbs().maxCoeff() <= 1e-12 * scale);
            CHECK((sg.coeffs[0].col(0) - nominal).cwiseAbs().maxCoeff() <= 1e-12 * scale);
            CHECK((sc.coeffs[0].col(0) - nominal).cwiseAbs().maxCoeff() <= 1e-12 * scale);
            CHECK((ens.values[0].col(0) - nominal).cwiseAbs().maxCoeff() <= 1e-12 * scale);
        }
    }
    SECTION("transient on a shared fixed grid") {
        const auto c = StochasticCircuit::from_file(doc("rc_uniform.cir"));
        const Analysis a = Analysis::tran(1e-3);
        o.h_fixed = 1e-3 / 400;
        o.step.fixed_step = o.h_fixed;
        const auto st = st_solve(c, 0, a, o);
        const auto sg = sg_solve(c, 0, a, o);
        const auto sc = sc_solve(c, 0, a, o);
        MonteCarloOptions mc;
        mc.samples = 1;
        mc.mean_point = true;
        const auto ens = mc_solve(c, mc, a, o);
        REQUIRE(st.points() == 401);
        REQUIRE(sg.points() == 401);
        REQUIRE(sc.points() == 401);
        REQUIRE(ens.times.size() == 401);
        double worst = 0.0;
        for (std::size_t t = 0; t < st.points(); ++t) {
            CHECK(st.times[t] == sc.times[t]);
            worst = std::max({worst, (st.coeffs[t] - sc.coeffs[t]).cwiseAbs().maxCoeff(),
                              (sg.coeffs[t] - sc.coeffs[t]).cwiseAbs().maxCoeff(),
                              (ens.values[0].col(static_cast<Eigen::Index>(t)) - sc.coeffs[t].col(0)).cwiseAbs().maxCoeff()});
        }
        CHECK(worst <= 1e-12);
    }
}

TEST_CASE("RC transient with uniform R matches the closed-form quadrature oracle", "[st]") {
    const auto c = StochasticCircuit::from_file(doc("rc_uniform.cir"));
    SolverOptions o;
    o.step.lte_tol = 1e-9;
    o.step.lte_abstol = 1e-11;
    const auto st = st_solve(c, 5, Analysis::tran(2e-3), o);
    const Eigen::Index out = c.state_index("out");
    const long double omega = 2.0L * std::numbers::pi_v<long double> * 1000.0L;
    double worst_mean = 0.0, worst_std = 0.0;
    for (std::size_t i = 0; i < st.points(); i += 7) {
        const auto [mean, sd] = oracle::uniform_moments(
            [&](long double R) { return oracle::rc_sine_response(st.times[i], R * 159e-9L, omega); }, 800.0L, 1200.0L,
            400);
        const auto mo = moments_from_coeffs(st.coeffs[i]);
        worst_mean = std::max(worst_mean, std::abs(mo.mean(out) - mean));
        worst_std = std::max(worst_std, std::abs(mo.std(out) - sd));
    }
    CHECK(worst_mean < 1e-6);
    CHECK(worst_std < 1e-6);
}

TEST_CASE("ST DC converges spectrally on the diode testbench", "[st]") {
    const auto c = StochasticCircuit::from_file(doc("diode_dc.cir"));
    SolverOptions o;
    o.newton = tight();
    const auto ref = st_solve(c, 6, Analysis::dc(), o);
    double prev = std::numeric_limits<double>::infinity();
    for (int p = 1; p <= 4; ++p) {
        const auto r = st_solve(c, p, Analysis::dc(), o);
        Eigen::MatrixXd d = ref.coeffs[0];
        d.leftCols(r.coeffs[0].cols()) -= r.coeffs[0];
        const double err = d.norm();
        CHECK(err < prev);
        if (p == 3) CHECK(err < 1e-4);
        prev = err;
    }
}

TEST_CASE("ST transient reports steps, testing nodes and conditioning", "[st]") {
    const auto c = StochasticCircuit::from_file(doc("cs_amp.cir"));
    const auto r = st_solve(c, 3, Analysis::dc());
    CHECK(r.stats.basis_size == 35);
    CHECK(r.stats.node_count == 35);
    REQUIRE(r.nodes);
    CHECK(std::isfinite(r.stats.cond_phi));
    CHECK(r.stats.factorizations >= 1);
    const auto sweep = st_solve(c, 2, Analysis::dcsweep(*c.netlist().dcsweep));
    CHECK(sweep.points() == 7);
    // Mean drain voltage falls as the gate drive rises.
    for (std::size_t i = 1; i < sweep.points(); ++i)
        CHECK(sweep.coeffs[i](c.state_index("d"), 0) < sweep.coeffs[i - 1](c.state_index("d"), 0));
}

TEST_CASE("SC node counts follow the tensor rule", "[sc]") {
    const auto c = StochasticCircuit::from_file(doc("cs_amp.cir"));
    const std::size_t expected[] = {16, 81, 256};
    for (int p = 1; p <= 3; ++p) CHECK(sc_solve(c, p, Analysis::dc()).stats.node_count == expected[p - 1]);
    for (int p = 4; p <= 6; ++p) CHECK(tensor_grid_count(p, 4) == std::size_t(std::pow(p + 1, 4)));
}

TEST_CASE("SC failures name the offending germ", "[sc]") {
    // R(xi) = 1k + 600 xi goes negative at the outer Gauss-Hermite nodes.
    const auto c = StochasticCircuit::from_text(".random r gauss(1k,600)\nV1 a 0 1\nR1 a 0 r\n");
    CHECK_THROWS_WITH(sc_solve(c, 3, Analysis::dc()), ContainsSubstring("xi=("));
}

TEST_CASE("Monte Carlo is deterministic under a fixed seed", "[mc]") {
    const auto c = StochasticCircuit::from_file(doc("cs_amp.cir"));
    MonteCarloOptions mc;
    mc.samples = 200;
    mc.seed = 42;
    SolverOptions o;
    const auto a = mc_solve(c, mc, Analysis::dc(), o);
    o.jobs = 3;
    const auto b = mc_solve(c, mc, Analysis::dc(), o);
    REQUIRE(a.size() == b.size());
    for (std::size_t s = 0; s < a.size(); ++s) {
        CHECK(a.germs[s] == b.germs[s]);
        CHECK(a.values[s] == b.values[s]);
    }
    mc.seed = 43;
    CHECK(mc_solve(c, mc, Analysis::dc(), o).germs[0] != a.germs[0]);
}

TEST_CASE("Monte Carlo counts failed samples and aborts above one percent", "[mc]") {
    MonteCarloOptions mc;
    mc.samples = 2000;
    // P(R < 0) = P(z < -10/3), about 4e-4.
    const auto ok = StochasticCircuit::from_text(".random r gauss(1k,300)\nV1 a 0 1\nR1 a 0 r\n");
    const auto e = mc_solve(ok, mc, Analysis::dc());
    CHECK(e.requested == 2000);
    CHECK(e.failed + static_cast<long>(e.size()) == 2000);
    CHECK(e.failed <= 20);
    // P(R < 0) = P(z < -2), about 2.3 percent.
    const auto bad = StochasticCircuit::from_text(".random r gauss(1k,500)\nV1 a 0 1\nR1 a 0 r\n");
    CHECK_THROWS_AS(mc_solve(bad, mc, Analysis::dc()), DcFailure);
}

TEST_CASE("Monte Carlo RC transient agrees with the oracle within three standard errors", "[mc]") {
    const auto c = StochasticCircuit::from_text(
        ".random r uniform(800,1200)\nV1 in 0 sin(0 1 1k)\nR1 in out r\nC1 out 0 159n\n");
    MonteCarloOptions mc;
    mc.samples = 10000;
    mc.seed = 7;
    SolverOptions o;
    o.h_fixed = 2e-6;
    o.step.scheme = Scheme::Trapezoidal;
    o.keep_states = {c.state_index("out")};
    const double tstop = 2e-4;
    const auto e = mc_solve(c, mc, Analysis::tran(tstop), o);
    REQUIRE(e.size() == 10000);
    const Eigen::Index last = static_cast<Eigen::Index>(e.times.size()) - 1;
    double sum = 0.0, sum2 = 0.0;
    for (const auto& v : e.values) {
        sum += v(0, last);
        sum2 += v(0, last) * v(0, last);
    }
    const double N = static_cast<double>(e.size());
    const double mean = sum / N, sd = std::sqrt((sum2 - N * mean * mean) / (N - 1.0));
    const long double omega = 2.0L * std::numbers::pi_v<long double> * 1000.0L;
    const auto [ref_mean, ref_sd] = oracle::uniform_moments(
        [&](long double R) { return oracle::rc_sine_response(tstop, R * 159e-9L, omega); }, 800.0L, 1200.0L, 400);
    CHECK(std::abs(mean - ref_mean) < 3.0 * sd / std::sqrt(N));
    CHECK(std::abs(sd - ref_sd) < 0.05 * ref_sd);
}

TEST_CASE("AC of an RC low-pass matches the analytic gain", "[ac]") {
    const auto c = StochasticCircuit::from_file(doc("rc_uniform.cir"));
    const auto freqs = c.netlist().ac->frequencies();
    const auto ac = ac_solve(c, 0, freqs);
    const Eigen::Index out = c.state_index("out");
    for (std::size_t i = 0; i < freqs.size(); ++i) {
        const double wrc = 2.0 * std::numbers::pi * freqs[i] * 1000.0 * 159e-9;
        CHECK(std::abs(std::abs(ac.coeffs[i](out, 0)) - 1.0 / std::sqrt(1.0 + wrc * wrc)) < 1e-10);
    }
}

TEST_CASE("AC gain distribution from the expansion matches the analytic gain", "[ac]") {
    const auto c = StochasticCircuit::from_file(doc("rc_uniform.cir"));
    const double f = 1e3;
    const int p = 5;
    const auto ac = ac_solve(c, p, {f});
    const GpcBasisSet basis(c.germs(), p);
    const Eigen::VectorXcd row = ac.coeffs[0].row(c.state_index("out")).transpose();
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> from_gpc, analytic;
    for (int s = 0; s < 100000; ++s) {
        Eigen::VectorXd xi(1);
        xi(0) = u(rng);
        from_gpc.push_back(ac_magnitude(basis, row, xi));
        const double R = 800.0 + 400.0 * (u(rng) + 1.0) / 2.0;
        const double wrc = 2.0 * std::numbers::pi * f * R * 159e-9;
        analytic.push_back(1.0 / std::sqrt(1.0 + wrc * wrc));
    }
    CHECK(oracle::ks_distance(from_gpc, analytic) < 0.02);
}
