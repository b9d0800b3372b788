#include <catch_amalgamated.hpp>

#include "gpcsim/gpc_basis.hpp"
#include "gpcsim/quadrature.hpp"
#include "oracles.hpp"

#include <random>
#include <set>

using namespace gpcsim;
using Catch::Approx;

namespace {

std::vector<Distribution> all_families() {
    return {Distribution::gaussian(), Distribution::uniform(), Distribution::gamma(1.0), Distribution::gamma(2.5),
            Distribution::beta(2.0, 3.0), Distribution::beta(0.5, 1.5)};
}

} // namespace

TEST_CASE("num_basis reproduces the basis counts", "[gpc_basis]") {
    CHECK(num_basis(3, 4) == 35);
    CHECK(num_basis(3, 3) == 20);
    CHECK(num_basis(0, 7) == 1);
    const std::size_t l4[] = {5, 15, 35, 70, 126, 210};
    for (int p = 1; p <= 6; ++p) CHECK(num_basis(p, 4) == l4[p - 1]);
    CHECK_THROWS_AS(num_basis(-1, 2), DomainError);
    CHECK_THROWS_AS(num_basis(2, 0), DomainError);
    CHECK_THROWS_AS(num_basis(2000, 2000), OverflowError);
}

TEST_CASE("index set is graded lexicographic", "[gpc_basis]") {
    const auto s12 = build_index_set(1, 2);
    REQUIRE(s12.size() == 3);
    CHECK(s12[0] == MultiIndex{0, 0});
    CHECK(s12[1] == MultiIndex{0, 1});
    CHECK(s12[2] == MultiIndex{1, 0});

    const auto s21 = build_index_set(2, 1);
    CHECK(s21 == std::vector<MultiIndex>{{0}, {1}, {2}});

    // Enumerate-and-filter oracle over {0..3}^4.
    std::set<MultiIndex> expected;
    for (int a = 0; a <= 3; ++a)
        for (int b = 0; b <= 3; ++b)
            for (int c = 0; c <= 3; ++c)
                for (int d = 0; d <= 3; ++d)
                    if (a + b + c + d <= 3) expected.insert({a, b, c, d});
    const auto s34 = build_index_set(3, 4);
    REQUIRE(s34.size() == 35);
    CHECK(std::set<MultiIndex>(s34.begin(), s34.end()) == expected);
    for (std::size_t k = 1; k < s34.size(); ++k) {
        const int t0 = total_degree(s34[k - 1]), t1 = total_degree(s34[k]);
        CHECK((t0 < t1 || (t0 == t1 && s34[k - 1] < s34[k])));
    }
    CHECK(build_index_set(3, 4) == s34);
}

TEST_CASE("recurrences match moment-based Gram-Schmidt", "[gpc_basis]") {
    for (const auto& d : all_families()) {
        const auto rec = univariate_recurrence(d, 6);
        const auto gs = oracle::gram_schmidt_recurrence(d, 6);
        for (int j = 0; j <= 6; ++j) {
            INFO(family_name(d.kind) << " j=" << j);
            CHECK(rec.a[j] == Approx(static_cast<double>(gs.a[j])).epsilon(1e-9).margin(1e-12));
            CHECK(rec.b[j] == Approx(static_cast<double>(gs.b[j])).epsilon(1e-9).margin(1e-12));
        }
    }
    const auto herm = univariate_recurrence(Distribution::gaussian(), 4);
    for (int j = 1; j <= 4; ++j) CHECK(herm.b[j] == j);
    const auto leg = univariate_recurrence(Distribution::uniform(), 2);
    CHECK(leg.b[1] == Approx(1.0 / 3.0));
    const auto lag = univariate_recurrence(Distribution::gamma(1.0), 4);
    for (int j = 0; j <= 4; ++j) {
        CHECK(lag.a[j] == 2 * j + 1);
        if (j > 0) CHECK(lag.b[j] == j * j);
    }
    CHECK_THROWS_AS(Distribution::gamma(0.0), DomainError);
    CHECK_THROWS_AS(Distribution::beta(1.0, -1.0), DomainError);
    CHECK_THROWS_AS(univariate_recurrence(Distribution::gaussian(), -1), DomainError);
}

TEST_CASE("pdfs integrate to one", "[gpc_basis]") {
    for (const auto& d : {Distribution::gaussian(), Distribution::uniform(), Distribution::gamma(2.5),
                          Distribution::beta(2.0, 3.0)}) {
        INFO(family_name(d.kind));
        CHECK(static_cast<double>(oracle::panel_moment(d, 0)) == Approx(1.0).margin(1e-10));
    }
}

TEST_CASE("eval_basis values", "[gpc_basis]") {
    GpcBasisSet g1({Distribution::gaussian()}, 3);
    Eigen::VectorXd xi(1);
    xi << 2.0;
    auto h = g1.eval(xi);
    CHECK(h(0) == 1.0);
    CHECK(h(1) == Approx(2.0));
    CHECK(h(1) == Approx(oracle::gram_schmidt_phi(Distribution::gaussian(), 1, 2.0)));
    xi << 1.0;
    h = g1.eval(xi);
    CHECK(h(2) == Approx(0.0).margin(1e-15));
    CHECK(oracle::gram_schmidt_phi(Distribution::gaussian(), 2, 1.0) == Approx(0.0).margin(1e-14));

    GpcBasisSet u({Distribution::uniform()}, 2);
    Eigen::VectorXd out(1);
    out << 1.5;
    CHECK_THROWS_AS(u.eval(out), DomainError);
}

TEST_CASE("product structure and gradients", "[gpc_basis]") {
    const std::vector<Distribution> params{Distribution::gaussian(), Distribution::beta(2.0, 3.0),
                                           Distribution::gamma(2.0)};
    GpcBasisSet basis(params, 4);
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::VectorXd xi(3);
        for (int d = 0; d < 3; ++d) xi(d) = params[d].sample(rng);
        const auto h = basis.eval(xi);
        CHECK(h(0) == 1.0);
        for (std::size_t k = 0; k < basis.size(); ++k) {
            double prod = 1.0;
            for (int d = 0; d < 3; ++d) prod *= oracle::gram_schmidt_phi(params[d], basis.indices()[k][d], xi(d));
            CHECK(h(k) == Approx(prod).epsilon(1e-9).margin(1e-12));
        }
        const auto g = basis.gradient(xi);
        for (int d = 0; d < 3; ++d) {
            const double step = 1e-6;
            Eigen::VectorXd xp = xi, xm = xi;
            xp(d) += step;
            xm(d) -= step;
            const Eigen::VectorXd fd = (basis.eval(xp) - basis.eval(xm)) / (2 * step);
            CHECK((fd - g.col(d)).cwiseAbs().maxCoeff() < 1e-6 * (1.0 + g.col(d).cwiseAbs().maxCoeff()));
        }
    }
}

TEST_CASE("orthonormality under (p+1)-point tensor quadrature", "[gpc_basis]") {
    for (const auto& d : all_families()) {
        for (int p = 0; p <= 6; ++p) {
            GpcBasisSet basis({d, Distribution::uniform()}, p);
            const auto grid = TensorGrid::for_basis(basis);
            Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(basis.size(), basis.size());
            for (std::size_t j = 0; j < grid.size(); ++j) {
                const auto h = basis.eval(grid.node(j));
                gram += grid.weight(j) * h * h.transpose();
            }
            INFO(family_name(d.kind) << " p=" << p);
            CHECK((gram - Eigen::MatrixXd::Identity(basis.size(), basis.size())).cwiseAbs().maxCoeff() < 1e-8);
        }
    }
}

TEST_CASE("moments from coefficients", "[gpc_basis]") {
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(2, 4);
    c(0, 0) = 3.0;
    c(1, 0) = -1.0;
    auto m = moments_from_coeffs(c);
    CHECK(m.mean(0) == 3.0);
    CHECK(m.std(0) == 0.0);

    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(1, 4);
    x(0, 1) = 1.0;
    m = moments_from_coeffs(x);
    CHECK(m.mean(0) == 0.0);
    CHECK(m.std(0) == 1.0);

    // Sampling oracle: 10^6 draws of a random expansion.
    const std::vector<Distribution> params{Distribution::gaussian(), Distribution::beta(2.0, 2.0)};
    GpcBasisSet basis(params, 2);
    std::mt19937_64 rng(2024);
    Eigen::MatrixXd coeffs(1, basis.size());
    std::normal_distribution<double> nd(0.0, 0.5);
    for (Eigen::Index k = 0; k < coeffs.cols(); ++k) coeffs(0, k) = nd(rng);
    m = moments_from_coeffs(coeffs);
    const int N = 1'000'000;
    double s = 0.0, s2 = 0.0;
    Eigen::VectorXd xi(2);
    for (int i = 0; i < N; ++i) {
        xi << params[0].sample(rng), params[1].sample(rng);
        const double v = coeffs.row(0).dot(basis.eval(xi));
        s += v;
        s2 += v * v;
    }
    const double mean = s / N;
    const double sd = std::sqrt(s2 / N - mean * mean);
    CHECK(std::abs(mean - m.mean(0)) < 3.0 * m.std(0) / std::sqrt(double(N)));
    // Standard error of the sample std is about sd / sqrt(2N) for near-Gaussian tails; allow 3x that
    // with a kurtosis margin.
    CHECK(std::abs(sd - m.std(0)) < 3.0 * 2.0 * m.std(0) / std::sqrt(2.0 * N));
}

TEST_CASE("random parameter affine map", "[gpc_basis]") {
    RandomParameter r("R1", Distribution::uniform(), 1000.0, 200.0);
    CHECK(r.physical(-1.0) == 800.0);
    CHECK(r.physical(1.0) == 1200.0);
    CHECK(r.physical_mean() == 1000.0);
    RandomParameter t("T", Distribution::beta(2.0, 3.0), 10.0, 50.0);
    std::mt19937_64 rng(1);
    double s = 0.0;
    const int N = 200000;
    for (int i = 0; i < N; ++i) s += t.physical(t.dist.sample(rng));
    CHECK(s / N == Approx(t.physical_mean()).margin(4.0 * t.physical_std() / std::sqrt(double(N))));
    CHECK_THROWS_AS(RandomParameter("x", Distribution::gaussian(), 0.0, 0.0), DomainError);
}
