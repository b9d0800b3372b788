#include <catch_amalgamated.hpp>

#include "gpcsim/quadrature.hpp"
#include "oracles.hpp"

#include <cmath>

using namespace gpcsim;
using Catch::Approx;

namespace {

/// Weights w_1, w_2 and nodes x_1 < x_2 of a two-point rule exact for degree <= 3
/// solve sum w x^k = m_k, k = 0..3. Nodes are the roots of the degree-2 orthogonal
/// polynomial x^2 - c1 x - c0 where [m0 m1; m1 m2][c0; c1] = [m2; m3].
std::pair<std::array<double, 2>, std::array<double, 2>> two_point_moment_rule(const Distribution& d) {
    const double m0 = double(oracle::raw_moment(d, 0)), m1 = double(oracle::raw_moment(d, 1));
    const double m2 = double(oracle::raw_moment(d, 2)), m3 = double(oracle::raw_moment(d, 3));
    const double det = m0 * m2 - m1 * m1;
    const double c0 = (m2 * m2 - m1 * m3) / det;
    const double c1 = (m0 * m3 - m1 * m2) / det;
    const double disc = std::sqrt(c1 * c1 + 4 * c0);
    const double x1 = (c1 - disc) / 2, x2 = (c1 + disc) / 2;
    const double w2 = (m1 - x1 * m0) / (x2 - x1);
    return {{x1, x2}, {m0 - w2, w2}};
}

} // namespace

TEST_CASE("two-point rules match the moment-matching oracle", "[quadrature]") {
    for (const auto& d : {Distribution::gaussian(), Distribution::uniform(), Distribution::gamma(1.0),
                          Distribution::beta(2.0, 3.0)}) {
        const auto rule = gauss_rule(d, 2);
        const auto [x, w] = two_point_moment_rule(d);
        INFO(family_name(d.kind));
        CHECK(rule.nodes[0] == Approx(x[0]).margin(1e-13));
        CHECK(rule.nodes[1] == Approx(x[1]).margin(1e-13));
        CHECK(rule.weights[0] == Approx(w[0]).margin(1e-13));
        CHECK(rule.weights[1] == Approx(w[1]).margin(1e-13));
    }
    const auto g = gauss_rule(Distribution::gaussian(), 2);
    CHECK(g.nodes[0] == Approx(-1.0));
    CHECK(g.nodes[1] == Approx(1.0));
    CHECK(g.weights[0] == Approx(0.5));
    const auto u = gauss_rule(Distribution::uniform(), 2);
    CHECK(u.nodes[1] == Approx(1.0 / std::sqrt(3.0)));
    const auto l = gauss_rule(Distribution::gamma(1.0), 2);
    CHECK(l.nodes[0] == Approx(2.0 - std::sqrt(2.0)));
    CHECK(l.nodes[1] == Approx(2.0 + std::sqrt(2.0)));
    CHECK(l.weights[0] == Approx((2.0 + std::sqrt(2.0)) / 4.0));
    CHECK(l.weights[1] == Approx((2.0 - std::sqrt(2.0)) / 4.0));
    CHECK_THROWS_AS(gauss_rule(Distribution::gaussian(), 0), DomainError);
}

TEST_CASE("rule weights sum to one and integrate moments exactly", "[quadrature]") {
    for (const auto& d : {Distribution::gaussian(), Distribution::uniform(), Distribution::gamma(2.5),
                          Distribution::beta(2.0, 3.0), Distribution::beta(0.5, 0.7)}) {
        for (int n = 1; n <= 8; ++n) {
            const auto rule = gauss_rule(d, n);
            double sw = 0.0;
            for (double w : rule.weights) {
                CHECK(w > 0.0);
                sw += w;
            }
            CHECK(sw == Approx(1.0).margin(1e-12));
            for (int k = 0; k <= 2 * n - 1; ++k) {
                double q = 0.0;
                for (int j = 0; j < n; ++j) q += rule.weights[j] * std::pow(rule.nodes[j], k);
                const double exact = double(oracle::raw_moment(d, k));
                const double scale = std::max(std::abs(exact), double(oracle::raw_moment(d, k + (k % 2))));
                INFO(family_name(d.kind) << " n=" << n << " k=" << k);
                CHECK(std::abs(q - exact) <= 1e-10 * std::max(1.0, scale));
            }
        }
    }
}

TEST_CASE("tensor grid sizes and index bookkeeping", "[quadrature]") {
    const auto g16 = TensorGrid::with_points({Distribution::gaussian(), Distribution::gaussian()}, 4);
    CHECK(g16.size() == 16);
    const auto g64 = TensorGrid::with_points(std::vector<Distribution>(3, Distribution::uniform()), 4);
    CHECK(g64.size() == 64);
    const auto g256 = TensorGrid::with_points(
        {Distribution::gaussian(), Distribution::beta(2, 3), Distribution::gamma(2), Distribution::uniform()}, 4);
    CHECK(g256.size() == 256);

    for (std::size_t j = 0; j < g256.size(); ++j) {
        const auto col = g256.index_column(j);
        // One-based radix-n relation: 1 + sum_k n^(k-1) (I(k,j) - 1) = j (one-based j).
        std::size_t lhs = 1, stride = 1;
        double w = 1.0;
        for (int k = 0; k < 4; ++k) {
            lhs += stride * col[k];
            stride *= 4;
            w *= g256.rule(k).weights[col[k]];
        }
        CHECK(lhs == j + 1);
        CHECK(g256.linear_index(col) == j);
        CHECK(g256.weight(j) == w);
        CHECK(g256.weight(j) > 0.0);
    }
    CHECK_THROWS_AS(g256.materialize(100), BudgetError);
    CHECK(g256.materialize().cols() == 256);
    std::vector<QuadratureRule1D> mixed{gauss_rule(Distribution::gaussian(), 2), gauss_rule(Distribution::gaussian(), 3)};
    CHECK_THROWS_AS(TensorGrid(mixed), DomainError);
}

TEST_CASE("integrate over tensor grids", "[quadrature]") {
    const auto g = TensorGrid::with_points({Distribution::gaussian(), Distribution::gaussian()}, 3);
    auto one = integrate(g, [](const Eigen::VectorXd&) { return Eigen::VectorXd::Ones(1); });
    CHECK(one(0) == Approx(1.0).margin(1e-14));
    auto m = integrate(g, [](const Eigen::VectorXd& x) {
        Eigen::VectorXd v(1);
        v << x(0) * x(0) * x(1) * x(1);
        return v;
    });
    CHECK(m(0) == Approx(1.0).margin(1e-12));

    GpcBasisSet basis({Distribution::gamma(2.0), Distribution::beta(2.0, 2.0)}, 3);
    const auto grid = TensorGrid::for_basis(basis);
    for (std::size_t i = 0; i < basis.size(); ++i)
        for (std::size_t j = i + 1; j < basis.size(); ++j) {
            auto v = integrate(grid, [&](const Eigen::VectorXd& x) {
                const auto h = basis.eval(x);
                return Eigen::VectorXd::Constant(1, h(i) * h(j));
            });
            CHECK(std::abs(v(0)) < 1e-10);
        }
    CHECK_THROWS_AS(integrate(g, [](const Eigen::VectorXd&) -> Eigen::VectorXd { throw std::runtime_error("x"); }),
                    Error);
}
