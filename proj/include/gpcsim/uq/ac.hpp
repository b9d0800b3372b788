#pragma once

// Stochastic small-signal analysis. Each testing node is linearized at its
// reconstructed DC point and solved per frequency; the nodal phasors map to
// complex gPC coefficients through Phi^{-1}, real and imaginary parts alike.

#include "gpcsim/uq/stochastic_testing.hpp"

#include <complex>
#include <numbers>

namespace gpcsim {

struct AcTrajectory {
    std::vector<std::string> state_names;
    std::vector<Distribution> germs;
    int order = 0;
    std::vector<MultiIndex> indices;
    std::vector<double> frequencies;
    std::vector<Eigen::MatrixXcd> coeffs;  // n x K per frequency
    TestingNodeSet nodes;
    RunStats stats;
};

/// AC coefficients around a stochastic DC solution computed by st_solve.
inline AcTrajectory ac_solve(const StochasticCircuit& c, const GpcTrajectory& dc, const std::vector<double>& freqs) {
    if (!dc.nodes || dc.coeffs.empty()) throw DomainError("AC analysis needs a stochastic-testing DC solution");
    const detail::Stopwatch clock;
    const TestingNodeSet& nodes = *dc.nodes;
    const auto K = static_cast<Eigen::Index>(nodes.size());
    const Eigen::Index n = c.size();
    const Eigen::MatrixXd Y = dc.coeffs.front() * nodes.phi.transpose();
    const Eigen::VectorXcd b = c.ac_excitation().cast<std::complex<double>>();

    AcTrajectory out;
    out.state_names = c.state_names();
    out.germs = dc.germs;
    out.order = dc.order;
    out.indices = dc.indices;
    out.frequencies = freqs;
    out.nodes = nodes;
    out.coeffs.assign(freqs.size(), Eigen::MatrixXcd(n, K));

    std::vector<Eigen::MatrixXcd> nodal(freqs.size(), Eigen::MatrixXcd(n, K));
    CircuitEval e;
    for (Eigen::Index m = 0; m < K; ++m) {
        c.evaluate(Y.col(m), nodes.nodes[static_cast<std::size_t>(m)], e, true);
        for (std::size_t fi = 0; fi < freqs.size(); ++fi) {
            const double omega = 2.0 * std::numbers::pi * freqs[fi];
            const Eigen::MatrixXcd A = e.df.cast<std::complex<double>>() + std::complex<double>(0.0, omega) * e.dq;
            const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(A);
            const Eigen::VectorXd piv = lu.matrixLU().diagonal().cwiseAbs();
            if (!(piv.minCoeff() > 1e-24 * piv.maxCoeff()) || !(lu.rcond() > 1e-16))
                throw SingularMatrixError("small-signal matrix is singular at testing node " + std::to_string(m) +
                                              ", omega=" + std::to_string(omega),
                                          lu.rcond() > 0 ? 1.0 / lu.rcond() : std::numeric_limits<double>::infinity());
            nodal[fi].col(m) = lu.solve(b);
        }
    }
    const Eigen::MatrixXd phi_inv_t = nodes.phi_inv.transpose();
    for (std::size_t fi = 0; fi < freqs.size(); ++fi) {
        out.coeffs[fi].real() = nodal[fi].real() * phi_inv_t;
        out.coeffs[fi].imag() = nodal[fi].imag() * phi_inv_t;
    }
    out.stats = dc.stats;
    out.stats.method = "ST";
    out.stats.wall_seconds += clock.seconds();
    return out;
}

inline AcTrajectory ac_solve(const StochasticCircuit& c, int order, const std::vector<double>& freqs,
                             const SolverOptions& o = {}) {
    return ac_solve(c, st_solve(c, order, Analysis::dc(), o), freqs);
}

/// Magnitude of a complex expansion at germ xi.
inline double ac_magnitude(const GpcBasisSet& basis, const Eigen::VectorXcd& row, const Eigen::VectorXd& xi) {
    return std::abs((row.array() * basis.eval(xi).cast<std::complex<double>>().array()).sum());
}

} // namespace gpcsim
