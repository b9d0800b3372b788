#pragma once

// Stochastic collocation on the (p+1)^l tensor Gauss grid: one deterministic
// run per quadrature node on a shared time grid, then the projection
// x_j(t) = sum_s w_s H_j(xi_s) x(t, xi_s).

#include "gpcsim/quadrature.hpp"
#include "gpcsim/uq/nodal.hpp"

#include <sstream>

namespace gpcsim {

namespace detail {

inline std::string format_germ(const Eigen::VectorXd& xi) {
    std::ostringstream os;
    os.precision(6);
    os << "xi=(";
    for (Eigen::Index d = 0; d < xi.size(); ++d) os << (d ? ", " : "") << xi(d);
    os << ")";
    return os.str();
}

/// Rethrow a stored run failure with a prefix, keeping its type.
[[noreturn]] inline void rethrow_prefixed(const std::exception_ptr& e, const std::string& prefix) {
    try {
        std::rethrow_exception(e);
    } catch (const DcFailure& x) {
        throw DcFailure(prefix + x.what(), x.residual_norm);
    } catch (const TransientFailure& x) {
        throw TransientFailure(prefix + x.what(), x.time);
    } catch (const Error& x) {
        throw Error(prefix + x.what());
    }
}

} // namespace detail

inline GpcTrajectory sc_solve(const StochasticCircuit& circuit, const GpcBasisSet& basis, const Analysis& a,
                              const SolverOptions& o = {}) {
    const detail::Stopwatch clock;
    const TensorGrid grid = TensorGrid::for_basis(basis);
    const Eigen::MatrixXd points = grid.materialize(o.selection.budget);
    const std::vector<double> w = grid.weights(o.selection.budget);
    std::vector<Eigen::VectorXd> germs;
    for (Eigen::Index s = 0; s < points.cols(); ++s) germs.emplace_back(points.col(s));

    const StepControl ctl = a.kind == AnalysisKind::Tran ? fixed_grid_control(a, o) : o.step;
    auto batch = run_nodal_batch(circuit, germs, a, o.newton, ctl, o.jobs);
    for (std::size_t s = 0; s < germs.size(); ++s)
        if (batch.errors[s])
            detail::rethrow_prefixed(batch.errors[s], "SC: run at " + detail::format_germ(germs[s]) + ": ");

    GpcTrajectory out;
    out.kind = a.kind;
    out.state_names = circuit.state_names();
    out.germs = basis.params();
    out.order = basis.order();
    out.indices = basis.indices();
    const auto& first = *batch.runs.front();
    out.times = first.times;
    const Eigen::Index n = circuit.size(), K = static_cast<Eigen::Index>(basis.size());
    out.coeffs.assign(out.times.size(), Eigen::MatrixXd::Zero(n, K));
    out.lte.assign(out.times.size(), 0.0);
    for (std::size_t s = 0; s < germs.size(); ++s) {
        const auto& run = *batch.runs[s];
        if (run.times.size() != out.times.size())
            throw NumericalError("SC runs do not share one time grid");
        const Eigen::RowVectorXd wh = w[s] * basis.eval(germs[s]).transpose();
        for (std::size_t t = 0; t < run.times.size(); ++t) {
            out.coeffs[t].noalias() += run.x[t] * wh;
            if (!run.lte.empty()) out.lte[t] = std::max(out.lte[t], run.lte[t]);
        }
        out.stats.newton_iterations += run.newton_iterations;
    }
    out.stats.method = "SC";
    out.stats.order = basis.order();
    out.stats.dimension = basis.dimension();
    out.stats.basis_size = basis.size();
    out.stats.node_count = germs.size();
    out.stats.samples = static_cast<long>(germs.size());
    out.stats.accepted_steps = first.accepted;
    out.stats.rejected_steps = first.rejected;
    out.stats.wall_seconds = clock.seconds();
    return out;
}

inline GpcTrajectory sc_solve(const StochasticCircuit& circuit, int order, const Analysis& a,
                              const SolverOptions& o = {}) {
    return sc_solve(circuit, GpcBasisSet(circuit.germs(), order), a, o);
}

} // namespace gpcsim
