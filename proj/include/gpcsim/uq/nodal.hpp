#pragma once

// The circuit at one fixed germ value, as a deterministic DAE.

#include "gpcsim/circuit/circuit.hpp"
#include "gpcsim/engine.hpp"
#include "gpcsim/uq/types.hpp"

#include <exception>
#include <optional>

namespace gpcsim {

class NodalProblem final : public DaeProblem {
public:
    NodalProblem(const StochasticCircuit& c, Eigen::VectorXd xi) : c_(c), xi_(std::move(xi)) { c_.check_germ(xi_); }

    Eigen::Index size() const override { return c_.size(); }

    void evaluate(const Eigen::VectorXd& X, Eigen::VectorXd& Q, Eigen::VectorXd& F) const override {
        CircuitEval e;
        c_.evaluate(X, xi_, e, false);
        Q = std::move(e.q);
        F = std::move(e.f);
    }

    std::unique_ptr<LinearSolve> linearize(const Eigen::VectorXd& X, double alpha) const override {
        CircuitEval e;
        c_.evaluate(X, xi_, e, true);
        return std::make_unique<DenseLinearSolve>(alpha * e.dq + e.df);
    }

    Eigen::VectorXd excitation(double t) const override { return c_.excitation(t); }
    Eigen::VectorXd dc_excitation() const override { return c_.dc_excitation(); }
    std::vector<double> breakpoints(double t0, double t1) const override { return c_.breakpoints(t0, t1); }

    const Eigen::VectorXd& germ() const { return xi_; }

private:
    const StochasticCircuit& c_;
    Eigen::VectorXd xi_;
};

/// One deterministic run of the circuit at germ xi. Transients run on the
/// grid dictated by ctl (a fixed step gives a uniform grid).
struct NodalRun {
    std::vector<double> times;
    std::vector<Eigen::VectorXd> x;
    std::vector<double> lte;
    long newton_iterations = 0;
    long accepted = 0;
    long rejected = 0;
};

inline NodalRun run_nodal(const StochasticCircuit& circuit, const Eigen::VectorXd& xi, const Analysis& a,
                          const NewtonConfig& newton, const StepControl& ctl) {
    StochasticCircuit c = circuit;
    NodalProblem p(c, xi);
    NodalRun out;
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(c.size());
    switch (a.kind) {
    case AnalysisKind::Dc: {
        auto r = dc_solve(p, zero, p.dc_excitation(), newton);
        out.times = {0.0};
        out.x = {std::move(r.x)};
        out.newton_iterations = r.newton_iterations;
        break;
    }
    case AnalysisKind::DcSweep: {
        const int src = c.source_index(a.sweep.source);
        Eigen::VectorXd guess = zero;
        for (double v : a.sweep.values()) {
            c.set_source_dc(src, v);
            auto r = dc_solve(p, guess, p.dc_excitation(), newton);
            out.newton_iterations += r.newton_iterations;
            guess = r.x;
            out.times.push_back(v);
            out.x.push_back(std::move(r.x));
        }
        break;
    }
    case AnalysisKind::Tran: {
        auto dc = dc_solve(p, zero, p.excitation(0.0), newton);
        out.newton_iterations = dc.newton_iterations;
        auto r = transient_solve(p, 0.0, a.tstop, dc.x, ctl, newton);
        out.times = std::move(r.t);
        out.x = std::move(r.x);
        out.lte = std::move(r.lte);
        out.newton_iterations += r.stats.newton_iterations;
        out.accepted = r.stats.accepted;
        out.rejected = r.stats.rejected;
        break;
    }
    }
    return out;
}

struct NodalBatch {
    std::vector<std::optional<NodalRun>> runs;   // empty where the run failed
    std::vector<std::exception_ptr> errors;      // set where the run failed
    long failed = 0;
};

/// Independent runs at each germ on up to `jobs` threads. Results are stored
/// by index, so the outcome does not depend on scheduling.
inline NodalBatch run_nodal_batch(const StochasticCircuit& c, const std::vector<Eigen::VectorXd>& germs,
                                  const Analysis& a, const NewtonConfig& newton, const StepControl& ctl, int jobs) {
    NodalBatch out;
    out.runs.resize(germs.size());
    out.errors.resize(germs.size());
    detail::parallel_for(germs.size(), jobs, [&](std::size_t s) {
        try {
            out.runs[s] = run_nodal(c, germs[s], a, newton, ctl);
        } catch (const Error&) {
            out.errors[s] = std::current_exception();
        }
    });
    for (const auto& e : out.errors)
        if (e) ++out.failed;
    return out;
}

/// Step control for the shared SC/MC grid.
inline StepControl fixed_grid_control(const Analysis& a, const SolverOptions& o) {
    StepControl ctl = o.step;
    ctl.fixed_step = o.h_fixed ? *o.h_fixed : a.tstop / 2000.0;
    return ctl;
}

} // namespace gpcsim
