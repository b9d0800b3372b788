#pragma once

// Analysis driver shared by the intrusive methods. Both unknown vectors are
// X = vec(Xmat) with Xmat n x K, column k the coefficient of H_k.

#include "gpcsim/uq/nodal.hpp"
#include "gpcsim/uq/types.hpp"

#include <memory>
#include <string>

namespace gpcsim {

/// Stacked problem with timing counters for its linear algebra.
class IntrusiveProblem : public DaeProblem {
public:
    IntrusiveProblem(const StochasticCircuit& c, std::size_t K) : c_(c), n_(c.size()), K_(static_cast<Eigen::Index>(K)) {}

    Eigen::Index size() const override { return n_ * K_; }
    Eigen::Index num_states() const { return n_; }
    Eigen::Index basis_size() const { return K_; }
    std::vector<double> breakpoints(double t0, double t1) const override { return c_.breakpoints(t0, t1); }

    /// Every coefficient of state i is measured against the norm of row i.
    Eigen::VectorXd error_scale(const Eigen::VectorXd& X) const override {
        const Eigen::Map<const Eigen::MatrixXd> Xm(X.data(), n_, K_);
        const Eigen::VectorXd row = Xm.rowwise().norm();
        Eigen::VectorXd s(size());
        for (Eigen::Index k = 0; k < K_; ++k) s.segment(k * n_, n_) = row;
        return s;
    }

    /// Coefficient vector with x in the mean block and zeros elsewhere.
    Eigen::VectorXd lift(const Eigen::VectorXd& x) const {
        Eigen::VectorXd X = Eigen::VectorXd::Zero(size());
        X.head(n_) = x;
        return X;
    }

    double linear_seconds() const { return linear_seconds_; }
    long factorizations() const { return factorizations_; }

protected:
    const StochasticCircuit& c_;
    Eigen::Index n_, K_;
    mutable double linear_seconds_ = 0.0;
    mutable long factorizations_ = 0;
};

namespace detail {

/// Runs analysis `a` on the stacked problem built by make(circuit). The
/// initial guess is the nominal DC point in the mean block.
template <class Make>
GpcTrajectory intrusive_solve(const std::string& method, const StochasticCircuit& circuit, const GpcBasisSet& basis,
                              const Analysis& a, const SolverOptions& o, Make&& make) {
    const Stopwatch clock;
    StochasticCircuit c = circuit;
    auto prob = make(c);
    const NodalProblem nominal(c, c.germ_mean());
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(c.size());
    auto nominal_dc = [&](const Eigen::VectorXd& b, const Eigen::VectorXd& guess) -> Eigen::VectorXd {
        try {
            return dc_solve(nominal, guess, b, o.newton).x;
        } catch (const Error&) {
            return guess;
        }
    };

    GpcTrajectory out;
    out.kind = a.kind;
    out.state_names = c.state_names();
    out.germs = basis.params();
    out.order = basis.order();
    out.indices = basis.indices();
    const Eigen::Index n = c.size(), K = static_cast<Eigen::Index>(basis.size());
    auto record = [&](double t, const Eigen::VectorXd& X, double lte) {
        out.times.push_back(t);
        out.coeffs.emplace_back(Eigen::Map<const Eigen::MatrixXd>(X.data(), n, K));
        out.lte.push_back(lte);
    };

    tagged(method, [&] {
        switch (a.kind) {
        case AnalysisKind::Dc: {
            auto r = dc_solve(*prob, prob->lift(nominal_dc(c.dc_excitation(), zero)), prob->dc_excitation(), o.newton);
            out.stats.newton_iterations += r.newton_iterations;
            record(0.0, r.x, 0.0);
            break;
        }
        case AnalysisKind::DcSweep: {
            const int src = c.source_index(a.sweep.source);
            Eigen::VectorXd guess;
            for (double v : a.sweep.values()) {
                c.set_source_dc(src, v);
                if (guess.size() == 0) guess = prob->lift(nominal_dc(c.dc_excitation(), zero));
                auto r = dc_solve(*prob, guess, prob->dc_excitation(), o.newton);
                out.stats.newton_iterations += r.newton_iterations;
                guess = r.x;
                record(v, r.x, 0.0);
            }
            break;
        }
        case AnalysisKind::Tran: {
            auto dc = dc_solve(*prob, prob->lift(nominal_dc(c.excitation(0.0), zero)), prob->excitation(0.0), o.newton);
            out.stats.newton_iterations += dc.newton_iterations;
            TransientIntegrator it(*prob, 0.0, a.tstop, dc.x, o.step, o.newton);
            record(0.0, dc.x, 0.0);
            while (!it.done()) {
                const double err = it.step().first;
                record(it.time(), it.current(), err);
            }
            out.stats.newton_iterations += it.state().stats.newton_iterations;
            out.stats.accepted_steps = it.state().stats.accepted;
            out.stats.rejected_steps = it.state().stats.rejected;
            break;
        }
        }
        return 0;
    });

    out.stats.method = method;
    out.stats.order = basis.order();
    out.stats.dimension = basis.dimension();
    out.stats.basis_size = basis.size();
    out.stats.factorizations = prob->factorizations();
    out.stats.linear_solve_seconds = prob->linear_seconds();
    out.stats.wall_seconds = clock.seconds();
    return out;
}

} // namespace detail

} // namespace gpcsim
