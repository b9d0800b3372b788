#pragma once

// Stochastic Galerkin: the residual is made orthogonal to every basis
// function, with inner products from the (p+1)-point tensor rule. Block k1 of
// the stacked system is sum_q w_q H_k1(xi_q) r(x(xi_q), xi_q); the Jacobian
// couples all blocks and is factored densely.

#include "gpcsim/quadrature.hpp"
#include "gpcsim/uq/intrusive.hpp"

namespace gpcsim {

class SgProblem final : public IntrusiveProblem {
public:
    SgProblem(const StochasticCircuit& c, const GpcBasisSet& basis, std::size_t budget = TensorGrid::default_budget)
        : IntrusiveProblem(c, basis.size()) {
        const TensorGrid grid = TensorGrid::for_basis(basis);
        const auto points = grid.materialize(budget);
        w_ = Eigen::Map<const Eigen::VectorXd>(grid.weights(budget).data(), static_cast<Eigen::Index>(grid.size()));
        H_.resize(static_cast<Eigen::Index>(grid.size()), K_);
        for (Eigen::Index q = 0; q < points.cols(); ++q) {
            xi_.push_back(points.col(q));
            H_.row(q) = basis.eval(xi_.back()).transpose();
        }
        wH_ = w_.asDiagonal() * H_;
        b_weights_ = wH_.colwise().sum().transpose();
    }

    std::size_t quadrature_points() const { return xi_.size(); }

    void evaluate(const Eigen::VectorXd& X, Eigen::VectorXd& Q, Eigen::VectorXd& F) const override {
        const Eigen::MatrixXd Y = Eigen::Map<const Eigen::MatrixXd>(X.data(), n_, K_) * H_.transpose();
        Eigen::MatrixXd qm(n_, Y.cols()), fm(n_, Y.cols());
        CircuitEval e;
        for (Eigen::Index q = 0; q < Y.cols(); ++q) {
            c_.evaluate(Y.col(q), xi_[static_cast<std::size_t>(q)], e, false);
            qm.col(q) = e.q;
            fm.col(q) = e.f;
        }
        const Eigen::MatrixXd Qm = qm * wH_, Fm = fm * wH_;
        Q = Eigen::Map<const Eigen::VectorXd>(Qm.data(), Qm.size());
        F = Eigen::Map<const Eigen::VectorXd>(Fm.data(), Fm.size());
    }

    /// Dense J with blocks J_{k1,k2} = sum_q w_q H_k1 H_k2 (alpha dq + df)(xi_q).
    Eigen::MatrixXd coupled_jacobian(const Eigen::VectorXd& X, double alpha) const {
        const Eigen::MatrixXd Y = Eigen::Map<const Eigen::MatrixXd>(X.data(), n_, K_) * H_.transpose();
        Eigen::MatrixXd J = Eigen::MatrixXd::Zero(size(), size());
        CircuitEval e;
        for (Eigen::Index q = 0; q < Y.cols(); ++q) {
            c_.evaluate(Y.col(q), xi_[static_cast<std::size_t>(q)], e, true);
            const Eigen::MatrixXd Jq = alpha * e.dq + e.df;
            for (Eigen::Index k2 = 0; k2 < K_; ++k2)
                for (Eigen::Index k1 = 0; k1 < K_; ++k1)
                    J.block(k1 * n_, k2 * n_, n_, n_) += (wH_(q, k1) * H_(q, k2)) * Jq;
        }
        return J;
    }

    std::unique_ptr<LinearSolve> linearize(const Eigen::VectorXd& X, double alpha) const override {
        const Eigen::MatrixXd J = coupled_jacobian(X, alpha);
        ++factorizations_;
        const detail::Stopwatch clock;
        auto lu = std::make_unique<DenseLinearSolve>(J);
        linear_seconds_ += clock.seconds();
        return lu;
    }

    Eigen::VectorXd excitation(double t) const override { return stack(c_.excitation(t)); }
    Eigen::VectorXd dc_excitation() const override { return stack(c_.dc_excitation()); }

    /// Weight of B in block k: <H_k, 1>, which is 1 for k = 0 and 0 otherwise up to rounding.
    const Eigen::VectorXd& input_weights() const { return b_weights_; }

private:
    Eigen::VectorXd stack(const Eigen::VectorXd& b) const {
        Eigen::VectorXd out(size());
        for (Eigen::Index k = 0; k < K_; ++k) out.segment(k * n_, n_) = b_weights_(k) * b;
        return out;
    }

    std::vector<Eigen::VectorXd> xi_;
    Eigen::VectorXd w_;
    Eigen::MatrixXd H_, wH_;
    Eigen::VectorXd b_weights_;
};

inline GpcTrajectory sg_solve(const StochasticCircuit& circuit, const GpcBasisSet& basis, const Analysis& a,
                              const SolverOptions& o = {}) {
    std::size_t points = 0;
    auto out = detail::intrusive_solve("SG", circuit, basis, a, o, [&](const StochasticCircuit& c) {
        auto p = std::make_unique<SgProblem>(c, basis, o.selection.budget);
        points = p->quadrature_points();
        return p;
    });
    out.stats.node_count = points;
    return out;
}

inline GpcTrajectory sg_solve(const StochasticCircuit& circuit, int order, const Analysis& a,
                              const SolverOptions& o = {}) {
    return sg_solve(circuit, GpcBasisSet(circuit.germs(), order), a, o);
}

} // namespace gpcsim
