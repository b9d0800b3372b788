#pragma once

// Stochastic testing: the gPC residual is forced to zero at K testing nodes.
// Block m of the stacked system is the circuit at node m, evaluated at the
// reconstructed state Xmat Phi(m, :)^T. The Jacobian J~ (Phi kron I) is solved
// as K independent n x n systems followed by Xmat = Zmat Phi^{-T}.

#include "gpcsim/testing_nodes.hpp"
#include "gpcsim/uq/intrusive.hpp"

namespace gpcsim {

/// Block-diagonal factorization plus the Phi^{-1} mixing step.
class StDecoupledSolve final : public LinearSolve {
public:
    StDecoupledSolve(std::vector<Eigen::MatrixXd> blocks, const Eigen::MatrixXd& phi_inv, double* seconds)
        : phi_inv_(phi_inv), seconds_(seconds) {
        const detail::Stopwatch clock;
        lu_.reserve(blocks.size());
        for (std::size_t m = 0; m < blocks.size(); ++m) {
            try {
                lu_.emplace_back(std::make_unique<DenseLinearSolve>(blocks[m]));
            } catch (const SingularMatrixError& e) {
                throw SingularMatrixError("Jacobian block of testing node " + std::to_string(m) + " is singular",
                                          e.cond_estimate);
            }
        }
        n_ = blocks.empty() ? 0 : blocks.front().rows();
        if (seconds_) *seconds_ += clock.seconds();
    }

    Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const override {
        const detail::Stopwatch clock;
        const auto K = static_cast<Eigen::Index>(lu_.size());
        Eigen::MatrixXd Z(n_, K);
        for (Eigen::Index m = 0; m < K; ++m) Z.col(m) = lu_[static_cast<std::size_t>(m)]->solve(rhs.segment(m * n_, n_));
        Eigen::MatrixXd X = Z * phi_inv_.transpose();
        if (seconds_) *seconds_ += clock.seconds();
        return Eigen::Map<const Eigen::VectorXd>(X.data(), X.size());
    }

private:
    std::vector<std::unique_ptr<DenseLinearSolve>> lu_;
    const Eigen::MatrixXd& phi_inv_;
    double* seconds_;
    Eigen::Index n_ = 0;
};

class StProblem final : public IntrusiveProblem {
public:
    StProblem(const StochasticCircuit& c, TestingNodeSet nodes)
        : IntrusiveProblem(c, nodes.size()), nodes_(std::move(nodes)) {
        for (const auto& xi : nodes_.nodes) c_.check_germ(xi);
    }

    const TestingNodeSet& nodes() const { return nodes_; }

    /// Reconstructed nodal states, column m = x(xi^m).
    Eigen::MatrixXd nodal_states(const Eigen::VectorXd& X) const {
        return Eigen::Map<const Eigen::MatrixXd>(X.data(), n_, K_) * nodes_.phi.transpose();
    }

    void evaluate(const Eigen::VectorXd& X, Eigen::VectorXd& Q, Eigen::VectorXd& F) const override {
        const Eigen::MatrixXd Y = nodal_states(X);
        Q.resize(size());
        F.resize(size());
        CircuitEval e;
        for (Eigen::Index m = 0; m < K_; ++m) {
            at_node(m, [&] { c_.evaluate(Y.col(m), node(m), e, false); });
            Q.segment(m * n_, n_) = e.q;
            F.segment(m * n_, n_) = e.f;
        }
    }

    /// J~ blocks alpha dq/dx + df/dx at each testing node.
    std::vector<Eigen::MatrixXd> block_jacobians(const Eigen::VectorXd& X, double alpha) const {
        const Eigen::MatrixXd Y = nodal_states(X);
        std::vector<Eigen::MatrixXd> J(static_cast<std::size_t>(K_));
        CircuitEval e;
        for (Eigen::Index m = 0; m < K_; ++m) {
            at_node(m, [&] { c_.evaluate(Y.col(m), node(m), e, true); });
            J[static_cast<std::size_t>(m)] = alpha * e.dq + e.df;
        }
        return J;
    }

    /// The coupled Jacobian J~ (Phi kron I_n), assembled densely.
    Eigen::MatrixXd coupled_jacobian(const Eigen::VectorXd& X, double alpha) const {
        const auto J = block_jacobians(X, alpha);
        Eigen::MatrixXd out(size(), size());
        for (Eigen::Index m = 0; m < K_; ++m)
            for (Eigen::Index k = 0; k < K_; ++k)
                out.block(m * n_, k * n_, n_, n_) = nodes_.phi(m, k) * J[static_cast<std::size_t>(m)];
        return out;
    }

    std::unique_ptr<LinearSolve> linearize(const Eigen::VectorXd& X, double alpha) const override {
        ++factorizations_;
        return std::make_unique<StDecoupledSolve>(block_jacobians(X, alpha), nodes_.phi_inv, &linear_seconds_);
    }

    Eigen::VectorXd excitation(double t) const override { return stack(c_.excitation(t)); }
    Eigen::VectorXd dc_excitation() const override { return stack(c_.dc_excitation()); }

private:
    Eigen::VectorXd node(Eigen::Index m) const { return nodes_.nodes[static_cast<std::size_t>(m)]; }

    Eigen::VectorXd stack(const Eigen::VectorXd& b) const { return b.replicate(K_, 1); }

    template <class F>
    static void at_node(Eigen::Index m, F&& f) {
        try {
            f();
        } catch (const EvaluationError& e) {
            throw EvaluationError("testing node " + std::to_string(m) + ": " + e.what());
        } catch (const DomainError& e) {
            throw DomainError("testing node " + std::to_string(m) + ": " + e.what());
        }
    }

    TestingNodeSet nodes_;
};

inline GpcTrajectory st_solve(const StochasticCircuit& circuit, const GpcBasisSet& basis, const Analysis& a,
                              const SolverOptions& o = {}) {
    const detail::Stopwatch clock;
    TestingNodeSet nodes = select_testing_nodes(basis, o.selection);
    const double select_seconds = clock.seconds();
    auto out = detail::intrusive_solve("ST", circuit, basis, a, o, [&](const StochasticCircuit& c) {
        return std::make_unique<StProblem>(c, nodes);
    });
    out.stats.node_count = nodes.size();
    out.stats.cond_phi = nodes.cond_estimate;
    out.stats.beta_used = nodes.beta_used;
    out.stats.wall_seconds += select_seconds;
    out.nodes = std::move(nodes);
    return out;
}

inline GpcTrajectory st_solve(const StochasticCircuit& circuit, int order, const Analysis& a,
                              const SolverOptions& o = {}) {
    return st_solve(circuit, GpcBasisSet(circuit.germs(), order), a, o);
}

} // namespace gpcsim
