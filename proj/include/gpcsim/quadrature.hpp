#pragma once

// Gauss rules for the four germ families and tensor-product grids over them.

#include "gpcsim/errors.hpp"
#include "gpcsim/gpc_basis.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace gpcsim {

struct QuadratureRule1D {
    Distribution dist;
    std::vector<double> nodes;   // ascending
    std::vector<double> weights; // positive, sum to one

    std::size_t size() const { return nodes.size(); }
};

/// n-point Gauss rule for the germ PDF (Golub-Welsch): nodes are the
/// eigenvalues of the symmetric Jacobi matrix with diagonal a_j and
/// off-diagonal sqrt(b_j); weights are squared first eigenvector components.
inline QuadratureRule1D gauss_rule(const Distribution& dist, int n) {
    if (n < 1) throw DomainError("gauss_rule needs at least one point");
    const Recurrence rec = univariate_recurrence(dist, n);
    QuadratureRule1D rule;
    rule.dist = dist;
    if (n == 1) {
        rule.nodes = {rec.a[0]};
        rule.weights = {1.0};
        return rule;
    }
    Eigen::VectorXd diag(n);
    Eigen::VectorXd sub(n - 1);
    for (int j = 0; j < n; ++j) diag(j) = rec.a[static_cast<std::size_t>(j)];
    for (int j = 1; j < n; ++j) sub(j - 1) = std::sqrt(rec.b[static_cast<std::size_t>(j)]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    if (es.info() != Eigen::Success)
        throw NumericalError(std::string("Gauss rule eigen-solve did not converge for ") + family_name(dist.kind) +
                             " germ, n=" + std::to_string(n));
    // Eigen returns eigenvalues in ascending order.
    rule.nodes.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    double total = 0.0;
    for (int j = 0; j < n; ++j) {
        const double v0 = es.eigenvectors()(0, j);
        rule.nodes[static_cast<std::size_t>(j)] = es.eigenvalues()(j);
        rule.weights[static_cast<std::size_t>(j)] = v0 * v0;
        total += v0 * v0;
    }
    for (auto& w : rule.weights) w /= total;
    return rule;
}

/// Tensor-product grid of N = n^l nodes, addressed by a linear column index
/// j in [0, N). With one-based indices the index matrix satisfies
///   j + 1 = 1 + sum_k n^(k-1) (I(k,j) - 1),
/// i.e. dimension 0 varies fastest. Nodes are generated from j on demand.
class TensorGrid {
public:
    static constexpr std::size_t default_budget = 1'000'000;

    explicit TensorGrid(std::vector<QuadratureRule1D> rules) : rules_(std::move(rules)) {
        if (rules_.empty()) throw DomainError("tensor grid needs at least one rule");
        points_ = rules_.front().size();
        for (const auto& r : rules_)
            if (r.size() != points_) throw DomainError("all tensor-grid rules must share the same point count");
        unsigned __int128 total = 1;
        for (std::size_t k = 0; k < rules_.size(); ++k) {
            total *= points_;
            if (total > std::numeric_limits<std::size_t>::max())
                throw OverflowError("tensor grid size overflows");
        }
        size_ = static_cast<std::size_t>(total);
    }

    /// Grid with n = p + 1 points per germ, as used for candidate generation.
    static TensorGrid for_basis(const GpcBasisSet& basis) {
        return with_points(basis.params(), basis.order() + 1);
    }

    static TensorGrid with_points(const std::vector<Distribution>& params, int n) {
        std::vector<QuadratureRule1D> rules;
        rules.reserve(params.size());
        for (const auto& d : params) rules.push_back(gauss_rule(d, n));
        return TensorGrid(std::move(rules));
    }

    int dimension() const { return static_cast<int>(rules_.size()); }
    std::size_t points_per_dim() const { return points_; }
    std::size_t size() const { return size_; }
    const QuadratureRule1D& rule(int k) const { return rules_[static_cast<std::size_t>(k)]; }

    /// Zero-based column of the index matrix for node j.
    std::vector<std::size_t> index_column(std::size_t j) const {
        check(j);
        std::vector<std::size_t> col(rules_.size());
        for (std::size_t k = 0; k < rules_.size(); ++k) {
            col[k] = j % points_;
            j /= points_;
        }
        return col;
    }

    std::size_t linear_index(const std::vector<std::size_t>& col) const {
        std::size_t j = 0;
        std::size_t stride = 1;
        for (std::size_t k = 0; k < rules_.size(); ++k) {
            if (col[k] >= points_) throw DomainError("index-matrix entry out of range");
            j += stride * col[k];
            stride *= points_;
        }
        return j;
    }

    Eigen::VectorXd node(std::size_t j) const {
        const auto col = index_column(j);
        Eigen::VectorXd xi(dimension());
        for (std::size_t k = 0; k < rules_.size(); ++k) xi(static_cast<Eigen::Index>(k)) = rules_[k].nodes[col[k]];
        return xi;
    }

    double weight(std::size_t j) const {
        const auto col = index_column(j);
        double w = 1.0;
        for (std::size_t k = 0; k < rules_.size(); ++k) w *= rules_[k].weights[col[k]];
        return w;
    }

    /// All nodes as columns of an l x N matrix; refuses grids above the budget.
    Eigen::MatrixXd materialize(std::size_t budget = default_budget) const {
        if (size_ > budget) throw BudgetError(size_, budget);
        Eigen::MatrixXd out(dimension(), static_cast<Eigen::Index>(size_));
        for (std::size_t j = 0; j < size_; ++j) out.col(static_cast<Eigen::Index>(j)) = node(j);
        return out;
    }

    std::vector<double> weights(std::size_t budget = default_budget) const {
        if (size_ > budget) throw BudgetError(size_, budget);
        std::vector<double> w(size_);
        for (std::size_t j = 0; j < size_; ++j) w[j] = weight(j);
        return w;
    }

private:
    void check(std::size_t j) const {
        if (j >= size_) throw DomainError("grid node " + std::to_string(j) + " out of range");
    }

    std::vector<QuadratureRule1D> rules_;
    std::size_t points_ = 0;
    std::size_t size_ = 0;
};

/// sum_j w_j g(xi_j), accumulated in ascending j.
inline Eigen::VectorXd integrate(const TensorGrid& grid, const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& g) {
    Eigen::VectorXd acc;
    for (std::size_t j = 0; j < grid.size(); ++j) {
        Eigen::VectorXd v;
        try {
            v = g(grid.node(j));
        } catch (const std::exception& e) {
            throw Error("integrand failed at grid node " + std::to_string(j) + ": " + e.what());
        }
        if (j == 0) acc = Eigen::VectorXd::Zero(v.size());
        acc += grid.weight(j) * v;
    }
    return acc;
}

} // namespace gpcsim
