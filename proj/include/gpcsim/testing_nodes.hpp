#pragma once

// Testing-node selection for stochastic testing, the collocation matrix Phi,
// and node-count cost models.

#include "gpcsim/errors.hpp"
#include "gpcsim/gpc_basis.hpp"
#include "gpcsim/quadrature.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

namespace gpcsim {

struct TestingNodeSet {
    std::vector<Eigen::VectorXd> nodes;     // K points
    std::vector<std::size_t> grid_indices;  // candidate index of each node
    Eigen::MatrixXd phi;                    // phi(m, k) = H_k(node m)
    Eigen::MatrixXd phi_inv;
    double cond_estimate = 1.0;
    double beta_used = 0.0;

    std::size_t size() const { return nodes.size(); }
};

struct PhiMatrices {
    Eigen::MatrixXd phi;
    Eigen::MatrixXd phi_inv;
    double cond_estimate;
};

/// Phi with its LU inverse. Condition number from the singular values.
inline PhiMatrices build_phi(const GpcBasisSet& basis, const std::vector<Eigen::VectorXd>& nodes,
                             double max_cond = 1e13) {
    const auto K = static_cast<Eigen::Index>(basis.size());
    if (static_cast<Eigen::Index>(nodes.size()) != K)
        throw DomainError("build_phi needs exactly K = " + std::to_string(K) + " nodes, got " +
                          std::to_string(nodes.size()));
    PhiMatrices out;
    out.phi.resize(K, K);
    for (Eigen::Index m = 0; m < K; ++m) out.phi.row(m) = basis.eval(nodes[static_cast<std::size_t>(m)]).transpose();
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(out.phi);
    const auto& sv = svd.singularValues();
    const double smin = sv(K - 1);
    out.cond_estimate = smin > 0.0 ? sv(0) / smin : std::numeric_limits<double>::infinity();
    if (!std::isfinite(out.cond_estimate) || out.cond_estimate > max_cond)
        throw SingularMatrixError("collocation matrix Phi is numerically singular", out.cond_estimate);
    out.phi_inv = out.phi.partialPivLu().inverse();
    return out;
}

struct SelectionOptions {
    double beta = 1e-2;
    int max_retries = 6;          // each retry halves beta
    std::size_t budget = TensorGrid::default_budget;
};

namespace detail {

/// One greedy scan. Returns accepted candidate indices (possibly fewer than K).
inline std::vector<std::size_t> greedy_scan(const GpcBasisSet& basis, const TensorGrid& grid,
                                            const std::vector<std::size_t>& order, double beta) {
    const auto K = static_cast<Eigen::Index>(basis.size());
    Eigen::MatrixXd V(K, K);
    Eigen::Index m = 0;
    std::vector<std::size_t> accepted;
    for (std::size_t j : order) {
        const Eigen::VectorXd h = basis.eval(grid.node(j));
        const double hn = h.norm();
        if (m == 0) {
            V.col(0) = h / hn;
            accepted.push_back(j);
            m = 1;
        } else {
            Eigen::VectorXd v = h;
            // Project twice to keep V orthonormal in floating point.
            for (int pass = 0; pass < 2; ++pass) v -= V.leftCols(m) * (V.leftCols(m).transpose() * v);
            const double vn = v.norm();
            if (vn / hn > beta) {
                V.col(m) = v / vn;
                accepted.push_back(j);
                ++m;
            }
        }
        if (m >= K) break;
    }
    return accepted;
}

} // namespace detail

/// Greedy selection of K testing nodes from the tensor candidates: visit
/// candidates by descending weight (ties by ascending index) and accept one
/// when its basis vector keeps a relative component above beta orthogonal to
/// the span of those already accepted. On a short scan beta is halved and the
/// scan repeated, up to options.max_retries times.
inline TestingNodeSet select_testing_nodes(const GpcBasisSet& basis, const TensorGrid& grid,
                                           const SelectionOptions& options = {}) {
    if (!(options.beta > 0.0 && options.beta < 1.0)) throw DomainError("beta must lie in (0, 1)");
    if (grid.dimension() != basis.dimension())
        throw DomainError("candidate grid dimension does not match basis dimension");
    const std::vector<double> w = grid.weights(options.budget);
    std::vector<std::size_t> order(w.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return std::abs(w[a]) > std::abs(w[b]); });

    const std::size_t K = basis.size();
    double beta = options.beta;
    std::vector<std::size_t> accepted;
    for (int attempt = 0;; ++attempt) {
        accepted = detail::greedy_scan(basis, grid, order, beta);
        if (accepted.size() == K) break;
        if (attempt >= options.max_retries) throw SelectionError(accepted.size(), K, beta);
        beta *= 0.5;
    }

    TestingNodeSet set;
    set.beta_used = beta;
    set.grid_indices = accepted;
    set.nodes.reserve(K);
    for (std::size_t j : accepted) set.nodes.push_back(grid.node(j));
    auto phi = build_phi(basis, set.nodes);
    set.phi = std::move(phi.phi);
    set.phi_inv = std::move(phi.phi_inv);
    set.cond_estimate = phi.cond_estimate;
    return set;
}

inline TestingNodeSet select_testing_nodes(const GpcBasisSet& basis, const SelectionOptions& options = {}) {
    return select_testing_nodes(basis, TensorGrid::for_basis(basis), options);
}

/// Estimated node count of a level-(p+1) nested sparse grid:
///   sum_{i=0..p} 2^i (l-1+i)! / ((l-1)! i!)
inline std::size_t sparse_grid_count(int p, int l) {
    if (p < 0 || l < 1) throw DomainError("sparse_grid_count requires p >= 0 and l >= 1");
    unsigned __int128 total = 0;
    unsigned __int128 binom = 1;  // C(l-1+i, i)
    unsigned __int128 pow2 = 1;
    constexpr auto limit = static_cast<unsigned __int128>(std::numeric_limits<std::size_t>::max());
    for (int i = 0; i <= p; ++i) {
        if (i > 0) {
            binom = binom * static_cast<unsigned __int128>(l - 1 + i) / static_cast<unsigned __int128>(i);
            pow2 *= 2;
        }
        if (binom > limit || pow2 > limit) throw OverflowError("sparse_grid_count overflows");
        total += pow2 * binom;
        if (total > limit) throw OverflowError("sparse_grid_count overflows");
    }
    return static_cast<std::size_t>(total);
}

/// (p+1)^l with overflow check.
inline std::size_t tensor_grid_count(int p, int l) {
    if (p < 0 || l < 1) throw DomainError("tensor_grid_count requires p >= 0 and l >= 1");
    unsigned __int128 t = 1;
    for (int k = 0; k < l; ++k) {
        t *= static_cast<unsigned __int128>(p + 1);
        if (t > std::numeric_limits<std::size_t>::max()) throw OverflowError("tensor_grid_count overflows");
    }
    return static_cast<std::size_t>(t);
}

enum class ScGrid { TensorProduct, Sparse };

/// DC speedup of ST over SC from node counts alone: N_SC / K.
inline double speedup_model(int p, int l, ScGrid kind) {
    const double k = static_cast<double>(num_basis(p, l));
    const double nsc = static_cast<double>(kind == ScGrid::TensorProduct ? tensor_grid_count(p, l)
                                                                         : sparse_grid_count(p, l));
    return nsc / k;
}

} // namespace gpcsim
