#pragma once

// Orthonormal generalized polynomial chaos bases.
//
// Each germ xi_k follows one of four standard distributions:
//
//   Gaussian   N(0,1) on (-inf, inf)                 -> Hermite
//   Gamma(g)   x^(g-1) e^(-x) / Gamma(g) on [0, inf) -> Laguerre
//   Beta(a,b)  x^(a-1) (1-x)^(b-1) / B(a,b) on [0,1] -> Jacobi
//   Uniform    1/2 on [-1, 1]                        -> Legendre
//
// Univariate polynomials come from closed-form monic three-term recurrences
//   pi_{j+1}(x) = (x - a_j) pi_j(x) - b_j pi_{j-1}(x)
// and are normalised so that <phi_i, phi_j> = delta_ij under the germ PDF.
// Multivariate basis functions are products over a total-degree index set.

#include "gpcsim/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace gpcsim {

enum class Family { Gaussian, Gamma, Beta, Uniform };

inline const char* family_name(Family f) {
    switch (f) {
    case Family::Gaussian: return "gaussian";
    case Family::Gamma: return "gamma";
    case Family::Beta: return "beta";
    case Family::Uniform: return "uniform";
    }
    return "?";
}

/// Standard-form germ distribution. Shape parameters are only meaningful for
/// Gamma (first = gamma) and Beta (first = alpha, second = beta).
struct Distribution {
    Family kind = Family::Gaussian;
    double first = 0.0;
    double second = 0.0;

    static Distribution gaussian() { return {Family::Gaussian, 0.0, 0.0}; }
    static Distribution uniform() { return {Family::Uniform, 0.0, 0.0}; }
    static Distribution gamma(double shape) {
        Distribution d{Family::Gamma, shape, 0.0};
        d.validate();
        return d;
    }
    static Distribution beta(double alpha, double beta) {
        Distribution d{Family::Beta, alpha, beta};
        d.validate();
        return d;
    }

    void validate() const {
        if (kind == Family::Gamma && !(first > 0.0 && std::isfinite(first)))
            throw DomainError("gamma distribution requires shape > 0, got " + std::to_string(first));
        if (kind == Family::Beta && !(first > 0.0 && second > 0.0 && std::isfinite(first) && std::isfinite(second)))
            throw DomainError("beta distribution requires alpha > 0 and beta > 0, got (" + std::to_string(first) +
                              ", " + std::to_string(second) + ")");
    }

    double lower() const {
        switch (kind) {
        case Family::Gaussian: return -std::numeric_limits<double>::infinity();
        case Family::Gamma: return 0.0;
        case Family::Beta: return 0.0;
        case Family::Uniform: return -1.0;
        }
        return 0.0;
    }
    double upper() const {
        switch (kind) {
        case Family::Gaussian:
        case Family::Gamma: return std::numeric_limits<double>::infinity();
        case Family::Beta: return 1.0;
        case Family::Uniform: return 1.0;
        }
        return 0.0;
    }

    bool contains(double x, double slack = 1e-12) const {
        return x >= lower() - slack && x <= upper() + slack && !std::isnan(x);
    }

    double mean() const {
        switch (kind) {
        case Family::Gaussian: return 0.0;
        case Family::Gamma: return first;
        case Family::Beta: return first / (first + second);
        case Family::Uniform: return 0.0;
        }
        return 0.0;
    }

    double variance() const {
        switch (kind) {
        case Family::Gaussian: return 1.0;
        case Family::Gamma: return first;
        case Family::Beta: {
            const double s = first + second;
            return first * second / (s * s * (s + 1.0));
        }
        case Family::Uniform: return 1.0 / 3.0;
        }
        return 0.0;
    }

    double pdf(double x) const {
        switch (kind) {
        case Family::Gaussian: return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
        case Family::Gamma:
            if (x < 0.0) return 0.0;
            if (x == 0.0) return first < 1.0 ? std::numeric_limits<double>::infinity() : (first == 1.0 ? 1.0 : 0.0);
            return std::exp((first - 1.0) * std::log(x) - x - std::lgamma(first));
        case Family::Beta: {
            if (x < 0.0 || x > 1.0) return 0.0;
            const double log_b = std::lgamma(first) + std::lgamma(second) - std::lgamma(first + second);
            if (x == 0.0 || x == 1.0) {
                const double e = x == 0.0 ? first : second;
                if (e < 1.0) return std::numeric_limits<double>::infinity();
                if (e > 1.0) return 0.0;
                return std::exp(-log_b);
            }
            return std::exp((first - 1.0) * std::log(x) + (second - 1.0) * std::log1p(-x) - log_b);
        }
        case Family::Uniform: return (x >= -1.0 && x <= 1.0) ? 0.5 : 0.0;
        }
        return 0.0;
    }

    template <class Rng>
    double sample(Rng& rng) const {
        switch (kind) {
        case Family::Gaussian: return std::normal_distribution<double>(0.0, 1.0)(rng);
        case Family::Gamma: return std::gamma_distribution<double>(first, 1.0)(rng);
        case Family::Beta: {
            const double x = std::gamma_distribution<double>(first, 1.0)(rng);
            const double y = std::gamma_distribution<double>(second, 1.0)(rng);
            return x / (x + y);
        }
        case Family::Uniform: return std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
        }
        return 0.0;
    }

    bool operator==(const Distribution&) const = default;
};

/// A named physical parameter theta = shift + scale * xi, with xi a standard germ.
struct RandomParameter {
    std::string name;
    Distribution dist;
    double shift = 0.0;
    double scale = 1.0;

    RandomParameter() = default;
    RandomParameter(std::string n, Distribution d, double sh, double sc)
        : name(std::move(n)), dist(d), shift(sh), scale(sc) {
        dist.validate();
        if (scale == 0.0 || !std::isfinite(scale))
            throw DomainError("random parameter '" + name + "' needs a finite non-zero scale");
    }

    double physical(double xi) const { return shift + scale * xi; }
    double physical_mean() const { return shift + scale * dist.mean(); }
    double physical_std() const { return std::abs(scale) * std::sqrt(dist.variance()); }
};

using MultiIndex = std::vector<int>;

inline int total_degree(const MultiIndex& i) {
    int s = 0;
    for (int v : i) s += v;
    return s;
}

/// Number of total-degree-p basis functions in l variables, (p+l)!/(p! l!).
inline std::size_t num_basis(int p, int l) {
    if (p < 0 || l < 1) throw DomainError("num_basis requires p >= 0 and l >= 1");
    // C(p+l, p) built incrementally: C(l+i, i) = C(l+i-1, i-1) * (l+i) / i stays integral.
    unsigned __int128 c = 1;
    for (int i = 1; i <= p; ++i) {
        c = c * static_cast<unsigned __int128>(l + i);
        c /= static_cast<unsigned __int128>(i);
        if (c > std::numeric_limits<std::size_t>::max())
            throw OverflowError("num_basis(" + std::to_string(p) + ", " + std::to_string(l) + ") overflows");
    }
    return static_cast<std::size_t>(c);
}

/// Total-degree index set in graded lexicographic order: sorted by total
/// degree, ties broken by ascending lexicographic comparison. The all-zeros
/// index comes first.
inline std::vector<MultiIndex> build_index_set(int p, int l) {
    const std::size_t count = num_basis(p, l);
    std::vector<MultiIndex> out;
    out.reserve(count);
    MultiIndex cur(static_cast<std::size_t>(l), 0);
    for (int degree = 0; degree <= p; ++degree) {
        // Lexicographically ascending compositions of `degree` into l parts.
        // Recursive fill: the first slot grows slowest.
        auto fill = [&](auto&& self, int pos, int remaining) -> void {
            if (pos == l - 1) {
                cur[static_cast<std::size_t>(pos)] = remaining;
                out.push_back(cur);
                return;
            }
            for (int v = 0; v <= remaining; ++v) {
                cur[static_cast<std::size_t>(pos)] = v;
                self(self, pos + 1, remaining - v);
            }
        };
        fill(fill, 0, degree);
    }
    return out;
}

/// Monic recurrence coefficients for one germ, a_j and b_j for j = 0..max_degree.
/// b_0 is the total mass of the (normalised) weight, i.e. 1.
struct Recurrence {
    Distribution dist;
    std::vector<double> a;
    std::vector<double> b;

    int max_degree() const { return static_cast<int>(a.size()) - 1; }

    /// Squared norm of the monic polynomial pi_j: b_0 b_1 ... b_j.
    double norm_squared(int j) const {
        double n = 1.0;
        for (int i = 1; i <= j; ++i) n *= b[static_cast<std::size_t>(i)];
        return n;
    }
};

inline Recurrence univariate_recurrence(const Distribution& dist, int max_degree) {
    if (max_degree < 0) throw DomainError("recurrence degree must be >= 0");
    dist.validate();
    Recurrence r;
    r.dist = dist;
    const auto n = static_cast<std::size_t>(max_degree) + 1;
    r.a.assign(n, 0.0);
    r.b.assign(n, 0.0);
    r.b[0] = 1.0;
    for (std::size_t jj = 0; jj < n; ++jj) {
        const double j = static_cast<double>(jj);
        switch (dist.kind) {
        case Family::Gaussian:
            r.a[jj] = 0.0;
            if (jj > 0) r.b[jj] = j;
            break;
        case Family::Uniform:
            r.a[jj] = 0.0;
            if (jj > 0) r.b[jj] = j * j / (4.0 * j * j - 1.0);
            break;
        case Family::Gamma: {
            const double g = dist.first;
            r.a[jj] = 2.0 * j + g;
            if (jj > 0) r.b[jj] = j * (j + g - 1.0);
            break;
        }
        case Family::Beta: {
            // Weight x^(al-1) (1-x)^(be-1) on [0,1], s = al + be.
            const double al = dist.first;
            const double be = dist.second;
            const double s = al + be;
            if (jj == 0) {
                r.a[jj] = al / s;
            } else {
                const double lo = 2.0 * j + s - 2.0;
                const double hi = 2.0 * j + s;
                r.a[jj] = 0.5 + (al - be) * (s - 2.0) / (2.0 * lo * hi);
            }
            if (jj == 1) {
                r.b[jj] = al * be / (s * s * (s + 1.0));
            } else if (jj > 1) {
                const double c = 2.0 * j + s - 2.0;
                r.b[jj] = j * (j + al - 1.0) * (j + be - 1.0) * (j + s - 2.0) / (c * c * (c + 1.0) * (c - 1.0));
            }
            break;
        }
        }
    }
    return r;
}

/// Orthonormal phi_0..phi_degree at x, optionally with derivatives.
inline void eval_orthonormal(const Recurrence& rec, double x, int degree, double* values,
                             double* derivs = nullptr) {
    values[0] = 1.0;
    if (derivs) derivs[0] = 0.0;
    if (degree == 0) return;
    const double s1 = std::sqrt(rec.b[1]);
    values[1] = (x - rec.a[0]) / s1;
    if (derivs) derivs[1] = 1.0 / s1;
    for (int j = 1; j < degree; ++j) {
        const auto ju = static_cast<std::size_t>(j);
        const double sj = std::sqrt(rec.b[ju]);
        const double sn = std::sqrt(rec.b[ju + 1]);
        values[j + 1] = ((x - rec.a[ju]) * values[j] - sj * values[j - 1]) / sn;
        if (derivs) derivs[j + 1] = (values[j] + (x - rec.a[ju]) * derivs[j] - sj * derivs[j - 1]) / sn;
    }
}

/// Multivariate orthonormal basis {H_k}, k = 0..K-1, over a total-degree index set.
class GpcBasisSet {
public:
    GpcBasisSet(std::vector<Distribution> params, int order)
        : params_(std::move(params)), order_(order) {
        if (params_.empty()) throw DomainError("basis needs at least one random parameter");
        if (order_ < 0) throw DomainError("basis order must be >= 0");
        indices_ = build_index_set(order_, dimension());
        recurrences_.reserve(params_.size());
        for (const auto& d : params_) recurrences_.push_back(univariate_recurrence(d, std::max(order_, 1)));
    }

    int order() const { return order_; }
    int dimension() const { return static_cast<int>(params_.size()); }
    std::size_t size() const { return indices_.size(); }
    const std::vector<MultiIndex>& indices() const { return indices_; }
    const std::vector<Distribution>& params() const { return params_; }
    const Recurrence& recurrence(int k) const { return recurrences_[static_cast<std::size_t>(k)]; }

    void check_support(const Eigen::VectorXd& xi) const {
        if (xi.size() != dimension())
            throw DomainError("point has dimension " + std::to_string(xi.size()) + ", basis expects " +
                              std::to_string(dimension()));
        for (int d = 0; d < dimension(); ++d)
            if (!params_[static_cast<std::size_t>(d)].contains(xi(d)))
                throw DomainError("xi[" + std::to_string(d) + "] = " + std::to_string(xi(d)) +
                                  " is outside the support of the " +
                                  family_name(params_[static_cast<std::size_t>(d)].kind) + " germ");
    }

    /// H(xi) as a K-vector.
    Eigen::VectorXd eval(const Eigen::VectorXd& xi) const {
        Eigen::VectorXd out(static_cast<Eigen::Index>(size()));
        eval_into(xi, out);
        return out;
    }

    void eval_into(const Eigen::VectorXd& xi, Eigen::Ref<Eigen::VectorXd> out) const {
        check_support(xi);
        const Eigen::MatrixXd uni = univariate_table(xi, nullptr);
        for (std::size_t k = 0; k < indices_.size(); ++k) {
            double v = 1.0;
            for (int d = 0; d < dimension(); ++d) v *= uni(indices_[k][static_cast<std::size_t>(d)], d);
            out(static_cast<Eigen::Index>(k)) = v;
        }
    }

    /// dH_k / dxi_d as a K x l matrix.
    Eigen::MatrixXd gradient(const Eigen::VectorXd& xi) const {
        check_support(xi);
        Eigen::MatrixXd der;
        const Eigen::MatrixXd uni = univariate_table(xi, &der);
        Eigen::MatrixXd g(static_cast<Eigen::Index>(size()), dimension());
        for (std::size_t k = 0; k < indices_.size(); ++k) {
            for (int d = 0; d < dimension(); ++d) {
                double v = 1.0;
                for (int e = 0; e < dimension(); ++e) {
                    const int deg = indices_[k][static_cast<std::size_t>(e)];
                    v *= (e == d) ? der(deg, e) : uni(deg, e);
                }
                g(static_cast<Eigen::Index>(k), d) = v;
            }
        }
        return g;
    }

    /// Germ means: the single node of the one-point Gauss rule of each family.
    Eigen::VectorXd mean_point() const {
        Eigen::VectorXd m(dimension());
        for (int d = 0; d < dimension(); ++d) m(d) = params_[static_cast<std::size_t>(d)].mean();
        return m;
    }

    bool same_layout(const GpcBasisSet& other) const {
        return order_ == other.order_ && params_ == other.params_ && indices_ == other.indices_;
    }

private:
    Eigen::MatrixXd univariate_table(const Eigen::VectorXd& xi, Eigen::MatrixXd* der) const {
        Eigen::MatrixXd uni(order_ + 1, dimension());
        if (der) der->resize(order_ + 1, dimension());
        for (int d = 0; d < dimension(); ++d)
            eval_orthonormal(recurrences_[static_cast<std::size_t>(d)], xi(d), order_, uni.col(d).data(),
                             der ? der->col(d).data() : nullptr);
        return uni;
    }

    std::vector<Distribution> params_;
    int order_;
    std::vector<MultiIndex> indices_;
    std::vector<Recurrence> recurrences_;
};

struct Moments {
    Eigen::VectorXd mean;
    Eigen::VectorXd std;
};

/// Mean and standard deviation from an n x K coefficient matrix whose column
/// k multiplies H_k. Column 0 is the constant basis function.
inline Moments moments_from_coeffs(const Eigen::Ref<const Eigen::MatrixXd>& coeffs) {
    Moments m;
    m.mean = coeffs.col(0);
    if (coeffs.cols() > 1)
        m.std = coeffs.rightCols(coeffs.cols() - 1).rowwise().squaredNorm().cwiseSqrt();
    else
        m.std = Eigen::VectorXd::Zero(coeffs.rows());
    return m;
}

/// Same, for a stacked coefficient vector [x_1; ...; x_K] with blocks of size n.
inline Moments moments_from_stacked(const Eigen::VectorXd& stacked, Eigen::Index n) {
    const Eigen::Index K = stacked.size() / n;
    return moments_from_coeffs(Eigen::Map<const Eigen::MatrixXd>(stacked.data(), n, K));
}

} // namespace gpcsim
