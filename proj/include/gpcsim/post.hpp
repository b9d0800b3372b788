#pragma once

// Statistics, PDFs and exports over solver results.

#include "gpcsim/uq/ac.hpp"
#include "gpcsim/uq/types.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace gpcsim {

struct StatSeries {
    std::vector<double> times;
    std::vector<std::string> state_names;
    Eigen::MatrixXd mean;  // states x times
    Eigen::MatrixXd std;
    Eigen::MatrixXd stderr_mean;  // ensembles only: std / sqrt(N)
};

inline StatSeries stats_over_time(const GpcTrajectory& tr) {
    StatSeries s;
    s.times = tr.times;
    s.state_names = tr.state_names;
    const auto T = static_cast<Eigen::Index>(tr.points());
    s.mean.resize(tr.num_states(), T);
    s.std.resize(tr.num_states(), T);
    for (Eigen::Index t = 0; t < T; ++t) {
        const auto m = moments_from_coeffs(tr.coeffs[static_cast<std::size_t>(t)]);
        s.mean.col(t) = m.mean;
        s.std.col(t) = m.std;
    }
    return s;
}

/// Weighted sample mean and standard deviation (unbiased for uniform weights).
inline StatSeries ensemble_stats(const SampleEnsemble& e) {
    if (e.values.empty()) throw DomainError("ensemble has no successful samples");
    StatSeries s;
    s.times = e.times;
    s.state_names = e.state_names;
    const Eigen::Index rows = e.values.front().rows(), cols = e.values.front().cols();
    s.mean = Eigen::MatrixXd::Zero(rows, cols);
    Eigen::MatrixXd second = Eigen::MatrixXd::Zero(rows, cols);
    for (std::size_t k = 0; k < e.size(); ++k) s.mean += e.weights[k] * e.values[k];
    for (std::size_t k = 0; k < e.size(); ++k) second += e.weights[k] * (e.values[k] - s.mean).cwiseAbs2();
    const auto N = static_cast<double>(e.size());
    const double bessel = N > 1 ? N / (N - 1.0) : 1.0;
    s.std = (second * bessel).cwiseSqrt();
    s.stderr_mean = s.std / std::sqrt(N);
    return s;
}

// ---- PDFs -----------------------------------------------------------------

struct PdfEstimate {
    std::string label;
    std::size_t samples = 0;
    std::vector<double> edges;    // bins + 1
    std::vector<double> density;  // integrates to one over the bins
    double bin_width = 0.0;
    double sample_mean = 0.0;
    double sample_std = 0.0;
};

/// Freedman-Diaconis bin count: width 2 IQR / N^(1/3).
inline int freedman_diaconis_bins(std::vector<double> v) {
    if (v.size() < 2) return 1;
    std::sort(v.begin(), v.end());
    auto quantile = [&](double q) {
        const double pos = q * static_cast<double>(v.size() - 1);
        const auto i = static_cast<std::size_t>(pos);
        const double f = pos - static_cast<double>(i);
        return i + 1 < v.size() ? v[i] * (1.0 - f) + v[i + 1] * f : v[i];
    };
    const double range = v.back() - v.front();
    const double width = 2.0 * (quantile(0.75) - quantile(0.25)) / std::cbrt(static_cast<double>(v.size()));
    if (!(range > 0.0) || !(width > 0.0)) return 1;
    return static_cast<int>(std::clamp(std::ceil(range / width), 1.0, 10000.0));
}

/// Histogram density of a sample. bins <= 0 selects Freedman-Diaconis.
inline PdfEstimate histogram(const std::vector<double>& v, int bins = 0, std::string label = {}) {
    if (v.empty()) throw DomainError("histogram of an empty sample");
    PdfEstimate p;
    p.label = std::move(label);
    p.samples = v.size();
    const auto [lo_it, hi_it] = std::minmax_element(v.begin(), v.end());
    double lo = *lo_it, hi = *hi_it;
    if (bins <= 0) bins = freedman_diaconis_bins(v);
    if (!(hi > lo)) {
        // A constant: one bin of nominal width around it.
        const double half = std::max(std::abs(lo), 1.0) * 1e-9;
        lo -= half;
        hi += half;
        bins = 1;
    }
    p.bin_width = (hi - lo) / bins;
    for (int b = 0; b <= bins; ++b) p.edges.push_back(lo + p.bin_width * b);
    p.edges.back() = hi;
    std::vector<double> counts(static_cast<std::size_t>(bins), 0.0);
    double sum = 0.0, sum2 = 0.0;
    for (double x : v) {
        auto b = static_cast<long>((x - lo) / p.bin_width);
        b = std::clamp<long>(b, 0, bins - 1);
        counts[static_cast<std::size_t>(b)] += 1.0;
        sum += x;
        sum2 += x * x;
    }
    const auto N = static_cast<double>(v.size());
    for (double c : counts) p.density.push_back(c / (N * p.bin_width));
    p.sample_mean = sum / N;
    p.sample_std = N > 1 ? std::sqrt(std::max(0.0, (sum2 - N * p.sample_mean * p.sample_mean) / (N - 1.0))) : 0.0;
    return p;
}

/// Draws N germs, evaluates sum_k c_k H_k(xi) for one state.
inline std::vector<double> sample_expansion(const GpcBasisSet& basis, const Eigen::VectorXd& coeffs, std::size_t N,
                                            std::uint64_t seed) {
    if (coeffs.size() != static_cast<Eigen::Index>(basis.size()))
        throw DomainError("coefficient count does not match the basis");
    std::mt19937_64 rng(seed);
    std::vector<double> out(N);
    Eigen::VectorXd xi(basis.dimension()), h(static_cast<Eigen::Index>(basis.size()));
    for (std::size_t s = 0; s < N; ++s) {
        for (int d = 0; d < basis.dimension(); ++d) xi(d) = basis.params()[static_cast<std::size_t>(d)].sample(rng);
        basis.eval_into(xi, h);
        out[s] = coeffs.dot(h);
    }
    return out;
}

inline PdfEstimate pdf_of_expansion(const GpcBasisSet& basis, const Eigen::VectorXd& coeffs, std::size_t N,
                                    std::uint64_t seed, int bins = 0, std::string label = {}) {
    if (N < 1000) throw DomainError("pdf_of_expansion needs at least 1000 samples");
    return histogram(sample_expansion(basis, coeffs, N, seed), bins, std::move(label));
}

/// gPC coefficients of a derived scalar g(x, xi) at one point of an ST run,
/// by collocation at the testing nodes: c = Phi^{-1} [g(x(xi^m), xi^m)]_m.
template <class G>
Eigen::VectorXd collocate_quantity(const GpcTrajectory& st, std::size_t point, G&& g) {
    if (!st.nodes) throw DomainError("derived quantities need a stochastic-testing run");
    const auto& n = *st.nodes;
    const Eigen::MatrixXd Y = st.coeffs.at(point) * n.phi.transpose();
    Eigen::VectorXd v(static_cast<Eigen::Index>(n.size()));
    for (Eigen::Index m = 0; m < v.size(); ++m)
        v(m) = g(Eigen::VectorXd(Y.col(m)), n.nodes[static_cast<std::size_t>(m)]);
    return n.phi_inv * v;
}

// ---- comparisons ----------------------------------------------------------

struct ComparisonReport {
    double l2 = 0.0;                    // over all stacked coefficients and points
    std::vector<double> max_per_point;  // largest coefficient difference per point
    double max_abs = 0.0;
};

/// Coefficient differences between two runs of one circuit. Orders may
/// differ: the graded basis ordering makes the lower-order set a prefix of
/// the higher, and missing coefficients count as zero.
inline ComparisonReport compare_methods(const GpcTrajectory& ref, const GpcTrajectory& cand) {
    if (ref.germs != cand.germs) throw DomainError("compared runs use different germs");
    if (ref.state_names != cand.state_names) throw DomainError("compared runs use different circuits");
    const auto& small = ref.indices.size() <= cand.indices.size() ? ref.indices : cand.indices;
    const auto& large = ref.indices.size() <= cand.indices.size() ? cand.indices : ref.indices;
    if (!std::equal(small.begin(), small.end(), large.begin())) throw DomainError("basis index sets do not nest");
    if (ref.points() != cand.points()) throw DomainError("compared runs have different time grids");
    for (std::size_t t = 0; t < ref.points(); ++t)
        if (std::abs(ref.times[t] - cand.times[t]) > 1e-12 * std::max(1.0, std::abs(ref.times[t])))
            throw DomainError("compared runs have different time grids");
    ComparisonReport r;
    double sq = 0.0;
    const Eigen::Index K = static_cast<Eigen::Index>(large.size());
    for (std::size_t t = 0; t < ref.points(); ++t) {
        Eigen::MatrixXd d = Eigen::MatrixXd::Zero(ref.num_states(), K);
        d.leftCols(ref.coeffs[t].cols()) += ref.coeffs[t];
        d.leftCols(cand.coeffs[t].cols()) -= cand.coeffs[t];
        sq += d.squaredNorm();
        const double m = d.cwiseAbs().maxCoeff();
        r.max_per_point.push_back(m);
        r.max_abs = std::max(r.max_abs, m);
    }
    r.l2 = std::sqrt(sq);
    return r;
}

// ---- exports --------------------------------------------------------------

namespace detail {

inline std::string fmt17(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

} // namespace detail

/// Long-format CSV `time,state,mean,std`, 17 significant digits.
inline void write_stats_csv(std::ostream& os, const StatSeries& s, const std::vector<Eigen::Index>& states = {}) {
    std::vector<Eigen::Index> sel = states;
    if (sel.empty())
        for (Eigen::Index i = 0; i < s.mean.rows(); ++i) sel.push_back(i);
    os << "time,state,mean,std\n";
    for (std::size_t t = 0; t < s.times.size(); ++t)
        for (Eigen::Index i : sel) {
            const auto ti = static_cast<Eigen::Index>(t);
            os << detail::fmt17(s.times[t]) << ',' << s.state_names.at(static_cast<std::size_t>(i)) << ','
               << detail::fmt17(s.mean(i, ti)) << ',' << detail::fmt17(s.std(i, ti)) << '\n';
        }
}

struct StatRow {
    double time;
    std::string state;
    double mean;
    double std;
};

inline std::vector<StatRow> read_stats_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != "time,state,mean,std") throw Error("not a stats CSV");
    std::vector<StatRow> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        // State names such as i(V1) contain no commas, so a plain split works.
        std::vector<std::string> f;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
        if (f.size() != 4) throw Error("malformed stats CSV row: " + line);
        rows.push_back({std::stod(f[0]), f[1], std::stod(f[2]), std::stod(f[3])});
    }
    return rows;
}

inline nlohmann::json stats_to_json(const RunStats& s) {
    nlohmann::json j;
    j["method"] = s.method;
    j["order"] = s.order;
    j["dimension"] = s.dimension;
    j["basis_size"] = s.basis_size;
    j["node_count"] = s.node_count;
    j["cond_phi"] = std::isfinite(s.cond_phi) ? nlohmann::json(s.cond_phi) : nlohmann::json(nullptr);
    j["beta_used"] = std::isfinite(s.beta_used) ? nlohmann::json(s.beta_used) : nlohmann::json(nullptr);
    j["newton_iterations"] = s.newton_iterations;
    j["accepted_steps"] = s.accepted_steps;
    j["rejected_steps"] = s.rejected_steps;
    j["samples"] = s.samples;
    j["failed_samples"] = s.failed_samples;
    j["factorizations"] = s.factorizations;
    j["wall_seconds"] = s.wall_seconds;
    j["linear_solve_seconds"] = s.linear_solve_seconds;
    return j;
}

inline nlohmann::json basis_to_json(const std::vector<Distribution>& germs, int order,
                                    const std::vector<MultiIndex>& indices) {
    nlohmann::json j;
    j["order"] = order;
    j["germs"] = nlohmann::json::array();
    for (const auto& g : germs) j["germs"].push_back({{"family", family_name(g.kind)}, {"a", g.first}, {"b", g.second}});
    j["indices"] = indices;
    return j;
}

inline nlohmann::json nodes_to_json(const TestingNodeSet& n) {
    nlohmann::json j;
    j["beta"] = n.beta_used;
    j["cond_phi"] = n.cond_estimate;
    j["grid_indices"] = n.grid_indices;
    j["points"] = nlohmann::json::array();
    for (const auto& xi : n.nodes) j["points"].push_back(std::vector<double>(xi.data(), xi.data() + xi.size()));
    return j;
}

inline nlohmann::json to_json(const GpcTrajectory& tr, const std::vector<Eigen::Index>& states = {}) {
    std::vector<Eigen::Index> sel = states;
    if (sel.empty())
        for (Eigen::Index i = 0; i < tr.num_states(); ++i) sel.push_back(i);
    nlohmann::json j;
    j["analysis"] = analysis_name(tr.kind);
    j["basis"] = basis_to_json(tr.germs, tr.order, tr.indices);
    if (tr.nodes) j["testing_nodes"] = nodes_to_json(*tr.nodes);
    j["stats"] = stats_to_json(tr.stats);
    j["axis"] = tr.times;
    j["states"] = nlohmann::json::object();
    for (Eigen::Index i : sel) {
        nlohmann::json rows = nlohmann::json::array();
        for (const auto& c : tr.coeffs) {
            const Eigen::RowVectorXd r = c.row(i);
            rows.push_back(std::vector<double>(r.data(), r.data() + r.size()));
        }
        j["states"][tr.state_names.at(static_cast<std::size_t>(i))] = std::move(rows);
    }
    return j;
}

inline nlohmann::json to_json(const AcTrajectory& ac, const std::vector<Eigen::Index>& states = {}) {
    std::vector<Eigen::Index> sel = states;
    if (sel.empty())
        for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(ac.state_names.size()); ++i) sel.push_back(i);
    nlohmann::json j;
    j["analysis"] = "ac";
    j["basis"] = basis_to_json(ac.germs, ac.order, ac.indices);
    j["testing_nodes"] = nodes_to_json(ac.nodes);
    j["stats"] = stats_to_json(ac.stats);
    j["frequencies"] = ac.frequencies;
    j["states"] = nlohmann::json::object();
    for (Eigen::Index i : sel) {
        nlohmann::json re = nlohmann::json::array(), im = nlohmann::json::array();
        for (const auto& c : ac.coeffs) {
            const Eigen::RowVectorXd r = c.row(i).real(), m = c.row(i).imag();
            re.push_back(std::vector<double>(r.data(), r.data() + r.size()));
            im.push_back(std::vector<double>(m.data(), m.data() + m.size()));
        }
        j["states"][ac.state_names.at(static_cast<std::size_t>(i))] = {{"real", std::move(re)}, {"imag", std::move(im)}};
    }
    return j;
}

inline nlohmann::json to_json(const PdfEstimate& p) {
    return {{"label", p.label},       {"samples", p.samples},         {"edges", p.edges},
            {"density", p.density},   {"bin_width", p.bin_width},     {"mean", p.sample_mean},
            {"std", p.sample_std}};
}

} // namespace gpcsim
