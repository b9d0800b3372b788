#pragma once

// Results and options shared by the stochastic solvers.

#include "gpcsim/circuit/circuit.hpp"
#include "gpcsim/engine.hpp"
#include "gpcsim/gpc_basis.hpp"
#include "gpcsim/testing_nodes.hpp"

#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace gpcsim {

enum class AnalysisKind { Dc, DcSweep, Tran };

inline const char* analysis_name(AnalysisKind k) {
    switch (k) {
    case AnalysisKind::Dc: return "dc";
    case AnalysisKind::DcSweep: return "dcsweep";
    case AnalysisKind::Tran: return "tran";
    }
    return "?";
}

struct Analysis {
    AnalysisKind kind = AnalysisKind::Dc;
    DcSweep sweep;
    double tstop = 0.0;

    static Analysis dc() { return {}; }
    static Analysis dcsweep(DcSweep s) { return {AnalysisKind::DcSweep, std::move(s), 0.0}; }
    static Analysis tran(double tstop) { return {AnalysisKind::Tran, {}, tstop}; }
};

struct SolverOptions {
    NewtonConfig newton;
    StepControl step;               // ST/SG transient; a fixed step here forces a uniform grid
    SelectionOptions selection;     // ST testing-node selection
    std::optional<double> h_fixed;  // SC/MC transient grid; default span / 2000
    int jobs = 1;                   // SC/MC worker threads
    std::vector<Eigen::Index> keep_states;  // MC: states stored per sample (empty = all)
};

struct RunStats {
    std::string method;
    int order = 0;
    int dimension = 0;
    std::size_t basis_size = 0;
    std::size_t node_count = 0;  // deterministic evaluation points per solve (K, or the SC/MC run count)
    double cond_phi = std::numeric_limits<double>::quiet_NaN();
    double beta_used = std::numeric_limits<double>::quiet_NaN();
    long newton_iterations = 0;
    long accepted_steps = 0;
    long rejected_steps = 0;
    long samples = 0;
    long failed_samples = 0;
    double wall_seconds = 0.0;
    long factorizations = 0;
    double linear_solve_seconds = 0.0;  // factorizations and solves, excluding device evaluation
};

/// gPC coefficients over an analysis axis (time, sweep value, or a single DC point).
struct GpcTrajectory {
    AnalysisKind kind = AnalysisKind::Dc;
    std::vector<std::string> state_names;
    std::vector<Distribution> germs;
    int order = 0;
    std::vector<MultiIndex> indices;
    std::vector<double> times;               // strictly increasing
    std::vector<Eigen::MatrixXd> coeffs;     // n x K per point
    std::vector<double> lte;                 // normalized LTE per point (transient)
    std::optional<TestingNodeSet> nodes;     // ST only
    RunStats stats;

    std::size_t points() const { return times.size(); }
    Eigen::Index num_states() const { return coeffs.empty() ? 0 : coeffs.front().rows(); }
    std::size_t basis_size() const { return indices.size(); }
};

/// Deterministic solutions at sampled or quadrature germs on a shared axis.
struct SampleEnsemble {
    AnalysisKind kind = AnalysisKind::Dc;
    std::vector<std::string> state_names;  // of the stored states
    std::vector<Eigen::Index> states;      // circuit state indices stored
    std::vector<double> times;
    std::vector<Eigen::VectorXd> germs;    // successful samples only
    std::vector<Eigen::MatrixXd> values;   // per sample: states x times
    std::vector<double> weights;           // sum to one
    long requested = 0;
    long failed = 0;
    RunStats stats;

    std::size_t size() const { return values.size(); }
};

namespace detail {

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

/// Rethrow engine errors with a method tag, keeping their type.
template <class F>
auto tagged(const std::string& method, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const DcFailure& e) {
        throw DcFailure(method + ": " + e.what(), e.residual_norm);
    } catch (const TransientFailure& e) {
        throw TransientFailure(method + ": " + e.what(), e.time);
    }
}

/// Run fn(i) for i in [0, n) on up to `jobs` threads. Each index is written
/// by exactly one worker; the first exception is rethrown after joining.
template <class Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn) {
    const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), n));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < n; i += workers) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

/// Uniform transient grid t_k = k h up to tstop.
inline std::vector<double> uniform_grid(double tstop, double h) {
    std::vector<double> t{0.0};
    for (long k = 1;; ++k) {
        const double tk = std::min(tstop, static_cast<double>(k) * h);
        t.push_back(tk);
        if (tk >= tstop - 1e-12 * tstop) break;
    }
    return t;
}

} // namespace detail

} // namespace gpcsim
