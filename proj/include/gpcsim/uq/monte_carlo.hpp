#pragma once

// Monte Carlo: deterministic runs at seeded germ samples on a shared grid.

#include "gpcsim/uq/collocation.hpp"
#include "gpcsim/uq/nodal.hpp"

#include <numeric>
#include <random>

namespace gpcsim {

struct MonteCarloOptions {
    long samples = 1000;
    std::uint64_t seed = 1;
    bool mean_point = false;        // every sample at the germ means (nominal runs)
    double max_failure_rate = 0.01;
};

/// Germ samples in draw order: sample-major, parameter-minor, from one
/// mt19937_64 stream.
inline std::vector<Eigen::VectorXd> draw_germs(const std::vector<Distribution>& germs, long count,
                                               std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<Eigen::VectorXd> out(static_cast<std::size_t>(count), Eigen::VectorXd(static_cast<Eigen::Index>(germs.size())));
    for (auto& xi : out)
        for (std::size_t d = 0; d < germs.size(); ++d) xi(static_cast<Eigen::Index>(d)) = germs[d].sample(rng);
    return out;
}

inline SampleEnsemble mc_solve(const StochasticCircuit& circuit, const MonteCarloOptions& mc, const Analysis& a,
                               const SolverOptions& o = {}) {
    if (mc.samples < 1) throw DomainError("Monte Carlo needs at least one sample");
    const detail::Stopwatch clock;
    std::vector<Eigen::VectorXd> germs =
        mc.mean_point ? std::vector<Eigen::VectorXd>(static_cast<std::size_t>(mc.samples), circuit.germ_mean())
                      : draw_germs(circuit.germs(), mc.samples, mc.seed);

    const StepControl ctl = a.kind == AnalysisKind::Tran ? fixed_grid_control(a, o) : o.step;
    std::vector<Eigen::Index> keep = o.keep_states;
    if (keep.empty()) {
        keep.resize(static_cast<std::size_t>(circuit.size()));
        std::iota(keep.begin(), keep.end(), Eigen::Index{0});
    }

    // Each worker reduces its run to the kept states right away.
    struct Slot {
        Eigen::MatrixXd values;
        std::vector<double> times;
        long newton = 0, accepted = 0;
        std::exception_ptr error;
    };
    std::vector<Slot> slots(germs.size());
    detail::parallel_for(germs.size(), o.jobs, [&](std::size_t s) {
        try {
            const NodalRun run = run_nodal(circuit, germs[s], a, o.newton, ctl);
            auto& slot = slots[s];
            slot.values.resize(static_cast<Eigen::Index>(keep.size()), static_cast<Eigen::Index>(run.times.size()));
            for (std::size_t t = 0; t < run.times.size(); ++t)
                for (std::size_t i = 0; i < keep.size(); ++i)
                    slot.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) = run.x[t](keep[i]);
            slot.times = run.times;
            slot.newton = run.newton_iterations;
            slot.accepted = run.accepted;
        } catch (const Error&) {
            slots[s].error = std::current_exception();
        }
    });

    SampleEnsemble out;
    out.kind = a.kind;
    out.requested = mc.samples;
    for (const auto& slot : slots)
        if (slot.error) ++out.failed;
    if (static_cast<double>(out.failed) > mc.max_failure_rate * static_cast<double>(mc.samples) ||
        out.failed == mc.samples) {
        std::size_t first = 0;
        while (!slots[first].error) ++first;
        detail::rethrow_prefixed(slots[first].error, "MC: " + std::to_string(out.failed) + " of " +
                                                         std::to_string(mc.samples) + " samples failed; first at " +
                                                         detail::format_germ(germs[first]) + ": ");
    }

    out.states = keep;
    for (Eigen::Index i : keep) out.state_names.push_back(circuit.state_names().at(static_cast<std::size_t>(i)));
    for (std::size_t s = 0; s < germs.size(); ++s) {
        auto& slot = slots[s];
        if (slot.error) continue;
        if (out.times.empty()) {
            out.times = slot.times;
            out.stats.accepted_steps = slot.accepted;
        } else if (slot.times.size() != out.times.size()) {
            throw NumericalError("MC runs do not share one time grid");
        }
        out.values.push_back(std::move(slot.values));
        out.germs.push_back(germs[s]);
        out.stats.newton_iterations += slot.newton;
    }
    out.weights.assign(out.values.size(), 1.0 / static_cast<double>(out.values.size()));
    out.stats.method = "MC";
    out.stats.dimension = circuit.num_params();
    out.stats.node_count = out.values.size();
    out.stats.samples = mc.samples;
    out.stats.failed_samples = out.failed;
    out.stats.wall_seconds = clock.seconds();
    return out;
}

} // namespace gpcsim
