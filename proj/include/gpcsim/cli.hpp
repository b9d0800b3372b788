#pragma once

// Batch runs: one netlist, one analysis, one method, results written to disk.

#include "gpcsim/post.hpp"
#include "gpcsim/uq/ac.hpp"
#include "gpcsim/uq/collocation.hpp"
#include "gpcsim/uq/galerkin.hpp"
#include "gpcsim/uq/monte_carlo.hpp"
#include "gpcsim/uq/stochastic_testing.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace gpcsim::cli {

enum class Method { ST, SG, SC, MC };

inline const char* method_name(Method m) {
    switch (m) {
    case Method::ST: return "st";
    case Method::SG: return "sg";
    case Method::SC: return "sc";
    case Method::MC: return "mc";
    }
    return "?";
}

enum class ExitCode : int { Ok = 0, Usage = 1, Parse = 2, Dc = 3, Transient = 4, Selection = 5 };

struct RunConfig {
    std::string netlist;
    std::string analysis = "dc";  // dc | dcsweep | tran | ac
    Method method = Method::ST;
    int order = 2;
    std::optional<double> beta;
    std::uint64_t seed = 1;
    std::optional<long> samples;
    std::optional<double> fixed_step;
    bool mean_point = false;
    Scheme scheme = Scheme::Gear2;
    std::optional<double> abstol, reltol, ltetol;
    std::string out = ".";
    std::string format = "both";  // csv | json | both
    int jobs = 1;

    /// Rejects flags that do not apply to the chosen method or analysis.
    void validate() const {
        if (analysis != "dc" && analysis != "dcsweep" && analysis != "tran" && analysis != "ac")
            throw DomainError("unknown analysis '" + analysis + "'");
        if (order < 0) throw DomainError("--order must be >= 0");
        if (samples && method != Method::MC) throw DomainError("--samples applies to --method mc only");
        if (samples && *samples < 1) throw DomainError("--samples must be >= 1");
        if (mean_point && method != Method::MC) throw DomainError("--mean-point applies to --method mc only");
        if (beta && method != Method::ST) throw DomainError("--beta applies to --method st only");
        if (beta && !(*beta > 0.0 && *beta < 1.0)) throw DomainError("--beta must lie in (0, 1)");
        if (fixed_step && analysis != "tran") throw DomainError("--fixed-step applies to tran only");
        if (fixed_step && !(*fixed_step > 0.0)) throw DomainError("--fixed-step must be positive");
        if (analysis == "ac" && method != Method::ST) throw DomainError("ac analysis is available with --method st");
        if (format != "csv" && format != "json" && format != "both")
            throw DomainError("--format must be csv, json or both");
        if (jobs < 1) throw DomainError("--jobs must be >= 1");
    }

    SolverOptions solver_options() const {
        SolverOptions o;
        if (abstol) o.newton.abstol = *abstol;
        if (reltol) o.newton.reltol = *reltol;
        if (ltetol) o.step.lte_tol = *ltetol;
        o.step.scheme = scheme;
        if (beta) o.selection.beta = *beta;
        if (fixed_step) {
            o.h_fixed = fixed_step;
            if (method == Method::ST || method == Method::SG) o.step.fixed_step = fixed_step;
        }
        o.jobs = jobs;
        return o;
    }
};

/// 64-bit FNV-1a, used to tie manifests to the netlist text they came from.
inline std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct RunArtifacts {
    std::vector<std::string> files;
    nlohmann::json manifest;
};

namespace detail {

inline Analysis make_analysis(const StochasticCircuit& c, const std::string& kind) {
    const auto& net = c.netlist();
    if (kind == "dc" || kind == "ac") return Analysis::dc();
    if (kind == "dcsweep") {
        if (!net.dcsweep) throw DomainError("netlist has no .dcsweep directive");
        return Analysis::dcsweep(*net.dcsweep);
    }
    if (!net.tran) throw DomainError("netlist has no .tran directive");
    return Analysis::tran(net.tran->tstop);
}

inline void strip_timing(nlohmann::json& j) {
    if (!j.contains("stats")) return;
    j["stats"].erase("wall_seconds");
    j["stats"].erase("linear_solve_seconds");
}

} // namespace detail

/// Runs one configuration and writes `<stem>.<analysis>.<method>.{stats.csv,
/// coeffs.json,manifest.json}` into cfg.out. Timing lives in the manifest
/// only, so the CSV and JSON outputs are byte-identical across reruns.
inline RunArtifacts run(const RunConfig& cfg) {
    cfg.validate();
    const std::string text = read_file(cfg.netlist);
    const StochasticCircuit c = StochasticCircuit::from_text(text);
    for (const auto& w : c.warnings()) std::cerr << "warning: " << w << '\n';
    if (c.num_params() == 0) throw DomainError("netlist declares no .random parameters");
    const Analysis a = detail::make_analysis(c, cfg.analysis);
    SolverOptions opts = cfg.solver_options();
    if (cfg.analysis == "tran" && c.netlist().tran->hmax > 0.0) opts.step.h_max = c.netlist().tran->hmax;
    const auto states = c.output_states();

    namespace fs = std::filesystem;
    fs::create_directories(cfg.out);
    const std::string stem = (fs::path(cfg.out) /
                              (fs::path(cfg.netlist).stem().string() + "." + cfg.analysis + "." + method_name(cfg.method)))
                                 .string();
    RunArtifacts art;
    const bool csv = cfg.format != "json", json = cfg.format != "csv";
    auto write = [&](const std::string& path, const std::string& body) {
        std::ofstream f(path, std::ios::binary);
        if (!f) throw Error("cannot write '" + path + "'");
        f << body;
        art.files.push_back(path);
    };

    RunStats stats;
    std::size_t points = 0;
    if (cfg.analysis == "ac") {
        if (!c.netlist().ac) throw DomainError("netlist has no .ac directive");
        const auto ac = ac_solve(c, cfg.order, c.netlist().ac->frequencies(), opts);
        stats = ac.stats;
        points = ac.frequencies.size();
        if (csv) {
            // Real and imaginary parts have exact moments; magnitudes are sampled.
            StatSeries s;
            s.times = ac.frequencies;
            const auto F = static_cast<Eigen::Index>(points);
            s.mean.resize(static_cast<Eigen::Index>(3 * states.size()), F);
            s.std.resize(s.mean.rows(), F);
            const GpcBasisSet basis(ac.germs, ac.order);
            for (std::size_t si = 0; si < states.size(); ++si) {
                const std::string& name = c.state_names()[static_cast<std::size_t>(states[si])];
                s.state_names.insert(s.state_names.end(), {"re(" + name + ")", "im(" + name + ")", "mag(" + name + ")"});
                for (Eigen::Index f = 0; f < F; ++f) {
                    const Eigen::MatrixXcd& cf = ac.coeffs[static_cast<std::size_t>(f)];
                    const Eigen::Index r = static_cast<Eigen::Index>(3 * si);
                    const auto re = moments_from_coeffs(cf.row(states[si]).real());
                    const auto im = moments_from_coeffs(cf.row(states[si]).imag());
                    s.mean(r, f) = re.mean(0);
                    s.std(r, f) = re.std(0);
                    s.mean(r + 1, f) = im.mean(0);
                    s.std(r + 1, f) = im.std(0);
                    std::mt19937_64 rng(cfg.seed);
                    double sum = 0.0, sum2 = 0.0;
                    const int N = 10000;
                    Eigen::VectorXd xi(basis.dimension());
                    const Eigen::VectorXcd row = cf.row(states[si]).transpose();
                    for (int k = 0; k < N; ++k) {
                        for (int d = 0; d < basis.dimension(); ++d)
                            xi(d) = basis.params()[static_cast<std::size_t>(d)].sample(rng);
                        const double m = ac_magnitude(basis, row, xi);
                        sum += m;
                        sum2 += m * m;
                    }
                    s.mean(r + 2, f) = sum / N;
                    s.std(r + 2, f) = std::sqrt(std::max(0.0, (sum2 - sum * sum / N) / (N - 1)));
                }
            }
            std::ostringstream os;
            write_stats_csv(os, s);
            write(stem + ".stats.csv", os.str());
        }
        if (json) {
            auto j = to_json(ac, states);
            detail::strip_timing(j);
            write(stem + ".coeffs.json", j.dump(1));
        }
    } else if (cfg.method == Method::MC) {
        MonteCarloOptions mc;
        mc.samples = cfg.samples.value_or(1000);
        mc.seed = cfg.seed;
        mc.mean_point = cfg.mean_point || cfg.order == 0;
        opts.keep_states = states;
        const auto ens = mc_solve(c, mc, a, opts);
        stats = ens.stats;
        points = ens.times.size();
        const StatSeries s = ensemble_stats(ens);
        if (csv) {
            std::ostringstream os;
            write_stats_csv(os, s);
            write(stem + ".stats.csv", os.str());
        }
        if (json) {
            nlohmann::json j;
            j["analysis"] = analysis_name(a.kind);
            j["axis"] = s.times;
            j["samples"] = ens.size();
            j["failed"] = ens.failed;
            j["seed"] = cfg.seed;
            j["mean_point"] = mc.mean_point;
            for (Eigen::Index i = 0; i < s.mean.rows(); ++i) {
                auto row = [&](const Eigen::MatrixXd& m) {
                    const Eigen::RowVectorXd r = m.row(i);
                    return std::vector<double>(r.data(), r.data() + r.size());
                };
                j["states"][s.state_names[static_cast<std::size_t>(i)]] = {
                    {"mean", row(s.mean)}, {"std", row(s.std)}, {"stderr", row(s.stderr_mean)}};
            }
            write(stem + ".coeffs.json", j.dump(1));
        }
    } else {
        GpcTrajectory tr;
        const GpcBasisSet basis(c.germs(), cfg.order);
        switch (cfg.method) {
        case Method::ST: tr = st_solve(c, basis, a, opts); break;
        case Method::SG: tr = sg_solve(c, basis, a, opts); break;
        default: tr = sc_solve(c, basis, a, opts); break;
        }
        stats = tr.stats;
        points = tr.points();
        if (csv) {
            const StatSeries s = stats_over_time(tr);
            std::ostringstream os;
            write_stats_csv(os, s, states);
            write(stem + ".stats.csv", os.str());
        }
        if (json) {
            auto j = to_json(tr, states);
            detail::strip_timing(j);
            write(stem + ".coeffs.json", j.dump(1));
        }
    }

    nlohmann::json m;
    m["netlist"] = cfg.netlist;
    m["netlist_hash"] = fnv1a_hex(text);
    m["analysis"] = cfg.analysis;
    m["method"] = method_name(cfg.method);
    m["order"] = cfg.order;
    m["dimension"] = c.num_params();
    m["basis_size"] = num_basis(cfg.order, c.num_params());
    m["sc_tensor_nodes"] = tensor_grid_count(cfg.order, c.num_params());
    m["node_count"] = stats.node_count;
    m["cond_phi"] = std::isfinite(stats.cond_phi) ? nlohmann::json(stats.cond_phi) : nlohmann::json(nullptr);
    m["beta_used"] = std::isfinite(stats.beta_used) ? nlohmann::json(stats.beta_used) : nlohmann::json(nullptr);
    m["newton_iterations"] = stats.newton_iterations;
    m["accepted_steps"] = stats.accepted_steps;
    m["rejected_steps"] = stats.rejected_steps;
    m["points"] = points;
    m["samples"] = stats.samples;
    m["failed_samples"] = stats.failed_samples;
    m["factorizations"] = stats.factorizations;
    m["wall_seconds"] = stats.wall_seconds;
    m["linear_solve_seconds"] = stats.linear_solve_seconds;
    m["scheme"] = scheme_name(opts.step.scheme);
    m["fixed_step"] = opts.h_fixed ? nlohmann::json(*opts.h_fixed) : nlohmann::json(nullptr);
    m["abstol"] = opts.newton.abstol;
    m["reltol"] = opts.newton.reltol;
    m["ltetol"] = opts.step.lte_tol;
    m["seed"] = cfg.seed;
    write(stem + ".manifest.json", m.dump(1));
    art.manifest = std::move(m);
    return art;
}

/// Maps an exception escaping run() to its exit status. Testing-node
/// selection, a singular Phi and an over-budget candidate grid all count as
/// selection failures.
inline ExitCode exit_code_for(const std::exception_ptr& e) {
    try {
        std::rethrow_exception(e);
    } catch (const ParseError&) {
        return ExitCode::Parse;
    } catch (const DcFailure&) {
        return ExitCode::Dc;
    } catch (const TransientFailure&) {
        return ExitCode::Transient;
    } catch (const SelectionError&) {
        return ExitCode::Selection;
    } catch (const SingularMatrixError&) {
        return ExitCode::Selection;
    } catch (const BudgetError&) {
        return ExitCode::Selection;
    } catch (...) {
        return ExitCode::Usage;
    }
}

// ---- cost reports ---------------------------------------------------------

struct CostRow {
    std::string method;
    int order = 0;
    std::size_t nodes = 0;
    double wall_seconds = 0.0;
    long steps = 0;
    double node_ratio = 1.0;  // nu: nodes / reference nodes
    double time_ratio = 1.0;  // wall / reference wall
    double kappa = 1.0;       // time_ratio / node_ratio
};

/// Cost table relative to the ST manifest (or the first one when there is
/// no ST run). All manifests must come from the same netlist and analysis.
inline std::vector<CostRow> report_costs(const std::vector<nlohmann::json>& manifests) {
    if (manifests.empty()) throw DomainError("report needs at least one manifest");
    const auto& first = manifests.front();
    for (const auto& m : manifests) {
        if (m.at("netlist_hash") != first.at("netlist_hash"))
            throw DomainError("manifests come from different netlists");
        if (m.at("analysis") != first.at("analysis")) throw DomainError("manifests come from different analyses");
    }
    const nlohmann::json* ref = &first;
    for (const auto& m : manifests)
        if (m.at("method") == "st") {
            ref = &m;
            break;
        }
    const double ref_nodes = ref->at("node_count").get<double>();
    const double ref_wall = ref->at("wall_seconds").get<double>();
    std::vector<CostRow> rows;
    for (const auto& m : manifests) {
        CostRow r;
        r.method = m.at("method").get<std::string>();
        r.order = m.at("order").get<int>();
        r.nodes = m.at("node_count").get<std::size_t>();
        r.wall_seconds = m.at("wall_seconds").get<double>();
        r.steps = m.at("accepted_steps").get<long>();
        r.node_ratio = static_cast<double>(r.nodes) / ref_nodes;
        r.time_ratio = ref_wall > 0.0 ? r.wall_seconds / ref_wall : 1.0;
        r.kappa = r.time_ratio / r.node_ratio;
        if (&m == ref) r.node_ratio = r.time_ratio = r.kappa = 1.0;
        rows.push_back(r);
    }
    return rows;
}

inline void print_costs(std::ostream& os, const std::vector<CostRow>& rows) {
    char line[160];
    std::snprintf(line, sizeof line, "%-6s %5s %8s %12s %8s %10s %10s %8s\n", "method", "p", "nodes", "wall_s", "steps",
                  "nu", "t_ratio", "kappa");
    os << line;
    for (const auto& r : rows) {
        std::snprintf(line, sizeof line, "%-6s %5d %8zu %12.6f %8ld %10.4f %10.4f %8.3f\n", r.method.c_str(), r.order,
                      r.nodes, r.wall_seconds, r.steps, r.node_ratio, r.time_ratio, r.kappa);
        os << line;
    }
}

} // namespace gpcsim::cli
