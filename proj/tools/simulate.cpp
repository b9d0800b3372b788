#include "gpcsim/cli.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <map>

using namespace gpcsim;

namespace {

void add_run_options(CLI::App* sub, cli::RunConfig& cfg) {
    static const std::map<std::string, cli::Method> methods{
        {"st", cli::Method::ST}, {"sg", cli::Method::SG}, {"sc", cli::Method::SC}, {"mc", cli::Method::MC}};
    static const std::map<std::string, Scheme> schemes{
        {"be", Scheme::BackwardEuler}, {"tr", Scheme::Trapezoidal}, {"gear2", Scheme::Gear2}};
    sub->add_option("netlist", cfg.netlist, "Netlist file")->required()->check(CLI::ExistingFile);
    sub->add_option("--method", cfg.method, "st | sg | sc | mc")
        ->transform(CLI::CheckedTransformer(methods, CLI::ignore_case));
    sub->add_option("--order", cfg.order, "gPC order p");
    sub->add_option("--beta", cfg.beta, "Testing-node selection threshold (st)");
    sub->add_option("--seed", cfg.seed, "Random seed (mc, sampled AC magnitudes)");
    sub->add_option("--samples", cfg.samples, "Monte Carlo sample count (mc)");
    sub->add_flag("--mean-point", cfg.mean_point, "Run every Monte Carlo sample at the germ means (mc)");
    sub->add_option("--fixed-step", cfg.fixed_step, "Uniform transient step; default span/2000 for sc and mc");
    sub->add_option("--scheme", cfg.scheme, "be | tr | gear2")
        ->transform(CLI::CheckedTransformer(schemes, CLI::ignore_case));
    sub->add_option("--abstol", cfg.abstol, "Newton absolute tolerance");
    sub->add_option("--reltol", cfg.reltol, "Newton relative tolerance");
    sub->add_option("--ltetol", cfg.ltetol, "Relative LTE tolerance");
    sub->add_option("--out", cfg.out, "Output directory");
    sub->add_option("--format", cfg.format, "csv | json | both")->check(CLI::IsMember({"csv", "json", "both"}));
    sub->add_option("--jobs", cfg.jobs, "Worker threads for sc and mc");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stochastic circuit simulation with generalized polynomial chaos"};
    app.require_subcommand(1);
    cli::RunConfig cfg;
    for (const char* name : {"dc", "dcsweep", "tran", "ac"}) {
        auto* sub = app.add_subcommand(name, std::string(name) + " analysis");
        add_run_options(sub, cfg);
        sub->callback([&cfg, name] { cfg.analysis = name; });
    }
    std::vector<std::string> manifests;
    auto* report = app.add_subcommand("report", "Cost comparison across run manifests");
    report->add_option("manifests", manifests, "Manifest files")->required()->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : static_cast<int>(cli::ExitCode::Usage);
    }

    try {
        if (report->parsed()) {
            std::vector<nlohmann::json> ms;
            for (const auto& path : manifests) ms.push_back(nlohmann::json::parse(cli::read_file(path)));
            cli::print_costs(std::cout, cli::report_costs(ms));
            return 0;
        }
        const auto art = cli::run(cfg);
        const auto& m = art.manifest;
        std::cerr << m["method"].get<std::string>() << " p=" << m["order"] << " K=" << m["basis_size"]
                  << " nodes=" << m["node_count"] << " newton=" << m["newton_iterations"]
                  << " steps=" << m["accepted_steps"];
        if (!m["cond_phi"].is_null()) std::cerr << " cond(Phi)=" << m["cond_phi"] << " beta=" << m["beta_used"];
        std::cerr << " wall=" << m["wall_seconds"] << "s\n";
        for (const auto& f : art.files) std::cout << f << '\n';
        return 0;
    } catch (...) {
        const auto code = cli::exit_code_for(std::current_exception());
        try {
            throw;
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << '\n';
        }
        return static_cast<int>(code);
    }
}
