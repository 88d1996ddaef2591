#include <iostream>

#include "CLI11.hpp"
#include "tanfem/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Tangential tensor field FEM on triangulated surfaces"};
    app.require_subcommand(1);
    tanfem::CliOptions opts;

    const std::vector<std::pair<std::string, std::string>> commands{
        {"convergence", "manufactured-solution convergence study (study.csv, level_*.vtk, sweep.csv)"},
        {"ldg", "Landau-de Gennes seed ensemble (histogram.csv, runs.csv, energy_trace.csv, best.vtk)"},
        {"check", "identity, tangentiality, extension and div(Rot) residual checks (check.csv)"},
        {"solve", "single manufactured solve (solve.csv, solution.vtk)"},
        {"refine", "refine a mesh and write refined.off"},
    };
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("config", opts.config_path, "INI configuration file")->check(CLI::ExistingFile);
        sub->add_option("-s,--set", opts.overrides, "override a setting, section.key=value (repeatable)");
        sub->add_option("-j,--threads", opts.threads, "worker threads (default: TANFEM_THREADS or 1)");
        sub->callback([&opts, name = name] { opts.command = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? tanfem::kExitOk : tanfem::kExitConfig;
    }
    return tanfem::run_cli(opts, std::cout, std::cerr);
}
