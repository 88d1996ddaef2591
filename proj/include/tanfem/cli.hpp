#pragma once

// Command layer behind the `tanfem` executable. Every command reads a
// RunConfig, validates it and its paths, computes, and writes CSV/VTK/OFF
// outputs into the configured directory.
//
// Exit codes: 0 ok, 1 check breach, 2 configuration or input error,
// 3 numerical failure (partial outputs are kept).

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "tanfem/checks.hpp"
#include "tanfem/config.hpp"
#include "tanfem/experiments.hpp"
#include "tanfem/ldg.hpp"
#include "tanfem/mesh.hpp"

namespace tanfem {

enum ExitCode : int { kExitOk = 0, kExitCheckFailed = 1, kExitConfig = 2, kExitNumeric = 3 };

struct CliOptions {
    std::string command;
    std::string config_path;  ///< empty: built-in defaults
    std::vector<std::string> overrides;
    std::optional<int> threads;
};

inline const std::vector<std::string>& cli_commands() {
    static const std::vector<std::string> names{"convergence", "ldg", "check", "solve", "refine"};
    return names;
}

/// Configuration and input errors map to 2, everything else to 3.
inline int exit_code_for(const Error& e) {
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const ParseError*>(&e) ||
        dynamic_cast<const TopologyError*>(&e) || dynamic_cast<const IoError*>(&e) ||
        dynamic_cast<const DegenerateElement*>(&e) || dynamic_cast<const NoBoundary*>(&e))
        return kExitConfig;
    return kExitNumeric;
}

namespace detail {

inline std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

inline std::string sci(double v) { return fmt("%.10e", v); }

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("write failed for " + path.string());
}

inline std::optional<int> threads_from_env() {
    const char* env = std::getenv("TANFEM_THREADS");
    if (env == nullptr || *env == '\0') return std::nullopt;
    return static_cast<int>(parse_integer("TANFEM_THREADS", env));
}

inline std::filesystem::path prepare_output(const RunConfig& cfg) {
    const std::filesystem::path dir(cfg.output_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir))
        throw IoError("cannot create output directory " + dir.string());
    return dir;
}

inline std::vector<NamedField> solution_fields(const SolveOutcome& o, FieldKind kind) {
    TensorField err = o.solution;
    for (std::size_t i = 0; i < err.values.size(); ++i) err.values[i] -= o.exact.values[i];
    if (kind == FieldKind::Vector)
        return {NamedField::of("solution", o.solution), NamedField::of("exact", o.exact), NamedField::of("error", err)};
    return {NamedField::of("solution", o.solution), NamedField::of("exact", o.exact), NamedField::of("error", err),
            NamedField::of_q("solution_q", q_pack(o.solution))};
}

inline int cmd_convergence(const RunConfig& cfg, std::ostream& out) {
    const auto dir = prepare_output(cfg);
    const ManufacturedCase c = build_case(cfg);
    const auto hook = [&](int level, const SurfaceMesh& mesh, const SolveOutcome& o) {
        export_vtk(mesh, solution_fields(o, c.kind), (dir / ("level_" + std::to_string(level) + ".vtk")).string());
        out << "level " << level << ": dofs " << o.dofs << ", e_l2 " << sci(o.error_l2) << ", iterations "
            << o.stats.iterations << (o.stats.converged ? "" : " (not converged)") << '\n';
    };
    const StudyReport rep = run_convergence(c, cfg.levels, cfg.omega_t, cfg.geometry, cfg.variant, cfg.solver, hook);
    write_text(dir / "study.csv", study_csv(rep));
    out << "fitted order " << fmt("%.4f", rep.eoc()) << " (r^2 " << fmt("%.4f", rep.fit.r_squared) << ")\n";
    bool converged = rep.all_converged();
    if (!cfg.omega_t_sweep.empty()) {
        const StudyReport sweep =
            run_penalty_sweep(c, cfg.level, cfg.omega_t_sweep, cfg.geometry, cfg.variant, cfg.solver);
        write_text(dir / "sweep.csv", study_csv(sweep));
        converged = converged && sweep.all_converged();
    }
    if (!converged) {
        out << "linear solver did not converge on every level\n";
        return kExitNumeric;
    }
    return kExitOk;
}

inline int cmd_solve(const RunConfig& cfg, std::ostream& out) {
    const auto dir = prepare_output(cfg);
    const ManufacturedCase c = build_case(cfg);
    const SurfaceMesh mesh = c.mesh(cfg.level);
    const SolveOutcome o = solve_case(c, mesh, cfg.omega_t, cfg.geometry, cfg.variant, cfg.solver);
    export_vtk(mesh, solution_fields(o, c.kind), (dir / "solution.vtk").string());
    StudyReport rep;
    rep.rows.push_back(make_row(cfg.level, mesh, cfg.omega_t, o));
    write_text(dir / "solve.csv", study_csv(rep));
    out << "dofs " << o.dofs << ", e_l2 " << sci(o.error_l2) << ", e_l1n " << sci(o.error_l1n) << ", normal "
        << sci(o.normal_residual) << '\n';
    if (!o.stats.converged) {
        out << "linear solver did not converge\n";
        return kExitNumeric;
    }
    return kExitOk;
}

inline int cmd_refine(const RunConfig& cfg, std::ostream& out) {
    const auto dir = prepare_output(cfg);
    const SurfaceMesh mesh = build_mesh(cfg, cfg.refine_levels);
    write_off(mesh, (dir / "refined.off").string());
    out << "refined mesh: " << mesh.num_vertices() << " vertices, " << mesh.num_triangles() << " triangles\n";
    return kExitOk;
}

inline int cmd_check(const RunConfig& cfg, std::ostream& out) {
    const auto dir = prepare_output(cfg);
    std::optional<SurfaceMesh> mesh;
    if (cfg.geometry == GeometryChoice::Discrete || !cfg.mesh_path.empty()) mesh = build_mesh(cfg, cfg.level);
    const CheckReport rep =
        cfg.geometry == GeometryChoice::Discrete
            ? discrete_checks(*mesh)
            : std::visit([&](const auto& s) { return analytic_checks(s, cfg.check_points, cfg.check_seed); },
                         cfg.analytic_surface());
    write_text(dir / "check.csv", rep.csv());
    for (const auto& i : rep.items)
        out << i.name << ": " << sci(i.residual) << " (tolerance " << sci(i.tolerance) << ") "
            << (i.pass() ? "ok" : "BREACH") << '\n';
    return rep.pass() ? kExitOk : kExitCheckFailed;
}

inline std::string histogram_csv(const EnsembleResult& e) {
    std::string s = "nodes,wedges,other,charge_sum,runs\n";
    for (const auto& [counts, n] : e.histogram) {
        const double sum = 0.5 * counts.nodes - 0.5 * counts.wedges;
        s += std::to_string(counts.nodes) + ',' + std::to_string(counts.wedges) + ',' + std::to_string(counts.other) +
             ',' + fmt("%g", sum) + ',' + std::to_string(n) + '\n';
    }
    return s;
}

inline std::string runs_csv(const EnsembleResult& e) {
    std::string s = "run,seed,completed,steady,monotone,steps,final_energy,stationarity,total_charge,nodes,wedges,"
                    "other,failure\n";
    for (std::size_t i = 0; i < e.runs.size(); ++i) {
        const RelaxationTrace& r = e.runs[i];
        const DefectCounts c = r.defects ? count_defects(*r.defects) : DefectCounts{};
        std::string failure = r.failure;
        for (char& ch : failure)
            if (ch == ',' || ch == '\n') ch = ';';
        s += std::to_string(i) + ',' + std::to_string(r.seed) + ',' + (r.completed ? "1" : "0") + ',' +
             (r.steady ? "1" : "0") + ',' + (r.monotone ? "1" : "0") + ',' + std::to_string(r.steps.size()) + ',' +
             sci(r.final_energy()) + ',' + sci(r.stationarity) + ',' +
             (r.defects ? fmt("%g", r.defects->total_charge) : std::string("nan")) + ',' + std::to_string(c.nodes) +
             ',' + std::to_string(c.wedges) + ',' + std::to_string(c.other) + ',' + failure + '\n';
    }
    return s;
}

inline std::string energy_trace_csv(const EnsembleResult& e) {
    std::string s = "run,step,time,tau,energy,newton_iterations,rate\n";
    for (std::size_t i = 0; i < e.runs.size(); ++i) {
        const RelaxationTrace& r = e.runs[i];
        s += std::to_string(i) + ",0," + sci(0.0) + ',' + sci(0.0) + ',' + sci(r.initial_energy) + ",0," + sci(0.0) +
             '\n';
        for (const auto& st : r.steps)
            s += std::to_string(i) + ',' + std::to_string(st.step) + ',' + sci(st.time) + ',' + sci(st.tau) + ',' +
                 sci(st.energy) + ',' + std::to_string(st.newton_iterations) + ',' + sci(st.rate) + '\n';
    }
    return s;
}

inline int cmd_ldg(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const SurfaceMesh mesh = build_mesh(cfg, cfg.level);
    if (!mesh.is_closed()) {
        err << "closed mesh required\n";
        return kExitConfig;
    }
    const auto dir = prepare_output(cfg);
    const GeometryData g = build_geometry(cfg, mesh);
    const EnsembleResult e = ensemble(
        mesh, g, cfg.ldg, cfg.n_runs,
        [&](int run, const RelaxationTrace& r) {
            out << "run " << run << " (seed " << r.seed << "): " << r.steps.size() << " steps, energy "
                << sci(r.final_energy()) << (r.steady ? ", steady" : "") << (r.completed ? "" : ", FAILED") << '\n';
        },
        cfg.threads);
    write_text(dir / "histogram.csv", histogram_csv(e));
    write_text(dir / "runs.csv", runs_csv(e));
    write_text(dir / "energy_trace.csv", energy_trace_csv(e));
    if (e.best_run >= 0)
        export_vtk(mesh, {NamedField::of_q("q", e.runs[static_cast<std::size_t>(e.best_run)].state)},
                   (dir / "best.vtk").string());
    out << e.completed << "/" << e.runs.size() << " runs completed, " << e.steady << " steady\n";
    if (!e.all_completed()) {
        err << "failed runs:\n";
        for (std::size_t i = 0; i < e.runs.size(); ++i)
            if (!e.runs[i].completed) err << "  run " << i << " seed " << e.runs[i].seed << ": " << e.runs[i].failure << '\n';
        return kExitNumeric;
    }
    return kExitOk;
}

}  // namespace detail

/// Loads, overrides and validates the configuration, then runs the command.
inline int run_cli(const CliOptions& opts, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    try {
        if (!opts.config_path.empty()) cfg = load_config(opts.config_path);
        for (const auto& o : opts.overrides) apply_override(cfg, o);
        if (opts.threads) cfg.threads = *opts.threads;
        else if (const auto env = detail::threads_from_env()) cfg.threads = *env;
        cfg.validate();
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    }
    try {
        if (opts.command == "convergence") return detail::cmd_convergence(cfg, out);
        if (opts.command == "solve") return detail::cmd_solve(cfg, out);
        if (opts.command == "refine") return detail::cmd_refine(cfg, out);
        if (opts.command == "check") return detail::cmd_check(cfg, out);
        if (opts.command == "ldg") return detail::cmd_ldg(cfg, out, err);
        err << "error: unknown command '" << opts.command << "'\n";
        return kExitConfig;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e);
    }
}

}  // namespace tanfem
