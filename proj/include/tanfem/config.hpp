#pragma once

// Run configuration: INI text with `[section]` headers and `key = value`
// lines. Keys are addressed as `section.key`; unknown keys are rejected.

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "tanfem/experiments.hpp"
#include "tanfem/ldg.hpp"
#include "tanfem/mesh.hpp"

namespace tanfem {

using AnySurface = std::variant<Sphere, Ellipsoid>;

struct RunConfig {
    // [output]
    std::string output_dir = "tanfem_out";
    // [surface]
    std::string surface = "ellipsoid";  ///< sphere | ellipsoid | none
    double radius = 1.0;
    double axis_a = 1.0, axis_b = 0.5, axis_c = 1.5;
    // [mesh]
    std::string mesh_path;  ///< empty: reference mesh of the surface
    int level = 4;          ///< reference level, or refinements of mesh_path
    // [problem]
    FieldKind problem = FieldKind::Vector;
    GeometryChoice geometry = GeometryChoice::Analytic;
    OperatorVariant variant = OperatorVariant::Exact;
    double omega_t = 1000.0;
    // [study]
    std::vector<int> levels{4, 5, 6};
    std::vector<double> omega_t_sweep;
    // [solver]
    SolveConfig solver;
    // [ldg]
    LdGParams ldg;
    int n_runs = 1;
    // [check]
    int check_points = 100;
    std::uint64_t check_seed = 1;
    // [refine]
    int refine_levels = 1;
    // [run]
    int threads = 1;

    bool has_surface() const { return surface != "none"; }

    AnySurface analytic_surface() const {
        if (surface == "sphere") return Sphere{radius};
        if (surface == "ellipsoid") return Ellipsoid{axis_a, axis_b, axis_c};
        throw ConfigError("an analytic surface is required (surface.kind = sphere | ellipsoid)");
    }

    void validate() const {
        if (surface != "sphere" && surface != "ellipsoid" && surface != "none")
            throw ConfigError("surface.kind must be sphere, ellipsoid or none");
        if (!(radius > 0.0) || !(axis_a > 0.0) || !(axis_b > 0.0) || !(axis_c > 0.0))
            throw ConfigError("surface radii must be positive");
        if (level < 0 || level > 8) throw ConfigError("mesh.level must lie in 0..8");
        for (int l : levels)
            if (l < 0 || l > 8) throw ConfigError("study.levels must lie in 0..8");
        if (!(omega_t > 0.0)) throw ConfigError("problem.omega_t must be positive");
        for (double w : omega_t_sweep)
            if (!(w > 0.0)) throw ConfigError("study.omega_t_sweep values must be positive");
        if (n_runs < 1) throw ConfigError("ldg.n_runs must be at least 1");
        if (check_points < 1) throw ConfigError("check.points must be positive");
        if (refine_levels < 0 || refine_levels > 8) throw ConfigError("refine.levels must lie in 0..8");
        if (threads < 1) throw ConfigError("threads must be at least 1");
        if (!mesh_path.empty() && !std::filesystem::is_regular_file(mesh_path))
            throw ConfigError("mesh.path '" + mesh_path + "' is not a readable file");
        if (geometry == GeometryChoice::Analytic && !has_surface())
            throw ConfigError("problem.geometry = analytic needs surface.kind sphere or ellipsoid");
        solver.validate();
        ldg.validate();
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

inline double parse_double(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    double x = 0.0;
    try {
        x = std::stod(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != v.size()) throw ConfigError("key '" + key + "': '" + v + "' is not a number");
    return x;
}

inline long long parse_integer(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    long long x = 0;
    try {
        x = std::stoll(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != v.size()) throw ConfigError("key '" + key + "': '" + v + "' is not an integer");
    return x;
}

inline std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

using Setter = std::function<void(RunConfig&, const std::string& key, const std::string& value)>;

template <class T>
Setter set_double(T RunConfig::*field) {
    return [field](RunConfig& c, const std::string& k, const std::string& v) { c.*field = parse_double(k, v); };
}

template <class Fn>
Setter custom(Fn fn) {
    return [fn](RunConfig& c, const std::string& k, const std::string& v) { fn(c, k, v); };
}

inline const std::map<std::string, Setter>& config_keys() {
    static const std::map<std::string, Setter> keys = {
        {"output.dir", custom([](RunConfig& c, auto&, auto& v) { c.output_dir = v; })},
        {"surface.kind", custom([](RunConfig& c, auto&, auto& v) { c.surface = v; })},
        {"surface.radius", set_double(&RunConfig::radius)},
        {"surface.a", set_double(&RunConfig::axis_a)},
        {"surface.b", set_double(&RunConfig::axis_b)},
        {"surface.c", set_double(&RunConfig::axis_c)},
        {"mesh.path", custom([](RunConfig& c, auto&, auto& v) { c.mesh_path = v; })},
        {"mesh.level", custom([](RunConfig& c, auto& k, auto& v) { c.level = static_cast<int>(parse_integer(k, v)); })},
        {"problem.kind", custom([](RunConfig& c, auto& k, auto& v) {
             if (v == "vector") c.problem = FieldKind::Vector;
             else if (v == "qtensor") c.problem = FieldKind::QTensor;
             else throw ConfigError("key '" + k + "' must be vector or qtensor");
         })},
        {"problem.geometry", custom([](RunConfig& c, auto& k, auto& v) {
             if (v == "analytic") c.geometry = GeometryChoice::Analytic;
             else if (v == "discrete") c.geometry = GeometryChoice::Discrete;
             else throw ConfigError("key '" + k + "' must be analytic or discrete");
         })},
        {"problem.variant", custom([](RunConfig& c, auto&, auto& v) { c.variant = parse_variant(v); })},
        {"problem.omega_t", set_double(&RunConfig::omega_t)},
        {"study.levels", custom([](RunConfig& c, auto& k, auto& v) {
             c.levels.clear();
             for (const auto& s : split_list(v)) c.levels.push_back(static_cast<int>(parse_integer(k, s)));
         })},
        {"study.omega_t_sweep", custom([](RunConfig& c, auto& k, auto& v) {
             c.omega_t_sweep.clear();
             for (const auto& s : split_list(v)) c.omega_t_sweep.push_back(parse_double(k, s));
         })},
        {"solver.method", custom([](RunConfig& c, auto& k, auto& v) {
             if (v == "bicgstab") c.solver.method = SolverMethod::BiCGStabL;
             else if (v == "cg") c.solver.method = SolverMethod::CG;
             else throw ConfigError("key '" + k + "' must be bicgstab or cg");
         })},
        {"solver.l", custom([](RunConfig& c, auto& k, auto& v) { c.solver.l = static_cast<int>(parse_integer(k, v)); })},
        {"solver.preconditioner", custom([](RunConfig& c, auto& k, auto& v) {
             if (v == "none") c.solver.preconditioner = Preconditioner::None;
             else if (v == "jacobi") c.solver.preconditioner = Preconditioner::Jacobi;
             else if (v == "block_jacobi") c.solver.preconditioner = Preconditioner::BlockJacobi;
             else throw ConfigError("key '" + k + "' must be none, jacobi or block_jacobi");
         })},
        {"solver.rel_tol", custom([](RunConfig& c, auto& k, auto& v) { c.solver.rel_tol = parse_double(k, v); })},
        {"solver.max_iter",
         custom([](RunConfig& c, auto& k, auto& v) { c.solver.max_iter = static_cast<int>(parse_integer(k, v)); })},
        {"ldg.omega", custom([](RunConfig& c, auto& k, auto& v) { c.ldg.omega = parse_double(k, v); })},
        {"ldg.omega_t", custom([](RunConfig& c, auto& k, auto& v) { c.ldg.omega_t = parse_double(k, v); })},
        {"ldg.tau", custom([](RunConfig& c, auto& k, auto& v) { c.ldg.tau = parse_double(k, v); })},
        {"ldg.t_end", custom([](RunConfig& c, auto& k, auto& v) { c.ldg.t_end = parse_double(k, v); })},
        {"ldg.steady_tol", custom([](RunConfig& c, auto& k, auto& v) { c.ldg.steady_tol = parse_double(k, v); })},
        {"ldg.max_steps",
         custom([](RunConfig& c, auto& k, auto& v) { c.ldg.max_steps = static_cast<int>(parse_integer(k, v)); })},
        {"ldg.max_halvings",
         custom([](RunConfig& c, auto& k, auto& v) { c.ldg.max_halvings = static_cast<int>(parse_integer(k, v)); })},
        {"ldg.regrow_after",
         custom([](RunConfig& c, auto& k, auto& v) { c.ldg.regrow_after = static_cast<int>(parse_integer(k, v)); })},
        {"ldg.seed", custom([](RunConfig& c, auto& k, auto& v) {
             const long long s = parse_integer(k, v);
             if (s < 0) throw ConfigError("key '" + k + "' must be non-negative");
             c.ldg.seed = static_cast<std::uint64_t>(s);
         })},
        {"ldg.n_runs", custom([](RunConfig& c, auto& k, auto& v) { c.n_runs = static_cast<int>(parse_integer(k, v)); })},
        {"ldg.newton_tol", custom([](RunConfig& c, auto& k, auto& v) { c.ldg.newton.tol = parse_double(k, v); })},
        {"ldg.newton_max_iter",
         custom([](RunConfig& c, auto& k, auto& v) { c.ldg.newton.max_newton = static_cast<int>(parse_integer(k, v)); })},
        {"check.points",
         custom([](RunConfig& c, auto& k, auto& v) { c.check_points = static_cast<int>(parse_integer(k, v)); })},
        {"check.seed", custom([](RunConfig& c, auto& k, auto& v) {
             const long long s = parse_integer(k, v);
             if (s < 0) throw ConfigError("key '" + k + "' must be non-negative");
             c.check_seed = static_cast<std::uint64_t>(s);
         })},
        {"refine.levels",
         custom([](RunConfig& c, auto& k, auto& v) { c.refine_levels = static_cast<int>(parse_integer(k, v)); })},
        {"run.threads", custom([](RunConfig& c, auto& k, auto& v) { c.threads = static_cast<int>(parse_integer(k, v)); })},
    };
    return keys;
}

}  // namespace detail

/// Apply one `section.key = value` assignment.
inline void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value) {
    const auto& keys = detail::config_keys();
    const auto it = keys.find(key);
    if (it == keys.end()) throw ConfigError("unknown key '" + key + "'");
    it->second(cfg, key, detail::trim(value));
}

/// Apply an override of the form `section.key=value`.
inline void apply_override(RunConfig& cfg, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' is not of the form key=value");
    apply_setting(cfg, detail::trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

inline RunConfig parse_config(std::istream& in, const std::string& name = "<config>") {
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(name + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
    }
    RunConfig cfg;
    for (const auto& [section, body] : tree) {
        if (body.empty()) throw ConfigError("unknown key '" + section + "' (keys must sit inside a [section])");
        for (const auto& [key, value] : body) apply_setting(cfg, section + "." + key, value.data());
    }
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path);
    return parse_config(in, path);
}

/// Mesh for one refinement level: the surface's reference mesh, or the
/// configured mesh file refined `level` times. With a surface, the file's
/// vertices and every new midpoint are snapped onto it.
inline SurfaceMesh build_mesh(const RunConfig& cfg, int level) {
    if (cfg.mesh_path.empty()) {
        return std::visit([&](const auto& s) { return reference_mesh_for(s)(level); }, cfg.analytic_surface());
    }
    const std::string ext = std::filesystem::path(cfg.mesh_path).extension().string();
    const MeshFormat fmt = ext == ".obj" || ext == ".OBJ" ? MeshFormat::OBJ : MeshFormat::OFF;
    SurfaceMesh base = load_mesh(cfg.mesh_path, fmt);
    RefinementSpec spec{level, {}};
    if (cfg.has_surface()) {
        spec.projection = std::visit(
            [](const auto& s) { return std::function<Vec3d(const Vec3d&)>(surface_projection(s)); },
            cfg.analytic_surface());
        std::vector<Vec3d> snapped = base.vertices();
        for (auto& x : snapped) x = spec.projection(x);
        base = SurfaceMesh(std::move(snapped), base.triangles());
    }
    return refine(base, spec);
}

inline GeometryData build_geometry(const RunConfig& cfg, const SurfaceMesh& mesh) {
    if (cfg.geometry == GeometryChoice::Discrete) return discrete_geometry(mesh);
    return std::visit([&](const auto& s) { return analytic_geometry(s, mesh); }, cfg.analytic_surface());
}

/// Manufactured case on the configured surface, with meshes from `build_mesh`.
inline ManufacturedCase build_case(const RunConfig& cfg) {
    ManufacturedCase c = std::visit(
        [&](const auto& s) {
            return cfg.problem == FieldKind::Vector ? build_vector_case(s) : build_qtensor_case(s);
        },
        cfg.analytic_surface());
    c.mesh = [cfg](int level) { return build_mesh(cfg, level); };
    return c;
}

}  // namespace tanfem
