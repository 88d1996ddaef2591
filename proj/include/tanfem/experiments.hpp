#pragma once

// Manufactured Helmholtz cases, error measures, convergence / penalty /
// ablation studies and least-squares convergence-order fits.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "tanfem/diff_ops.hpp"
#include "tanfem/fem.hpp"
#include "tanfem/geometry.hpp"
#include "tanfem/mesh.hpp"
#include "tanfem/mesh_primitives.hpp"
#include "tanfem/solver.hpp"
#include "tanfem/tensor_fields.hpp"

namespace tanfem {

/// A manufactured problem t*, f = -div grad t* + t* on one analytic surface.
/// Surface-dependent pieces are type-erased so studies can be driven from
/// configuration.
struct ManufacturedCase {
    std::string name;
    FieldKind kind = FieldKind::Vector;
    std::function<Vec3d(const Vec3d&)> project;                  ///< closest point on the surface
    std::function<GeometryData(const SurfaceMesh&)> geometry;    ///< analytic geometry on a mesh
    std::function<TensorField(const SurfaceMesh&)> exact;        ///< t* at the vertices
    std::function<TensorField(const SurfaceMesh&)> rhs;          ///< f at the vertices
    std::function<SurfaceMesh(int)> mesh;                        ///< reference mesh at a refinement level

    int degree() const { return kind == FieldKind::Vector ? 1 : 2; }
};

/// Icosphere of the given level mapped linearly to the ellipsoid's axes and
/// projected onto it. Level k has 10 * 4^k + 2 vertices.
inline SurfaceMesh ellipsoid_mesh(const Ellipsoid& e, int level) {
    return primitives::map_vertices(primitives::icosphere(level), [&](const Vec3d& x) {
        return project_to_surface(e, vec3(e.a * x[0], e.b * x[1], e.c * x[2]));
    });
}

template <AnalyticSurface Surf>
std::function<SurfaceMesh(int)> reference_mesh_for(const Surf& surf) {
    if constexpr (std::is_same_v<Surf, Ellipsoid>) {
        return [surf](int level) { return ellipsoid_mesh(surf, level); };
    } else {
        return [surf](int level) {
            return primitives::map_vertices(primitives::icosphere(level),
                                            [&](const Vec3d& x) { return project_to_surface(surf, x); });
        };
    }
}

/// p* = Rot(xyz), the rotated surface gradient of s = xyz.
template <AnalyticSurface Surf>
auto vector_solution(const Surf& surf) {
    return Rot<ProductXYZ, Surf>{ProductXYZ{}, surf};
}

/// q* = p* (x) p* - |p*|^2 / 2 Pi.
template <AnalyticSurface Surf>
auto qtensor_solution(const Surf& surf) {
    using P = Rot<ProductXYZ, Surf>;
    return QFromVector<P, Surf>{vector_solution(surf), surf};
}

template <AnalyticSurface Surf>
ManufacturedCase build_vector_case(const Surf& surf, std::string name = "vector") {
    ManufacturedCase c;
    c.name = std::move(name);
    c.kind = FieldKind::Vector;
    c.project = surface_projection(surf);
    c.geometry = [surf](const SurfaceMesh& m) { return analytic_geometry(surf, m); };
    c.exact = [surf](const SurfaceMesh& m) { return sample_field<1>(m, vector_solution(surf)); };
    c.rhs = [surf](const SurfaceMesh& m) { return manufactured_rhs(vector_solution(surf), surf, m); };
    c.mesh = reference_mesh_for(surf);
    return c;
}

template <AnalyticSurface Surf>
ManufacturedCase build_qtensor_case(const Surf& surf, std::string name = "qtensor") {
    ManufacturedCase c;
    c.name = std::move(name);
    c.kind = FieldKind::QTensor;
    c.project = surface_projection(surf);
    c.geometry = [surf](const SurfaceMesh& m) { return analytic_geometry(surf, m); };
    c.exact = [surf](const SurfaceMesh& m) { return sample_field<2>(m, qtensor_solution(surf)); };
    c.rhs = [surf](const SurfaceMesh& m) { return manufactured_rhs(qtensor_solution(surf), surf, m); };
    c.mesh = reference_mesh_for(surf);
    return c;
}

// ---------------------------------------------------------------------------
// Error measures

namespace detail {

inline void require_same_shape(const TensorField& a, const TensorField& b, const SurfaceMesh& mesh, int degree) {
    if (a.degree != degree || b.degree != degree) throw DimensionMismatch("error measure: wrong degree");
    if (a.num_vertices() != static_cast<std::size_t>(mesh.num_vertices()) || b.num_vertices() != a.num_vertices())
        throw DimensionMismatch("error measure: field not aligned with mesh");
}

/// Integral over M_h of fn(||a - b||, ||b||) with the midpoint rule on P1
/// interpolants.
template <class Fn>
void integrate_difference(const TensorField& a, const TensorField& b, const SurfaceMesh& mesh, Fn&& fn) {
    const int comps = a.components();
    std::vector<double> da(static_cast<std::size_t>(comps)), db(static_cast<std::size_t>(comps));
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto& tri = mesh.triangle(t);
        const double area = mesh.area(t);
        for (const auto& q : kMidpointRule) {
            double diff2 = 0.0, ref2 = 0.0;
            for (int c = 0; c < comps; ++c) {
                double va = 0.0, vb = 0.0;
                for (std::size_t k = 0; k < 3; ++k) {
                    const auto off = static_cast<std::size_t>(tri[k]) * static_cast<std::size_t>(comps) +
                                     static_cast<std::size_t>(c);
                    va += q.bary[k] * a.values[off];
                    vb += q.bary[k] * b.values[off];
                }
                diff2 += (va - vb) * (va - vb);
                ref2 += vb * vb;
            }
            fn(std::sqrt(diff2), std::sqrt(ref2), area * q.weight_fraction);
        }
    }
}

}  // namespace detail

/// Componentwise averaged L2 error: 1/2 (vectors) or 1/4 (2-tensors) times
/// the L2 norm of the Frobenius difference.
inline double error_l2(const TensorField& solution, const TensorField& exact, const SurfaceMesh& mesh, int degree) {
    detail::require_same_shape(solution, exact, mesh, degree);
    if (degree != 1 && degree != 2) throw UnsupportedDegree("error_l2 supports degrees 1 and 2");
    double sum = 0.0;
    detail::integrate_difference(solution, exact, mesh, [&](double d, double, double w) { sum += w * d * d; });
    return (degree == 1 ? 0.5 : 0.25) * std::sqrt(sum);
}

/// Normalized L1 error: integral of ||t - t*|| over (n - 1)^d times the
/// integral of ||t*||, with n = 3.
inline double error_l1_normalized(const TensorField& solution, const TensorField& exact, const SurfaceMesh& mesh,
                                  int degree) {
    detail::require_same_shape(solution, exact, mesh, degree);
    double num = 0.0, den = 0.0;
    detail::integrate_difference(solution, exact, mesh, [&](double d, double r, double w) {
        num += w * d;
        den += w * r;
    });
    if (den == 0.0) throw DimensionMismatch("error_l1_normalized: exact field vanishes");
    return num / (std::pow(2.0, degree) * den);
}

/// max over vertices of ||t - Pi[t]||.
inline double normal_residual(const TensorField& solution, const GeometryData& g) {
    const TensorField p = project_tangential(solution, g);
    const auto nc = static_cast<std::size_t>(solution.components());
    double m = 0.0;
    for (std::size_t v = 0; v < solution.num_vertices(); ++v) {
        double s = 0.0;
        for (std::size_t c = 0; c < nc; ++c) {
            const double d = solution.values[v * nc + c] - p.values[v * nc + c];
            s += d * d;
        }
        m = std::max(m, std::sqrt(s));
    }
    return m;
}

// ---------------------------------------------------------------------------
// Convergence-order fit

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

/// Least-squares line through (log x, log y).
inline SlopeFit fit_log_log(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw DimensionMismatch("fit needs at least two points");
    const auto n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        syy += ly * ly;
    }
    SlopeFit f;
    const double cxx = sxx - sx * sx / n, cxy = sxy - sx * sy / n, cyy = syy - sy * sy / n;
    f.slope = cxy / cxx;
    f.intercept = (sy - f.slope * sx) / n;
    f.r_squared = cyy > 0.0 ? (cxy * cxy) / (cxx * cyy) : 1.0;
    return f;
}

// ---------------------------------------------------------------------------
// Single solves and studies

enum class GeometryChoice { Analytic, Discrete };

inline std::string to_string(GeometryChoice g) { return g == GeometryChoice::Analytic ? "analytic" : "discrete"; }

struct SolveOutcome {
    TensorField solution;
    TensorField exact;
    GeometryData geometry;
    std::size_t dofs = 0;
    double h_mean = 0.0;
    double error_l2 = 0.0;
    double error_l1n = 0.0;
    double normal_residual = 0.0;
    SolveStats stats;
    double seconds = 0.0;
};

/// Solution field (degree 1 or 2) from a component-major DOF vector.
inline TensorField field_from_dofs(FieldKind kind, const Vector& x, std::size_t nv) {
    if (kind == FieldKind::Vector) return vector_field_from_dofs(x, nv);
    return q_unpack(proxy_from_dofs(x, nv));
}

/// Assemble and solve one manufactured problem on `mesh` and measure errors.
inline SolveOutcome solve_case(const ManufacturedCase& c, const SurfaceMesh& mesh, double omega_t,
                               GeometryChoice geometry, OperatorVariant variant, const SolveConfig& solver) {
    const auto start = std::chrono::steady_clock::now();
    SolveOutcome out;
    out.geometry = geometry == GeometryChoice::Analytic ? c.geometry(mesh) : discrete_geometry(mesh);
    const TensorField f = c.rhs(mesh);
    out.exact = c.exact(mesh);
    const BlockSystem sys = c.kind == FieldKind::Vector
                                ? assemble_vector_helmholtz(mesh, out.geometry, omega_t, f, variant)
                                : assemble_qtensor_helmholtz(mesh, out.geometry, omega_t, f, variant);
    const SolveResult res = linear_solve(sys, solver);
    out.stats = res.stats;
    out.solution = field_from_dofs(c.kind, res.x, sys.num_vertices);
    out.dofs = sys.size();
    out.h_mean = mesh.mean_edge_length();
    out.error_l2 = error_l2(out.solution, out.exact, mesh, c.degree());
    out.error_l1n = error_l1_normalized(out.solution, out.exact, mesh, c.degree());
    out.normal_residual = normal_residual(out.solution, out.geometry);
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

struct StudyRow {
    int level = 0;
    std::size_t vertices = 0;
    std::size_t dofs = 0;
    double h_mean = 0.0;
    double omega_t = 0.0;
    double error_l2 = 0.0;
    double error_l1n = 0.0;
    double normal_residual = 0.0;
    double eoc = std::nan("");  ///< local order against the previous row, in DOFs
    bool converged = false;
    int iterations = 0;
};

struct StudyReport {
    std::string case_name;
    GeometryChoice geometry = GeometryChoice::Analytic;
    OperatorVariant variant = OperatorVariant::Exact;
    std::vector<StudyRow> rows;
    SlopeFit fit;  ///< e ~ DOFs^(-eoc): fit.slope is -eoc

    double eoc() const { return -fit.slope; }
    bool all_converged() const {
        for (const auto& r : rows)
            if (!r.converged) return false;
        return true;
    }
    bool clean() const { return all_converged() && fit.r_squared >= 0.98; }
};

/// Optional per-level hook (for VTK snapshots).
using LevelHook = std::function<void(int level, const SurfaceMesh&, const SolveOutcome&)>;

inline StudyRow make_row(int level, const SurfaceMesh& mesh, double omega_t, const SolveOutcome& o) {
    StudyRow r;
    r.level = level;
    r.vertices = static_cast<std::size_t>(mesh.num_vertices());
    r.dofs = o.dofs;
    r.h_mean = o.h_mean;
    r.omega_t = omega_t;
    r.error_l2 = o.error_l2;
    r.error_l1n = o.error_l1n;
    r.normal_residual = o.normal_residual;
    r.converged = o.stats.converged;
    r.iterations = o.stats.iterations;
    return r;
}

/// Solve on consecutive refinement levels of the case's reference mesh and
/// fit the order of e(t) against the number of DOFs.
inline StudyReport run_convergence(const ManufacturedCase& c, const std::vector<int>& levels, double omega_t,
                                   GeometryChoice geometry, OperatorVariant variant, const SolveConfig& solver,
                                   const LevelHook& hook = {}) {
    if (levels.size() < 2) throw ConfigError("a convergence study needs at least two levels");
    StudyReport rep;
    rep.case_name = c.name;
    rep.geometry = geometry;
    rep.variant = variant;
    std::vector<double> dofs, errs;
    for (int level : levels) {
        const SurfaceMesh mesh = c.mesh(level);
        const SolveOutcome o = solve_case(c, mesh, omega_t, geometry, variant, solver);
        StudyRow row = make_row(level, mesh, omega_t, o);
        if (!rep.rows.empty()) {
            const auto& prev = rep.rows.back();
            row.eoc = -std::log(row.error_l2 / prev.error_l2) /
                      std::log(static_cast<double>(row.dofs) / static_cast<double>(prev.dofs));
        }
        rep.rows.push_back(row);
        dofs.push_back(static_cast<double>(row.dofs));
        errs.push_back(row.error_l2);
        if (hook) hook(level, mesh, o);
    }
    rep.fit = fit_log_log(dofs, errs);
    return rep;
}

/// Errors at one mesh level for each penalty value.
inline StudyReport run_penalty_sweep(const ManufacturedCase& c, int level, const std::vector<double>& omegas,
                                     GeometryChoice geometry, OperatorVariant variant, const SolveConfig& solver) {
    StudyReport rep;
    rep.case_name = c.name;
    rep.geometry = geometry;
    rep.variant = variant;
    const SurfaceMesh mesh = c.mesh(level);
    for (double w : omegas) rep.rows.push_back(make_row(level, mesh, w, solve_case(c, mesh, w, geometry, variant, solver)));
    return rep;
}

/// CSV with columns level, DOFs, h_mean, error_l2, error_l1n,
/// normal_residual, eoc (plus omega_t, vertices, iterations, converged).
inline std::string study_csv(const StudyReport& r) {
    std::string out = "level,vertices,dofs,h_mean,omega_t,error_l2,error_l1n,normal_residual,eoc,iterations,converged\n";
    char buf[512];
    for (const auto& row : r.rows) {
        std::snprintf(buf, sizeof buf, "%d,%zu,%zu,%.10e,%.6g,%.10e,%.10e,%.10e,%s,%d,%d\n", row.level, row.vertices,
                      row.dofs, row.h_mean, row.omega_t, row.error_l2, row.error_l1n, row.normal_residual,
                      std::isnan(row.eoc) ? "" : std::to_string(row.eoc).c_str(), row.iterations,
                      row.converged ? 1 : 0);
        out += buf;
    }
    return out;
}

}  // namespace tanfem
