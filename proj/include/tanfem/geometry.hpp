#pragma once

// Surface geometry: normals, projectors, shape operator and curvatures, both
// from analytic level-set surfaces (exact, via dual numbers) and estimated
// from a triangulation.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "tanfem/core/dual.hpp"
#include "tanfem/core/tensor.hpp"
#include "tanfem/errors.hpp"
#include "tanfem/mesh.hpp"

namespace tanfem {

// ---------------------------------------------------------------------------
// Analytic surfaces. A surface type provides a templated level-set function
// phi(x) whose zero set is the surface. Everything else is derived from it.

struct Sphere {
    double radius = 1.0;

    template <class S>
    S phi(const Vec3<S>& x) const {
        return (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) * (1.0 / (radius * radius)) - 1.0;
    }
    Vec3d closest_point(const Vec3d& x) const { return normalized(x) * radius; }
};

struct Ellipsoid {
    double a = 1.0, b = 0.5, c = 1.5;

    template <class S>
    S phi(const Vec3<S>& x) const {
        return x[0] * x[0] * (1.0 / (a * a)) + x[1] * x[1] * (1.0 / (b * b)) +
               x[2] * x[2] * (1.0 / (c * c)) - 1.0;
    }
};

/// Wraps any generic callable `phi(const Vec3<S>&) -> S` as a surface.
template <class F>
struct LevelSet {
    F fn;
    template <class S>
    S phi(const Vec3<S>& x) const {
        return fn(x);
    }
};
template <class F>
LevelSet<F> level_set(F fn) {
    return LevelSet<F>{std::move(fn)};
}

template <class Surf>
concept AnalyticSurface = requires(const Surf& s, const Vec3d& x) {
    { s.phi(x) } -> std::convertible_to<double>;
};

namespace detail {

template <class S>
Vec3<Dual<S>> seed_point(const Vec3<S>& x) {
    Vec3<Dual<S>> r;
    for (int i = 0; i < 3; ++i) {
        r[i] = Dual<S>(x[i]);
        r[i].d[static_cast<std::size_t>(i)] = S(1.0);
    }
    return r;
}

}  // namespace detail

/// Ambient gradient of phi at x.
template <AnalyticSurface Surf, class S>
Vec3<S> phi_gradient(const Surf& surf, const Vec3<S>& x) {
    const Dual<S> f = surf.phi(detail::seed_point(x));
    return vec3<S>(f.d[0], f.d[1], f.d[2]);
}

/// Unit normal extended off the surface as grad(phi) / |grad(phi)|.
template <AnalyticSurface Surf, class S>
Vec3<S> surface_normal(const Surf& surf, const Vec3<S>& x) {
    using std::sqrt;
    const Vec3<S> g = phi_gradient(surf, x);
    const S len = sqrt(dot(g, g));
    if (value_of(len) < 1e-10) throw SingularGradient("level-set gradient vanishes");
    return g * (S(1.0) / len);
}

/// Shape operator B = -Pi (grad nu) Pi, symmetrized, at an arbitrary point of
/// the tubular neighbourhood (uses the extended normal there).
template <AnalyticSurface Surf, class S>
Mat3<S> shape_operator(const Surf& surf, const Vec3<S>& x) {
    const Vec3<Dual<S>> nd = surface_normal(surf, detail::seed_point(x));
    Vec3<S> nu;
    Mat3<S> jac;  // jac(k, i) = d_k nu_i
    for (int i = 0; i < 3; ++i) {
        nu[i] = nd[i].v;
        for (int k = 0; k < 3; ++k) jac(k, i) = nd[i].d[static_cast<std::size_t>(k)];
    }
    const Mat3<S> p = projector(nu);
    const Mat3<S> b = matmul(matmul(p, jac), p) * S(-1.0);
    return (b + transpose(b)) * S(0.5);
}

/// Snap x onto the zero set by Newton steps along the level-set gradient.
template <AnalyticSurface Surf>
Vec3d project_to_surface(const Surf& surf, Vec3d x) {
    if constexpr (requires { surf.closest_point(x); }) {
        return surf.closest_point(x);
    } else {
        for (int it = 0; it < 50; ++it) {
            const double f = surf.phi(x);
            const Vec3d g = phi_gradient(surf, x);
            const double g2 = dot(g, g);
            if (g2 < 1e-20) throw SingularGradient("level-set gradient vanishes during projection");
            x = x - g * (f / g2);
            if (std::abs(f) < 1e-15) break;
        }
        return x;
    }
}

template <AnalyticSurface Surf>
auto surface_projection(const Surf& surf) {
    return [surf](const Vec3d& x) { return project_to_surface(surf, x); };
}

// ---------------------------------------------------------------------------
// Geometry data

enum class GeometrySource { Analytic, Discrete };

struct GeometryData {
    GeometrySource source = GeometrySource::Analytic;
    std::vector<Vec3d> vertex_normals;
    /// Per-element normal used for the element projector.
    std::vector<Vec3d> element_normals;
    std::vector<Mat3d> shape;
    std::vector<double> mean_curvature;
    std::vector<double> gauss_curvature;

    std::size_t num_elements() const { return shape.size(); }
    Mat3d element_projector(std::size_t e) const { return projector(element_normals[e]); }
};

/// Local geometry at a single point on the surface.
struct PointGeometry {
    Vec3d normal;
    Mat3d shape;
    double mean_curvature = 0.0;
    double gauss_curvature = 0.0;
};

inline void curvatures_from_shape(const Mat3d& b, double& h, double& k) {
    h = trace(b);
    k = 0.5 * (h * h - norm_squared(b));
}

template <AnalyticSurface Surf>
PointGeometry point_geometry(const Surf& surf, const Vec3d& x) {
    PointGeometry g;
    g.normal = surface_normal(surf, x);
    g.shape = shape_operator(surf, x);
    curvatures_from_shape(g.shape, g.mean_curvature, g.gauss_curvature);
    return g;
}

/// Exact geometry at arbitrary points (each point treated as one entity).
template <AnalyticSurface Surf>
GeometryData analytic_geometry(const Surf& surf, const std::vector<Vec3d>& points) {
    GeometryData g;
    g.source = GeometrySource::Analytic;
    for (const auto& x : points) {
        const PointGeometry pg = point_geometry(surf, x);
        g.vertex_normals.push_back(pg.normal);
        g.element_normals.push_back(pg.normal);
        g.shape.push_back(pg.shape);
        g.mean_curvature.push_back(pg.mean_curvature);
        g.gauss_curvature.push_back(pg.gauss_curvature);
    }
    return g;
}

inline Vec3d centroid(const SurfaceMesh& mesh, int t) {
    const auto& tri = mesh.triangle(t);
    return (mesh.vertex(tri[0]) + mesh.vertex(tri[1]) + mesh.vertex(tri[2])) * (1.0 / 3.0);
}

/// Exact geometry on a mesh: vertex normals at the vertices, element data at
/// the centroid projected onto the surface.
template <AnalyticSurface Surf>
GeometryData analytic_geometry(const Surf& surf, const SurfaceMesh& mesh) {
    GeometryData g;
    g.source = GeometrySource::Analytic;
    g.vertex_normals.reserve(static_cast<std::size_t>(mesh.num_vertices()));
    for (const auto& v : mesh.vertices()) g.vertex_normals.push_back(surface_normal(surf, v));
    const auto nt = static_cast<std::size_t>(mesh.num_triangles());
    g.element_normals.reserve(nt);
    g.shape.reserve(nt);
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const PointGeometry pg = point_geometry(surf, project_to_surface(surf, centroid(mesh, t)));
        g.element_normals.push_back(pg.normal);
        g.shape.push_back(pg.shape);
        g.mean_curvature.push_back(pg.mean_curvature);
        g.gauss_curvature.push_back(pg.gauss_curvature);
    }
    return g;
}

/// Gradients of the three barycentric coordinates of triangle t.
inline std::array<Vec3d, 3> barycentric_gradients(const SurfaceMesh& mesh, int t) {
    const auto& tri = mesh.triangle(t);
    const Vec3d& x0 = mesh.vertex(tri[0]);
    const Vec3d& x1 = mesh.vertex(tri[1]);
    const Vec3d& x2 = mesh.vertex(tri[2]);
    const Vec3d n = cross(x1 - x0, x2 - x0);
    const double twice_area = norm(n);
    const Vec3d un = n * (1.0 / twice_area);
    const double s = 1.0 / twice_area;
    return {cross(un, x2 - x1) * s, cross(un, x0 - x2) * s, cross(un, x1 - x0) * s};
}

/// Angle-weighted vertex normals.
inline std::vector<Vec3d> angle_weighted_normals(const SurfaceMesh& mesh) {
    std::vector<Vec3d> normals(static_cast<std::size_t>(mesh.num_vertices()));
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const Vec3d n = mesh.face_normal(t);
        const auto& tri = mesh.triangle(t);
        for (int k = 0; k < 3; ++k)
            normals[static_cast<std::size_t>(tri[static_cast<std::size_t>(k)])] +=
                n * mesh.corner_angle(t, k);
    }
    for (auto& n : normals) n = normalized(n);
    return normals;
}

/// Geometry estimated from the triangulation alone.
inline GeometryData discrete_geometry(const SurfaceMesh& mesh) {
    GeometryData g;
    g.source = GeometrySource::Discrete;
    g.vertex_normals = angle_weighted_normals(mesh);
    const auto nt = static_cast<std::size_t>(mesh.num_triangles());
    g.element_normals.reserve(nt);
    g.shape.reserve(nt);
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        if (!(mesh.area(t) > 0.0)) throw DegenerateElement("zero-area triangle " + std::to_string(t));
        const auto& tri = mesh.triangle(t);
        const auto grads = barycentric_gradients(mesh, t);
        Mat3d jac;  // jac(k, i) = d_k nu_i of the P1 interpolant
        Vec3d mean;
        for (int a = 0; a < 3; ++a) {
            const Vec3d& nv = g.vertex_normals[static_cast<std::size_t>(tri[static_cast<std::size_t>(a)])];
            jac += outer(grads[static_cast<std::size_t>(a)], nv);
            mean += nv;
        }
        const Mat3d p = projector(mesh.face_normal(t));
        const Mat3d b = matmul(matmul(p, jac), p) * -1.0;
        const Mat3d bs = (b + transpose(b)) * 0.5;
        double h = 0.0, k = 0.0;
        curvatures_from_shape(bs, h, k);
        g.element_normals.push_back(normalized(mean));
        g.shape.push_back(bs);
        g.mean_curvature.push_back(h);
        g.gauss_curvature.push_back(k);
    }
    return g;
}

// ---------------------------------------------------------------------------
// Geometric identity residuals

struct IdentityReport {
    double cayley_hamilton = 0.0;  ///< max |B^2 - H B + K Pi|
    double norm_relation = 0.0;    ///< max |(|B|^2) - (H^2 - 2K)|
    double tangential = 0.0;       ///< max |B Pi - B|
    double symmetry = 0.0;         ///< max |B - B^T|
    double unit_normal = 0.0;      ///< max ||nu| - 1|
    bool pass = false;

    double max_residual() const {
        return std::max({cayley_hamilton, norm_relation, tangential, symmetry, unit_normal});
    }
};

inline IdentityReport check_identities(const GeometryData& g, double tol) {
    IdentityReport r;
    for (std::size_t e = 0; e < g.num_elements(); ++e) {
        const Mat3d& b = g.shape[e];
        const double h = g.mean_curvature[e];
        const double k = g.gauss_curvature[e];
        const Mat3d p = g.element_projector(e);
        const Mat3d ch = matmul(b, b) - b * h + p * k;
        r.cayley_hamilton = std::max(r.cayley_hamilton, norm(ch));
        r.norm_relation = std::max(r.norm_relation, std::abs(norm_squared(b) - (h * h - 2.0 * k)));
        r.tangential = std::max(r.tangential, norm(matmul(b, p) - b));
        r.symmetry = std::max(r.symmetry, norm(b - transpose(b)));
        r.unit_normal = std::max(r.unit_normal, std::abs(norm(g.element_normals[e]) - 1.0));
    }
    for (const auto& n : g.vertex_normals)
        r.unit_normal = std::max(r.unit_normal, std::abs(norm(n) - 1.0));
    r.pass = r.max_residual() <= tol;
    return r;
}

}  // namespace tanfem
