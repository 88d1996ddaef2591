#pragma once

// Small generators for test and benchmark meshes.

#include <cmath>
#include <numbers>
#include <vector>

#include "tanfem/mesh.hpp"

namespace tanfem::primitives {

inline SurfaceMesh octahedron() {
    std::vector<Vec3d> v = {vec3(1.0, 0.0, 0.0), vec3(-1.0, 0.0, 0.0), vec3(0.0, 1.0, 0.0),
                            vec3(0.0, -1.0, 0.0), vec3(0.0, 0.0, 1.0), vec3(0.0, 0.0, -1.0)};
    std::vector<Triangle> t = {{0, 2, 4}, {2, 1, 4}, {1, 3, 4}, {3, 0, 4},
                               {2, 0, 5}, {1, 2, 5}, {3, 1, 5}, {0, 3, 5}};
    return SurfaceMesh(std::move(v), std::move(t));
}

/// Regular icosahedron inscribed in the unit sphere.
inline SurfaceMesh icosahedron() {
    const double p = (1.0 + std::sqrt(5.0)) / 2.0;
    const double s = 1.0 / std::sqrt(1.0 + p * p);
    std::vector<Vec3d> v = {
        vec3(-1.0, p, 0.0), vec3(1.0, p, 0.0), vec3(-1.0, -p, 0.0), vec3(1.0, -p, 0.0),
        vec3(0.0, -1.0, p), vec3(0.0, 1.0, p), vec3(0.0, -1.0, -p), vec3(0.0, 1.0, -p),
        vec3(p, 0.0, -1.0), vec3(p, 0.0, 1.0), vec3(-p, 0.0, -1.0), vec3(-p, 0.0, 1.0)};
    for (auto& x : v) x = x * s;
    std::vector<Triangle> t = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                               {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                               {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                               {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
    return SurfaceMesh(std::move(v), std::move(t));
}

inline Vec3d to_unit_sphere(const Vec3d& x) { return normalized(x); }

/// Same connectivity, every vertex moved by `fn`.
template <class Fn>
SurfaceMesh map_vertices(const SurfaceMesh& mesh, Fn&& fn) {
    std::vector<Vec3d> v(mesh.vertices().begin(), mesh.vertices().end());
    for (auto& x : v) x = fn(x);
    return SurfaceMesh(std::move(v), std::vector<Triangle>(mesh.triangles().begin(), mesh.triangles().end()));
}

/// Icosahedron refined `level` times as a flat polyhedron, then projected to
/// the unit sphere. Level k has 10 * 4^k + 2 vertices. Projecting once at the
/// end keeps the mesh spacing smooth across the coarse icosahedron edges,
/// which vertex-normal curvature estimates need for first-order accuracy.
inline SurfaceMesh icosphere(int level) {
    return map_vertices(refine(icosahedron(), {level, nullptr}), to_unit_sphere);
}

/// Upper half of a refined octahedron on the unit sphere; boundary is the equator.
inline SurfaceMesh hemisphere(int level) {
    std::vector<Vec3d> v = {vec3(1.0, 0.0, 0.0), vec3(-1.0, 0.0, 0.0), vec3(0.0, 1.0, 0.0),
                            vec3(0.0, -1.0, 0.0), vec3(0.0, 0.0, 1.0)};
    std::vector<Triangle> t = {{0, 2, 4}, {2, 1, 4}, {1, 3, 4}, {3, 0, 4}};
    return refine(SurfaceMesh(std::move(v), std::move(t)), {level, to_unit_sphere});
}

/// Structured torus: n_major x n_minor quads split into triangles, fully glued.
inline SurfaceMesh torus(int n_major, int n_minor, double major_radius = 1.0,
                         double minor_radius = 0.3) {
    std::vector<Vec3d> v;
    std::vector<Triangle> t;
    const double two_pi = 2.0 * std::numbers::pi;
    for (int i = 0; i < n_major; ++i) {
        const double a = two_pi * i / n_major;
        for (int j = 0; j < n_minor; ++j) {
            const double b = two_pi * j / n_minor;
            const double r = major_radius + minor_radius * std::cos(b);
            v.push_back(vec3(r * std::cos(a), r * std::sin(a), minor_radius * std::sin(b)));
        }
    }
    const auto id = [&](int i, int j) { return (i % n_major) * n_minor + (j % n_minor); };
    for (int i = 0; i < n_major; ++i)
        for (int j = 0; j < n_minor; ++j) {
            t.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            t.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    return SurfaceMesh(std::move(v), std::move(t));
}

/// Planar triangle fan around the origin in the xy-plane.
inline SurfaceMesh disk_fan(int segments, double radius = 1.0) {
    std::vector<Vec3d> v = {vec3(0.0, 0.0, 0.0)};
    std::vector<Triangle> t;
    for (int k = 0; k < segments; ++k) {
        const double a = 2.0 * std::numbers::pi * k / segments;
        v.push_back(vec3(radius * std::cos(a), radius * std::sin(a), 0.0));
        t.push_back({0, 1 + k, 1 + (k + 1) % segments});
    }
    return SurfaceMesh(std::move(v), std::move(t));
}

/// Square [0, size]^2 in the xy-plane, n x n cells, alternating diagonals.
inline SurfaceMesh flat_grid(int n, double size = 1.0) {
    std::vector<Vec3d> v;
    std::vector<Triangle> t;
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i) v.push_back(vec3(size * i / n, size * j / n, 0.0));
    const auto id = [n](int i, int j) { return j * (n + 1) + i; };
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            if ((i + j) % 2 == 0) {
                t.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
                t.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
            } else {
                t.push_back({id(i, j), id(i + 1, j), id(i, j + 1)});
                t.push_back({id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)});
            }
        }
    return SurfaceMesh(std::move(v), std::move(t));
}

/// Open cylinder x^2 + y^2 = radius^2, z in [0, height], outward normals.
inline SurfaceMesh cylinder(int n_around, int n_height, double radius = 1.0, double height = 1.0) {
    std::vector<Vec3d> v;
    std::vector<Triangle> t;
    for (int j = 0; j <= n_height; ++j)
        for (int i = 0; i < n_around; ++i) {
            const double a = 2.0 * std::numbers::pi * i / n_around;
            v.push_back(vec3(radius * std::cos(a), radius * std::sin(a), height * j / n_height));
        }
    const auto id = [n_around](int i, int j) { return j * n_around + (i % n_around); };
    for (int j = 0; j < n_height; ++j)
        for (int i = 0; i < n_around; ++i) {
            t.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            t.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    return SurfaceMesh(std::move(v), std::move(t));
}

}  // namespace tanfem::primitives
