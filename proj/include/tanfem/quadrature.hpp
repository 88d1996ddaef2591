#pragma once

// Edge-midpoint rule on triangles (exact for quadratics) and helpers for
// evaluating P1 fields and interpolated normals at its points.

#include <array>

#include "tanfem/core/field.hpp"
#include "tanfem/geometry.hpp"
#include "tanfem/mesh.hpp"

namespace tanfem {

struct QuadraturePoint {
    std::array<double, 3> bary;  ///< barycentric weights of the triangle's vertices
    double weight_fraction;      ///< fraction of the triangle area
};

inline constexpr std::array<QuadraturePoint, 3> kMidpointRule = {{
    {{0.5, 0.5, 0.0}, 1.0 / 3.0},
    {{0.0, 0.5, 0.5}, 1.0 / 3.0},
    {{0.5, 0.0, 0.5}, 1.0 / 3.0},
}};

inline Vec3d interpolate_position(const SurfaceMesh& mesh, int t, const QuadraturePoint& q) {
    const auto& tri = mesh.triangle(t);
    Vec3d x;
    for (int a = 0; a < 3; ++a)
        x += mesh.vertex(tri[static_cast<std::size_t>(a)]) * q.bary[static_cast<std::size_t>(a)];
    return x;
}

/// Renormalized P1 interpolant of the vertex normals.
inline Vec3d interpolate_normal(const SurfaceMesh& mesh, const GeometryData& g, int t,
                                const QuadraturePoint& q) {
    const auto& tri = mesh.triangle(t);
    Vec3d n;
    for (int a = 0; a < 3; ++a)
        n += g.vertex_normals[static_cast<std::size_t>(tri[static_cast<std::size_t>(a)])] *
             q.bary[static_cast<std::size_t>(a)];
    return normalized(n);
}

template <int D>
Tensor<double, D> interpolate_field(const SurfaceMesh& mesh, const TensorField& f, int t,
                                    const QuadraturePoint& q) {
    const auto& tri = mesh.triangle(t);
    Tensor<double, D> r;
    for (int a = 0; a < 3; ++a)
        r += f.at<D>(static_cast<std::size_t>(tri[static_cast<std::size_t>(a)])) *
             q.bary[static_cast<std::size_t>(a)];
    return r;
}

inline std::array<double, 5> interpolate_proxy(const SurfaceMesh& mesh, const QProxyField& f, int t,
                                               const QuadraturePoint& q) {
    const auto& tri = mesh.triangle(t);
    std::array<double, 5> r{};
    for (int a = 0; a < 3; ++a)
        for (int c = 0; c < 5; ++c)
            r[static_cast<std::size_t>(c)] +=
                f(static_cast<std::size_t>(tri[static_cast<std::size_t>(a)]), c) *
                q.bary[static_cast<std::size_t>(a)];
    return r;
}

}  // namespace tanfem
