#pragma once

// Tangential projection, Q-tensor proxy packing, surface traces and the
// projected L2 inner product for vertex-based tensor fields.

#include <cmath>
#include <string>

#include "tanfem/core/field.hpp"
#include "tanfem/geometry.hpp"
#include "tanfem/mesh.hpp"
#include "tanfem/quadrature.hpp"

namespace tanfem {

namespace detail {
inline void require_aligned(const TensorField& f, const GeometryData& g) {
    if (f.num_vertices() != g.vertex_normals.size())
        throw DimensionMismatch("field has " + std::to_string(f.num_vertices()) +
                                " vertices, geometry has " + std::to_string(g.vertex_normals.size()));
}
}  // namespace detail

/// Apply Pi to every slot, vertex by vertex.
inline TensorField project_tangential(const TensorField& field, const GeometryData& g) {
    detail::require_aligned(field, g);
    TensorField out = field;
    const std::size_t nv = field.num_vertices();
    for (std::size_t v = 0; v < nv; ++v) {
        const Mat3d p = projector(g.vertex_normals[v]);
        switch (field.degree) {
            case 0: break;
            case 1: out.set<1>(v, project_all(p, field.at<1>(v))); break;
            case 2: out.set<2>(v, project_all(p, field.at<2>(v))); break;
            default: throw UnsupportedDegree("project_tangential supports degrees 0..2");
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Q proxy

inline constexpr double kQTolerance = 1e-10;

/// Read the five proxy slots of a symmetric traceless matrix.
inline std::array<double, 5> q_pack(const Mat3d& m) {
    const double asym = std::max({std::abs(m(0, 1) - m(1, 0)), std::abs(m(0, 2) - m(2, 0)),
                                  std::abs(m(1, 2) - m(2, 1))});
    if (asym > kQTolerance) throw NotQTensor("matrix is not symmetric");
    if (std::abs(trace(m)) > kQTolerance) throw NotQTensor("matrix is not traceless");
    return {m(0, 0), m(0, 1), m(0, 2), m(1, 1), m(1, 2)};
}

inline QProxyField q_pack(const TensorField& field) {
    if (field.degree != 2) throw DimensionMismatch("q_pack expects a degree-2 field");
    QProxyField q(field.num_vertices());
    for (std::size_t v = 0; v < field.num_vertices(); ++v) {
        const auto p = q_pack(field.at<2>(v));
        for (int c = 0; c < 5; ++c) q(v, c) = p[static_cast<std::size_t>(c)];
    }
    return q;
}

inline Mat3d q_unpack(const QProxyField& q, std::size_t v) {
    return q_expand<double>({q(v, 0), q(v, 1), q(v, 2), q(v, 3), q(v, 4)});
}

inline TensorField q_unpack(const QProxyField& q) {
    TensorField f(2, q.num_vertices());
    for (std::size_t v = 0; v < q.num_vertices(); ++v) f.set<2>(v, q_unpack(q, v));
    return f;
}

/// Surface trace of the projected tensor: tr(q) - nu.q.nu.
template <class S>
S surface_trace(const Mat3<S>& q, const Vec3<S>& nu) {
    return trace(q) - dot(nu, matvec(q, nu));
}

/// Q-space representative Pi[q] + (nu.q.nu)/2 Pi of an ambient tensor.
template <class S>
Mat3<S> q_representative(const Mat3<S>& q, const Vec3<S>& nu) {
    const Mat3<S> p = projector(nu);
    return project_all(p, q) + p * (S(0.5) * dot(nu, matvec(q, nu)));
}

inline TensorField q_surface_extension_trace(const TensorField& qhat, const GeometryData& g) {
    detail::require_aligned(qhat, g);
    if (qhat.degree != 2) throw DimensionMismatch("expected a degree-2 field");
    TensorField out(0, qhat.num_vertices());
    for (std::size_t v = 0; v < qhat.num_vertices(); ++v)
        out.values[v] = surface_trace(qhat.at<2>(v), g.vertex_normals[v]);
    return out;
}

inline TensorField q_representative(const TensorField& qhat, const GeometryData& g) {
    detail::require_aligned(qhat, g);
    if (qhat.degree != 2) throw DimensionMismatch("expected a degree-2 field");
    TensorField out(2, qhat.num_vertices());
    for (std::size_t v = 0; v < qhat.num_vertices(); ++v)
        out.set<2>(v, q_representative(qhat.at<2>(v), g.vertex_normals[v]));
    return out;
}

// ---------------------------------------------------------------------------
// Inner product

/// Integral of Pi[a] : Pi[b] over the mesh with the edge-midpoint rule. The
/// fields are projected at the vertices before interpolation and again at the
/// quadrature point, so projecting the inputs beforehand changes nothing.
inline double inner_product(const TensorField& a, const TensorField& b, const GeometryData& g,
                            const SurfaceMesh& mesh) {
    if (a.degree != b.degree) throw DimensionMismatch("inner_product: degrees differ");
    if (a.num_vertices() != static_cast<std::size_t>(mesh.num_vertices()) ||
        b.num_vertices() != a.num_vertices())
        throw DimensionMismatch("inner_product: fields not aligned with mesh");
    if (a.degree > 2) throw UnsupportedDegree("inner_product supports degrees 0..2");
    const TensorField pa = project_tangential(a, g);
    const TensorField pb = project_tangential(b, g);
    double sum = 0.0;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const double area = mesh.area(t);
        for (const auto& q : kMidpointRule) {
            const Mat3d p = projector(interpolate_normal(mesh, g, t, q));
            double val = 0.0;
            switch (a.degree) {
                case 0:
                    val = interpolate_field<0>(mesh, pa, t, q)[0] * interpolate_field<0>(mesh, pb, t, q)[0];
                    break;
                case 1:
                    val = contract(project_all(p, interpolate_field<1>(mesh, pa, t, q)),
                                   project_all(p, interpolate_field<1>(mesh, pb, t, q)));
                    break;
                default:
                    val = contract(project_all(p, interpolate_field<2>(mesh, pa, t, q)),
                                   project_all(p, interpolate_field<2>(mesh, pb, t, q)));
                    break;
            }
            sum += val * area * q.weight_fraction;
        }
    }
    return sum;
}

/// Sample an ambient field functor at every vertex.
template <int D, class F>
TensorField sample_field(const SurfaceMesh& mesh, const F& fn) {
    TensorField f(D, static_cast<std::size_t>(mesh.num_vertices()));
    for (int v = 0; v < mesh.num_vertices(); ++v) {
        const Tensor<double, D> t = fn(mesh.vertex(v));
        f.set<D>(static_cast<std::size_t>(v), t);
    }
    return f;
}

}  // namespace tanfem
