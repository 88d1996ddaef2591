#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "tanfem/defects.hpp"
#include "tanfem/experiments.hpp"

using namespace tanfem;

namespace {

const Ellipsoid kEllipsoid{1.0, 0.5, 1.5};

// Off-vertex centre for planar test patterns on flat_grid(n, 2).
constexpr double kCx = 1.037, kCy = 0.951;

// Field of magnitude r turning winding times around the centre.
TensorField planar_vector(const SurfaceMesh& mesh, double winding) {
    const auto nv = static_cast<std::size_t>(mesh.num_vertices());
    TensorField f(1, nv);
    for (std::size_t v = 0; v < nv; ++v) {
        const Vec3d x = mesh.vertex(static_cast<int>(v));
        const double a = winding * std::atan2(x[1] - kCy, x[0] - kCx);
        const double r = std::hypot(x[1] - kCy, x[0] - kCx);
        f.set<1>(v, vec3(r * std::cos(a), r * std::sin(a), 0.0));
    }
    return f;
}

// Director at angle winding * theta, as the tangential Q tensor n n - I/2.
QProxyField planar_line_field(const SurfaceMesh& mesh, double winding) {
    const auto nv = static_cast<std::size_t>(mesh.num_vertices());
    QProxyField q(nv);
    for (std::size_t v = 0; v < nv; ++v) {
        const Vec3d x = mesh.vertex(static_cast<int>(v));
        const double a = winding * std::atan2(x[1] - kCy, x[0] - kCx);
        const Vec3d n = vec3(std::cos(a), std::sin(a), 0.0);
        Mat3d m = outer(n, n);
        m(0, 0) -= 0.5;
        m(1, 1) -= 0.5;
        const auto p = q_pack(m);
        for (int c = 0; c < 5; ++c) q(v, c) = p[static_cast<std::size_t>(c)];
    }
    return q;
}

}  // namespace

TEST(Defects, PlanarVectorWindings) {
    const SurfaceMesh mesh = primitives::flat_grid(20, 2.0);
    const GeometryData g = discrete_geometry(mesh);
    for (double w : {1.0, -1.0, 2.0}) {
        const DefectReport r = detect_defects(planar_vector(mesh, w), mesh, g);
        ASSERT_EQ(r.defects.size(), 1u) << "winding " << w;
        EXPECT_EQ(r.defects[0].charge, w);
        const Vec3d at = mesh.vertex(r.defects[0].vertex);
        EXPECT_LT(std::hypot(at[0] - kCx, at[1] - kCy), 0.2);
    }
}

TEST(Defects, PlanarLineFieldWindings) {
    const SurfaceMesh mesh = primitives::flat_grid(20, 2.0);
    const GeometryData g = discrete_geometry(mesh);
    for (double w : {0.5, -0.5, 1.0}) {
        const DefectReport r = detect_defects(planar_line_field(mesh, w), mesh, g);
        ASSERT_EQ(r.defects.size(), 1u) << "winding " << w;
        EXPECT_EQ(r.defects[0].charge, w);
        EXPECT_EQ(r.total_charge, w);
    }
}

TEST(Defects, ConstantFieldOnDiskHasNone) {
    const SurfaceMesh mesh = primitives::disk_fan(24);
    const GeometryData g = discrete_geometry(mesh);
    TensorField f(1, static_cast<std::size_t>(mesh.num_vertices()));
    for (std::size_t v = 0; v < f.num_vertices(); ++v) f.set<1>(v, vec3(1.0, 0.0, 0.0));
    const DefectReport r = detect_defects(f, mesh, g);
    EXPECT_TRUE(r.defects.empty());
    EXPECT_EQ(r.total_charge, 0.0);
}

TEST(Defects, ProjectedAxisFieldOnSphere) {
    // Pi e_z vanishes at both poles, each a source or sink of index +1; the
    // line field of t t - |t|^2 / 2 Pi with t = Pi e_z has the same defects.
    const SurfaceMesh mesh = primitives::icosphere(3);
    const GeometryData g = analytic_geometry(Sphere{}, mesh);
    const auto nv = static_cast<std::size_t>(mesh.num_vertices());
    TensorField f(1, nv);
    QProxyField q(nv);
    for (std::size_t v = 0; v < nv; ++v) {
        const Mat3d p = projector(g.vertex_normals[v]);
        const Vec3d t = matvec(p, vec3(0.0, 0.0, 1.0));
        f.set<1>(v, t);
        const auto packed = q_pack(outer(t, t) - p * (0.5 * dot(t, t)));
        for (int c = 0; c < 5; ++c) q(v, c) = packed[static_cast<std::size_t>(c)];
    }
    for (const DefectReport& r : {detect_defects(f, mesh, g), detect_defects(q, mesh, g)}) {
        EXPECT_EQ(r.count(1.0), 2);
        EXPECT_EQ(r.defects.size(), 2u);
        EXPECT_EQ(r.total_charge, 2.0);
    }
}

TEST(Defects, RotatedGradientOfXyzOnEllipsoid) {
    // Critical points of xyz on the ellipsoid: eight extrema (one per octant)
    // and six saddles on the axes. Rotation keeps the indices.
    const ManufacturedCase c = build_vector_case(kEllipsoid);
    const SurfaceMesh mesh = c.mesh(4);
    const GeometryData g = c.geometry(mesh);
    const DefectReport r = detect_defects(c.exact(mesh), mesh, g);
    EXPECT_EQ(r.count(1.0), 8);
    EXPECT_EQ(r.count(-1.0), 6);
    EXPECT_EQ(r.defects.size(), 14u);
    EXPECT_EQ(r.total_charge, 2.0);
}

TEST(Defects, LineFieldOfQFromVectorFollowsTheVector) {
    // q* = p* p* - |p*|^2 / 2 Pi has p* as its principal direction, so its
    // line field inherits the integer defects of p*.
    const ManufacturedCase c = build_qtensor_case(kEllipsoid);
    const SurfaceMesh mesh = c.mesh(4);
    const GeometryData g = c.geometry(mesh);
    const DefectReport r = detect_defects(q_pack(c.exact(mesh)), mesh, g);
    EXPECT_EQ(r.count(1.0), 8);
    EXPECT_EQ(r.count(-1.0), 6);
    EXPECT_EQ(r.total_charge, 2.0);
}

TEST(Defects, ChargesSumToEulerCharacteristicOnTorus) {
    const SurfaceMesh mesh = primitives::torus(40, 16);
    const GeometryData g = discrete_geometry(mesh);
    TensorField f(1, static_cast<std::size_t>(mesh.num_vertices()));
    for (std::size_t v = 0; v < f.num_vertices(); ++v) {
        const Vec3d x = mesh.vertex(static_cast<int>(v));
        f.set<1>(v, matvec(projector(g.vertex_normals[v]), vec3(-x[1], x[0], 0.0)));
    }
    const DefectReport r = detect_defects(f, mesh, g);
    EXPECT_TRUE(r.defects.empty());
    EXPECT_EQ(r.total_charge, 0.0);
}

TEST(Defects, NoiseIsAmbiguous) {
    const SurfaceMesh mesh = primitives::icosphere(3);
    const GeometryData g = analytic_geometry(Sphere{}, mesh);
    std::mt19937_64 rng(1);
    std::normal_distribution<double> n;
    TensorField f(1, static_cast<std::size_t>(mesh.num_vertices()));
    for (std::size_t v = 0; v < f.num_vertices(); ++v)
        f.set<1>(v, matvec(projector(g.vertex_normals[v]), vec3(n(rng), n(rng), n(rng))));
    EXPECT_THROW(detect_defects(f, mesh, g), AmbiguousWinding);
}

TEST(Defects, RejectsWrongShapes) {
    const SurfaceMesh mesh = primitives::icosphere(1);
    const GeometryData g = analytic_geometry(Sphere{}, mesh);
    EXPECT_THROW(detect_defects(TensorField(2, static_cast<std::size_t>(mesh.num_vertices())), mesh, g),
                 DimensionMismatch);
    EXPECT_THROW(detect_defects(QProxyField(3), mesh, g), DimensionMismatch);
}
