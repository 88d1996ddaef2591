#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "tanfem/mesh_primitives.hpp"
#include "tanfem/tensor_fields.hpp"

using namespace tanfem;

namespace {

TensorField normals_as_field(const GeometryData& g) {
    TensorField f(1, g.vertex_normals.size());
    for (std::size_t v = 0; v < g.vertex_normals.size(); ++v) f.set<1>(v, g.vertex_normals[v]);
    return f;
}

}  // namespace

TEST(Projection, NormalFieldVanishes) {
    const auto mesh = primitives::icosphere(2);
    const auto g = analytic_geometry(Sphere{}, mesh);
    const auto p = project_tangential(normals_as_field(g), g);
    for (double x : p.values) EXPECT_NEAR(x, 0.0, 1e-15);

    TensorField nn(2, g.vertex_normals.size());
    for (std::size_t v = 0; v < g.vertex_normals.size(); ++v)
        nn.set<2>(v, outer(g.vertex_normals[v], g.vertex_normals[v]));
    for (double x : project_tangential(nn, g).values) EXPECT_NEAR(x, 0.0, 1e-15);
}

TEST(Projection, Idempotent) {
    const auto mesh = primitives::icosphere(2);
    const auto g = analytic_geometry(Sphere{}, mesh);
    TensorField f(2, g.vertex_normals.size());
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (double& x : f.values) x = u(rng);
    const auto once = project_tangential(f, g);
    const auto twice = project_tangential(once, g);
    for (std::size_t i = 0; i < once.values.size(); ++i)
        EXPECT_NEAR(once.values[i], twice.values[i], 1e-15);
}

TEST(Projection, DimensionMismatch) {
    const auto g = analytic_geometry(Sphere{}, primitives::octahedron());
    EXPECT_THROW(project_tangential(TensorField(1, 3), g), DimensionMismatch);
}

TEST(QProxy, PackReadsSlots) {
    Mat3d m;
    m(0, 0) = 1.0;
    m(1, 1) = -1.0;
    const auto p = q_pack(m);
    EXPECT_EQ(p, (std::array<double, 5>{1.0, 0.0, 0.0, -1.0, 0.0}));
    EXPECT_EQ(norm(q_expand<double>({0, 0, 0, 0, 0})), 0.0);
}

TEST(QProxy, RoundTripOnRandomSymmetricTraceless) {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        Mat3d a;
        for (int k = 0; k < 9; ++k) a[k] = u(rng);
        Mat3d m = (a + transpose(a)) * 0.5;
        const double tr = trace(m) / 3.0;
        for (int k = 0; k < 3; ++k) m(k, k) -= tr;
        m(2, 2) = -m(0, 0) - m(1, 1);
        const Mat3d back = q_expand(q_pack(m));
        for (int k = 0; k < 9; ++k) EXPECT_NEAR(back[k], m[k], 1e-15);
        std::array<double, 5> five{u(rng), u(rng), u(rng), u(rng), u(rng)};
        EXPECT_EQ(q_pack(q_expand(five)), five);
    }
}

TEST(QProxy, RejectsInvalidMatrices) {
    Mat3d m;
    m(0, 1) = 1.0;
    EXPECT_THROW(q_pack(m), NotQTensor);
    EXPECT_THROW(q_pack(identity3<double>()), NotQTensor);
}

TEST(QProxy, UnpackIsSymmetricTraceless) {
    QProxyField q(4);
    for (std::size_t i = 0; i < q.values.size(); ++i) q.values[i] = std::sin(3.0 * static_cast<double>(i));
    const auto f = q_unpack(q);
    for (std::size_t v = 0; v < 4; ++v) {
        const Mat3d m = f.at<2>(v);
        EXPECT_NEAR(trace(m), 0.0, 1e-15);
        EXPECT_EQ(norm(m - transpose(m)), 0.0);
    }
}

TEST(SurfaceTrace, Examples) {
    const Vec3d nu = normalized(vec3(0.2, -0.5, 0.8));
    EXPECT_NEAR(surface_trace(identity3<double>(), nu), 2.0, 1e-15);
    const Mat3d qhat = outer(nu, nu) - projector(nu) * 0.5;
    EXPECT_NEAR(surface_trace(project_all(projector(nu), qhat), nu), -1.0, 1e-15);
    EXPECT_NEAR(norm(q_representative(qhat, nu)), 0.0, 1e-15);

    // Traceless with nu.q.nu = 0.
    Mat3d t = outer(vec3(1.0, 0.0, 0.0), vec3(0.0, 1.0, 0.0));
    t = t + transpose(t);
    EXPECT_NEAR(surface_trace(t, vec3(0.0, 0.0, 1.0)), 0.0, 1e-15);
}

TEST(SurfaceTrace, FieldVersionAndRepresentativeIsTracefree) {
    const auto mesh = primitives::icosphere(1);
    const auto g = analytic_geometry(Sphere{}, mesh);
    TensorField f(2, g.vertex_normals.size());
    for (std::size_t v = 0; v < g.vertex_normals.size(); ++v) f.set<2>(v, identity3<double>());
    const auto tr = q_surface_extension_trace(f, g);
    for (double x : tr.values) EXPECT_NEAR(x, 2.0, 1e-14);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (std::size_t v = 0; v < g.vertex_normals.size(); ++v)
        f.set<2>(v, q_expand<double>({u(rng), u(rng), u(rng), u(rng), u(rng)}));
    const auto rep = q_representative(f, g);
    for (std::size_t v = 0; v < g.vertex_normals.size(); ++v) {
        const Mat3d m = rep.at<2>(v);
        const Vec3d& nu = g.vertex_normals[v];
        EXPECT_NEAR(trace(m), 0.0, 1e-14);
        EXPECT_NEAR(norm(matvec(m, nu)), 0.0, 1e-14);
    }
}

TEST(InnerProduct, NormalFieldHasZeroNorm) {
    const auto mesh = primitives::icosphere(2);
    const auto g = analytic_geometry(Sphere{}, mesh);
    const auto n = normals_as_field(g);
    EXPECT_NEAR(inner_product(n, n, g, mesh), 0.0, 1e-12);
}

TEST(InnerProduct, FlatUnitSquare) {
    const auto mesh = primitives::flat_grid(4);
    const auto g = discrete_geometry(mesh);
    TensorField a(1, static_cast<std::size_t>(mesh.num_vertices()));
    for (std::size_t v = 0; v < a.num_vertices(); ++v) a.set<1>(v, normalized(vec3(1.0, 1.0, 0.0)));
    EXPECT_NEAR(inner_product(a, a, g, mesh), 1.0, 1e-14);
}

TEST(InnerProduct, ProjectedConstantFieldOnSphereConverges) {
    // Closed form: integral of (1 - z^2) over the unit sphere is 8 pi / 3.
    const double exact = 8.0 * std::numbers::pi / 3.0;
    double prev = 1.0;
    for (int level = 3; level <= 5; ++level) {
        const auto mesh = primitives::icosphere(level);
        const auto g = analytic_geometry(Sphere{}, mesh);
        TensorField a(1, static_cast<std::size_t>(mesh.num_vertices()));
        for (std::size_t v = 0; v < a.num_vertices(); ++v) a.set<1>(v, vec3(0.0, 0.0, 1.0));
        const double err = std::abs(inner_product(a, a, g, mesh) - exact);
        // Area deficit and chord interpolation of Pi e_z are both O(h^2) and of
        // comparable size; the measured ratio is about 1.5.
        EXPECT_LT(err, 2.0 * (4.0 * std::numbers::pi - mesh.total_area()));
        if (level > 3) {
            EXPECT_GT(prev / err, 3.0);
        }
        prev = err;
    }
}

TEST(InnerProduct, SymmetricAndProjectionInvariant) {
    const auto mesh = primitives::icosphere(2);
    const auto g = analytic_geometry(Sphere{}, mesh);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    TensorField a(2, static_cast<std::size_t>(mesh.num_vertices())), b = a;
    for (double& x : a.values) x = u(rng);
    for (double& x : b.values) x = u(rng);
    EXPECT_NEAR(inner_product(a, b, g, mesh), inner_product(b, a, g, mesh), 1e-13);
    EXPECT_GE(inner_product(a, a, g, mesh), 0.0);
    EXPECT_THROW(inner_product(a, TensorField(1, a.num_vertices()), g, mesh), DimensionMismatch);
}

TEST(InnerProduct, EqualsInnerProductOfProjectedFields) {
    const auto mesh = primitives::icosphere(2);
    const auto gs = analytic_geometry(Sphere{}, mesh);
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    TensorField a(1, static_cast<std::size_t>(mesh.num_vertices())), b = a;
    for (double& x : a.values) x = u(rng);
    for (double& x : b.values) x = u(rng);
    EXPECT_NEAR(inner_product(a, b, gs, mesh),
                inner_product(project_tangential(a, gs), project_tangential(b, gs), gs, mesh), 1e-14);
}
