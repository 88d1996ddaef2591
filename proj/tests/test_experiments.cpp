#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "tanfem/experiments.hpp"

using namespace tanfem;

namespace {

const Ellipsoid kEllipsoid{1.0, 0.5, 1.5};

TensorField constant_vector(std::size_t nv, const Vec3d& c) {
    TensorField f(1, nv);
    for (std::size_t v = 0; v < nv; ++v) f.set<1>(v, c);
    return f;
}

}  // namespace

TEST(ErrorMeasures, ConstantDifferenceOnUnitSquare) {
    // Unit area: L2 of a constant difference c is |c|; the measure halves it.
    const SurfaceMesh mesh = primitives::flat_grid(4);
    const auto nv = static_cast<std::size_t>(mesh.num_vertices());
    const TensorField zero = constant_vector(nv, vec3(0.0, 0.0, 0.0));
    const TensorField c = constant_vector(nv, vec3(0.3, 0.4, 0.0));
    EXPECT_NEAR(error_l2(c, zero, mesh, 1), 0.25, 1e-14);
    TensorField q(2, nv), zq(2, nv);
    for (std::size_t v = 0; v < nv; ++v) q.values[9 * v] = 2.0;
    EXPECT_NEAR(error_l2(q, zq, mesh, 2), 0.5, 1e-14);
}

TEST(ErrorMeasures, NormalizedL1OfDoubledSolution) {
    // With t = 2 t*, ||t - t*|| = ||t*|| pointwise, so the measure is 1 / 2^d.
    const ManufacturedCase c = build_qtensor_case(kEllipsoid);
    const SurfaceMesh mesh = c.mesh(2);
    const TensorField exact = c.exact(mesh);
    TensorField doubled = exact;
    for (auto& v : doubled.values) v *= 2.0;
    EXPECT_NEAR(error_l1_normalized(doubled, exact, mesh, 2), 0.25, 1e-13);
    const ManufacturedCase vc = build_vector_case(kEllipsoid);
    const TensorField pe = vc.exact(mesh);
    TensorField pd = pe;
    for (auto& v : pd.values) v *= 2.0;
    EXPECT_NEAR(error_l1_normalized(pd, pe, mesh, 1), 0.5, 1e-13);
}

TEST(ErrorMeasures, RejectMisalignedFields) {
    const SurfaceMesh mesh = primitives::flat_grid(2);
    const TensorField a(1, 9), b(1, 8);
    EXPECT_THROW(error_l2(a, b, mesh, 1), DimensionMismatch);
    EXPECT_THROW(error_l2(a, a, mesh, 2), DimensionMismatch);
    EXPECT_THROW(error_l1_normalized(a, a, mesh, 1), DimensionMismatch);  // zero exact field
}

TEST(ErrorMeasures, NormalResidualOfTangentialField) {
    const SurfaceMesh mesh = primitives::icosphere(2);
    const GeometryData g = analytic_geometry(Sphere{}, mesh);
    const auto nv = static_cast<std::size_t>(mesh.num_vertices());
    TensorField f(1, nv);
    for (std::size_t v = 0; v < nv; ++v) {
        const Vec3d x = mesh.vertex(static_cast<int>(v));
        f.set<1>(v, vec3(-x[1], x[0], 0.0) + g.vertex_normals[v] * 0.25);
    }
    EXPECT_NEAR(normal_residual(f, g), 0.25, 1e-12);
}

TEST(Fit, RecoversExactPowerLaw) {
    std::vector<double> x, y;
    for (double n : {100.0, 400.0, 1600.0, 6400.0}) {
        x.push_back(n);
        y.push_back(3.0 * std::pow(n, -1.5));
    }
    const SlopeFit f = fit_log_log(x, y);
    EXPECT_NEAR(f.slope, -1.5, 1e-12);
    EXPECT_NEAR(std::exp(f.intercept), 3.0, 1e-10);
    EXPECT_NEAR(f.r_squared, 1.0, 1e-12);
    EXPECT_THROW(fit_log_log({1.0}, {1.0}), DimensionMismatch);
}

TEST(Manufactured, VectorSolutionIsTangential) {
    const ManufacturedCase c = build_vector_case(kEllipsoid);
    const SurfaceMesh mesh = c.mesh(2);
    const GeometryData g = c.geometry(mesh);
    EXPECT_LT(normal_residual(c.exact(mesh), g), 1e-12);
    EXPECT_LT(normal_residual(c.rhs(mesh), g), 1e-10);
}

TEST(Manufactured, QSolutionIsTangentialAndTraceless) {
    const ManufacturedCase c = build_qtensor_case(kEllipsoid);
    const SurfaceMesh mesh = c.mesh(2);
    const GeometryData g = c.geometry(mesh);
    const TensorField q = c.exact(mesh);
    EXPECT_LT(normal_residual(q, g), 1e-12);
    for (std::size_t v = 0; v < q.num_vertices(); ++v) EXPECT_NEAR(trace(q.at<2>(v)), 0.0, 1e-12);
}

TEST(Study, ConvergenceRowsAndCsv) {
    const ManufacturedCase c = build_vector_case(kEllipsoid);
    const StudyReport r =
        run_convergence(c, {1, 2, 3}, 1000.0, GeometryChoice::Analytic, OperatorVariant::Exact, SolveConfig{});
    ASSERT_EQ(r.rows.size(), 3u);
    EXPECT_TRUE(r.all_converged());
    EXPECT_TRUE(std::isnan(r.rows[0].eoc));
    for (std::size_t i = 1; i < 3; ++i) {
        EXPECT_EQ(r.rows[i].dofs, 3 * (10 * (std::size_t{1} << (2 * r.rows[i].level)) + 2));
        EXPECT_LT(r.rows[i].error_l2, r.rows[i - 1].error_l2);
    }
    const std::string csv = study_csv(r);
    EXPECT_EQ(csv.substr(0, 6), "level,");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
    EXPECT_EQ(csv, study_csv(run_convergence(c, {1, 2, 3}, 1000.0, GeometryChoice::Analytic,
                                             OperatorVariant::Exact, SolveConfig{})));
    EXPECT_THROW(run_convergence(c, {2}, 1000.0, GeometryChoice::Analytic, OperatorVariant::Exact, SolveConfig{}),
                 ConfigError);
}

TEST(Study, PenaltySweepKeepsMeshFixed) {
    const ManufacturedCase c = build_vector_case(kEllipsoid);
    const StudyReport r =
        run_penalty_sweep(c, 2, {1.0, 100.0, 10000.0}, GeometryChoice::Analytic, OperatorVariant::Exact, SolveConfig{});
    ASSERT_EQ(r.rows.size(), 3u);
    for (const auto& row : r.rows) EXPECT_EQ(row.dofs, r.rows[0].dofs);
    // A stronger penalty pulls the solution towards the tangent bundle.
    EXPECT_LT(r.rows[2].normal_residual, r.rows[0].normal_residual);
}
