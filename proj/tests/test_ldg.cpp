#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "tanfem/ldg.hpp"
#include "tanfem/mesh_primitives.hpp"

using namespace tanfem;

namespace {

struct SphereCase {
    SurfaceMesh mesh;
    GeometryData geometry;
};

SphereCase sphere(int level) {
    SurfaceMesh mesh = primitives::icosphere(level);
    GeometryData g = analytic_geometry(Sphere{}, mesh);
    return {std::move(mesh), std::move(g)};
}

Vector perturbation(std::size_t n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Vector x(n);
    for (auto& v : x) v = u(rng);
    return x;
}

// Bulk integral recomputed from the proxies: interpolate, project with the
// interpolated normal, integrate W(|q|^2) with the midpoint rule.
double bulk_integral(const SurfaceMesh& mesh, const GeometryData& g, const QProxyField& q) {
    double sum = 0.0;
    for (int t = 0; t < mesh.num_triangles(); ++t)
        for (const auto& qp : kMidpointRule) {
            const Mat3d p = projector(interpolate_normal(mesh, g, t, qp));
            const Mat3d m = matmul(matmul(p, q_expand<double>(interpolate_proxy(mesh, q, t, qp))), p);
            double a = 0.0;
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) a += m(i, j) * m(i, j);
            sum += mesh.area(t) * qp.weight_fraction * (0.5 * a * a - 0.5 * a);
        }
    return sum;
}

}  // namespace

TEST(Bulk, DensityShape) {
    EXPECT_EQ(bulk_density(0.0), 0.0);
    EXPECT_EQ(bulk_factor(0.5), 0.0);
    EXPECT_EQ(bulk_density(0.5), -0.125);
    EXPECT_EQ(bulk_density(1.0), 0.0);
    // bulk_factor is dW/da times 2 (dW/dq = 2 q dW/da).
    for (double a : {0.1, 0.7, 2.0}) {
        const double h = 1e-6;
        EXPECT_NEAR(bulk_factor(a), 2.0 * (bulk_density(a + h) - bulk_density(a - h)) / (2.0 * h), 1e-8);
    }
}

TEST(Nematic, ZeroFieldHasZeroEnergyAndGradient) {
    const auto s = sphere(2);
    const NematicEnergy e(s.mesh, s.geometry, 100.0, 1000.0);
    const Vector zero(5 * e.num_vertices(), 0.0);
    EXPECT_EQ(e.energy(zero), 0.0);
    EXPECT_EQ(norm_inf(e.gradient(zero)), 0.0);
    EXPECT_THROW(NematicEnergy(s.mesh, s.geometry, 0.0, 1000.0), ConfigError);
}

TEST(Nematic, EnergySplitsIntoQuadraticAndBulk) {
    const auto s = sphere(2);
    const QProxyField q = random_init(s.mesh, s.geometry, 11);
    const NematicEnergy e(s.mesh, s.geometry, 100.0, 1000.0);
    const Vector x = dofs_from_proxy(q);
    const double quad = 0.5 * dot(x, e.elastic() * x);
    EXPECT_NEAR(e.energy(x), quad + 100.0 * bulk_integral(s.mesh, s.geometry, q), 1e-10 * std::abs(e.energy(x)));
    EXPECT_DOUBLE_EQ(energy(q, s.mesh, s.geometry, 100.0), e.energy(x));
}

TEST(Nematic, GradientMatchesFiniteDifferences) {
    const auto s = sphere(1);
    const NematicEnergy e(s.mesh, s.geometry, 100.0, 1000.0);
    const Vector x = dofs_from_proxy(random_init(s.mesh, s.geometry, 3));
    const Vector g = e.gradient(x);
    const Vector d = perturbation(x.size(), 4);
    const double h = 1e-5;
    Vector xp = x, xm = x;
    axpy(h, d, xp);
    axpy(-h, d, xm);
    const double fd = (e.energy(xp) - e.energy(xm)) / (2.0 * h);
    EXPECT_NEAR(dot(g, d), fd, 1e-6 * std::abs(fd));
}

TEST(Nematic, HessianMatchesFiniteDifferences) {
    const auto s = sphere(1);
    const NematicEnergy e(s.mesh, s.geometry, 100.0, 1000.0);
    const Vector x = dofs_from_proxy(random_init(s.mesh, s.geometry, 5));
    CsrMatrix hess = e.elastic();
    e.add_bulk_hessian(x, hess);
    EXPECT_LE(hess.relative_asymmetry(), 1e-12);
    const Vector d = perturbation(x.size(), 6);
    const double h = 1e-6;
    Vector xp = x, xm = x;
    axpy(h, d, xp);
    axpy(-h, d, xm);
    Vector fd = e.gradient(xp);
    axpy(-1.0, e.gradient(xm), fd);
    for (auto& v : fd) v /= 2.0 * h;
    const Vector hd = hess * d;
    Vector diff = hd;
    axpy(-1.0, fd, diff);
    EXPECT_LT(norm2(diff), 1e-6 * norm2(hd));
}

TEST(RandomInit, DeterministicTangentialAndSeedDependent) {
    const auto s = sphere(3);
    const QProxyField a = random_init(s.mesh, s.geometry, 7);
    EXPECT_EQ(a.values, random_init(s.mesh, s.geometry, 7).values);
    const QProxyField b = random_init(s.mesh, s.geometry, 8);
    std::size_t differ = 0;
    double max_normal = 0.0;
    for (std::size_t v = 0; v < a.num_vertices(); ++v) {
        bool same = true;
        for (int c = 0; c < 5; ++c) same = same && a(v, c) == b(v, c);
        differ += same ? 0 : 1;
        max_normal = std::max(max_normal, norm(matvec(q_unpack(a, v), s.geometry.vertex_normals[v])));
    }
    EXPECT_GT(static_cast<double>(differ), 0.99 * static_cast<double>(a.num_vertices()));
    EXPECT_LE(max_normal, 1e-12);
}

TEST(Relax, ZeroIsStationary) {
    const auto s = sphere(2);
    LdGParams p;
    p.max_steps = 3;
    const RelaxationTrace tr = ldg_relax(s.mesh, s.geometry, p, QProxyField(static_cast<std::size_t>(s.mesh.num_vertices())));
    EXPECT_TRUE(tr.steady);
    EXPECT_EQ(tr.final_energy(), 0.0);
    for (double v : tr.state.values) EXPECT_EQ(v, 0.0);
}

TEST(Relax, EnergyDecreasesAndChargesSumToTwo) {
    const auto s = sphere(3);
    LdGParams p;
    p.seed = 2;
    p.t_end = 6.0;
    p.tau = 0.05;
    p.max_steps = 400;
    const RelaxationTrace tr = ldg_relax(s.mesh, s.geometry, p);
    ASSERT_TRUE(tr.completed) << tr.failure;
    ASSERT_FALSE(tr.steps.empty());
    EXPECT_NEAR(tr.steps.back().time, 6.0, 1e-9);
    double last = tr.initial_energy;
    for (const auto& st : tr.steps) {
        EXPECT_LE(st.energy, last + p.energy_slack());
        last = st.energy;
    }
    EXPECT_TRUE(tr.monotone);
    EXPECT_LT(tr.final_energy(), 0.0);
    ASSERT_TRUE(tr.defects.has_value());
    EXPECT_EQ(tr.defects->total_charge, 2.0);
    for (const auto& d : tr.defects->defects) EXPECT_EQ(2.0 * d.charge, std::round(2.0 * d.charge));
}

TEST(Relax, RejectsOpenMeshAndBadParameters) {
    const SurfaceMesh open = primitives::hemisphere(2);
    const GeometryData g = analytic_geometry(Sphere{}, open);
    EXPECT_THROW(ldg_relax(open, g, LdGParams{}), TopologyError);
    const auto s = sphere(1);
    LdGParams p;
    p.tau = -1.0;
    EXPECT_THROW(ldg_relax(s.mesh, s.geometry, p), ConfigError);
    p = LdGParams{};
    p.newton.damping = 2.0;
    EXPECT_THROW(ldg_relax(s.mesh, s.geometry, p), ConfigError);
}

TEST(Ensemble, MatchesSingleRunsAndIsDeterministic) {
    const auto s = sphere(2);
    LdGParams p;
    p.seed = 40;
    p.t_end = 1.0;
    p.tau = 0.1;
    const EnsembleResult e = ensemble(s.mesh, s.geometry, p, 2);
    ASSERT_EQ(e.runs.size(), 2u);
    for (int i = 0; i < 2; ++i) {
        LdGParams pi = p;
        pi.seed = p.seed + static_cast<std::uint64_t>(i);
        const RelaxationTrace single = ldg_relax(s.mesh, s.geometry, pi);
        EXPECT_EQ(e.runs[static_cast<std::size_t>(i)].seed, pi.seed);
        EXPECT_EQ(e.runs[static_cast<std::size_t>(i)].state.values, single.state.values);
    }
    const EnsembleResult again = ensemble(s.mesh, s.geometry, p, 2);
    EXPECT_EQ(again.runs[1].final_energy(), e.runs[1].final_energy());
    int histogram_total = 0;
    for (const auto& [counts, n] : e.histogram) histogram_total += n;
    EXPECT_LE(histogram_total, 2);
    EXPECT_THROW(ensemble(s.mesh, s.geometry, p, 0), ConfigError);
    EXPECT_THROW(ensemble(s.mesh, s.geometry, p, 1, {}, 0), ConfigError);
}

TEST(Ensemble, ThreadCountDoesNotChangeResults) {
    const auto s = sphere(2);
    LdGParams p;
    p.seed = 60;
    p.t_end = 0.5;
    p.tau = 0.1;
    int calls = 0;
    const EnsembleResult serial = ensemble(s.mesh, s.geometry, p, 3);
    const EnsembleResult threaded = ensemble(s.mesh, s.geometry, p, 3, [&](int, const RelaxationTrace&) { ++calls; }, 3);
    EXPECT_EQ(calls, 3);
    ASSERT_EQ(threaded.runs.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(threaded.runs[i].seed, serial.runs[i].seed);
        EXPECT_EQ(threaded.runs[i].state.values, serial.runs[i].state.values);
    }
    EXPECT_EQ(threaded.best_run, serial.best_run);
    EXPECT_EQ(threaded.histogram, serial.histogram);
}

TEST(Ensemble, CountsClassifyHalfCharges) {
    DefectReport r;
    r.defects = {{0, 0, 0.5, 1}, {1, 1, 0.5, 1}, {2, 2, -0.5, 1}, {3, 3, 1.0, 1}};
    const DefectCounts c = count_defects(r);
    EXPECT_EQ(c.nodes, 2);
    EXPECT_EQ(c.wedges, 1);
    EXPECT_EQ(c.other, 1);
}
