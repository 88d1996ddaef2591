#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "tanfem/mesh.hpp"
#include "tanfem/mesh_primitives.hpp"

using namespace tanfem;

namespace {

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("tanfem_test_" + name);
}

const char* kOctahedronOff = R"(OFF
# regular octahedron
6 8 12
1 0 0
-1 0 0
0 1 0
0 -1 0
0 0 1
0 0 -1
3 0 2 4
3 2 1 4
3 1 3 4
3 3 0 4
3 2 0 5
3 1 2 5
3 3 1 5
3 0 3 5
)";

}  // namespace

TEST(MeshLoad, OctahedronOffHasEulerCharacteristicTwo) {
    const auto mesh = load_mesh_from_string(kOctahedronOff, MeshFormat::OFF);
    EXPECT_EQ(mesh.num_vertices(), 6);
    EXPECT_EQ(mesh.num_triangles(), 8);
    EXPECT_EQ(mesh.num_edges(), 12);
    EXPECT_EQ(euler_characteristic(mesh), 2);
    EXPECT_TRUE(mesh.is_closed());
}

TEST(MeshLoad, EdgeSharedByThreeTrianglesIsRejected) {
    const char* text = "OFF\n5 3 0\n0 0 0\n1 0 0\n0 1 0\n0 -1 0\n0 0 1\n3 0 1 2\n3 0 1 3\n3 0 1 4\n";
    EXPECT_THROW(load_mesh_from_string(text, MeshFormat::OFF), TopologyError);
}

TEST(MeshLoad, MalformedFilesRaiseParseError) {
    EXPECT_THROW(load_mesh_from_string("OFF\n3 1 0\n0 0 0\n1 0\n", MeshFormat::OFF), ParseError);
    EXPECT_THROW(load_mesh_from_string("OFF\n3 1 0\n0 0 0\n1 0 x\n0 1 0\n3 0 1 2\n", MeshFormat::OFF),
                 ParseError);
    EXPECT_THROW(load_mesh_from_string("v 0 0 0\nv 1 0 0\nf 1 2\n", MeshFormat::OBJ), ParseError);
}

TEST(MeshLoad, InvalidIndexIsTopologyError) {
    EXPECT_THROW(load_mesh_from_string("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 7\n", MeshFormat::OFF),
                 TopologyError);
}

TEST(MeshLoad, DegenerateTriangleRejected) {
    const char* text = "OFF\n5 2 0\n0 0 0\n1 0 0\n0 1 0\n2 0 0\n3 0 0\n3 0 1 2\n3 1 3 4\n";
    EXPECT_THROW(load_mesh_from_string(text, MeshFormat::OFF), DegenerateElement);
}

TEST(MeshLoad, ObjQuadsAreFanTriangulatedAndNegativeIndicesResolve) {
    const char* text =
        "# square\nv 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nvn 0 0 1\nf 1//1 2//1 3//1 4//1\n";
    const auto mesh = load_mesh_from_string(text, MeshFormat::OBJ);
    EXPECT_EQ(mesh.num_triangles(), 2);
    EXPECT_EQ(euler_characteristic(mesh), 1);
    const auto neg = load_mesh_from_string("v 0 0 0\nv 1 0 0\nv 0 1 0\nf -3 -2 -1\n", MeshFormat::OBJ);
    EXPECT_EQ(neg.triangle(0)[0], 0);
}

TEST(MeshLoad, InconsistentInputOrientationIsRepaired) {
    // Octahedron with two faces flipped.
    std::vector<Vec3d> v = primitives::octahedron().vertices();
    std::vector<Triangle> t = primitives::octahedron().triangles();
    std::swap(t[1][1], t[1][2]);
    std::swap(t[6][0], t[6][1]);
    const SurfaceMesh mesh(v, t);
    int inconsistent = 0;
    for (const auto& e : mesh.edges()) {
        const int ab = mesh.triangle_of_halfedge(e[0], e[1]);
        const int ba = mesh.triangle_of_halfedge(e[1], e[0]);
        if (ab < 0 || ba < 0) ++inconsistent;
    }
    EXPECT_EQ(inconsistent, 0);
    EXPECT_GT(mesh.signed_volume(), 0.0);
}

TEST(MeshLoad, MoebiusStripIsNotOrientable) {
    std::vector<Vec3d> v;
    const int n = 8;
    for (int i = 0; i < n; ++i) {
        const double a = 2.0 * 3.141592653589793 * i / n;
        const double w = 0.3;
        const double c = std::cos(a / 2), s = std::sin(a / 2);
        v.push_back(vec3((1 + w * c) * std::cos(a), (1 + w * c) * std::sin(a), w * s));
        v.push_back(vec3((1 - w * c) * std::cos(a), (1 - w * c) * std::sin(a), -w * s));
    }
    std::vector<Triangle> t;
    for (int i = 0; i < n; ++i) {
        const int a0 = 2 * i, a1 = 2 * i + 1;
        int b0 = 2 * ((i + 1) % n), b1 = 2 * ((i + 1) % n) + 1;
        if (i == n - 1) std::swap(b0, b1);
        t.push_back({a0, b0, a1});
        t.push_back({a1, b0, b1});
    }
    EXPECT_THROW(SurfaceMesh(v, t), TopologyError);
}

TEST(MeshLoad, MissingFileIsIoError) {
    EXPECT_THROW(load_mesh("/nonexistent/path.off", MeshFormat::OFF), IoError);
}

TEST(MeshRefine, OctahedronOneLevel) {
    const auto m = refine(primitives::octahedron(), {1, {}});
    EXPECT_EQ(m.num_vertices(), 18);
    EXPECT_EQ(m.num_triangles(), 32);
}

TEST(MeshRefine, ProjectionPutsVerticesOnSphere) {
    const auto m = refine(primitives::octahedron(), {3, primitives::to_unit_sphere});
    for (const auto& v : m.vertices()) EXPECT_NEAR(norm(v), 1.0, 1e-12);
}

TEST(MeshRefine, PreservesEulerCharacteristicAndVertexGrowth) {
    SurfaceMesh m = primitives::icosahedron();
    for (int k = 0; k < 4; ++k) {
        const auto next = refine(m, {1, primitives::to_unit_sphere});
        EXPECT_EQ(next.num_vertices(), m.num_vertices() + m.num_edges());
        EXPECT_EQ(euler_characteristic(next), 2);
        m = next;
    }
}

TEST(MeshRefine, BoundaryEdgesSplitInTwo) {
    const auto disk = primitives::disk_fan(7);
    const auto fine = refine(disk, {2, {}});
    EXPECT_EQ(fine.boundary_edges().size(), 4 * disk.boundary_edges().size());
    EXPECT_EQ(euler_characteristic(fine), 1);
}

TEST(MeshRefine, LevelGuard) { EXPECT_THROW(refine(primitives::octahedron(), {11, {}}), Error); }

TEST(MeshTopology, IcosphereLevel3Counts) {
    const auto m = primitives::icosphere(3);
    EXPECT_EQ(m.num_vertices(), 642);
    EXPECT_EQ(m.num_triangles(), 1280);
    EXPECT_EQ(m.num_edges(), 1920);
    EXPECT_EQ(euler_characteristic(m), 2);
}

TEST(MeshTopology, EulerCharacteristicOfStandardShapes) {
    EXPECT_EQ(euler_characteristic(primitives::icosphere(2)), 2);
    EXPECT_EQ(euler_characteristic(primitives::torus(16, 16)), 0);
    EXPECT_EQ(euler_characteristic(primitives::disk_fan(12)), 1);
    EXPECT_EQ(euler_characteristic(primitives::hemisphere(2)), 1);
}

TEST(MeshTopology, VertexFanIsCounterClockwiseAndComplete) {
    const auto m = primitives::icosphere(2);
    for (int v = 0; v < m.num_vertices(); ++v) {
        const auto ring = m.triangles_around(v);
        EXPECT_EQ(ring.size(), m.vertex_neighbors()[static_cast<std::size_t>(v)].size());
        double angle = 0.0;
        for (int t : ring) {
            const auto& tri = m.triangle(t);
            int k = 0;
            while (tri[static_cast<std::size_t>(k)] != v) ++k;
            angle += m.corner_angle(t, k);
        }
        EXPECT_LT(angle, 2.0 * 3.141592653589793);
    }
}

TEST(MeshIo, WriteOffRoundTrip) {
    const auto m = primitives::icosphere(1);
    const auto path = temp_file("roundtrip.off");
    write_off(m, path.string());
    const auto back = load_mesh(path.string(), MeshFormat::OFF);
    ASSERT_EQ(back.num_vertices(), m.num_vertices());
    for (int v = 0; v < m.num_vertices(); ++v) EXPECT_EQ(norm(back.vertex(v) - m.vertex(v)), 0.0);
    std::filesystem::remove(path);
}

TEST(MeshIo, VtkBlocksAndCoordinateRoundTrip) {
    const auto m = primitives::icosphere(1);
    const auto nv = static_cast<std::size_t>(m.num_vertices());
    TensorField s(0, nv), p(1, nv);
    QProxyField q(nv);
    for (std::size_t v = 0; v < nv; ++v) {
        s.values[v] = static_cast<double>(v);
        p.values[3 * v] = 1.0;
        q(v, 0) = 0.5;
        q(v, 1) = 0.25;
        q(v, 3) = -0.1;
    }
    const auto path = temp_file("out.vtk");
    export_vtk(m, {NamedField::of("s", s), NamedField::of("p", p), NamedField::of_q("q", q)},
               path.string());
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "# vtk DataFile Version 3.0");
    std::stringstream all;
    all << in.rdbuf();
    const std::string text = all.str();
    EXPECT_NE(text.find("DATASET UNSTRUCTURED_GRID"), std::string::npos);
    EXPECT_NE(text.find("SCALARS s double 1"), std::string::npos);
    EXPECT_NE(text.find("VECTORS p double"), std::string::npos);
    EXPECT_NE(text.find("TENSORS q double"), std::string::npos);

    // Re-parse the point block.
    std::istringstream ss(text);
    std::string tok;
    while (ss >> tok && tok != "POINTS") {
    }
    std::size_t n = 0;
    ss >> n >> tok;
    ASSERT_EQ(n, nv);
    for (std::size_t v = 0; v < nv; ++v) {
        double x, y, z;
        ss >> x >> y >> z;
        const Vec3d& ref = m.vertex(static_cast<int>(v));
        EXPECT_LE(norm(vec3(x, y, z) - ref), 1e-12 * norm(ref));
    }
    // Q block: each 3x3 is symmetric and traceless.
    const auto qpos = text.find("TENSORS q double");
    std::istringstream qs(text.substr(qpos + 17));
    for (std::size_t v = 0; v < nv; ++v) {
        double a[9];
        for (double& x : a) qs >> x;
        EXPECT_NEAR(a[0] + a[4] + a[8], 0.0, 1e-15);
        EXPECT_EQ(a[1], a[3]);
        EXPECT_EQ(a[2], a[6]);
        EXPECT_EQ(a[5], a[7]);
    }
    std::filesystem::remove(path);
}

TEST(MeshIo, VtkRejectsMisalignedField) {
    const auto m = primitives::octahedron();
    TensorField s(0, 3);
    EXPECT_THROW(export_vtk(m, {NamedField::of("s", s)}, temp_file("bad.vtk").string()),
                 DimensionMismatch);
}
