#pragma once

// Indexed triangle meshes of 2-manifolds in R^3: validation, consistent
// orientation, adjacency, uniform refinement, and file I/O (OFF/OBJ input,
// OFF and legacy ASCII VTK output).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numeric>
#include <optional>
#include <queue>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "tanfem/core/field.hpp"
#include "tanfem/core/tensor.hpp"
#include "tanfem/errors.hpp"

namespace tanfem {

using Triangle = std::array<int, 3>;
using Edge = std::array<int, 2>;

struct MeshOptions {
    /// Triangles with area below this fraction of the mean area are rejected.
    double degeneracy_threshold = 1e-12;
};

namespace detail {
inline std::uint64_t edge_key(int a, int b) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
           static_cast<std::uint32_t>(b);
}
}  // namespace detail

class SurfaceMesh {
public:
    SurfaceMesh() = default;

    SurfaceMesh(std::vector<Vec3d> vertices, std::vector<Triangle> triangles,
                MeshOptions options = {})
        : vertices_(std::move(vertices)), triangles_(std::move(triangles)) {
        validate_indices();
        orient();
        build_adjacency();
        if (is_closed() && signed_volume() < 0.0) {
            for (auto& t : triangles_) std::swap(t[1], t[2]);
            build_adjacency();
        }
        check_degeneracy(options.degeneracy_threshold);
    }

    const std::vector<Vec3d>& vertices() const { return vertices_; }
    const std::vector<Triangle>& triangles() const { return triangles_; }
    const Vec3d& vertex(int v) const { return vertices_[static_cast<std::size_t>(v)]; }
    const Triangle& triangle(int t) const { return triangles_[static_cast<std::size_t>(t)]; }

    int num_vertices() const { return static_cast<int>(vertices_.size()); }
    int num_triangles() const { return static_cast<int>(triangles_.size()); }
    int num_edges() const { return static_cast<int>(edges_.size()); }

    /// Unique undirected edges with e[0] < e[1].
    const std::vector<Edge>& edges() const { return edges_; }
    /// Boundary edges oriented as in their (single) incident triangle.
    const std::vector<Edge>& boundary_edges() const { return boundary_edges_; }
    /// Triangle owning each boundary edge.
    const std::vector<int>& boundary_edge_triangles() const { return boundary_edge_tris_; }
    bool is_closed() const { return boundary_edges_.empty(); }
    bool is_boundary_vertex(int v) const { return boundary_vertex_[static_cast<std::size_t>(v)]; }

    /// Sorted neighbour lists (excluding the vertex itself).
    const std::vector<std::vector<int>>& vertex_neighbors() const { return neighbors_; }

    /// Triangle containing the oriented half-edge a->b, or -1.
    int triangle_of_halfedge(int a, int b) const {
        auto it = halfedge_.find(detail::edge_key(a, b));
        return it == halfedge_.end() ? -1 : it->second;
    }

    int euler_characteristic() const { return num_vertices() - num_edges() + num_triangles(); }

    double area(int t) const { return 0.5 * norm(area_vector(t)); }

    /// Unit normal of the flat triangle, following its vertex order.
    Vec3d face_normal(int t) const { return normalized(area_vector(t)); }

    double total_area() const {
        double a = 0.0;
        for (int t = 0; t < num_triangles(); ++t) a += area(t);
        return a;
    }

    /// Enclosed volume for closed meshes (positive when normals point outward).
    double signed_volume() const {
        double vol = 0.0;
        for (const auto& t : triangles_)
            vol += dot(vertex(t[0]), cross(vertex(t[1]), vertex(t[2])));
        return vol / 6.0;
    }

    double mean_edge_length() const {
        double s = 0.0;
        for (const auto& e : edges_) s += norm(vertex(e[1]) - vertex(e[0]));
        return edges_.empty() ? 0.0 : s / static_cast<double>(edges_.size());
    }

    /// Interior angle of triangle t at its local corner k.
    double corner_angle(int t, int k) const {
        const auto& tri = triangle(t);
        const Vec3d a = vertex(tri[static_cast<std::size_t>((k + 1) % 3)]) -
                        vertex(tri[static_cast<std::size_t>(k)]);
        const Vec3d b = vertex(tri[static_cast<std::size_t>((k + 2) % 3)]) -
                        vertex(tri[static_cast<std::size_t>(k)]);
        return std::atan2(norm(cross(a, b)), dot(a, b));
    }

    /// Triangles around an interior vertex in counter-clockwise order.
    std::vector<int> triangles_around(int v) const {
        std::vector<int> ring;
        const int start = vertex_triangle_[static_cast<std::size_t>(v)];
        if (start < 0 || is_boundary_vertex(v)) return ring;
        int t = start;
        do {
            ring.push_back(t);
            const auto& tri = triangle(t);
            int k = 0;
            while (tri[static_cast<std::size_t>(k)] != v) ++k;
            const int prev = tri[static_cast<std::size_t>((k + 2) % 3)];
            t = triangle_of_halfedge(v, prev);
            if (ring.size() > triangles_.size()) throw TopologyError("vertex fan does not close");
        } while (t != start && t >= 0);
        return ring;
    }

private:
    std::vector<Vec3d> vertices_;
    std::vector<Triangle> triangles_;
    std::vector<Edge> edges_;
    std::vector<Edge> boundary_edges_;
    std::vector<int> boundary_edge_tris_;
    std::vector<char> boundary_vertex_;
    std::vector<std::vector<int>> neighbors_;
    std::vector<int> vertex_triangle_;
    std::unordered_map<std::uint64_t, int> halfedge_;

    Vec3d area_vector(int t) const {
        const auto& tri = triangle(t);
        return cross(vertex(tri[1]) - vertex(tri[0]), vertex(tri[2]) - vertex(tri[0]));
    }

    void validate_indices() const {
        const int nv = num_vertices();
        for (std::size_t t = 0; t < triangles_.size(); ++t) {
            const auto& tri = triangles_[t];
            for (int k = 0; k < 3; ++k) {
                const int v = tri[static_cast<std::size_t>(k)];
                if (v < 0 || v >= nv)
                    throw TopologyError("triangle " + std::to_string(t) +
                                        " references invalid vertex " + std::to_string(v));
            }
            if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2])
                throw TopologyError("triangle " + std::to_string(t) + " repeats a vertex");
        }
    }

    // Flip triangles so that every interior edge is traversed in opposite
    // directions by its two triangles. Breadth-first over each component.
    void orient() {
        std::unordered_map<std::uint64_t, std::vector<int>> edge_tris;
        for (std::size_t t = 0; t < triangles_.size(); ++t) {
            const auto& tri = triangles_[t];
            for (int k = 0; k < 3; ++k) {
                int a = tri[static_cast<std::size_t>(k)];
                int b = tri[static_cast<std::size_t>((k + 1) % 3)];
                if (a > b) std::swap(a, b);
                auto& list = edge_tris[detail::edge_key(a, b)];
                list.push_back(static_cast<int>(t));
                if (list.size() > 2)
                    throw TopologyError("non-manifold edge (" + std::to_string(a) + ", " +
                                        std::to_string(b) + ") shared by more than two triangles");
            }
        }
        const auto same_direction = [this](int t0, int t1, int a, int b) {
            const auto dir = [this](int t, int x, int y) {
                const auto& tri = triangles_[static_cast<std::size_t>(t)];
                for (int k = 0; k < 3; ++k)
                    if (tri[static_cast<std::size_t>(k)] == x &&
                        tri[static_cast<std::size_t>((k + 1) % 3)] == y)
                        return 1;
                return -1;
            };
            return dir(t0, a, b) == dir(t1, a, b);
        };
        std::vector<int> state(triangles_.size(), 0);  // 0 unvisited, 1 visited
        for (std::size_t seed = 0; seed < triangles_.size(); ++seed) {
            if (state[seed]) continue;
            state[seed] = 1;
            std::queue<int> queue;
            queue.push(static_cast<int>(seed));
            while (!queue.empty()) {
                const int t = queue.front();
                queue.pop();
                const auto tri = triangles_[static_cast<std::size_t>(t)];
                for (int k = 0; k < 3; ++k) {
                    int a = tri[static_cast<std::size_t>(k)];
                    int b = tri[static_cast<std::size_t>((k + 1) % 3)];
                    const auto& list = edge_tris[detail::edge_key(std::min(a, b), std::max(a, b))];
                    for (int n : list) {
                        if (n == t) continue;
                        const bool clash = same_direction(t, n, a, b);
                        if (!state[static_cast<std::size_t>(n)]) {
                            if (clash) {
                                auto& nt = triangles_[static_cast<std::size_t>(n)];
                                std::swap(nt[1], nt[2]);
                            }
                            state[static_cast<std::size_t>(n)] = 1;
                            queue.push(n);
                        } else if (clash) {
                            throw TopologyError("mesh is not orientable");
                        }
                    }
                }
            }
        }
    }

    void build_adjacency() {
        const std::size_t nv = vertices_.size();
        halfedge_.clear();
        halfedge_.reserve(3 * triangles_.size());
        vertex_triangle_.assign(nv, -1);
        std::vector<std::vector<int>> nbrs(nv);
        for (std::size_t t = 0; t < triangles_.size(); ++t) {
            const auto& tri = triangles_[t];
            for (int k = 0; k < 3; ++k) {
                const int a = tri[static_cast<std::size_t>(k)];
                const int b = tri[static_cast<std::size_t>((k + 1) % 3)];
                if (!halfedge_.emplace(detail::edge_key(a, b), static_cast<int>(t)).second)
                    throw TopologyError("half-edge used twice; inconsistent orientation");
                nbrs[static_cast<std::size_t>(a)].push_back(b);
                nbrs[static_cast<std::size_t>(b)].push_back(a);
                if (vertex_triangle_[static_cast<std::size_t>(a)] < 0)
                    vertex_triangle_[static_cast<std::size_t>(a)] = static_cast<int>(t);
            }
        }
        edges_.clear();
        boundary_edges_.clear();
        boundary_edge_tris_.clear();
        boundary_vertex_.assign(nv, 0);
        for (std::size_t v = 0; v < nv; ++v) {
            auto& list = nbrs[v];
            std::sort(list.begin(), list.end());
            list.erase(std::unique(list.begin(), list.end()), list.end());
            for (int w : list)
                if (static_cast<int>(v) < w) edges_.push_back({static_cast<int>(v), w});
        }
        for (std::size_t t = 0; t < triangles_.size(); ++t) {
            const auto& tri = triangles_[t];
            for (int k = 0; k < 3; ++k) {
                const int a = tri[static_cast<std::size_t>(k)];
                const int b = tri[static_cast<std::size_t>((k + 1) % 3)];
                if (halfedge_.find(detail::edge_key(b, a)) == halfedge_.end()) {
                    boundary_edges_.push_back({a, b});
                    boundary_edge_tris_.push_back(static_cast<int>(t));
                    boundary_vertex_[static_cast<std::size_t>(a)] = 1;
                    boundary_vertex_[static_cast<std::size_t>(b)] = 1;
                }
            }
        }
        neighbors_ = std::move(nbrs);
    }

    void check_degeneracy(double threshold) const {
        if (triangles_.empty()) return;
        const double mean = total_area() / static_cast<double>(triangles_.size());
        for (int t = 0; t < num_triangles(); ++t)
            if (!(area(t) >= threshold * mean))
                throw DegenerateElement("triangle " + std::to_string(t) + " has area " +
                                        std::to_string(area(t)) + " below threshold");
    }
};

// ---------------------------------------------------------------------------
// Refinement

struct RefinementSpec {
    int levels = 1;
    /// Maps a point to the closest point on an analytic surface (optional).
    std::function<Vec3d(const Vec3d&)> projection;
};

/// Uniform 1->4 midpoint subdivision, applied spec.levels times. New vertices
/// are snapped with spec.projection when one is given.
inline SurfaceMesh refine(const SurfaceMesh& mesh, const RefinementSpec& spec) {
    if (spec.levels < 0 || spec.levels > 10)
        throw DimensionMismatch("refinement levels must lie in 0..10");
    SurfaceMesh current = mesh;
    for (int level = 0; level < spec.levels; ++level) {
        std::vector<Vec3d> verts = current.vertices();
        const int nv = current.num_vertices();
        std::unordered_map<std::uint64_t, int> midpoint;
        midpoint.reserve(static_cast<std::size_t>(current.num_edges()));
        for (int e = 0; e < current.num_edges(); ++e) {
            const auto& ed = current.edges()[static_cast<std::size_t>(e)];
            Vec3d m = (current.vertex(ed[0]) + current.vertex(ed[1])) * 0.5;
            if (spec.projection) m = spec.projection(m);
            verts.push_back(m);
            midpoint.emplace(detail::edge_key(ed[0], ed[1]), nv + e);
        }
        const auto mid = [&](int a, int b) {
            return midpoint.at(detail::edge_key(std::min(a, b), std::max(a, b)));
        };
        std::vector<Triangle> tris;
        tris.reserve(4 * static_cast<std::size_t>(current.num_triangles()));
        for (const auto& t : current.triangles()) {
            const int ab = mid(t[0], t[1]);
            const int bc = mid(t[1], t[2]);
            const int ca = mid(t[2], t[0]);
            tris.push_back({t[0], ab, ca});
            tris.push_back({ab, t[1], bc});
            tris.push_back({ca, bc, t[2]});
            tris.push_back({ab, bc, ca});
        }
        current = SurfaceMesh(std::move(verts), std::move(tris));
    }
    return current;
}

inline int euler_characteristic(const SurfaceMesh& mesh) { return mesh.euler_characteristic(); }

// ---------------------------------------------------------------------------
// Input

enum class MeshFormat { OFF, OBJ };

namespace detail {

inline std::string strip_comment(const std::string& line) {
    const auto pos = line.find('#');
    return pos == std::string::npos ? line : line.substr(0, pos);
}

inline void fan_triangulate(const std::vector<int>& poly, std::vector<Triangle>& out,
                            const std::string& where) {
    if (poly.size() < 3) throw ParseError(where + ": face with fewer than 3 vertices");
    for (std::size_t k = 1; k + 1 < poly.size(); ++k) out.push_back({poly[0], poly[k], poly[k + 1]});
}

inline SurfaceMesh parse_off(std::istream& in, const std::string& name) {
    std::vector<std::string> tokens;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ls(strip_comment(line));
        std::string tok;
        while (ls >> tok) tokens.push_back(tok);
    }
    std::size_t pos = 0;
    const auto next = [&]() -> const std::string& {
        if (pos >= tokens.size()) throw ParseError(name + ": unexpected end of file");
        return tokens[pos++];
    };
    const auto next_num = [&]() {
        const std::string& t = next();
        try {
            std::size_t used = 0;
            const double v = std::stod(t, &used);
            if (used != t.size()) throw ParseError(name + ": bad number '" + t + "'");
            return v;
        } catch (const std::logic_error&) {
            throw ParseError(name + ": bad number '" + t + "'");
        }
    };
    const auto next_int = [&]() {
        const double v = next_num();
        if (v != std::floor(v)) throw ParseError(name + ": expected integer");
        return static_cast<long>(v);
    };
    if (tokens.empty()) throw ParseError(name + ": empty file");
    if (tokens[0] == "OFF") {
        pos = 1;
    } else if (tokens[0].rfind("OFF", 0) == 0) {
        throw ParseError(name + ": unsupported OFF variant '" + tokens[0] + "'");
    }
    const long nv = next_int();
    const long nf = next_int();
    next_int();  // edge count, unused
    if (nv < 0 || nf < 0) throw ParseError(name + ": negative counts");
    std::vector<Vec3d> verts(static_cast<std::size_t>(nv));
    for (auto& v : verts) {
        const double x = next_num();
        const double y = next_num();
        const double z = next_num();
        v = vec3(x, y, z);
    }
    std::vector<Triangle> tris;
    for (long f = 0; f < nf; ++f) {
        const long n = next_int();
        std::vector<int> poly(static_cast<std::size_t>(std::max(0L, n)));
        for (auto& idx : poly) idx = static_cast<int>(next_int());
        fan_triangulate(poly, tris, name);
    }
    return SurfaceMesh(std::move(verts), std::move(tris));
}

inline SurfaceMesh parse_obj(std::istream& in, const std::string& name) {
    std::vector<Vec3d> verts;
    std::vector<Triangle> tris;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(strip_comment(line));
        std::string tag;
        if (!(ls >> tag)) continue;
        const std::string where = name + ":" + std::to_string(lineno);
        if (tag == "v") {
            double x, y, z;
            if (!(ls >> x >> y >> z)) throw ParseError(where + ": malformed vertex");
            verts.push_back(vec3(x, y, z));
        } else if (tag == "f") {
            std::vector<int> poly;
            std::string tok;
            while (ls >> tok) {
                const std::string head = tok.substr(0, tok.find('/'));
                long idx = 0;
                try {
                    std::size_t used = 0;
                    idx = std::stol(head, &used);
                    if (used != head.size()) throw ParseError(where + ": bad face index");
                } catch (const std::logic_error&) {
                    throw ParseError(where + ": bad face index '" + tok + "'");
                }
                if (idx < 0) idx = static_cast<long>(verts.size()) + idx + 1;
                poly.push_back(static_cast<int>(idx - 1));
            }
            fan_triangulate(poly, tris, where);
        }
    }
    return SurfaceMesh(std::move(verts), std::move(tris));
}

}  // namespace detail

inline SurfaceMesh load_mesh(const std::string& path, MeshFormat format) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open mesh file " + path);
    return format == MeshFormat::OFF ? detail::parse_off(in, path) : detail::parse_obj(in, path);
}

inline SurfaceMesh load_mesh_from_string(const std::string& text, MeshFormat format) {
    std::istringstream in(text);
    return format == MeshFormat::OFF ? detail::parse_off(in, "<string>")
                                     : detail::parse_obj(in, "<string>");
}

// ---------------------------------------------------------------------------
// Output

namespace detail {
inline void put_double(std::ostream& out, double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    out << buf;
}
}  // namespace detail

inline void write_off(const SurfaceMesh& mesh, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "OFF\n" << mesh.num_vertices() << ' ' << mesh.num_triangles() << ' ' << mesh.num_edges()
        << '\n';
    for (const auto& v : mesh.vertices()) {
        detail::put_double(out, v[0]);
        out << ' ';
        detail::put_double(out, v[1]);
        out << ' ';
        detail::put_double(out, v[2]);
        out << '\n';
    }
    for (const auto& t : mesh.triangles()) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    if (!out) throw IoError("write failed for " + path);
}

/// Legacy ASCII VTK (version 3.0) unstructured grid with point data.
/// Degree 0 fields become SCALARS, degree 1 VECTORS, degree 2 and Q-proxy
/// fields TENSORS (Q fields are expanded to their full 3x3 matrix).
inline void export_vtk(const SurfaceMesh& mesh, const std::vector<NamedField>& fields,
                       const std::string& path) {
    const auto nv = static_cast<std::size_t>(mesh.num_vertices());
    for (const auto& f : fields) {
        const std::size_t n = f.is_q ? f.q.num_vertices() : f.tensor.num_vertices();
        if (n != nv) throw DimensionMismatch("field '" + f.name + "' is not vertex-aligned");
    }
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "# vtk DataFile Version 3.0\ntanfem surface output\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << nv << " double\n";
    for (const auto& v : mesh.vertices()) {
        detail::put_double(out, v[0]);
        out << ' ';
        detail::put_double(out, v[1]);
        out << ' ';
        detail::put_double(out, v[2]);
        out << '\n';
    }
    const auto nt = static_cast<std::size_t>(mesh.num_triangles());
    out << "CELLS " << nt << ' ' << 4 * nt << '\n';
    for (const auto& t : mesh.triangles()) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    out << "CELL_TYPES " << nt << '\n';
    for (std::size_t t = 0; t < nt; ++t) out << "5\n";
    if (!fields.empty()) out << "POINT_DATA " << nv << '\n';
    for (const auto& f : fields) {
        if (f.is_q) {
            out << "TENSORS " << f.name << " double\n";
            for (std::size_t v = 0; v < nv; ++v) {
                const Mat3d m = q_expand<double>(
                    {f.q(v, 0), f.q(v, 1), f.q(v, 2), f.q(v, 3), f.q(v, 4)});
                for (int i = 0; i < 3; ++i) {
                    for (int j = 0; j < 3; ++j) {
                        if (j) out << ' ';
                        detail::put_double(out, m(i, j));
                    }
                    out << '\n';
                }
            }
            continue;
        }
        const int deg = f.tensor.degree;
        if (deg == 0) {
            out << "SCALARS " << f.name << " double 1\nLOOKUP_TABLE default\n";
            for (std::size_t v = 0; v < nv; ++v) {
                detail::put_double(out, f.tensor.values[v]);
                out << '\n';
            }
        } else if (deg == 1) {
            out << "VECTORS " << f.name << " double\n";
            for (std::size_t v = 0; v < nv; ++v) {
                for (int i = 0; i < 3; ++i) {
                    if (i) out << ' ';
                    detail::put_double(out, f.tensor.values[3 * v + static_cast<std::size_t>(i)]);
                }
                out << '\n';
            }
        } else {
            out << "TENSORS " << f.name << " double\n";
            for (std::size_t v = 0; v < nv; ++v) {
                for (int i = 0; i < 3; ++i) {
                    for (int j = 0; j < 3; ++j) {
                        if (j) out << ' ';
                        detail::put_double(out,
                                           f.tensor.values[9 * v + static_cast<std::size_t>(3 * i + j)]);
                    }
                    out << '\n';
                }
            }
        }
    }
    if (!out) throw IoError("write failed for " + path);
}

}  // namespace tanfem
