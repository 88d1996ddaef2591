#pragma once

// Topological charges of tangential vector fields and of the principal
// eigen-directions (line fields) of surface Q-tensors.
//
// Every vertex gets a tangent frame; field and edge directions become angles
// in that frame. Moving across an edge, angles are related by the discrete
// transport that keeps the angle to the edge fixed. Each triangle's index is
// the sum of wrapped angle increments along its edges plus its holonomy, so
// indices are exact multiples of 1/2 (line fields) or 1 (vectors) and they
// add up to the Euler characteristic on closed meshes by construction.

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "tanfem/core/field.hpp"
#include "tanfem/geometry.hpp"
#include "tanfem/mesh.hpp"
#include "tanfem/tensor_fields.hpp"

namespace tanfem {

struct Defect {
    int vertex = -1;      ///< vertex of smallest field magnitude in the defect region
    int triangle = -1;    ///< one triangle of the region
    double charge = 0.0;  ///< multiple of 1/2
    std::size_t region_size = 0;
};

struct DefectReport {
    std::vector<Defect> defects;
    double total_charge = 0.0;

    int count(double charge) const {
        return static_cast<int>(std::count_if(defects.begin(), defects.end(), [&](const Defect& d) {
            return std::abs(d.charge - charge) < 1e-9;
        }));
    }
    int positive() const {
        return static_cast<int>(std::count_if(defects.begin(), defects.end(), [](const Defect& d) { return d.charge > 0; }));
    }
    int negative() const {
        return static_cast<int>(std::count_if(defects.begin(), defects.end(), [](const Defect& d) { return d.charge < 0; }));
    }
};

struct DefectOptions {
    /// Vertices whose field magnitude is below this fraction of the RMS
    /// magnitude are treated as defect cores.
    double core_fraction = 1e-3;
    /// A region of rapidly turning field larger than this fraction of all
    /// triangles cannot be resolved into isolated defects.
    double max_region_fraction = 0.05;
};

namespace detail {

inline double wrap_period(double x, double period) {
    // Into (-period / 2, period / 2].
    double y = std::fmod(x + 0.5 * period, period);
    if (y <= 0.0) y += period;
    return y - 0.5 * period;
}

struct TangentFrame {
    Vec3d t1, t2;
};

inline TangentFrame tangent_frame(const Vec3d& nu) {
    const int axis = std::abs(nu[0]) < 0.6 ? 0 : (std::abs(nu[1]) < 0.6 ? 1 : 2);
    Vec3d e;
    e[axis] = 1.0;
    const Vec3d t1 = normalized(matvec(projector(nu), e));
    return {t1, cross(nu, t1)};
}

class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), std::size_t{0}); }
    std::size_t find(std::size_t x) {
        while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
        return x;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent_[std::max(a, b)] = std::min(a, b);
    }

private:
    std::vector<std::size_t> parent_;
};

/// Core of the detector: per-vertex angles (period 2 pi for vectors, pi for
/// line fields) and magnitudes.
inline DefectReport detect_from_angles(const SurfaceMesh& mesh, const GeometryData& g, const std::vector<double>& angle,
                                       const std::vector<double>& magnitude, double period, const DefectOptions& opt) {
    const auto nv = static_cast<std::size_t>(mesh.num_vertices());
    std::vector<TangentFrame> frames(nv);
    for (std::size_t v = 0; v < nv; ++v) frames[v] = tangent_frame(g.vertex_normals[v]);
    const auto edge_angle = [&](int from, int to) {
        const Vec3d e = mesh.vertex(to) - mesh.vertex(from);
        const auto& f = frames[static_cast<std::size_t>(from)];
        return std::atan2(dot(f.t2, e), dot(f.t1, e));
    };
    const double two_pi = 2.0 * std::numbers::pi;

    double rms = 0.0;
    for (double m : magnitude) rms += m * m;
    rms = std::sqrt(rms / static_cast<double>(std::max<std::size_t>(nv, 1)));
    std::vector<char> core(nv, 0);
    for (std::size_t v = 0; v < nv; ++v) core[v] = magnitude[v] < opt.core_fraction * rms;

    // Edge quantities are evaluated on the canonical orientation (low to high
    // vertex id) and negated otherwise, so shared edges cancel exactly even
    // when an increment sits on the wrap-around point.
    const auto transport_angle = [&](int i, int j) {
        if (i > j) return -wrap_period(edge_angle(i, j) + std::numbers::pi - edge_angle(j, i), two_pi);
        return wrap_period(edge_angle(j, i) + std::numbers::pi - edge_angle(i, j), two_pi);
    };
    const auto increment = [&](int i, int j) {
        const bool flip = i > j;
        if (flip) std::swap(i, j);
        const double d = wrap_period(angle[static_cast<std::size_t>(j)] - angle[static_cast<std::size_t>(i)] -
                                         transport_angle(i, j),
                                     period);
        return flip ? -d : d;
    };

    // Per-triangle indices.
    const auto nt = static_cast<std::size_t>(mesh.num_triangles());
    std::vector<double> index(nt, 0.0);
    std::vector<double> max_increment(nt, 0.0);
    for (std::size_t t = 0; t < nt; ++t) {
        const auto& tri = mesh.triangle(static_cast<int>(t));
        double increments = 0.0, transport = 0.0;
        for (std::size_t k = 0; k < 3; ++k) {
            const int i = tri[k], j = tri[(k + 1) % 3];
            const double d = increment(i, j);
            transport += transport_angle(i, j);
            increments += d;
            if (!core[static_cast<std::size_t>(i)] && !core[static_cast<std::size_t>(j)])
                max_increment[t] = std::max(max_increment[t], std::abs(d));
        }
        const double holonomy = wrap_period(transport, two_pi);
        // The exact value is a multiple of period / (2 pi); rounding strips
        // floating-point noise.
        index[t] = std::round(2.0 * (increments + holonomy) / two_pi) / 2.0;
    }

    // Candidate triangles: nonzero index, a core vertex, or an increment too
    // large to be unambiguous. Regions are connected through shared vertices,
    // so every edge with a large increment is interior to a region and each
    // region's boundary winding is well defined.
    const double limit = period == two_pi ? std::numbers::pi / 2.0 : std::numbers::pi / 4.0;
    std::vector<char> candidate(nt, 0);
    for (std::size_t t = 0; t < nt; ++t) {
        const auto& tri = mesh.triangle(static_cast<int>(t));
        candidate[t] = index[t] != 0.0 || max_increment[t] > limit || core[static_cast<std::size_t>(tri[0])] ||
                       core[static_cast<std::size_t>(tri[1])] || core[static_cast<std::size_t>(tri[2])];
    }

    UnionFind uf(nt);
    std::vector<long> owner(nv, -1);
    for (std::size_t t = 0; t < nt; ++t) {
        if (!candidate[t]) continue;
        for (int v : mesh.triangle(static_cast<int>(t))) {
            auto& o = owner[static_cast<std::size_t>(v)];
            if (o < 0) o = static_cast<long>(t);
            else uf.unite(static_cast<std::size_t>(o), t);
        }
    }
    std::map<std::size_t, Defect> regions;
    for (std::size_t t = 0; t < nt; ++t) {
        if (!candidate[t]) continue;
        auto& d = regions[uf.find(t)];
        if (d.triangle < 0) d.triangle = static_cast<int>(t);
        d.charge += index[t];
        ++d.region_size;
        for (int v : mesh.triangle(static_cast<int>(t)))
            if (d.vertex < 0 || magnitude[static_cast<std::size_t>(v)] < magnitude[static_cast<std::size_t>(d.vertex)])
                d.vertex = v;
    }
    DefectReport rep;
    for (const auto& [root, d] : regions) {
        if (static_cast<double>(d.region_size) > opt.max_region_fraction * static_cast<double>(nt))
            throw AmbiguousWinding("defect region of " + std::to_string(d.region_size) + " triangles around vertex " +
                                   std::to_string(d.vertex) + ": field turns too fast for this mesh");
        if (d.charge == 0.0) continue;
        rep.defects.push_back(d);
        rep.total_charge += d.charge;
    }
    return rep;
}

}  // namespace detail

/// Charges of a tangential vector field (degree-1, vertex based).
inline DefectReport detect_defects(const TensorField& field, const SurfaceMesh& mesh, const GeometryData& g,
                                   const DefectOptions& opt = {}) {
    if (field.degree != 1) throw DimensionMismatch("vector defect detection expects a degree-1 field");
    if (field.num_vertices() != static_cast<std::size_t>(mesh.num_vertices()))
        throw DimensionMismatch("field not aligned with mesh");
    const auto nv = field.num_vertices();
    std::vector<double> angle(nv), mag(nv);
    for (std::size_t v = 0; v < nv; ++v) {
        const auto f = detail::tangent_frame(g.vertex_normals[v]);
        const Vec3d p = field.at<1>(v);
        const double a = dot(f.t1, p), b = dot(f.t2, p);
        angle[v] = std::atan2(b, a);
        mag[v] = std::hypot(a, b);
    }
    return detail::detect_from_angles(mesh, g, angle, mag, 2.0 * std::numbers::pi, opt);
}

/// Charges of the principal eigen-direction of the tangential part of a Q field.
inline DefectReport detect_defects(const QProxyField& q, const SurfaceMesh& mesh, const GeometryData& g,
                                   const DefectOptions& opt = {}) {
    if (q.num_vertices() != static_cast<std::size_t>(mesh.num_vertices()))
        throw DimensionMismatch("field not aligned with mesh");
    const auto nv = q.num_vertices();
    std::vector<double> angle(nv), mag(nv);
    for (std::size_t v = 0; v < nv; ++v) {
        const auto f = detail::tangent_frame(g.vertex_normals[v]);
        const Mat3d m = q_unpack(q, v);
        const double a = 0.5 * (dot(f.t1, matvec(m, f.t1)) - dot(f.t2, matvec(m, f.t2)));
        const double b = dot(f.t1, matvec(m, f.t2));
        angle[v] = 0.5 * std::atan2(b, a);
        mag[v] = std::hypot(a, b);
    }
    return detail::detect_from_angles(mesh, g, angle, mag, std::numbers::pi, opt);
}

}  // namespace tanfem
