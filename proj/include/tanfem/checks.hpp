#pragma once

// Residual checks of the geometry and differential-operator pipeline:
// curvature identities, tangentiality of covariant gradients, invariance
// under normal extensions, and div(Rot s) = 0.

#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "tanfem/diff_ops.hpp"
#include "tanfem/geometry.hpp"
#include "tanfem/mesh.hpp"
#include "tanfem/tensor_fields.hpp"

namespace tanfem {

struct CheckItem {
    std::string name;
    double residual = 0.0;
    double tolerance = 0.0;
    bool pass() const { return residual <= tolerance; }
};

struct CheckReport {
    std::vector<CheckItem> items;

    bool pass() const {
        for (const auto& i : items)
            if (!i.pass()) return false;
        return true;
    }
    double residual(const std::string& name) const {
        for (const auto& i : items)
            if (i.name == name) return i.residual;
        throw DimensionMismatch("no check named " + name);
    }
    std::string csv() const {
        std::string out = "check,residual,tolerance,pass\n";
        char buf[256];
        for (const auto& i : items) {
            std::snprintf(buf, sizeof buf, "%s,%.6e,%.6e,%d\n", i.name.c_str(), i.residual, i.tolerance,
                          i.pass() ? 1 : 0);
            out += buf;
        }
        return out;
    }
};

/// Non-tangential ambient probe fields with nontrivial derivatives.
struct ProbeVector {
    static constexpr int degree = 1;
    template <class S>
    Vec3<S> operator()(const Vec3<S>& x) const {
        return vec3<S>(x[1] * x[2] + 0.3 * x[0], x[0] * x[0] - x[2], 0.5 * x[0] * x[1] * x[2] + x[1]);
    }
};

struct ProbeQ {
    static constexpr int degree = 2;
    template <class S>
    Mat3<S> operator()(const Vec3<S>& x) const {
        return q_expand<S>({x[0] * x[1], x[2] - S(0.2), x[0] * x[0] * x[2], S(0.5) * x[1] - x[2] * x[2], x[0] + x[1]});
    }
};

/// Points on an analytic surface: Gaussian directions projected onto it.
template <AnalyticSurface Surf>
std::vector<Vec3d> surface_samples(const Surf& surf, int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n01;
    std::vector<Vec3d> pts;
    pts.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) pts.push_back(project_to_surface(surf, normalized(vec3(n01(rng), n01(rng), n01(rng)))));
    return pts;
}

/// Pointwise checks on an analytic surface; all residuals are round-off.
template <AnalyticSurface Surf>
CheckReport analytic_checks(const Surf& surf, int n_points, std::uint64_t seed) {
    const auto pts = surface_samples(surf, n_points, seed);
    CheckReport rep;

    rep.items.push_back({"identities", check_identities(analytic_geometry(surf, pts), 1e-10).max_residual(), 1e-10});

    const CovGrad<ProbeVector, Surf> gv{ProbeVector{}, surf};
    const CovGradQ<ProbeQ, Surf> gq{ProbeQ{}, surf};
    double tangential = 0.0;
    for (const auto& x : pts) {
        const Mat3d p = projector(surface_normal(surf, x));
        const Mat3d a = gv(x);
        const Tensor<double, 3> b = gq(x);
        tangential = std::max({tangential, norm(project_all(p, a) - a), norm(project_all(p, b) - b)});
    }
    rep.items.push_back({"tangentiality", tangential, 1e-12});

    // p = Rot(xyz) against p + s nu for five random polynomial extensions s.
    const Rot<ProductXYZ, Surf> rot{ProductXYZ{}, surf};
    const CovGrad<Rot<ProductXYZ, Surf>, Surf> base{rot, surf};
    std::mt19937_64 rng(seed + 1);
    std::uniform_real_distribution<double> coef(-2.0, 2.0);
    double extension = 0.0;
    for (int k = 0; k < 5; ++k) {
        const double c0 = coef(rng), c1 = coef(rng), c2 = coef(rng), c3 = coef(rng);
        const auto extended = make_field<1>([=](const auto& x) {
            using S = std::decay_t<decltype(x[0])>;
            const S s = S(c0) + c1 * x[0] * x[1] + c2 * x[2] * x[2] * x[2] + c3 * x[1] * x[2];
            return rot(x) + surface_normal(surf, x) * s;
        });
        const CovGrad<decltype(extended), Surf> ext{extended, surf};
        for (const auto& x : pts) extension = std::max(extension, norm(ext(x) - base(x)));
    }
    rep.items.push_back({"extension_invariance", extension, 1e-12});

    const Divergence<Rot<ProductXYZ, Surf>, Surf> div{rot, surf};
    double divrot = 0.0;
    for (const auto& x : pts) divrot = std::max(divrot, std::abs(div(x)[0]));
    rep.items.push_back({"div_rot", divrot, 1e-10});
    return rep;
}

/// Constants of the O(h) bounds for the discrete checks: residual over mean
/// edge length measured once on the level-3 unit icosphere (0.077, 0.029,
/// 0.449), then doubled and rounded up.
struct DiscreteBounds {
    double identities = 0.17;
    double tangentiality = 0.06;
    double extension_invariance = 0.9;
};

inline constexpr DiscreteBounds kDiscreteBounds{};

/// The same checks with discrete geometry and element-wise gradients of P1
/// interpolants; the first three residuals are consistency errors of order h.
inline CheckReport discrete_checks(const SurfaceMesh& mesh, const DiscreteBounds& bounds = kDiscreteBounds) {
    const GeometryData g = discrete_geometry(mesh);
    const double h = mesh.mean_edge_length();
    const auto nt = static_cast<std::size_t>(mesh.num_triangles());
    const auto nv = static_cast<std::size_t>(mesh.num_vertices());
    CheckReport rep;

    rep.items.push_back({"identities", check_identities(g, 1.0).max_residual(), bounds.identities * h});

    const TensorField probe = sample_field<1>(mesh, ProbeVector{});
    const TensorField gp = discrete_cov_grad(mesh, g, probe);
    double tangential = 0.0;
    for (std::size_t e = 0; e < nt; ++e) {
        const Mat3d m = gp.at<2>(e);
        tangential = std::max(tangential, norm(project_all(g.element_projector(e), m) - m));
    }
    rep.items.push_back({"tangentiality", tangential, bounds.tangentiality * h});

    // Tangential P1 field against the same field plus s nu at the vertices.
    const TensorField tangent = project_tangential(probe, g);
    TensorField extended = tangent;
    for (std::size_t v = 0; v < nv; ++v) {
        const Vec3d& x = mesh.vertex(static_cast<int>(v));
        const double s = 1.0 + x[0] * x[1] - 0.5 * x[2] * x[2] * x[2];
        extended.set<1>(v, tangent.at<1>(v) + g.vertex_normals[v] * s);
    }
    const TensorField ga = discrete_cov_grad(mesh, g, tangent), gb = discrete_cov_grad(mesh, g, extended);
    double extension = 0.0;
    for (std::size_t e = 0; e < nt; ++e) extension = std::max(extension, norm(gb.at<2>(e) - ga.at<2>(e)));
    rep.items.push_back({"extension_invariance", extension, bounds.extension_invariance * h});

    // Weak div(Rot s) of the P1 interpolant of s = xyz against every hat
    // function with the flat face normals, scaled by the star area. This
    // vanishes exactly for P1, so only round-off remains.
    std::vector<double> weak(nv, 0.0), star(nv, 0.0);
    double scale = 0.0;
    for (std::size_t e = 0; e < nt; ++e) {
        const int t = static_cast<int>(e);
        const auto grads = barycentric_gradients(mesh, t);
        const auto& tri = mesh.triangle(t);
        Vec3d gs;
        for (std::size_t k = 0; k < 3; ++k) {
            const Vec3d& x = mesh.vertex(tri[k]);
            gs += grads[k] * (x[0] * x[1] * x[2]);
        }
        const Vec3d rot = cross(mesh.face_normal(t), gs);
        scale = std::max(scale, norm(rot));
        const double a = mesh.area(t);
        for (std::size_t k = 0; k < 3; ++k) {
            weak[static_cast<std::size_t>(tri[k])] += a * dot(rot, grads[k]);
            star[static_cast<std::size_t>(tri[k])] += a;
        }
    }
    double divrot = 0.0;
    for (std::size_t v = 0; v < nv; ++v) divrot = std::max(divrot, std::abs(weak[v]) / star[v]);
    rep.items.push_back({"div_rot", divrot / std::max(scale, 1.0), 1e-10});
    return rep;
}

}  // namespace tanfem
