#pragma once

// One-constant surface Landau-de Gennes energy for Q fields:
//   F = 1/2 |grad q|^2 + 1/4 (H^2 - 2K) |q|^2 + penalty + omega W(q),
// with the bulk density W(q) = 1/2 (tr q^2)^2 - 1/2 tr q^2 evaluated on the
// tangential part of q. W(0) = 0 and W is minimal at tr q^2 = 1/2.

#include <array>
#include <string>

#include "tanfem/fem.hpp"
#include "tanfem/geometry.hpp"
#include "tanfem/mesh.hpp"
#include "tanfem/sparse.hpp"

namespace tanfem {

/// Bulk density as a function of a = tr q^2.
inline double bulk_density(double a) { return 0.5 * a * a - 0.5 * a; }

/// dW/da scaled to the tensor gradient: dW/dq = (2a - 1) q.
inline double bulk_factor(double a) { return 2.0 * a - 1.0; }

/// The quadratic part (elastic, curvature coupling, normal penalty) and the
/// bulk part of the discrete energy on one mesh, with the bulk residual and
/// Jacobian needed by Newton.
class NematicEnergy {
public:
    NematicEnergy(const SurfaceMesh& mesh, const GeometryData& g, double omega, double omega_t)
        : mesh_(mesh), omega_(omega), pattern_(mesh, 5) {
        if (!(omega > 0.0) || !(omega_t > 0.0)) throw ConfigError("omega and omega_t must be positive");
        elastic_ = detail::assemble_operator<2>(mesh, g, {1.0, 0.0, 0.5, omega_t}, OperatorVariant::Exact, pattern_);
        mass_ = detail::assemble_operator<2>(mesh, g, {0.0, 1.0, 0.0, 0.0}, OperatorVariant::Exact, pattern_);
        const auto nt = static_cast<std::size_t>(mesh.num_triangles());
        quad_.reserve(nt);
        for (int t = 0; t < mesh.num_triangles(); ++t) {
            const auto qgs = quadrature_geometry(mesh, g, t);
            std::array<QuadPoint, 3> pts;
            for (std::size_t i = 0; i < 3; ++i) {
                pts[i].proj = qgs[i].proj;
                pts[i].bary = qgs[i].bary;
                pts[i].weight = qgs[i].weight;
                for (int c = 0; c < 5; ++c)
                    pts[i].basis[static_cast<std::size_t>(c)] = project_all(qgs[i].proj, q_basis<double>(c));
                for (std::size_t u = 0; u < 5; ++u)
                    for (std::size_t v = 0; v < 5; ++v)
                        pts[i].gram[5 * u + v] = contract(pts[i].basis[u], pts[i].basis[v]);
            }
            quad_.push_back(pts);
        }
    }

    const CsrMatrix& elastic() const { return elastic_; }
    const CsrMatrix& mass() const { return mass_; }
    const BlockPattern& pattern() const { return pattern_; }
    double omega() const { return omega_; }
    std::size_t num_vertices() const { return pattern_.num_vertices(); }

    /// Discrete energy of a component-major DOF vector.
    double energy(const Vector& x) const {
        const Vector ax = elastic_ * x;
        double bulk = 0.0;
        for_each_point(x, [&](std::size_t, const QuadPoint& p, const Mat3d& qp) {
            bulk += p.weight * bulk_density(contract(qp, qp));
        });
        return 0.5 * dot(x, ax) + omega_ * bulk;
    }

    /// Adds the gradient of omega times the bulk energy to `r`.
    void add_bulk(const Vector& x, Vector& r) const {
        const std::size_t nv = num_vertices();
        for_each_point(x, [&](std::size_t t, const QuadPoint& p, const Mat3d& qp) {
            const auto& tri = mesh_.triangle(static_cast<int>(t));
            const double factor = bulk_factor(contract(qp, qp));
            const double w = omega_ * p.weight;
            for (std::size_t c = 0; c < 5; ++c) {
                const double g = w * factor * contract(qp, p.basis[c]);
                for (std::size_t i = 0; i < 3; ++i) r[c * nv + static_cast<std::size_t>(tri[i])] += g * p.bary[i];
            }
        });
    }

    /// Adds the Hessian of omega times the bulk energy to `jac`, which must
    /// use this energy's pattern:
    ///   (2a - 1) Pi dq Pi : psi + 4 (q : Pi dq Pi)(q : psi).
    void add_bulk_hessian(const Vector& x, CsrMatrix& jac) const {
        for_each_point(x, [&](std::size_t t, const QuadPoint& p, const Mat3d& qp) {
            const auto& tri = mesh_.triangle(static_cast<int>(t));
            const double factor = bulk_factor(contract(qp, qp));
            std::array<double, 5> qe{};
            for (std::size_t c = 0; c < 5; ++c) qe[c] = contract(qp, p.basis[c]);
            std::array<double, 25> h{};
            for (std::size_t u = 0; u < 5; ++u)
                for (std::size_t v = 0; v < 5; ++v)
                    h[5 * u + v] = omega_ * p.weight * (factor * p.gram[5 * u + v] + 4.0 * qe[u] * qe[v]);
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) {
                    const double bb = p.bary[static_cast<std::size_t>(i)] * p.bary[static_cast<std::size_t>(j)];
                    for (int c1 = 0; c1 < 5; ++c1)
                        for (int c2 = 0; c2 < 5; ++c2)
                            jac.vals[pattern_.position(jac, tri, t, i, c1, j, c2)] +=
                                bb * h[static_cast<std::size_t>(5 * c1 + c2)];
                }
        });
    }

    /// Stationarity residual A x + omega dW (no time derivative).
    Vector gradient(const Vector& x) const {
        Vector r = elastic_ * x;
        add_bulk(x, r);
        return r;
    }

private:
    struct QuadPoint {
        Mat3d proj;
        std::array<Mat3d, 5> basis;   ///< Pi E_c Pi
        std::array<double, 25> gram;  ///< basis[u] : basis[v]
        std::array<double, 3> bary;
        double weight;
    };

    template <class Fn>
    void for_each_point(const Vector& x, Fn&& fn) const {
        const std::size_t nv = num_vertices();
        if (x.size() != 5 * nv) throw DimensionMismatch("Q DOF vector has wrong length");
        for (std::size_t t = 0; t < quad_.size(); ++t) {
            const auto& tri = mesh_.triangle(static_cast<int>(t));
            for (const auto& p : quad_[t]) {
                std::array<double, 5> proxy{};
                for (std::size_t c = 0; c < 5; ++c)
                    for (std::size_t i = 0; i < 3; ++i)
                        proxy[c] += p.bary[i] * x[c * nv + static_cast<std::size_t>(tri[i])];
                fn(t, p, project_all(p.proj, q_expand<double>(proxy)));
            }
        }
    }

    const SurfaceMesh& mesh_;
    double omega_;
    BlockPattern pattern_;
    CsrMatrix elastic_;
    CsrMatrix mass_;
    std::vector<std::array<QuadPoint, 3>> quad_;
};

/// Discrete Landau-de Gennes energy of a Q field.
inline double energy(const QProxyField& q, const SurfaceMesh& mesh, const GeometryData& g, double omega,
                     double omega_t = 1000.0) {
    if (q.num_vertices() != static_cast<std::size_t>(mesh.num_vertices()))
        throw DimensionMismatch("field not aligned with mesh");
    return NematicEnergy(mesh, g, omega, omega_t).energy(dofs_from_proxy(q));
}

}  // namespace tanfem
