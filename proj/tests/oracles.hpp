#pragma once

// Independent reference computations used by the tests. Nothing here calls
// the library's dual-number or covariant-derivative code: surfaces enter as
// plain double-valued level-set functions with hand-written gradients, and
// derivatives are taken in a local Monge chart by central differences.

#include <cmath>
#include <functional>

#include "tanfem/core/tensor.hpp"

namespace oracle {

using tanfem::Mat3d;
using tanfem::Tensor;
using tanfem::Vec3d;

struct PlainSurface {
    std::function<double(const Vec3d&)> phi;
    std::function<Vec3d(const Vec3d&)> grad;
};

inline PlainSurface ellipsoid(double a, double b, double c) {
    return {[=](const Vec3d& x) {
                return x[0] * x[0] / (a * a) + x[1] * x[1] / (b * b) + x[2] * x[2] / (c * c) - 1.0;
            },
            [=](const Vec3d& x) {
                return tanfem::vec3(2 * x[0] / (a * a), 2 * x[1] / (b * b), 2 * x[2] / (c * c));
            }};
}

inline Vec3d unit(const Vec3d& v) {
    const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    return tanfem::vec3(v[0] / n, v[1] / n, v[2] / n);
}

/// Closed-form Gaussian curvature of an axis-aligned ellipsoid at a surface point.
inline double ellipsoid_gauss_curvature(double a, double b, double c, const Vec3d& x) {
    const double s = x[0] * x[0] / std::pow(a, 4) + x[1] * x[1] / std::pow(b, 4) +
                     x[2] * x[2] / std::pow(c, 4);
    return 1.0 / (a * a * b * b * c * c * s * s);
}

/// Local Monge chart X(u) = x0 + u1 e1 + u2 e2 + h(u) n0 around a surface point.
class MongeChart {
public:
    MongeChart(PlainSurface surf, const Vec3d& x0) : surf_(std::move(surf)), x0_(x0) {
        n0_ = unit(surf_.grad(x0));
        const Vec3d helper = std::abs(n0_[0]) < 0.9 ? tanfem::vec3(1.0, 0.0, 0.0)
                                                    : tanfem::vec3(0.0, 1.0, 0.0);
        e1_ = unit(tanfem::cross(n0_, helper));
        e2_ = tanfem::cross(n0_, e1_);
    }

    const Vec3d& axis(int i) const { return i == 0 ? e1_ : e2_; }

    Vec3d point(double u1, double u2) const {
        const Vec3d base = x0_ + e1_ * u1 + e2_ * u2;
        double h = 0.0;
        for (int it = 0; it < 60; ++it) {
            const Vec3d x = base + n0_ * h;
            const double f = surf_.phi(x);
            const double df = tanfem::dot(surf_.grad(x), n0_);
            const double step = f / df;
            h -= step;
            if (std::abs(step) < 1e-17) break;
        }
        return base + n0_ * h;
    }

    /// Tangent vectors dX/du_i at X(u).
    std::array<Vec3d, 2> tangents(double u1, double u2) const {
        const Vec3d x = point(u1, u2);
        const Vec3d g = surf_.grad(x);
        const double gn = tanfem::dot(g, n0_);
        return {e1_ + n0_ * (-tanfem::dot(g, e1_) / gn), e2_ + n0_ * (-tanfem::dot(g, e2_) / gn)};
    }

    Vec3d normal(double u1, double u2) const { return unit(surf_.grad(point(u1, u2))); }

private:
    PlainSurface surf_;
    Vec3d x0_, n0_, e1_, e2_;
};

/// Covariant gradient at x0 of the tangential part of a vector field, as an
/// ambient 3x3 tensor (derivative index last). Christoffel symbols vanish at
/// the chart origin, so the covariant derivative is the partial derivative
/// of the chart components there.
inline Mat3d vector_covariant_gradient(const PlainSurface& surf, const Vec3d& x0,
                                       const std::function<Vec3d(const Vec3d&)>& field,
                                       double step = 1e-5) {
    const MongeChart chart(surf, x0);
    const auto comps = [&](double u1, double u2) {
        const auto tan = chart.tangents(u1, u2);
        const Vec3d p = field(chart.point(u1, u2));
        return std::array<double, 2>{tanfem::dot(p, tan[0]), tanfem::dot(p, tan[1])};
    };
    Mat3d out;
    for (int k = 0; k < 2; ++k) {
        const double du1 = k == 0 ? step : 0.0;
        const double du2 = k == 1 ? step : 0.0;
        const auto plus = comps(du1, du2);
        const auto minus = comps(-du1, -du2);
        for (int i = 0; i < 2; ++i) {
            const double d = (plus[static_cast<std::size_t>(i)] - minus[static_cast<std::size_t>(i)]) /
                             (2.0 * step);
            out += tanfem::outer(chart.axis(i), chart.axis(k)) * d;
        }
    }
    return out;
}

/// Same for the Q-space representative q = Pi[qhat] + (nu.qhat.nu)/2 Pi of a
/// 2-tensor field; chart components q_ij = qhat(X_i, X_j) + (nu.qhat.nu)/2 g_ij.
inline Tensor<double, 3> q_covariant_gradient(const PlainSurface& surf, const Vec3d& x0,
                                              const std::function<Mat3d(const Vec3d&)>& field,
                                              double step = 1e-5) {
    const MongeChart chart(surf, x0);
    const auto comps = [&](double u1, double u2) {
        const auto tan = chart.tangents(u1, u2);
        const Vec3d x = chart.point(u1, u2);
        const Vec3d nu = chart.normal(u1, u2);
        const Mat3d q = field(x);
        const double nqn = tanfem::dot(nu, tanfem::matvec(q, nu));
        std::array<double, 4> c{};
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                const auto ii = static_cast<std::size_t>(i);
                const auto jj = static_cast<std::size_t>(j);
                c[2 * ii + jj] = tanfem::dot(tan[ii], tanfem::matvec(q, tan[jj])) +
                                 0.5 * nqn * tanfem::dot(tan[ii], tan[jj]);
            }
        return c;
    };
    Tensor<double, 3> out;
    for (int k = 0; k < 2; ++k) {
        const double du1 = k == 0 ? step : 0.0;
        const double du2 = k == 1 ? step : 0.0;
        const auto plus = comps(du1, du2);
        const auto minus = comps(-du1, -du2);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                const auto ij = static_cast<std::size_t>(2 * i + j);
                const double d = (plus[ij] - minus[ij]) / (2.0 * step);
                const Vec3d& a = chart.axis(i);
                const Vec3d& b = chart.axis(j);
                const Vec3d& c = chart.axis(k);
                for (int p = 0; p < 3; ++p)
                    for (int q = 0; q < 3; ++q)
                        for (int r = 0; r < 3; ++r) out(p, q, r) += a[p] * b[q] * c[r] * d;
            }
    }
    return out;
}

/// Random point on an axis-aligned ellipsoid from two uniform numbers.
inline Vec3d ellipsoid_point(double a, double b, double c, double s, double t) {
    const double z = 2.0 * s - 1.0;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = 2.0 * 3.14159265358979323846 * t;
    return tanfem::vec3(a * r * std::cos(phi), b * r * std::sin(phi), c * z);
}

}  // namespace oracle
