#pragma once

// Covariant differential operators written entirely in ambient Cartesian
// components. Two layers:
//   * pointwise formulas taking t, its ambient gradient, nu and B;
//   * composable field functors that supply exact ambient derivatives of any
//     smooth extension through nested dual numbers.
// The formulas do not depend on how t is extended off the surface.

#include <array>
#include <string>
#include <vector>

#include "tanfem/core/dual.hpp"
#include "tanfem/core/field.hpp"
#include "tanfem/core/tensor.hpp"
#include "tanfem/geometry.hpp"
#include "tanfem/mesh.hpp"
#include "tanfem/tensor_fields.hpp"

namespace tanfem {

/// Cartesian representative of the surface volume form: E_IJ = eps_IJK nu_K.
template <class S>
Mat3<S> levi_civita(const Vec3<S>& nu) {
    Mat3<S> e;
    e(0, 1) = nu[2];
    e(1, 0) = -nu[2];
    e(1, 2) = nu[0];
    e(2, 1) = -nu[0];
    e(2, 0) = nu[1];
    e(0, 2) = -nu[1];
    return e;
}

namespace detail {

template <int D>
std::array<int, D == 0 ? 1 : D> digits(int f) {
    std::array<int, D == 0 ? 1 : D> idx{};
    for (int s = D - 1; s >= 0; --s) {
        idx[static_cast<std::size_t>(s)] = f % 3;
        f /= 3;
    }
    return idx;
}

}  // namespace detail

/// Covariant gradient of a degree-D field from its value t and ambient
/// gradient dt (derivative index last):
///   Pi[dt] + sum_m B(I_m, K) Pi[t contracted with nu in slot m].
/// With `exact == false` only Pi[dt] is kept.
template <int D, class S>
Tensor<S, D + 1> covariant_gradient(const Tensor<S, D>& t, const Tensor<S, D + 1>& dt,
                                    const Vec3<S>& nu, const Mat3<S>& shape, bool exact = true) {
    const Mat3<S> p = projector(nu);
    Tensor<S, D + 1> r = project_all(p, dt);
    if (!exact) return r;
    if constexpr (D >= 1) {
        for (int m = 0; m < D; ++m) {
            const Tensor<S, D - 1> u = project_all(p, contract_slot(t, nu, m));
            for (int f = 0; f < Tensor<S, D + 1>::size; ++f) {
                const auto idx = detail::digits<D + 1>(f);
                const int k = idx[static_cast<std::size_t>(D)];
                const int im = idx[static_cast<std::size_t>(m)];
                int g = 0;  // flat index of u with slot m and the last slot removed
                for (int s = 0; s < D; ++s)
                    if (s != m) g = 3 * g + idx[static_cast<std::size_t>(s)];
                r[f] = r[f] + shape(im, k) * u[g];
            }
        }
    }
    return r;
}

/// Gradient of the Q-space representative Pi[q] + (nu.q.nu)/2 Pi of an
/// ambient symmetric traceless q: the degree-2 formula plus
///   1/2 Pi_IJ Pi_KN nu_L nu_M dq_LMN - Pi_IJ (B q nu)_K.
template <class S>
Tensor<S, 3> q_covariant_gradient(const Mat3<S>& q, const Tensor<S, 3>& dq, const Vec3<S>& nu,
                                  const Mat3<S>& shape, bool exact = true) {
    Tensor<S, 3> r = covariant_gradient<2>(q, dq, nu, shape, exact);
    const Mat3<S> p = projector(nu);
    Vec3<S> nqn_grad;  // nu_L nu_M dq_LMN
    for (int n = 0; n < 3; ++n) {
        S s{};
        for (int l = 0; l < 3; ++l)
            for (int m = 0; m < 3; ++m) s = s + nu[l] * nu[m] * dq(l, m, n);
        nqn_grad[n] = s;
    }
    const Vec3<S> tang = matvec(p, nqn_grad);
    const Vec3<S> bqn = matvec(shape, matvec(q, nu));
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) {
                S extra = S(0.5) * p(i, j) * tang[k];
                if (exact) extra = extra - p(i, j) * bqn[k];
                r(i, j, k) = r(i, j, k) + extra;
            }
    return r;
}

/// Contract the last two slots with Pi.
template <int D, class S>
Tensor<S, D - 2> divergence_from_gradient(const Tensor<S, D>& grad, const Vec3<S>& nu) {
    return contract_last_two(grad, projector(nu));
}

/// Rot t = grad t contracted in its last slot with the first slot of E; the
/// second slot of E takes its place, so the degree is that of grad t.
template <int D, class S>
Tensor<S, D> rot_from_gradient(const Tensor<S, D>& grad, const Vec3<S>& nu) {
    const Mat3<S> e = levi_civita(nu);
    Tensor<S, D> r;
    for (int g = 0; g < Tensor<S, D>::size; ++g) {
        const int head = g / 3;
        const int j = g % 3;
        S s{};
        for (int k = 0; k < 3; ++k) s = s + grad[head * 3 + k] * e(k, j);
        r[g] = s;
    }
    return r;
}

/// rot_k t = -grad t contracted over slots (k, last) with E; k is 1-based.
template <int D, class S>
Tensor<S, D - 2> rot_k_from_gradient(const Tensor<S, D>& grad, const Vec3<S>& nu, int k) {
    if (k < 1 || k > D - 1) throw BadContractionIndex("rot_k requires 1 <= k <= degree");
    const Mat3<S> e = levi_civita(nu);
    Tensor<S, D - 2> r;
    for (int f = 0; f < Tensor<S, D>::size; ++f) {
        const auto idx = detail::digits<D>(f);
        const int a = idx[static_cast<std::size_t>(k - 1)];
        const int b = idx[static_cast<std::size_t>(D - 1)];
        int g = 0;
        for (int s = 0; s < D - 1; ++s)
            if (s != k - 1) g = 3 * g + idx[static_cast<std::size_t>(s)];
        r[g] = r[g] - grad[f] * e(a, b);
    }
    return r;
}

// ---------------------------------------------------------------------------
// Ambient field functors. A field type exposes `static constexpr int degree`
// and `template <class S> Tensor<S, degree> operator()(const Vec3<S>&) const`.

template <class F>
concept AmbientField = requires { F::degree; };

namespace detail {

/// Value and ambient gradient of a field at x.
template <AmbientField F, class S>
void value_and_gradient(const F& field, const Vec3<S>& x, Tensor<S, F::degree>& value,
                        Tensor<S, F::degree + 1>& grad) {
    const Tensor<Dual<S>, F::degree> td = field(seed_point(x));
    for (int i = 0; i < Tensor<S, F::degree>::size; ++i) {
        value[i] = td[i].v;
        for (int k = 0; k < 3; ++k) grad[3 * i + k] = td[i].d[static_cast<std::size_t>(k)];
    }
}

}  // namespace detail

/// s = x y z.
struct ProductXYZ {
    static constexpr int degree = 0;
    template <class S>
    Tensor<S, 0> operator()(const Vec3<S>& x) const {
        Tensor<S, 0> r;
        r[0] = x[0] * x[1] * x[2];
        return r;
    }
};

/// Coordinate function x_axis.
struct Coordinate {
    static constexpr int degree = 0;
    int axis = 2;
    template <class S>
    Tensor<S, 0> operator()(const Vec3<S>& x) const {
        Tensor<S, 0> r;
        r[0] = x[axis];
        return r;
    }
};

/// Generic lambda wrapper: fn(x) must return Tensor<S, D>.
template <int D, class Fn>
struct LambdaField {
    static constexpr int degree = D;
    Fn fn;
    template <class S>
    Tensor<S, D> operator()(const Vec3<S>& x) const {
        return fn(x);
    }
};
template <int D, class Fn>
LambdaField<D, Fn> make_field(Fn fn) {
    return LambdaField<D, Fn>{std::move(fn)};
}

/// Covariant gradient of a field, itself a field of one degree higher.
template <AmbientField F, AnalyticSurface Surf>
struct CovGrad {
    static constexpr int degree = F::degree + 1;
    static_assert(F::degree <= 3, "covariant gradient implemented up to degree 3 inputs");
    F field;
    Surf surf;
    bool exact = true;

    template <class S>
    Tensor<S, degree> operator()(const Vec3<S>& x) const {
        Tensor<S, F::degree> t;
        Tensor<S, degree> dt;
        detail::value_and_gradient(field, x, t, dt);
        return covariant_gradient<F::degree>(t, dt, surface_normal(surf, x), shape_operator(surf, x),
                                             exact);
    }
};

/// Gradient of the Q-space representative of a degree-2 field.
template <AmbientField F, AnalyticSurface Surf>
struct CovGradQ {
    static_assert(F::degree == 2);
    static constexpr int degree = 3;
    F field;
    Surf surf;
    bool exact = true;

    template <class S>
    Tensor<S, 3> operator()(const Vec3<S>& x) const {
        Mat3<S> q;
        Tensor<S, 3> dq;
        detail::value_and_gradient(field, x, q, dq);
        return q_covariant_gradient(q, dq, surface_normal(surf, x), shape_operator(surf, x), exact);
    }
};

/// div t = grad t : Pi over the last two slots, for a field of degree >= 1.
template <AmbientField F, AnalyticSurface Surf>
struct Divergence {
    static_assert(F::degree >= 1);
    static constexpr int degree = F::degree - 1;
    F field;
    Surf surf;

    template <class S>
    Tensor<S, degree> operator()(const Vec3<S>& x) const {
        const CovGrad<F, Surf> grad{field, surf};
        return divergence_from_gradient<F::degree + 1>(grad(x), surface_normal(surf, x));
    }
};

template <AmbientField F, AnalyticSurface Surf>
struct Rot {
    static_assert(F::degree <= 2);
    static constexpr int degree = F::degree + 1;
    F field;
    Surf surf;

    template <class S>
    Tensor<S, degree> operator()(const Vec3<S>& x) const {
        const CovGrad<F, Surf> grad{field, surf};
        return rot_from_gradient<F::degree + 1>(grad(x), surface_normal(surf, x));
    }
};

template <AmbientField F, AnalyticSurface Surf>
struct RotK {
    static_assert(F::degree >= 1);
    static constexpr int degree = F::degree - 1;
    F field;
    Surf surf;
    int k = 1;

    template <class S>
    Tensor<S, degree> operator()(const Vec3<S>& x) const {
        const CovGrad<F, Surf> grad{field, surf};
        return rot_k_from_gradient<F::degree + 1>(grad(x), surface_normal(surf, x), k);
    }
};

/// Q tensor p (x) p - |p|^2/2 Pi built from a tangential vector field p.
template <AmbientField F, AnalyticSurface Surf>
struct QFromVector {
    static_assert(F::degree == 1);
    static constexpr int degree = 2;
    F field;
    Surf surf;

    template <class S>
    Mat3<S> operator()(const Vec3<S>& x) const {
        const Vec3<S> p = field(x);
        const Mat3<S> proj = projector(surface_normal(surf, x));
        return outer(p, p) - proj * (S(0.5) * dot(p, p));
    }
};

/// f = -div(grad t) + t for a vector field t.
template <AmbientField F, AnalyticSurface Surf>
struct VectorHelmholtzRhs {
    static_assert(F::degree == 1);
    static constexpr int degree = 1;
    F field;
    Surf surf;

    template <class S>
    Vec3<S> operator()(const Vec3<S>& x) const {
        const CovGrad<F, Surf> grad{field, surf};
        const Divergence<CovGrad<F, Surf>, Surf> div{grad, surf};
        return field(x) - div(x);
    }
};

/// f = -div(grad q) + q for a Q-tensor field, using the Q-space gradient.
template <AmbientField F, AnalyticSurface Surf>
struct QHelmholtzRhs {
    static_assert(F::degree == 2);
    static constexpr int degree = 2;
    F field;
    Surf surf;

    template <class S>
    Mat3<S> operator()(const Vec3<S>& x) const {
        const CovGradQ<F, Surf> grad{field, surf};
        const Divergence<CovGradQ<F, Surf>, Surf> div{grad, surf};
        return q_representative(field(x), surface_normal(surf, x)) - div(x);
    }
};

/// f = -div(grad s) + s for a scalar.
template <AmbientField F, AnalyticSurface Surf>
struct ScalarHelmholtzRhs {
    static_assert(F::degree == 0);
    static constexpr int degree = 0;
    F field;
    Surf surf;

    template <class S>
    Tensor<S, 0> operator()(const Vec3<S>& x) const {
        const CovGrad<F, Surf> grad{field, surf};
        const Divergence<CovGrad<F, Surf>, Surf> div{grad, surf};
        return field(x) - div(x);
    }
};

/// Evaluate f = -div(grad t*) + t* at every mesh vertex.
template <AmbientField F, AnalyticSurface Surf>
TensorField manufactured_rhs(const F& t_star, const Surf& surf, const SurfaceMesh& mesh) {
    if constexpr (F::degree == 1) {
        return sample_field<1>(mesh, VectorHelmholtzRhs<F, Surf>{t_star, surf});
    } else if constexpr (F::degree == 2) {
        return sample_field<2>(mesh, QHelmholtzRhs<F, Surf>{t_star, surf});
    } else {
        return sample_field<0>(mesh, ScalarHelmholtzRhs<F, Surf>{t_star, surf});
    }
}

// ---------------------------------------------------------------------------
// Discrete strong-form operators (diagnostics only). Each returns one tensor
// per element, stored in a TensorField whose "vertices" are the elements.

/// Element-wise covariant gradient of a P1 field, evaluated at centroids.
inline TensorField discrete_cov_grad(const SurfaceMesh& mesh, const GeometryData& g,
                                     const TensorField& field) {
    if (field.degree > 2 || field.degree < 0)
        throw UnsupportedDegree("cov_grad supports degrees 0..2");
    TensorField out(field.degree + 1, static_cast<std::size_t>(mesh.num_triangles()));
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto grads = barycentric_gradients(mesh, t);
        const auto& tri = mesh.triangle(t);
        const auto e = static_cast<std::size_t>(t);
        const Vec3d& nu = g.element_normals[e];
        const Mat3d& b = g.shape[e];
        const auto assemble = [&]<int D>() {
            Tensor<double, D> val;
            Tensor<double, D + 1> dt;
            for (int a = 0; a < 3; ++a) {
                const auto v = static_cast<std::size_t>(tri[static_cast<std::size_t>(a)]);
                const Tensor<double, D> tv = field.at<D>(v);
                val += tv * (1.0 / 3.0);
                for (int i = 0; i < Tensor<double, D>::size; ++i)
                    for (int k = 0; k < 3; ++k)
                        dt[3 * i + k] += tv[i] * grads[static_cast<std::size_t>(a)][k];
            }
            out.set<D + 1>(e, covariant_gradient<D>(val, dt, nu, b));
        };
        switch (field.degree) {
            case 0: assemble.template operator()<0>(); break;
            case 1: assemble.template operator()<1>(); break;
            default: assemble.template operator()<2>(); break;
        }
    }
    return out;
}

}  // namespace tanfem
