#pragma once

// Fixed-degree Cartesian tensors over R^3. Components are stored with the
// first slot varying slowest, so t(i, j, k) lives at 9 i + 3 j + k.

#include <array>
#include <cmath>
#include <cstddef>

#include "tanfem/core/dual.hpp"

namespace tanfem {

constexpr int pow3(int d) { return d == 0 ? 1 : 3 * pow3(d - 1); }

template <class S, int D>
struct Tensor {
    static_assert(D >= 0 && D <= 5);
    static constexpr int degree = D;
    static constexpr int size = pow3(D);
    std::array<S, size> c{};

    S& operator[](int i) { return c[static_cast<std::size_t>(i)]; }
    const S& operator[](int i) const { return c[static_cast<std::size_t>(i)]; }
    bool operator==(const Tensor&) const = default;

    template <class... I>
    S& operator()(I... idx) {
        static_assert(sizeof...(I) == D);
        return c[static_cast<std::size_t>(flat(idx...))];
    }
    template <class... I>
    const S& operator()(I... idx) const {
        static_assert(sizeof...(I) == D);
        return c[static_cast<std::size_t>(flat(idx...))];
    }

private:
    static constexpr int flat() { return 0; }
    template <class... I>
    static constexpr int flat(int first, I... rest) {
        return first * pow3(static_cast<int>(sizeof...(I))) + flat(rest...);
    }
};

template <class S>
using Vec3 = Tensor<S, 1>;
template <class S>
using Mat3 = Tensor<S, 2>;
using Vec3d = Vec3<double>;
using Mat3d = Mat3<double>;

template <class S>
Vec3<S> vec3(S x, S y, S z) {
    Vec3<S> v;
    v[0] = x;
    v[1] = y;
    v[2] = z;
    return v;
}
inline Vec3d vec3(double x, double y, double z) { return vec3<double>(x, y, z); }

template <class S, int D>
Tensor<S, D> operator+(const Tensor<S, D>& a, const Tensor<S, D>& b) {
    Tensor<S, D> r;
    for (int i = 0; i < Tensor<S, D>::size; ++i) r[i] = a[i] + b[i];
    return r;
}
template <class S, int D>
Tensor<S, D> operator-(const Tensor<S, D>& a, const Tensor<S, D>& b) {
    Tensor<S, D> r;
    for (int i = 0; i < Tensor<S, D>::size; ++i) r[i] = a[i] - b[i];
    return r;
}
template <class S, int D>
Tensor<S, D> operator-(const Tensor<S, D>& a) {
    Tensor<S, D> r;
    for (int i = 0; i < Tensor<S, D>::size; ++i) r[i] = -a[i];
    return r;
}
template <class S, int D>
Tensor<S, D> operator*(const Tensor<S, D>& a, const S& s) {
    Tensor<S, D> r;
    for (int i = 0; i < Tensor<S, D>::size; ++i) r[i] = a[i] * s;
    return r;
}
template <class S, int D>
Tensor<S, D> operator*(const S& s, const Tensor<S, D>& a) {
    return a * s;
}
template <class S, int D>
    requires(!std::is_same_v<S, double>)
Tensor<S, D> operator*(const Tensor<S, D>& a, double s) {
    Tensor<S, D> r;
    for (int i = 0; i < Tensor<S, D>::size; ++i) r[i] = a[i] * s;
    return r;
}
template <class S, int D>
    requires(!std::is_same_v<S, double>)
Tensor<S, D> operator*(double s, const Tensor<S, D>& a) {
    return a * s;
}
template <class S, int D>
Tensor<S, D>& operator+=(Tensor<S, D>& a, const Tensor<S, D>& b) {
    for (int i = 0; i < Tensor<S, D>::size; ++i) a[i] = a[i] + b[i];
    return a;
}
template <class S, int D>
Tensor<S, D>& operator-=(Tensor<S, D>& a, const Tensor<S, D>& b) {
    for (int i = 0; i < Tensor<S, D>::size; ++i) a[i] = a[i] - b[i];
    return a;
}

/// Full contraction a : b.
template <class S, int D>
S contract(const Tensor<S, D>& a, const Tensor<S, D>& b) {
    S r{};
    for (int i = 0; i < Tensor<S, D>::size; ++i) r = r + a[i] * b[i];
    return r;
}

template <class S, int D>
S norm_squared(const Tensor<S, D>& a) {
    return contract(a, a);
}

template <int D>
double norm(const Tensor<double, D>& a) {
    return std::sqrt(norm_squared(a));
}

template <class S>
S dot(const Vec3<S>& a, const Vec3<S>& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

template <class S>
Vec3<S> cross(const Vec3<S>& a, const Vec3<S>& b) {
    return vec3<S>(a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2],
                   a[0] * b[1] - a[1] * b[0]);
}

template <class S>
Mat3<S> outer(const Vec3<S>& a, const Vec3<S>& b) {
    Mat3<S> r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r(i, j) = a[i] * b[j];
    return r;
}

template <class S>
Mat3<S> identity3() {
    Mat3<S> r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r(i, j) = S(i == j ? 1.0 : 0.0);
    return r;
}

template <class S>
Mat3<S> matmul(const Mat3<S>& a, const Mat3<S>& b) {
    Mat3<S> r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            S s{};
            for (int k = 0; k < 3; ++k) s = s + a(i, k) * b(k, j);
            r(i, j) = s;
        }
    return r;
}

template <class S>
Vec3<S> matvec(const Mat3<S>& a, const Vec3<S>& x) {
    Vec3<S> r;
    for (int i = 0; i < 3; ++i) r[i] = a(i, 0) * x[0] + a(i, 1) * x[1] + a(i, 2) * x[2];
    return r;
}

template <class S>
Mat3<S> transpose(const Mat3<S>& a) {
    Mat3<S> r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r(i, j) = a(j, i);
    return r;
}

template <class S>
S trace(const Mat3<S>& a) {
    return a(0, 0) + a(1, 1) + a(2, 2);
}

/// Tangential projector I - nu (x) nu.
template <class S>
Mat3<S> projector(const Vec3<S>& nu) {
    Mat3<S> p;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) p(i, j) = S(i == j ? 1.0 : 0.0) - nu[i] * nu[j];
    return p;
}

inline Vec3d normalized(const Vec3d& v) {
    const double n = norm(v);
    return v * (1.0 / n);
}

/// Apply the matrix m to slot `slot` of t: r(..i..) = m(i, l) t(..l..).
template <class S, int D>
Tensor<S, D> apply_to_slot(const Mat3<S>& m, const Tensor<S, D>& t, int slot) {
    Tensor<S, D> r;
    const int stride = pow3(D - 1 - slot);
    for (int f = 0; f < Tensor<S, D>::size; ++f) {
        const int i = (f / stride) % 3;
        const int base = f - i * stride;
        S s{};
        for (int l = 0; l < 3; ++l) s = s + m(i, l) * t[base + l * stride];
        r[f] = s;
    }
    return r;
}

/// Apply the projector p to every slot of t.
template <class S, int D>
Tensor<S, D> project_all(const Mat3<S>& p, const Tensor<S, D>& t) {
    if constexpr (D == 0) {
        return t;
    } else {
        Tensor<S, D> r = t;
        for (int s = 0; s < D; ++s) r = apply_to_slot(p, r, s);
        return r;
    }
}

/// Contract slot `slot` of t with the vector v, lowering the degree by one.
template <class S, int D>
Tensor<S, D - 1> contract_slot(const Tensor<S, D>& t, const Vec3<S>& v, int slot) {
    static_assert(D >= 1);
    Tensor<S, D - 1> r;
    const int stride = pow3(D - 1 - slot);
    for (int g = 0; g < Tensor<S, D - 1>::size; ++g) {
        // Split g into the part before and after the removed slot.
        const int hi = g / stride;
        const int lo = g % stride;
        S s{};
        for (int l = 0; l < 3; ++l) s = s + t[hi * stride * 3 + l * stride + lo] * v[l];
        r[g] = s;
    }
    return r;
}

/// Contract the last two slots of t with the matrix m: r(I..) = t(I.., J, K) m(J, K).
template <class S, int D>
Tensor<S, D - 2> contract_last_two(const Tensor<S, D>& t, const Mat3<S>& m) {
    static_assert(D >= 2);
    Tensor<S, D - 2> r;
    for (int g = 0; g < Tensor<S, D - 2>::size; ++g) {
        S s{};
        for (int jk = 0; jk < 9; ++jk) s = s + t[g * 9 + jk] * m[jk];
        r[g] = s;
    }
    return r;
}

template <int D>
Tensor<double, D> value_tensor(const Tensor<double, D>& t) {
    return t;
}
template <class T, int D>
Tensor<double, D> value_tensor(const Tensor<Dual<T>, D>& t) {
    Tensor<double, D> r;
    for (int i = 0; i < Tensor<double, D>::size; ++i) r[i] = value_of(t[i]);
    return r;
}

}  // namespace tanfem
