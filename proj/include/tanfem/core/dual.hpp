#pragma once

// Forward-mode dual numbers carrying a gradient with respect to the three
// ambient coordinates. Nesting Dual<Dual<T>> yields second derivatives,
// and so on; every generic routine in the library is written against a
// scalar template parameter so that it can be differentiated this way.

#include <array>
#include <cmath>
#include <type_traits>

namespace tanfem {

template <class T>
struct Dual {
    T v{};
    std::array<T, 3> d{};

    Dual() = default;
    Dual(double c) : v(c) {}  // NOLINT(google-explicit-constructor)
    template <class U = T>
        requires(!std::is_same_v<U, double>)
    Dual(const T& val) : v(val) {}  // NOLINT(google-explicit-constructor)
};

template <class T>
struct is_dual : std::false_type {};
template <class T>
struct is_dual<Dual<T>> : std::true_type {};

inline double value_of(double x) { return x; }
template <class T>
double value_of(const Dual<T>& x) {
    return value_of(x.v);
}

template <class T>
Dual<T> operator-(const Dual<T>& a) {
    Dual<T> r;
    r.v = -a.v;
    for (int i = 0; i < 3; ++i) r.d[i] = -a.d[i];
    return r;
}

template <class T>
Dual<T> operator+(const Dual<T>& a, const Dual<T>& b) {
    Dual<T> r;
    r.v = a.v + b.v;
    for (int i = 0; i < 3; ++i) r.d[i] = a.d[i] + b.d[i];
    return r;
}

template <class T>
Dual<T> operator-(const Dual<T>& a, const Dual<T>& b) {
    Dual<T> r;
    r.v = a.v - b.v;
    for (int i = 0; i < 3; ++i) r.d[i] = a.d[i] - b.d[i];
    return r;
}

template <class T>
Dual<T> operator*(const Dual<T>& a, const Dual<T>& b) {
    Dual<T> r;
    r.v = a.v * b.v;
    for (int i = 0; i < 3; ++i) r.d[i] = a.d[i] * b.v + a.v * b.d[i];
    return r;
}

template <class T>
Dual<T> operator/(const Dual<T>& a, const Dual<T>& b) {
    Dual<T> r;
    r.v = a.v / b.v;
    const T inv2 = T(1.0) / (b.v * b.v);
    for (int i = 0; i < 3; ++i) r.d[i] = (a.d[i] * b.v - a.v * b.d[i]) * inv2;
    return r;
}

template <class T>
Dual<T> operator+(const Dual<T>& a, double b) {
    Dual<T> r = a;
    r.v = r.v + b;
    return r;
}
template <class T>
Dual<T> operator+(double a, const Dual<T>& b) {
    return b + a;
}
template <class T>
Dual<T> operator-(const Dual<T>& a, double b) {
    Dual<T> r = a;
    r.v = r.v - b;
    return r;
}
template <class T>
Dual<T> operator-(double a, const Dual<T>& b) {
    return -b + a;
}
template <class T>
Dual<T> operator*(const Dual<T>& a, double b) {
    Dual<T> r;
    r.v = a.v * b;
    for (int i = 0; i < 3; ++i) r.d[i] = a.d[i] * b;
    return r;
}
template <class T>
Dual<T> operator*(double a, const Dual<T>& b) {
    return b * a;
}
template <class T>
Dual<T> operator/(const Dual<T>& a, double b) {
    return a * (1.0 / b);
}
template <class T>
Dual<T> operator/(double a, const Dual<T>& b) {
    return Dual<T>(a) / b;
}

template <class T>
Dual<T>& operator+=(Dual<T>& a, const Dual<T>& b) {
    a = a + b;
    return a;
}
template <class T>
Dual<T>& operator-=(Dual<T>& a, const Dual<T>& b) {
    a = a - b;
    return a;
}
template <class T>
Dual<T>& operator*=(Dual<T>& a, const Dual<T>& b) {
    a = a * b;
    return a;
}
template <class T>
Dual<T>& operator*=(Dual<T>& a, double b) {
    a = a * b;
    return a;
}

template <class T>
Dual<T> sqrt(const Dual<T>& a) {
    using std::sqrt;
    Dual<T> r;
    r.v = sqrt(a.v);
    const T half_inv = 0.5 / r.v;
    for (int i = 0; i < 3; ++i) r.d[i] = a.d[i] * half_inv;
    return r;
}

template <class T>
bool operator<(const Dual<T>& a, double b) {
    return value_of(a) < b;
}

}  // namespace tanfem
