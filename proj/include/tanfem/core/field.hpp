#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "tanfem/core/tensor.hpp"
#include "tanfem/errors.hpp"

namespace tanfem {

/// Vertex-based Cartesian tensor field of degree 0..2 (degree 3 only for
/// element-wise gradients of 2-tensors). Coefficients are
/// stored vertex-major: vertex v owns values[v * 3^d, (v + 1) * 3^d).
struct TensorField {
    int degree = 0;
    std::vector<double> values;

    TensorField() = default;
    TensorField(int deg, std::size_t num_vertices)
        : degree(deg), values(num_vertices * static_cast<std::size_t>(pow3(deg)), 0.0) {
        if (deg < 0 || deg > 3) throw UnsupportedDegree("tensor fields support degrees 0..3");
    }

    int components() const { return pow3(degree); }
    std::size_t num_vertices() const {
        return values.size() / static_cast<std::size_t>(components());
    }

    template <int D>
    Tensor<double, D> at(std::size_t v) const {
        if (D != degree) throw DimensionMismatch("field degree does not match accessor");
        Tensor<double, D> t;
        const std::size_t off = v * static_cast<std::size_t>(pow3(D));
        for (int i = 0; i < pow3(D); ++i) t[i] = values[off + static_cast<std::size_t>(i)];
        return t;
    }

    template <int D>
    void set(std::size_t v, const Tensor<double, D>& t) {
        if (D != degree) throw DimensionMismatch("field degree does not match accessor");
        const std::size_t off = v * static_cast<std::size_t>(pow3(D));
        for (int i = 0; i < pow3(D); ++i) values[off + static_cast<std::size_t>(i)] = t[i];
    }

    bool all_finite() const {
        for (double x : values)
            if (!std::isfinite(x)) return false;
        return true;
    }
};

/// Five-component proxy of a symmetric, traceless 3x3 tensor per vertex:
///   [q1 q2 q3; q2 q4 q5; q3 q5 -q1-q4].
struct QProxyField {
    std::vector<double> values;  // vertex-major, 5 per vertex

    QProxyField() = default;
    explicit QProxyField(std::size_t num_vertices) : values(5 * num_vertices, 0.0) {}

    std::size_t num_vertices() const { return values.size() / 5; }
    double& operator()(std::size_t v, int c) { return values[5 * v + static_cast<std::size_t>(c)]; }
    double operator()(std::size_t v, int c) const {
        return values[5 * v + static_cast<std::size_t>(c)];
    }
};

/// Basis matrix of proxy component c in 0..4.
template <class S = double>
Mat3<S> q_basis(int c) {
    Mat3<S> m;
    switch (c) {
        case 0: m(0, 0) = S(1.0); m(2, 2) = S(-1.0); break;
        case 1: m(0, 1) = S(1.0); m(1, 0) = S(1.0); break;
        case 2: m(0, 2) = S(1.0); m(2, 0) = S(1.0); break;
        case 3: m(1, 1) = S(1.0); m(2, 2) = S(-1.0); break;
        case 4: m(1, 2) = S(1.0); m(2, 1) = S(1.0); break;
        default: throw DimensionMismatch("proxy component out of range");
    }
    return m;
}

template <class S>
Mat3<S> q_expand(const std::array<S, 5>& q) {
    Mat3<S> m;
    m(0, 0) = q[0];
    m(0, 1) = q[1];
    m(0, 2) = q[2];
    m(1, 0) = q[1];
    m(1, 1) = q[3];
    m(1, 2) = q[4];
    m(2, 0) = q[2];
    m(2, 1) = q[4];
    m(2, 2) = -q[0] - q[3];
    return m;
}

/// A named field for VTK output; exactly one of the two payloads is used.
struct NamedField {
    std::string name;
    TensorField tensor;
    QProxyField q;
    bool is_q = false;

    static NamedField of(std::string name, TensorField f) {
        NamedField n;
        n.name = std::move(name);
        n.tensor = std::move(f);
        return n;
    }
    static NamedField of_q(std::string name, QProxyField f) {
        NamedField n;
        n.name = std::move(name);
        n.q = std::move(f);
        n.is_q = true;
        return n;
    }
};

}  // namespace tanfem
