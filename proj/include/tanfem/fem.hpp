#pragma once

// Componentwise P1 assembly of the extended vector and Q-tensor Helmholtz
// forms. Every term is written in product form: at each quadrature point the
// covariant gradient, the projected value and the penalty data of each local
// basis function are computed once, and element matrices are sums of their
// pairwise contractions. That keeps every assembled matrix symmetric by
// construction.

#include <array>
#include <string>
#include <vector>

#include "tanfem/diff_ops.hpp"
#include "tanfem/geometry.hpp"
#include "tanfem/mesh.hpp"
#include "tanfem/quadrature.hpp"
#include "tanfem/sparse.hpp"
#include "tanfem/tensor_fields.hpp"

namespace tanfem {

enum class OperatorVariant { Exact, ApproxInnerProduct, ApproxDerivative };

inline std::string to_string(OperatorVariant v) {
    switch (v) {
        case OperatorVariant::Exact: return "exact";
        case OperatorVariant::ApproxInnerProduct: return "approx_ip";
        case OperatorVariant::ApproxDerivative: return "approx_deriv";
    }
    return "exact";
}

inline OperatorVariant parse_variant(const std::string& s) {
    if (s == "exact") return OperatorVariant::Exact;
    if (s == "approx_ip" || s == "approx_inner_product") return OperatorVariant::ApproxInnerProduct;
    if (s == "approx_deriv" || s == "approx_derivative") return OperatorVariant::ApproxDerivative;
    throw ConfigError("unknown operator variant '" + s + "'");
}

enum class FieldKind { Vector, QTensor };

inline int num_components(FieldKind k) { return k == FieldKind::Vector ? 3 : 5; }

/// Sparse system for c coupled scalar P1 fields, component-major:
/// dof(v, c) = c * V + v.
struct BlockSystem {
    CsrMatrix matrix;
    Vector rhs;
    int components = 0;
    std::size_t num_vertices = 0;
    std::vector<std::string> component_map;

    std::size_t dof(std::size_t v, int c) const { return static_cast<std::size_t>(c) * num_vertices + v; }
    std::size_t size() const { return num_vertices * static_cast<std::size_t>(components); }
};

inline std::vector<std::string> component_names(FieldKind k) {
    if (k == FieldKind::Vector) return {"p1", "p2", "p3"};
    return {"q1", "q2", "q3", "q4", "q5"};
}

/// Weights of the symmetric terms in
///   stiffness (grad t : grad psi) + (mass + curvature_mass (H^2 - 2K)) (t, psi)
///   + penalty p(t) : psi.
struct FormWeights {
    double stiffness = 1.0;
    double mass = 1.0;
    double curvature_mass = 0.0;
    double penalty = 1000.0;
};

// ---------------------------------------------------------------------------
// Sparsity pattern

/// Block pattern shared by all assembled operators on one mesh: every
/// component pair couples each vertex with itself and its neighbours.
class BlockPattern {
public:
    BlockPattern(const SurfaceMesh& mesh, int components)
        : nv_(static_cast<std::size_t>(mesh.num_vertices())), comps_(components) {
        stencil_.resize(nv_);
        for (std::size_t v = 0; v < nv_; ++v) {
            auto& s = stencil_[v];
            s = mesh.vertex_neighbors()[v];
            s.push_back(static_cast<int>(v));
            std::sort(s.begin(), s.end());
        }
        const auto nt = static_cast<std::size_t>(mesh.num_triangles());
        local_.resize(nt);
        for (std::size_t t = 0; t < nt; ++t) {
            const auto& tri = mesh.triangle(static_cast<int>(t));
            for (std::size_t a = 0; a < 3; ++a)
                for (std::size_t b = 0; b < 3; ++b) {
                    const auto& s = stencil_[static_cast<std::size_t>(tri[a])];
                    local_[t][3 * a + b] =
                        static_cast<int>(std::lower_bound(s.begin(), s.end(), tri[b]) - s.begin());
                }
        }
    }

    CsrMatrix empty_matrix() const {
        CsrMatrix m;
        const auto c = static_cast<std::size_t>(comps_);
        m.rows = nv_ * c;
        m.row_ptr.assign(m.rows + 1, 0);
        for (std::size_t c1 = 0; c1 < c; ++c1)
            for (std::size_t v = 0; v < nv_; ++v)
                m.row_ptr[c1 * nv_ + v + 1] = m.row_ptr[c1 * nv_ + v] + c * stencil_[v].size();
        m.cols.resize(m.row_ptr.back());
        m.vals.assign(m.row_ptr.back(), 0.0);
        for (std::size_t c1 = 0; c1 < c; ++c1)
            for (std::size_t v = 0; v < nv_; ++v) {
                std::size_t k = m.row_ptr[c1 * nv_ + v];
                for (std::size_t c2 = 0; c2 < c; ++c2)
                    for (int w : stencil_[v]) m.cols[k++] = static_cast<int>(c2 * nv_) + w;
            }
        return m;
    }

    /// Position in `vals` of the entry coupling local vertices (a, b) of
    /// triangle t in components (c1, c2).
    std::size_t position(const CsrMatrix& m, const Triangle& tri, std::size_t t, int a, int c1, int b,
                         int c2) const {
        const auto va = static_cast<std::size_t>(tri[static_cast<std::size_t>(a)]);
        return m.row_ptr[static_cast<std::size_t>(c1) * nv_ + va] +
               static_cast<std::size_t>(c2) * stencil_[va].size() +
               static_cast<std::size_t>(local_[t][static_cast<std::size_t>(3 * a + b)]);
    }

    std::size_t num_vertices() const { return nv_; }
    int components() const { return comps_; }

private:
    std::size_t nv_;
    int comps_;
    std::vector<std::vector<int>> stencil_;
    std::vector<std::array<int, 9>> local_;
};

// ---------------------------------------------------------------------------
// Quadrature-point geometry and basis data

struct QuadGeometry {
    Vec3d normal;       ///< renormalized P1 interpolant of the vertex normals
    Mat3d proj;         ///< I - nu nu with that normal
    Mat3d shape;        ///< element-constant B
    double b_norm_sq;   ///< element-constant H^2 - 2K
    std::array<double, 3> bary;
    double weight;      ///< area times rule weight
};

/// Geometry at every midpoint-rule point of triangle t.
inline std::array<QuadGeometry, 3> quadrature_geometry(const SurfaceMesh& mesh, const GeometryData& g, int t) {
    std::array<QuadGeometry, 3> out;
    const auto e = static_cast<std::size_t>(t);
    const double area = mesh.area(t);
    const double h = g.mean_curvature[e], k = g.gauss_curvature[e];
    for (std::size_t i = 0; i < 3; ++i) {
        const auto& q = kMidpointRule[i];
        auto& qg = out[i];
        qg.normal = interpolate_normal(mesh, g, t, q);
        qg.proj = projector(qg.normal);
        qg.shape = g.shape[e];
        qg.b_norm_sq = h * h - 2.0 * k;
        qg.bary = q.bary;
        qg.weight = area * q.weight_fraction;
    }
    return out;
}

/// Matrix basis of component c: e_c for vectors, the proxy basis for Q.
template <int D>
Tensor<double, D> component_basis(int c) {
    if constexpr (D == 1) {
        Vec3d e;
        e[c] = 1.0;
        return e;
    } else {
        return q_basis<double>(c);
    }
}

/// Quantities of one local basis function lambda_a * E_c at a quadrature point.
template <int D>
struct BasisData {
    Tensor<double, D + 1> grad;  ///< covariant (or approximated) gradient
    Tensor<double, D> value;     ///< projected (or plain) value used in masses and loads
    Vec3d normal_part;           ///< vectors: (nu.t, 0, 0); Q: t nu
    double nu_t_nu = 0.0;        ///< Q only
};

template <int D>
BasisData<D> basis_data(const QuadGeometry& qg, const Vec3d& grad_lambda, double lambda, int c,
                        OperatorVariant variant) {
    const Tensor<double, D> e = component_basis<D>(c);
    const Tensor<double, D> val = e * lambda;
    Tensor<double, D + 1> dval;
    for (int i = 0; i < Tensor<double, D>::size; ++i)
        for (int k = 0; k < 3; ++k) dval[3 * i + k] = e[i] * grad_lambda[k];

    BasisData<D> b;
    if (variant == OperatorVariant::ApproxDerivative) {
        b.grad = project_all(qg.proj, dval);
    } else if constexpr (D == 1) {
        b.grad = covariant_gradient<1>(val, dval, qg.normal, qg.shape);
    } else {
        b.grad = q_covariant_gradient(val, dval, qg.normal, qg.shape);
    }
    b.value = variant == OperatorVariant::ApproxInnerProduct ? val : project_all(qg.proj, val);
    if constexpr (D == 1) {
        b.normal_part[0] = dot(qg.normal, val);
    } else {
        b.normal_part = matvec(val, qg.normal);
        b.nu_t_nu = dot(qg.normal, b.normal_part);
    }
    return b;
}

/// Penalty pairing: omega_t (nu.t)(nu.psi) for vectors,
/// omega_t ((t nu).(psi nu) - 1/4 (nu t nu)(nu psi nu)) for Q.
template <int D>
double penalty_pairing(const BasisData<D>& u, const BasisData<D>& v) {
    if constexpr (D == 1) {
        return u.normal_part[0] * v.normal_part[0];
    } else {
        return dot(u.normal_part, v.normal_part) - 0.25 * u.nu_t_nu * v.nu_t_nu;
    }
}

// ---------------------------------------------------------------------------
// Assembly

namespace detail {

template <int D>
void require_kind_matches(const TensorField& f) {
    if (f.degree != D) throw DimensionMismatch("load field has degree " + std::to_string(f.degree));
}

template <int D>
CsrMatrix assemble_operator(const SurfaceMesh& mesh, const GeometryData& g, const FormWeights& w,
                            OperatorVariant variant, const BlockPattern& pattern) {
    constexpr int kComps = D == 1 ? 3 : 5;
    CsrMatrix m = pattern.empty_matrix();
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto& tri = mesh.triangle(t);
        const auto grads = barycentric_gradients(mesh, t);
        for (const auto& qg : quadrature_geometry(mesh, g, t)) {
            std::array<BasisData<D>, 3 * kComps> basis;
            for (int a = 0; a < 3; ++a)
                for (int c = 0; c < kComps; ++c)
                    basis[static_cast<std::size_t>(a * kComps + c)] =
                        basis_data<D>(qg, grads[static_cast<std::size_t>(a)],
                                      qg.bary[static_cast<std::size_t>(a)], c, variant);
            const double mass = w.mass + w.curvature_mass * qg.b_norm_sq;
            for (int a = 0; a < 3; ++a)
                for (int c1 = 0; c1 < kComps; ++c1) {
                    const auto& u = basis[static_cast<std::size_t>(a * kComps + c1)];
                    for (int b = 0; b < 3; ++b)
                        for (int c2 = 0; c2 < kComps; ++c2) {
                            const auto& v = basis[static_cast<std::size_t>(b * kComps + c2)];
                            const double val = w.stiffness * contract(u.grad, v.grad) +
                                               mass * contract(u.value, v.value) +
                                               w.penalty * penalty_pairing<D>(u, v);
                            m.vals[pattern.position(m, tri, static_cast<std::size_t>(t), a, c1, b, c2)] +=
                                qg.weight * val;
                        }
                }
        }
    }
    return m;
}

template <int D>
Vector assemble_load(const SurfaceMesh& mesh, const GeometryData& g, const TensorField& f,
                     OperatorVariant variant) {
    constexpr int kComps = D == 1 ? 3 : 5;
    require_kind_matches<D>(f);
    const auto nv = static_cast<std::size_t>(mesh.num_vertices());
    if (f.num_vertices() != nv) throw DimensionMismatch("load field not aligned with mesh");
    Vector rhs(nv * kComps, 0.0);
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto& tri = mesh.triangle(t);
        const auto qgs = quadrature_geometry(mesh, g, t);
        for (std::size_t i = 0; i < 3; ++i) {
            const auto& qg = qgs[i];
            const Tensor<double, D> fq = interpolate_field<D>(mesh, f, t, kMidpointRule[i]);
            const Tensor<double, D> fp =
                variant == OperatorVariant::ApproxInnerProduct ? fq : project_all(qg.proj, fq);
            for (int c = 0; c < kComps; ++c) {
                const double fc = contract(fp, component_basis<D>(c));
                for (int a = 0; a < 3; ++a)
                    rhs[static_cast<std::size_t>(c) * nv + static_cast<std::size_t>(tri[static_cast<std::size_t>(a)])] +=
                        qg.weight * qg.bary[static_cast<std::size_t>(a)] * fc;
            }
        }
    }
    return rhs;
}

}  // namespace detail

/// Symmetric operator for the given field kind and term weights.
inline CsrMatrix assemble_operator(const SurfaceMesh& mesh, const GeometryData& g, FieldKind kind,
                                   const FormWeights& w, OperatorVariant variant = OperatorVariant::Exact) {
    if (g.num_elements() != static_cast<std::size_t>(mesh.num_triangles()) ||
        g.vertex_normals.size() != static_cast<std::size_t>(mesh.num_vertices()))
        throw DimensionMismatch("geometry does not match mesh");
    const BlockPattern pattern(mesh, num_components(kind));
    return kind == FieldKind::Vector ? detail::assemble_operator<1>(mesh, g, w, variant, pattern)
                                     : detail::assemble_operator<2>(mesh, g, w, variant, pattern);
}

inline Vector assemble_load(const SurfaceMesh& mesh, const GeometryData& g, FieldKind kind,
                            const TensorField& f, OperatorVariant variant = OperatorVariant::Exact) {
    return kind == FieldKind::Vector ? detail::assemble_load<1>(mesh, g, f, variant)
                                     : detail::assemble_load<2>(mesh, g, f, variant);
}

inline BlockSystem assemble_vector_helmholtz(const SurfaceMesh& mesh, const GeometryData& g, double omega_t,
                                             const TensorField& f,
                                             OperatorVariant variant = OperatorVariant::Exact) {
    if (f.degree != 1) throw DimensionMismatch("vector Helmholtz expects a degree-1 load");
    BlockSystem s;
    s.components = 3;
    s.num_vertices = static_cast<std::size_t>(mesh.num_vertices());
    s.component_map = component_names(FieldKind::Vector);
    s.matrix = assemble_operator(mesh, g, FieldKind::Vector, {1.0, 1.0, 0.0, omega_t}, variant);
    s.rhs = assemble_load(mesh, g, FieldKind::Vector, f, variant);
    return s;
}

inline BlockSystem assemble_qtensor_helmholtz(const SurfaceMesh& mesh, const GeometryData& g, double omega_t,
                                              const TensorField& f,
                                              OperatorVariant variant = OperatorVariant::Exact) {
    if (f.degree != 2) throw DimensionMismatch("Q-tensor Helmholtz expects a degree-2 load");
    for (std::size_t v = 0; v < f.num_vertices(); ++v) q_pack(f.at<2>(v));  // throws NotQTensor
    BlockSystem s;
    s.components = 5;
    s.num_vertices = static_cast<std::size_t>(mesh.num_vertices());
    s.component_map = component_names(FieldKind::QTensor);
    s.matrix = assemble_operator(mesh, g, FieldKind::QTensor, {1.0, 1.0, 0.0, omega_t}, variant);
    s.rhs = assemble_load(mesh, g, FieldKind::QTensor, f, variant);
    return s;
}

// ---------------------------------------------------------------------------
// DOF vectors <-> fields

inline TensorField vector_field_from_dofs(const Vector& x, std::size_t nv) {
    TensorField f(1, nv);
    for (std::size_t v = 0; v < nv; ++v)
        for (std::size_t c = 0; c < 3; ++c) f.values[3 * v + c] = x[c * nv + v];
    return f;
}

inline QProxyField proxy_from_dofs(const Vector& x, std::size_t nv) {
    QProxyField q(nv);
    for (std::size_t v = 0; v < nv; ++v)
        for (int c = 0; c < 5; ++c) q(v, c) = x[static_cast<std::size_t>(c) * nv + v];
    return q;
}

inline Vector dofs_from_proxy(const QProxyField& q) {
    const std::size_t nv = q.num_vertices();
    Vector x(5 * nv);
    for (std::size_t v = 0; v < nv; ++v)
        for (int c = 0; c < 5; ++c) x[static_cast<std::size_t>(c) * nv + v] = q(v, c);
    return x;
}

// ---------------------------------------------------------------------------
// Boundary terms

/// Neumann data given as an ambient field and its ambient gradient sampled at
/// the vertices (degree d and d + 1). Empty fields mean homogeneous data.
struct NeumannData {
    TensorField value;
    TensorField gradient;

    bool is_zero() const {
        for (double x : value.values)
            if (x != 0.0) return false;
        for (double x : gradient.values)
            if (x != 0.0) return false;
        return true;
    }
};

/// Right-hand-side contribution of the conormal derivative on the boundary,
/// split into the projected ambient-gradient part and the curvature part
/// (everything that carries B or the normal components of the data).
struct BoundaryContribution {
    Vector gradient_part;
    Vector curvature_part;
    Vector total() const {
        Vector t = gradient_part;
        axpy(1.0, curvature_part, t);
        return t;
    }
};

inline BoundaryContribution assemble_boundary_terms(const SurfaceMesh& mesh, const GeometryData& g,
                                                    const NeumannData& data, int degree) {
    if (degree != 1 && degree != 2) throw UnsupportedDegree("boundary terms support degrees 1 and 2");
    const auto nv = static_cast<std::size_t>(mesh.num_vertices());
    const int comps = degree == 1 ? 3 : 5;
    BoundaryContribution out{Vector(nv * static_cast<std::size_t>(comps), 0.0),
                             Vector(nv * static_cast<std::size_t>(comps), 0.0)};
    if (data.is_zero()) return out;
    if (mesh.is_closed()) throw NoBoundary("nonzero Neumann data on a closed mesh");
    if (data.value.degree != degree || data.gradient.degree != degree + 1 || data.value.num_vertices() != nv ||
        data.gradient.num_vertices() != nv)
        throw DimensionMismatch("Neumann data does not match degree or mesh");

    const auto& edges = mesh.boundary_edges();
    for (std::size_t i = 0; i < edges.size(); ++i) {
        const int t = mesh.boundary_edge_triangles()[i];
        const Vec3d a = mesh.vertex(edges[i][0]), b = mesh.vertex(edges[i][1]);
        const double len = norm(b - a);
        // Edges run counter-clockwise around their triangle, so tangent x
        // face normal points out of the surface.
        const Vec3d conormal = normalized(cross(b - a, mesh.face_normal(t)));
        const Mat3d& shape = g.shape[static_cast<std::size_t>(t)];
        // Fluxes at the two end points; they are integrated against the P1
        // basis exactly, which keeps vanishing vertex data exactly zero.
        std::array<std::vector<double>, 2> grad_flux, curv_flux;
        for (std::size_t end = 0; end < 2; ++end) {
            const auto v = static_cast<std::size_t>(edges[i][end]);
            const Vec3d& nu = g.vertex_normals[v];
            const auto flux = [&]<int D>() {
                const Tensor<double, D> tv = data.value.at<D>(v);
                const Tensor<double, D + 1> dv = data.gradient.at<D + 1>(v);
                Tensor<double, D + 1> full;
                if constexpr (D == 1) {
                    full = covariant_gradient<1>(tv, dv, nu, shape);
                } else {
                    full = q_covariant_gradient(tv, dv, nu, shape);
                }
                const Tensor<double, D + 1> plain = project_all(projector(nu), dv);
                for (int c = 0; c < comps; ++c) {
                    const Tensor<double, D> e = component_basis<D>(c);
                    double gsum = 0.0, fsum = 0.0;
                    for (int j = 0; j < Tensor<double, D>::size; ++j)
                        for (int k = 0; k < 3; ++k) {
                            gsum += plain[3 * j + k] * conormal[k] * e[j];
                            fsum += full[3 * j + k] * conormal[k] * e[j];
                        }
                    grad_flux[end].push_back(gsum);
                    curv_flux[end].push_back(fsum - gsum);
                }
            };
            if (degree == 1) flux.template operator()<1>();
            else flux.template operator()<2>();
        }
        for (int c = 0; c < comps; ++c) {
            const auto cc = static_cast<std::size_t>(c);
            for (std::size_t end = 0; end < 2; ++end) {
                const std::size_t other = 1 - end;
                const std::size_t row = cc * nv + static_cast<std::size_t>(edges[i][end]);
                out.gradient_part[row] += len * (2.0 * grad_flux[end][cc] + grad_flux[other][cc]) / 6.0;
                out.curvature_part[row] += len * (2.0 * curv_flux[end][cc] + curv_flux[other][cc]) / 6.0;
            }
        }
    }
    return out;
}

}  // namespace tanfem
