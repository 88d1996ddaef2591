#pragma once

// Krylov solvers (BiCGstab(l), CG) with optional Jacobi preconditioning,
// damped Newton iteration and one implicit Euler step for Q fields.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "tanfem/core/field.hpp"
#include "tanfem/fem.hpp"
#include "tanfem/sparse.hpp"

namespace tanfem {

enum class SolverMethod { BiCGStabL, CG };
enum class Preconditioner { None, Jacobi, BlockJacobi };

struct SolveConfig {
    SolverMethod method = SolverMethod::BiCGStabL;
    int l = 2;
    Preconditioner preconditioner = Preconditioner::Jacobi;
    double rel_tol = 1e-10;
    int max_iter = 20000;
    /// Unknowns per vertex for block Jacobi with component-major layout
    /// (dof = c * V + v). `linear_solve(BlockSystem)` fills it in.
    int block_size = 1;

    void validate() const {
        if (!(rel_tol > 0.0 && rel_tol < 1.0)) throw ConfigError("rel_tol must lie in (0, 1)");
        if (l != 1 && l != 2 && l != 4) throw ConfigError("BiCGstab(l) supports l in {1, 2, 4}");
        if (max_iter < 1) throw ConfigError("max_iter must be positive");
        if (block_size < 1 || block_size > 9) throw ConfigError("block_size must lie in 1..9");
    }
};

struct SolveStats {
    int iterations = 0;         ///< matrix-vector products
    double rel_residual = 0.0;  ///< recomputed ||b - A x|| / ||b||
    bool converged = false;
    int restarts = 0;
};

struct SolveResult {
    Vector x;
    SolveStats stats;
};

namespace detail {

/// Jacobi or block-Jacobi preconditioner. Blocks gather the unknowns
/// {v, v + V, ..., v + (b - 1) V} of one vertex; a block that cannot be
/// inverted falls back to its diagonal.
class JacobiPreconditioner {
public:
    JacobiPreconditioner(const CsrMatrix& a, Preconditioner kind, int block_size) : n_(a.rows) {
        block_ = kind == Preconditioner::BlockJacobi ? static_cast<std::size_t>(block_size) : 1;
        if (n_ % block_ != 0) throw DimensionMismatch("matrix size is not a multiple of the block size");
        nv_ = n_ / block_;
        const std::size_t bb = block_ * block_;
        inv_.assign(nv_ * bb, 0.0);
        for (std::size_t v = 0; v < nv_; ++v) {
            double* out = &inv_[v * bb];
            if (kind == Preconditioner::None) {
                for (std::size_t i = 0; i < block_; ++i) out[i * block_ + i] = 1.0;
                continue;
            }
            std::vector<double> m(bb);
            for (std::size_t i = 0; i < block_; ++i)
                for (std::size_t j = 0; j < block_; ++j) m[i * block_ + j] = a(i * nv_ + v, j * nv_ + v);
            if (!invert(m, out)) {
                std::fill(out, out + bb, 0.0);
                for (std::size_t i = 0; i < block_; ++i) {
                    const double d = m[i * block_ + i];
                    out[i * block_ + i] = d != 0.0 ? 1.0 / d : 1.0;
                }
            }
        }
    }

    void apply(const Vector& in, Vector& out) const {
        out.resize(n_);
        const std::size_t bb = block_ * block_;
        for (std::size_t v = 0; v < nv_; ++v) {
            const double* m = &inv_[v * bb];
            for (std::size_t i = 0; i < block_; ++i) {
                double s = 0.0;
                for (std::size_t j = 0; j < block_; ++j) s += m[i * block_ + j] * in[j * nv_ + v];
                out[i * nv_ + v] = s;
            }
        }
    }

private:
    /// Gauss-Jordan with partial pivoting; false if numerically singular.
    bool invert(std::vector<double> m, double* out) const {
        const std::size_t b = block_;
        for (std::size_t i = 0; i < b; ++i)
            for (std::size_t j = 0; j < b; ++j) out[i * b + j] = i == j ? 1.0 : 0.0;
        double scale = 0.0;
        for (double x : m) scale = std::max(scale, std::abs(x));
        if (scale == 0.0) return false;
        for (std::size_t col = 0; col < b; ++col) {
            std::size_t piv = col;
            for (std::size_t r = col + 1; r < b; ++r)
                if (std::abs(m[r * b + col]) > std::abs(m[piv * b + col])) piv = r;
            if (std::abs(m[piv * b + col]) <= 1e-14 * scale) return false;
            for (std::size_t j = 0; j < b; ++j) {
                std::swap(m[col * b + j], m[piv * b + j]);
                std::swap(out[col * b + j], out[piv * b + j]);
            }
            const double d = 1.0 / m[col * b + col];
            for (std::size_t j = 0; j < b; ++j) {
                m[col * b + j] *= d;
                out[col * b + j] *= d;
            }
            for (std::size_t r = 0; r < b; ++r) {
                if (r == col) continue;
                const double f = m[r * b + col];
                if (f == 0.0) continue;
                for (std::size_t j = 0; j < b; ++j) {
                    m[r * b + j] -= f * m[col * b + j];
                    out[r * b + j] -= f * out[col * b + j];
                }
            }
        }
        return true;
    }

    std::size_t n_, block_ = 1, nv_ = 0;
    std::vector<double> inv_;
};

inline double true_residual(const CsrMatrix& a, const Vector& b, const Vector& x, double bnorm) {
    Vector r = a * x;
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
    return norm2(r) / bnorm;
}

inline SolveResult conjugate_gradient(const CsrMatrix& a, const Vector& b, const SolveConfig& cfg, Vector x) {
    const JacobiPreconditioner prec(a, cfg.preconditioner, cfg.block_size);
    const double bnorm = norm2(b);
    SolveResult res;
    Vector r = a * x;
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
    Vector z(r.size()), p(r.size()), ap;
    prec.apply(r, z);
    p = z;
    double rz = dot(r, z);
    int it = 0;
    while (norm2(r) > cfg.rel_tol * bnorm && it < cfg.max_iter) {
        a.multiply(p, ap);
        ++it;
        const double pap = dot(p, ap);
        if (!(pap > 0.0)) throw BreakdownError("CG: matrix is not positive definite");
        const double alpha = rz / pap;
        axpy(alpha, p, x);
        axpy(-alpha, ap, r);
        prec.apply(r, z);
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < p.size(); ++i) p[i] = z[i] + beta * p[i];
    }
    res.stats.iterations = it;
    res.stats.rel_residual = true_residual(a, b, x, bnorm);
    res.stats.converged = res.stats.rel_residual <= cfg.rel_tol;
    res.x = std::move(x);
    return res;
}

/// One BiCGstab(l) cycle sequence on the right-preconditioned operator
/// A P^{-1}; returns false on breakdown. `y` is the preconditioned unknown.
inline bool bicgstab_l_run(const CsrMatrix& a, const JacobiPreconditioner& prec, const Vector& r_init, Vector& y,
                           int l, double tol_abs, int& matvecs, int max_iter) {
    const std::size_t n = r_init.size();
    Vector tmp(n);
    const auto op = [&](const Vector& in, Vector& out) {
        prec.apply(in, tmp);
        a.multiply(tmp, out);
        ++matvecs;
    };
    const auto L = static_cast<std::size_t>(l);
    std::vector<Vector> r(L + 1, Vector(n, 0.0)), u(L + 1, Vector(n, 0.0));
    r[0] = r_init;
    const Vector rtilde = r_init;
    double rho0 = 1.0, alpha = 0.0, omega = 1.0;
    std::vector<std::vector<double>> tau(L + 1, std::vector<double>(L + 1, 0.0));
    std::vector<double> sigma(L + 1), gamma(L + 1), gamma_p(L + 1), gamma_pp(L + 1);

    while (norm2(r[0]) > tol_abs && matvecs < max_iter) {
        rho0 = -omega * rho0;
        for (std::size_t j = 0; j < L; ++j) {
            const double rho1 = dot(rtilde, r[j]);
            if (rho0 == 0.0 || !std::isfinite(rho1)) return false;
            const double beta = alpha * rho1 / rho0;
            rho0 = rho1;
            for (std::size_t i = 0; i <= j; ++i)
                for (std::size_t k = 0; k < n; ++k) u[i][k] = r[i][k] - beta * u[i][k];
            op(u[j], u[j + 1]);
            const double g = dot(rtilde, u[j + 1]);
            if (g == 0.0 || !std::isfinite(g)) return false;
            alpha = rho0 / g;
            for (std::size_t i = 0; i <= j; ++i) axpy(-alpha, u[i + 1], r[i]);
            op(r[j], r[j + 1]);
            axpy(alpha, u[0], y);
        }
        // Minimal-residual polynomial part (modified Gram-Schmidt).
        for (std::size_t j = 1; j <= L; ++j) {
            for (std::size_t i = 1; i < j; ++i) {
                tau[i][j] = dot(r[j], r[i]) / sigma[i];
                axpy(-tau[i][j], r[i], r[j]);
            }
            sigma[j] = dot(r[j], r[j]);
            if (sigma[j] == 0.0 || !std::isfinite(sigma[j])) return false;
            gamma_p[j] = dot(r[0], r[j]) / sigma[j];
        }
        gamma[L] = gamma_p[L];
        omega = gamma[L];
        for (std::size_t j = L - 1; j >= 1; --j) {
            double s = 0.0;
            for (std::size_t i = j + 1; i <= L; ++i) s += tau[j][i] * gamma[i];
            gamma[j] = gamma_p[j] - s;
        }
        for (std::size_t j = 1; j < L; ++j) {
            double s = 0.0;
            for (std::size_t i = j + 1; i < L; ++i) s += tau[j][i] * gamma[i + 1];
            gamma_pp[j] = gamma[j + 1] + s;
        }
        axpy(gamma[1], r[0], y);
        axpy(-gamma_p[L], r[L], r[0]);
        axpy(-gamma[L], u[L], u[0]);
        for (std::size_t j = 1; j < L; ++j) {
            axpy(-gamma[j], u[j], u[0]);
            axpy(gamma_pp[j], r[j], y);
            axpy(-gamma_p[j], r[j], r[0]);
        }
        if (omega == 0.0 || !std::isfinite(omega)) return false;
    }
    return true;
}

inline SolveResult bicgstab_l(const CsrMatrix& a, const Vector& b, const SolveConfig& cfg, Vector x) {
    const JacobiPreconditioner prec(a, cfg.preconditioner, cfg.block_size);
    const double bnorm = norm2(b);
    SolveResult res;
    int matvecs = 0, breakdowns = 0;
    // Outer loop: restart from the true residual whenever the recursively
    // updated one claims convergence too early or the iteration breaks down.
    for (int pass = 0; pass < 20; ++pass) {
        Vector r = a * x;
        ++matvecs;
        for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
        if (norm2(r) <= cfg.rel_tol * bnorm || matvecs >= cfg.max_iter) break;
        Vector y(r.size(), 0.0);
        const bool ok = bicgstab_l_run(a, prec, r, y, cfg.l, 0.5 * cfg.rel_tol * bnorm, matvecs, cfg.max_iter);
        Vector dx;
        prec.apply(y, dx);
        axpy(1.0, dx, x);
        if (!ok && ++breakdowns > 1) throw BreakdownError("BiCGstab(l) broke down twice");
        if (pass > 0) ++res.stats.restarts;
    }
    res.stats.iterations = matvecs;
    res.stats.rel_residual = true_residual(a, b, x, bnorm);
    res.stats.converged = res.stats.rel_residual <= cfg.rel_tol;
    res.x = std::move(x);
    return res;
}

}  // namespace detail

/// Solve A x = b. A non-converged solve returns its last iterate with
/// `stats.converged == false`; use `require_converged` to turn that into an
/// error.
inline SolveResult linear_solve(const CsrMatrix& a, const Vector& b, const SolveConfig& cfg, Vector x0 = {}) {
    cfg.validate();
    if (b.size() != a.rows) throw DimensionMismatch("rhs length does not match matrix");
    if (x0.empty()) x0.assign(a.rows, 0.0);
    if (x0.size() != a.rows) throw DimensionMismatch("initial guess length does not match matrix");
    for (double v : a.vals)
        if (!std::isfinite(v)) throw DimensionMismatch("matrix has non-finite entries");
    if (norm2(b) == 0.0) {
        SolveResult res;
        res.x.assign(a.rows, 0.0);
        res.stats.converged = true;
        return res;
    }
    return cfg.method == SolverMethod::CG ? detail::conjugate_gradient(a, b, cfg, std::move(x0))
                                          : detail::bicgstab_l(a, b, cfg, std::move(x0));
}

inline SolveResult linear_solve(const BlockSystem& s, const SolveConfig& cfg, Vector x0 = {}) {
    SolveConfig c = cfg;
    if (c.preconditioner == Preconditioner::BlockJacobi) c.block_size = s.components;
    return linear_solve(s.matrix, s.rhs, c, std::move(x0));
}

inline const SolveResult& require_converged(const SolveResult& r) {
    if (!r.stats.converged)
        throw NoConvergence("linear solver stopped at relative residual " + std::to_string(r.stats.rel_residual) +
                            " after " + std::to_string(r.stats.iterations) + " products");
    return r;
}

// ---------------------------------------------------------------------------
// Newton

struct NewtonConfig {
    double tol = 1e-8;
    int max_newton = 10;
    double damping = 1.0;

    void validate() const {
        if (max_newton < 1) throw ConfigError("max_newton must be at least 1");
        if (!(damping > 0.0 && damping <= 1.0)) throw ConfigError("damping must lie in (0, 1]");
        if (!(tol > 0.0)) throw ConfigError("Newton tolerance must be positive");
    }
};

struct NewtonResult {
    Vector u;
    Vector residual;                     ///< F at the final iterate
    std::vector<double> residual_norms;  ///< ||F|| before each step and after the last
    bool converged = false;
    int iterations = 0;
};

using ResidualFn = std::function<Vector(const Vector&)>;
using JacobianFn = std::function<CsrMatrix(const Vector&)>;
using LinearSolveFn = std::function<SolveResult(const CsrMatrix&, const Vector&)>;

/// Damped Newton: u <- u - s J(u)^{-1} F(u); s starts at `damping` and is
/// halved (at most four times) while the residual norm increases.
inline NewtonResult newton_solve(const ResidualFn& residual, const JacobianFn& jacobian, Vector u0,
                                 const NewtonConfig& cfg, const LinearSolveFn& solve) {
    cfg.validate();
    NewtonResult res;
    res.u = std::move(u0);
    res.residual = residual(res.u);
    double fnorm = norm2(res.residual);
    res.residual_norms.push_back(fnorm);
    for (int k = 0; k < cfg.max_newton && fnorm > cfg.tol; ++k) {
        const SolveResult step = solve(jacobian(res.u), res.residual);
        double s = cfg.damping;
        Vector trial, f;
        for (int halvings = 0;; ++halvings) {
            trial = res.u;
            axpy(-s, step.x, trial);
            f = residual(trial);
            if (norm2(f) < fnorm || halvings == 4) break;
            s *= 0.5;
        }
        res.u = std::move(trial);
        res.residual = std::move(f);
        fnorm = norm2(res.residual);
        res.residual_norms.push_back(fnorm);
        res.iterations = k + 1;
    }
    res.converged = fnorm <= cfg.tol;
    return res;
}

inline NewtonResult newton_solve(const ResidualFn& residual, const JacobianFn& jacobian, Vector u0,
                                 const NewtonConfig& cfg, const SolveConfig& linear) {
    return newton_solve(residual, jacobian, std::move(u0), cfg,
                        [&](const CsrMatrix& a, const Vector& b) { return linear_solve(a, b, linear); });
}

// ---------------------------------------------------------------------------
// Implicit Euler

/// Residual and Jacobian of one time-discrete step, given the previous state
/// and the current iterate (both as component-major DOF vectors) and tau.
struct StepAssembler {
    std::function<Vector(const Vector& previous, const Vector& current, double tau)> residual;
    std::function<CsrMatrix(const Vector& previous, const Vector& current, double tau)> jacobian;
};

struct StepResult {
    QProxyField state;
    NewtonResult newton;
};

/// q^m from q^{m-1}: Newton on the step residual starting at q^{m-1}.
inline StepResult implicit_euler_step(const QProxyField& state, double tau, const StepAssembler& assembler,
                                      const NewtonConfig& newton, const SolveConfig& linear) {
    if (!(tau > 0.0)) throw ConfigError("time step must be positive");
    const Vector prev = dofs_from_proxy(state);
    StepResult out;
    out.newton = newton_solve([&](const Vector& u) { return assembler.residual(prev, u, tau); },
                              [&](const Vector& u) { return assembler.jacobian(prev, u, tau); }, prev, newton, linear);
    if (!out.newton.converged)
        throw NoConvergence("Newton stalled at residual " + std::to_string(out.newton.residual_norms.back()));
    out.state = proxy_from_dofs(out.newton.u, state.num_vertices());
    return out;
}

}  // namespace tanfem
