#pragma once

// Surface Landau-de Gennes relaxation: implicit Euler in time, Newton on the
// bulk nonlinearity, seeded noise initialization and seed ensembles.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "tanfem/defects.hpp"
#include "tanfem/fem.hpp"
#include "tanfem/geometry.hpp"
#include "tanfem/mesh.hpp"
#include "tanfem/nematic.hpp"
#include "tanfem/solver.hpp"
#include "tanfem/tensor_fields.hpp"

namespace tanfem {

struct LdGParams {
    double omega = 100.0;
    double omega_t = 1000.0;
    double tau = 0.05;
    double t_end = 0.0;            ///< 0: run until steady state (or max_steps)
    double steady_tol = 1e-6;      ///< max |q^m - q^{m-1}| / tau
    int max_steps = 20000;
    int max_halvings = 4;          ///< per step, on Newton failure or energy increase
    int regrow_after = 5;          ///< successful steps before a reduced tau is doubled again
    std::uint64_t seed = 0;
    NewtonConfig newton{1e-10, 12, 1.0};
    /// CG is tried first (the step Jacobian is symmetric); BiCGstab(l) takes
    /// over when CG detects indefiniteness.
    SolveConfig linear{SolverMethod::CG, 2, Preconditioner::BlockJacobi, 1e-8, 20000, 5};

    double energy_slack() const { return 10.0 * newton.tol; }

    void validate() const {
        if (!(omega > 0.0)) throw ConfigError("omega must be positive");
        if (!(omega_t > 0.0)) throw ConfigError("omega_t must be positive");
        if (!(tau > 0.0)) throw ConfigError("tau must be positive");
        if (t_end < 0.0) throw ConfigError("t_end must be non-negative");
        if (!(steady_tol > 0.0)) throw ConfigError("steady_tol must be positive");
        if (max_steps < 1) throw ConfigError("max_steps must be positive");
        if (max_halvings < 0) throw ConfigError("max_halvings must be non-negative");
        newton.validate();
        linear.validate();
    }
};

struct StepRecord {
    int step = 0;
    double time = 0.0;
    double tau = 0.0;
    double energy = 0.0;
    int newton_iterations = 0;
    double max_residual = 0.0;  ///< final Newton residual (max norm)
    double rate = 0.0;          ///< max |q^m - q^{m-1}| / tau
};

struct RelaxationTrace {
    std::uint64_t seed = 0;
    std::vector<StepRecord> steps;
    QProxyField state;
    double initial_energy = 0.0;
    bool steady = false;     ///< steady-state criterion met
    bool completed = false;  ///< no unrecoverable failure
    bool monotone = true;    ///< recorded energies never rise beyond the Newton slack
    std::string failure;
    double stationarity = 0.0;  ///< max norm of the residual without the time derivative
    std::optional<DefectReport> defects;
    double seconds = 0.0;

    double final_energy() const { return steps.empty() ? initial_energy : steps.back().energy; }
};

/// Noise initial condition: five proxy components iid uniform in [-0.5, 0.5]
/// per vertex, mapped to the tangential Q representative at that vertex.
inline QProxyField random_init(const SurfaceMesh& mesh, const GeometryData& g, std::uint64_t seed) {
    if (g.vertex_normals.size() != static_cast<std::size_t>(mesh.num_vertices()))
        throw DimensionMismatch("geometry does not match mesh");
    std::mt19937_64 rng(seed);
    // Explicit 53-bit conversion keeps the stream identical across standard
    // libraries.
    const auto uniform = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5; };
    QProxyField q(static_cast<std::size_t>(mesh.num_vertices()));
    for (std::size_t v = 0; v < q.num_vertices(); ++v) {
        std::array<double, 5> raw{};
        for (auto& x : raw) x = uniform();
        const auto packed = q_pack(q_representative(q_expand<double>(raw), g.vertex_normals[v]));
        for (int c = 0; c < 5; ++c) q(v, c) = packed[static_cast<std::size_t>(c)];
    }
    return q;
}

namespace detail {

/// Sum of two matrices on the same pattern.
inline CsrMatrix combine(const CsrMatrix& a, double sa, const CsrMatrix& b, double sb) {
    CsrMatrix out = a;
    for (std::size_t k = 0; k < out.vals.size(); ++k) out.vals[k] = sa * a.vals[k] + sb * b.vals[k];
    return out;
}

inline double max_abs_difference(const Vector& a, const Vector& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace detail

/// Gradient flow from `initial`. Each step solves
///   M (q - q_prev) / tau + A q + omega dW(q) = 0
/// with Newton. A step whose Newton iteration stalls or whose energy rises
/// is retried with tau halved, at most `max_halvings` times; after
/// `regrow_after` clean steps a reduced tau is doubled back towards its
/// configured value.
inline RelaxationTrace ldg_relax(const SurfaceMesh& mesh, const GeometryData& g, const LdGParams& params,
                                 const QProxyField& initial) {
    params.validate();
    if (!mesh.is_closed()) throw TopologyError("closed mesh required for relaxation");
    if (initial.num_vertices() != static_cast<std::size_t>(mesh.num_vertices()))
        throw DimensionMismatch("initial field not aligned with mesh");
    const auto start = std::chrono::steady_clock::now();

    const NematicEnergy nematic(mesh, g, params.omega, params.omega_t);
    RelaxationTrace trace;
    trace.seed = params.seed;
    Vector x = dofs_from_proxy(initial);
    double f_prev = nematic.energy(x);
    trace.initial_energy = f_prev;

    double tau = params.tau, time = 0.0;
    int clean_steps = 0;
    std::optional<std::pair<double, CsrMatrix>> cached;  // (tau, A + M / tau)
    for (int step = 1; step <= params.max_steps; ++step) {
        if (params.t_end > 0.0 && time >= params.t_end * (1.0 - 1e-12)) break;
        double step_tau = params.t_end > 0.0 ? std::min(tau, params.t_end - time) : tau;
        bool accepted = false;
        for (int attempt = 0; attempt <= params.max_halvings && !accepted; ++attempt) {
            if (!cached || cached->first != step_tau)
                cached.emplace(step_tau, detail::combine(nematic.elastic(), 1.0, nematic.mass(), 1.0 / step_tau));
            const CsrMatrix& base = cached->second;
            const double inv_tau = 1.0 / step_tau;
            const Vector prev = x;
            const Vector m_prev = nematic.mass() * prev;
            const auto residual = [&](const Vector& u) {
                Vector r = base * u;
                axpy(-inv_tau, m_prev, r);
                nematic.add_bulk(u, r);
                return r;
            };
            const auto solve = [&](const CsrMatrix& jac, const Vector& rhs) {
                if (params.linear.method == SolverMethod::CG) {
                    try {
                        return linear_solve(jac, rhs, params.linear);
                    } catch (const BreakdownError&) {
                        SolveConfig fallback = params.linear;
                        fallback.method = SolverMethod::BiCGStabL;
                        return linear_solve(jac, rhs, fallback);
                    }
                }
                return linear_solve(jac, rhs, params.linear);
            };
            const auto jacobian = [&](const Vector& u) {
                CsrMatrix jac = base;
                nematic.add_bulk_hessian(u, jac);
                return jac;
            };
            NewtonResult nr;
            try {
                nr = newton_solve(residual, jacobian, prev, params.newton, solve);
            } catch (const BreakdownError&) {
                nr.converged = false;
            }
            double f_new = 0.0;
            if (nr.converged) f_new = nematic.energy(nr.u);
            if (nr.converged && f_new <= f_prev + params.energy_slack()) {
                StepRecord rec;
                rec.step = step;
                rec.tau = step_tau;
                time += step_tau;
                rec.time = time;
                rec.energy = f_new;
                rec.newton_iterations = nr.iterations;
                rec.rate = detail::max_abs_difference(nr.u, prev) / step_tau;
                rec.max_residual = norm_inf(nr.residual);
                x = std::move(nr.u);
                f_prev = f_new;
                trace.steps.push_back(rec);
                accepted = true;
            } else {
                step_tau *= 0.5;
                clean_steps = -1;
            }
        }
        if (!accepted) {
            trace.failure = "step " + std::to_string(step) + " failed after " + std::to_string(params.max_halvings) +
                            " halvings of tau (last tried " + std::to_string(2.0 * step_tau) + ")";
            break;
        }
        tau = std::min(tau, step_tau);
        if (++clean_steps >= params.regrow_after && tau < params.tau) {
            tau = std::min(params.tau, 2.0 * tau);
            clean_steps = 0;
        }
        if (params.t_end == 0.0 && trace.steps.back().rate < params.steady_tol) {
            trace.steady = true;
            break;
        }
    }
    trace.completed = trace.failure.empty();
    double last = trace.initial_energy;
    for (const auto& s : trace.steps) {
        trace.monotone = trace.monotone && s.energy <= last + params.energy_slack();
        last = s.energy;
    }
    trace.state = proxy_from_dofs(x, static_cast<std::size_t>(mesh.num_vertices()));
    trace.stationarity = norm_inf(nematic.gradient(x));
    if (trace.completed) {
        try {
            trace.defects = detect_defects(trace.state, mesh, g);
        } catch (const AmbiguousWinding& e) {
            trace.failure = std::string("defect detection: ") + e.what();
            trace.completed = false;
        }
    }
    trace.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return trace;
}

/// Relaxation from noise drawn with `params.seed`.
inline RelaxationTrace ldg_relax(const SurfaceMesh& mesh, const GeometryData& g, const LdGParams& params) {
    return ldg_relax(mesh, g, params, random_init(mesh, g, params.seed));
}

// ---------------------------------------------------------------------------
// Ensembles

/// Defect counts of one run: nodes are +1/2 defects, wedges -1/2 defects;
/// anything else is counted separately.
struct DefectCounts {
    int nodes = 0;
    int wedges = 0;
    int other = 0;
    auto operator<=>(const DefectCounts&) const = default;
};

inline DefectCounts count_defects(const DefectReport& r) {
    DefectCounts c;
    for (const auto& d : r.defects) {
        if (d.charge == 0.5) ++c.nodes;
        else if (d.charge == -0.5) ++c.wedges;
        else ++c.other;
    }
    return c;
}

struct EnsembleResult {
    std::vector<RelaxationTrace> runs;
    std::map<DefectCounts, int> histogram;  ///< over runs with a defect report
    int best_run = -1;                      ///< completed run of lowest final energy
    int completed = 0;
    int steady = 0;

    bool all_completed() const { return completed == static_cast<int>(runs.size()); }
};

using RunHook = std::function<void(int run, const RelaxationTrace&)>;

/// Runs seeds params.seed .. params.seed + n_runs - 1 on up to `threads`
/// workers. Results are stored by run index, so the outcome does not depend on
/// the thread count. Failed runs are recorded, never rethrown. The hook is
/// called once per finished run, serialised but in completion order.
inline EnsembleResult ensemble(const SurfaceMesh& mesh, const GeometryData& g, const LdGParams& params, int n_runs,
                               const RunHook& hook = {}, int threads = 1) {
    if (n_runs < 1) throw ConfigError("n_runs must be at least 1");
    if (threads < 1) throw ConfigError("threads must be at least 1");
    params.validate();
    if (!mesh.is_closed()) throw TopologyError("closed mesh required for relaxation");

    std::vector<RelaxationTrace> runs(static_cast<std::size_t>(n_runs));
    std::atomic<int> next{0};
    std::mutex hook_mutex;
    const auto worker = [&] {
        for (int i = next++; i < n_runs; i = next++) {
            LdGParams p = params;
            p.seed = params.seed + static_cast<std::uint64_t>(i);
            RelaxationTrace tr;
            try {
                tr = ldg_relax(mesh, g, p);
            } catch (const Error& e) {
                tr.seed = p.seed;
                tr.failure = e.what();
                tr.completed = false;
            }
            if (hook) {
                const std::lock_guard lock(hook_mutex);
                hook(i, tr);
            }
            runs[static_cast<std::size_t>(i)] = std::move(tr);
        }
    };
    const int n_workers = std::min(threads, n_runs);
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int t = 0; t < n_workers; ++t) pool.emplace_back(worker);
    }

    EnsembleResult out;
    out.runs = std::move(runs);
    for (int i = 0; i < n_runs; ++i) {
        const RelaxationTrace& tr = out.runs[static_cast<std::size_t>(i)];
        if (tr.completed) {
            ++out.completed;
            if (out.best_run < 0 || tr.final_energy() < out.runs[static_cast<std::size_t>(out.best_run)].final_energy())
                out.best_run = i;
        }
        if (tr.steady) ++out.steady;
        if (tr.defects) ++out.histogram[count_defects(*tr.defects)];
    }
    return out;
}

}  // namespace tanfem
