#pragma once

// Verification harness: manufactured solutions, degree-2p reference
// solutions, energy-norm error estimates, the discrete error equation and the
// p-convergence sweep over (eps1, eps2).

#include "wghp/assembly.hpp"
#include "wghp/error.hpp"
#include "wghp/expr.hpp"
#include "wghp/legendre.hpp"
#include "wghp/mesh.hpp"
#include "wghp/problem.hpp"
#include "wghp/weak_function.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <future>
#include <span>
#include <string>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

namespace wghp {

struct ManufacturedCase {
    Expr u;
    Expr u_prime;
    Expr u_second;
    /// Copy of the base problem with f = -eps1 u'' + eps2 b u' + r u.
    ProblemSpec problem;
};

/// Derives the right-hand side for the exact solution u. u must vanish at 0 and 1.
inline ManufacturedCase manufacture(const Expr& u, const ProblemSpec& base)
{
    for (double x : {0.0, 1.0}) {
        const double v = u(x);
        if (!(std::abs(v) <= 1e-13)) {
            throw AssumptionViolation("manufactured solution does not vanish at x = " + std::to_string(x) +
                                      " (value " + std::to_string(v) + ")");
        }
    }
    ManufacturedCase mc{u, differentiate(u), Expr(), base};
    mc.u_second = differentiate(mc.u_prime);
    mc.problem.f = Expr::number(-base.eps1) * mc.u_second + Expr::number(base.eps2) * base.b * mc.u_prime +
                   base.r * u;
    return mc;
}

inline ManufacturedCase manufacture(std::string_view u_text, const ProblemSpec& base)
{
    return manufacture(parse(u_text), base);
}

/// L2 transfer of a weak function onto another mesh at degree q. Interior
/// parts are projected element by element (integrating over the pieces of the
/// source mesh); node values are taken from the source node values where the
/// nodes coincide and from the source interior polynomial otherwise.
inline WeakFunction transfer(const WeakFunction& src, const Mesh& target, int q)
{
    const Mesh& sm = src.mesh();
    WeakFunction out(target, q);
    const QuadRule rule = gauss_rule(std::max(q, src.degree()) + 2);
    std::vector<double> vals(static_cast<std::size_t>(q + 1)), ders(vals.size());
    auto locate = [&](double x) {
        // element of the source mesh containing x (right-continuous inside)
        const auto nodes = sm.nodes();
        auto it = std::upper_bound(nodes.begin(), nodes.end(), x);
        std::size_t j = static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - nodes.begin() - 1, 0));
        return std::min(j, sm.num_elements() - 1);
    };
    for (std::size_t e = 0; e < target.num_elements(); ++e) {
        const double a = target.node(e), b = target.node(e + 1), h = b - a;
        std::vector<double> cuts{a};
        for (double x : sm.nodes()) {
            if (x > a && x < b) {
                cuts.push_back(x);
            }
        }
        cuts.push_back(b);
        auto c = out.interior(e);
        for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
            const double lo = cuts[s], hi = cuts[s + 1];
            const ElementPoly piece = src.element(locate(0.5 * (lo + hi)));
            for (std::size_t k = 0; k < rule.size(); ++k) {
                const double x = 0.5 * (lo + hi) + 0.5 * (hi - lo) * rule.nodes[k];
                const double w = rule.weights[k] * 0.5 * (hi - lo);
                legendre_all((2.0 * x - a - b) / h, vals, ders);
                const double y = piece(x);
                for (std::size_t m = 0; m < c.size(); ++m) {
                    c[m] += w * y * vals[m];
                }
            }
        }
        for (std::size_t m = 0; m < c.size(); ++m) {
            c[m] *= (2.0 * m + 1.0) / h;
        }
    }
    auto vb = out.node_values();
    for (std::size_t i = 0; i < target.num_nodes(); ++i) {
        const double x = target.node(i);
        const auto nodes = sm.nodes();
        const auto it = std::find(nodes.begin(), nodes.end(), x);
        vb[i] = it != nodes.end() ? src.node_value(static_cast<std::size_t>(it - nodes.begin()))
                                  : src.element(locate(x))(x);
    }
    return out;
}

struct SolveOptions {
    bool quad_double = false;
    /// Multiplies the default penalties eps1 p^2 / h_j.
    double penalty_scale = 1.0;
};

inline WeakFunction solve_problem(const ProblemSpec& pb, const Mesh& mesh, int p, const SolveOptions& opts = {})
{
    AssemblyOptions ao;
    ao.quad_double = opts.quad_double;
    if (opts.penalty_scale != 1.0) {
        auto s = default_penalties(mesh, p, pb.eps1);
        for (double& v : s) {
            v *= opts.penalty_scale;
        }
        ao.sigmas = std::move(s);
    }
    return solve(assemble(pb, mesh, p, ao));
}

/// Weak Galerkin solution of degree 2p on the same mesh, penalties eps1 (2p)^2 / h_j.
inline WeakFunction reference_solution(const ProblemSpec& pb, const Mesh& mesh, int p, const SolveOptions& opts = {})
{
    return solve_problem(pb, mesh, 2 * p, opts);
}

struct EnergyError {
    double absolute = 0.0;
    double relative = 0.0;
    /// |||u_hi - u_lo|||_p at the degree of u_hi.
    double absolute_p = 0.0;
};

/// Broken energy norm of u_hi - u_lo (u_lo zero-padded to the degree of u_hi)
/// and its ratio to the norm of u_hi.
inline EnergyError energy_error(const WeakFunction& u_hi, const WeakFunction& u_lo, const ProblemSpec& pb,
                                std::span<const double> sigmas)
{
    if (!(u_hi.mesh() == u_lo.mesh())) {
        throw MeshError("energy_error: functions live on different meshes");
    }
    const WeakFunction diff = u_hi - u_lo.embedded(u_hi.degree());
    EnergyError e;
    e.absolute = norm_broken(diff, pb, sigmas);
    const double ref = norm_broken(u_hi, pb, sigmas);
    e.relative = ref > 0.0 ? e.absolute / ref : (e.absolute > 0.0 ? INFINITY : 0.0);
    e.absolute_p = norm_p(diff, pb, sigmas);
    return e;
}

/// Broken energy norm of (u, u(x_i)) - u_h for an exact solution u with derivative du.
inline double exact_energy_error(const Expr& u, const Expr& du, const WeakFunction& uh, const ProblemSpec& pb,
                                 std::span<const double> sigmas, int quad_points = -1)
{
    const Mesh& mesh = uh.mesh();
    const QuadRule rule = gauss_rule(quad_points > 0 ? quad_points : 2 * uh.degree() + 20);
    double d = 0.0, l2 = 0.0;
    for (std::size_t j = 0; j < mesh.num_elements(); ++j) {
        const ElementPoly e = uh.element(j);
        const ElementPoly de = e.derivative();
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const double t = rule.nodes[q];
            const double x = e.from_reference(t);
            const double w = rule.weights[q] * 0.5 * e.width();
            const double ev = u(x) - e.eval_reference(t);
            const double dv = du(x) - de.eval_reference(t);
            l2 += w * ev * ev;
            d += w * dv * dv;
        }
    }
    // the exact solution has no jumps, so the trace terms are those of uh
    const double traces = stabilizer_S(uh, uh, sigmas) + stabilizer_Sc(uh, uh, pb.b, pb.eps2) +
                          jump_seminorm_squared(uh, pb.b, pb.eps2);
    return std::sqrt(pb.eps1 * d + l2 + traces);
}

/// Both sides of A_p(I u - u_p, v) = E1 + E2 + E3.
struct ErrorEquation {
    double lhs = 0.0;
    double e1 = 0.0;
    double e2 = 0.0;
    double e3 = 0.0;
    /// Sum of the magnitudes of the terms that cancel.
    double scale = 0.0;
    double rhs() const noexcept { return e1 + e2 + e3; }
    double residual() const noexcept { return std::abs(lhs - rhs()); }
};

inline ErrorEquation error_equation(const ManufacturedCase& mc, const WeakFunction& u_p, const WeakFunction& v,
                                    std::span<const double> sigmas, int quad_points = -1)
{
    u_p.check_compatible(v);
    const ProblemSpec& pb = mc.problem;
    const Mesh& mesh = u_p.mesh();
    const int p = u_p.degree();
    const int nq = quad_points > 0 ? quad_points : quadrature_points(p);
    const WeakFunction iu = WeakFunction::interpolant(mesh, p, mc.u, nq);

    ErrorEquation ee;
    const double a_iu = bilinear_apply(iu, v, pb, sigmas, nq);
    const double a_up = bilinear_apply(u_p, v, pb, sigmas, nq);
    ee.lhs = a_iu - a_up;

    const QuadRule rule = gauss_rule(2 * p + 20);
    for (std::size_t j = 0; j < mesh.num_elements(); ++j) {
        const ElementPoly ie = iu.element(j), die = ie.derivative();
        const ElementPoly ve = v.element(j), dve = ve.derivative();
        const double a = mesh.node(j), b = mesh.node(j + 1);
        const double err_right = mc.u_prime(b) - die(b);
        const double err_left = mc.u_prime(a) - die(a);
        ee.e1 += pb.eps1 * (err_right * v.jump_right(j) - err_left * v.jump_left(j));
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const double t = rule.nodes[q];
            const double x = ie.from_reference(t);
            const double w = rule.weights[q] * 0.5 * ie.width();
            const double diff = mc.u(x) - ie.eval_reference(t);
            const double v0 = ve.eval_reference(t);
            const double bv0_prime = pb.b_prime(x) * v0 + pb.b(x) * dve.eval_reference(t);
            ee.e2 += pb.eps2 * w * diff * bv0_prime;
            ee.e3 -= w * pb.r(x) * diff * v0;
        }
    }
    ee.scale = std::abs(a_iu) + std::abs(a_up) + std::abs(ee.e1) + std::abs(ee.e2) + std::abs(ee.e3);
    return ee;
}

/// Coefficients shared by every case of a sweep; eps1, eps2 vary.
struct ProblemFamily {
    Expr b;
    Expr r;
    Expr f;
};

struct StudyOptions {
    double kappa = 1.0;
    /// Rebuild the SBL mesh at degree 2p for the reference and transfer it back.
    bool rebuilt_reference_mesh = false;
    bool quad_double = false;
    /// Reference degree = reference_factor * p.
    int reference_factor = 2;
    /// Store measured wall time in the records; zero otherwise.
    bool record_time = false;
    /// Worker threads; 0 picks the hardware concurrency.
    unsigned threads = 0;
};

struct ConvergenceRecord {
    Regime regime = Regime::ReactionDiffusion;
    double eps1 = 0.0;
    double eps2 = 0.0;
    int p = 0;
    std::size_t elements = 0;
    std::size_t dof = 0;
    double err_rel = 0.0; // fraction, not percent
    double err_abs = 0.0;
    int ref_degree = 0;
    double wall_ms = 0.0;
    /// Empty on success.
    std::string failure;
};

/// Layer-adapted mesh for the given problem and degree.
inline Mesh sbl_mesh_for(const ProblemSpec& pb, int p, double kappa)
{
    return build_sbl_mesh(classify_regime(pb.eps1, pb.eps2), kappa, p, compute_mu(pb), pb.eps1, pb.eps2);
}

inline ConvergenceRecord run_case(const ProblemFamily& fam, double eps1, double eps2, int p, const StudyOptions& opts)
{
    const auto start = std::chrono::steady_clock::now();
    ConvergenceRecord rec;
    rec.regime = classify_regime(eps1, eps2);
    rec.eps1 = eps1;
    rec.eps2 = eps2;
    rec.p = p;
    rec.ref_degree = opts.reference_factor * p;
    try {
        const ProblemSpec pb = make_problem(eps1, eps2, fam.b, fam.r, fam.f);
        validate(pb);
        const MuPair mu = compute_mu(pb);
        const Mesh mesh = build_sbl_mesh(rec.regime, opts.kappa, p, mu, eps1, eps2);
        rec.elements = mesh.num_elements();
        rec.dof = DofMap{mesh.num_elements(), p}.total();
        const SolveOptions so{opts.quad_double, 1.0};
        const WeakFunction up = solve_problem(pb, mesh, p, so);
        WeakFunction ref = [&] {
            if (!opts.rebuilt_reference_mesh) {
                return solve_problem(pb, mesh, rec.ref_degree, so);
            }
            const Mesh fine = build_sbl_mesh(rec.regime, opts.kappa, rec.ref_degree, mu, eps1, eps2);
            return transfer(solve_problem(pb, fine, rec.ref_degree, so), mesh, rec.ref_degree);
        }();
        // the norm being estimated is the degree-p one
        const auto sigmas = default_penalties(mesh, p, eps1);
        const EnergyError err = energy_error(ref, up, pb, sigmas);
        rec.err_abs = err.absolute;
        rec.err_rel = err.relative;
    } catch (const std::exception& ex) {
        rec.failure = ex.what();
        rec.err_abs = rec.err_rel = NAN;
    }
    if (opts.record_time) {
        rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    }
    return rec;
}

/// Runs every (eps1, eps2, p) case. Failures are recorded per case and never
/// abort the sweep. Records are sorted by (eps1, eps2, p).
inline std::vector<ConvergenceRecord> convergence_study(const ProblemFamily& fam, std::span<const int> p_values,
                                                        std::span<const std::pair<double, double>> eps_grid,
                                                        const StudyOptions& opts = {})
{
    std::vector<std::tuple<double, double, int>> cases;
    for (const auto& [e1, e2] : eps_grid) {
        for (int p : p_values) {
            cases.emplace_back(e1, e2, p);
        }
    }
    std::vector<ConvergenceRecord> out(cases.size());
    unsigned workers = opts.threads ? opts.threads : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(cases.size(), 1)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < cases.size(); ++i) {
            const auto& [e1, e2, p] = cases[i];
            out[i] = run_case(fam, e1, e2, p, opts);
        }
    } else {
        std::vector<std::future<void>> jobs;
        for (unsigned w = 0; w < workers; ++w) {
            jobs.push_back(std::async(std::launch::async, [&, w] {
                for (std::size_t i = w; i < cases.size(); i += workers) {
                    const auto& [e1, e2, p] = cases[i];
                    out[i] = run_case(fam, e1, e2, p, opts);
                }
            }));
        }
        for (auto& j : jobs) {
            j.get();
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const ConvergenceRecord& a, const ConvergenceRecord& b) {
        return std::tie(a.eps1, a.eps2, a.p) < std::tie(b.eps1, b.eps2, b.p);
    });
    return out;
}

/// Least-squares slope of log10(error) against p; failed or zero errors are skipped.
inline double log10_slope(std::span<const ConvergenceRecord> recs)
{
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (const auto& r : recs) {
        if (!r.failure.empty() || !(r.err_rel > 0.0)) {
            continue;
        }
        const double x = r.p, y = std::log10(r.err_rel);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n < 2) {
        return NAN;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace wghp
