#pragma once

// Property suites run by `wg-hp check`: weak-derivative residuals, coercivity,
// norm equivalence, the error equation, polynomial reproduction and (on
// request) quadrature stability.

#include "wghp/assembly.hpp"
#include "wghp/legendre.hpp"
#include "wghp/mesh.hpp"
#include "wghp/problem.hpp"
#include "wghp/verify.hpp"
#include "wghp/weak_function.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace wghp {

/// Uniform(-1, 1) coefficients and node values; boundary node values zero if requested.
template <class Rng>
WeakFunction random_weak_function(const Mesh& mesh, int p, Rng& rng, bool zero_boundary = true)
{
    std::uniform_real_distribution<double> coin(-1.0, 1.0);
    WeakFunction v(mesh, p);
    for (std::size_t j = 0; j < mesh.num_elements(); ++j) {
        for (double& c : v.interior(j)) {
            c = coin(rng);
        }
    }
    auto vb = v.node_values();
    for (std::size_t i = 0; i < vb.size(); ++i) {
        const bool boundary = i == 0 || i + 1 == vb.size();
        vb[i] = (boundary && zero_boundary) ? 0.0 : coin(rng);
    }
    return v;
}

struct SuiteResult {
    std::string name;
    int passed = 0;
    int total = 0;
    /// Largest normalised violation seen (<= 1 means within tolerance).
    double worst = 0.0;
    std::string detail;
    bool ok() const noexcept { return total > 0 && passed == total; }
};

struct CheckConfig {
    ProblemSpec problem;
    int p_min = 1;
    int p_max = 8;
    double kappa = 1.0;
    double penalty_scale = 1.0;
    bool quad_double = false;
    std::uint64_t seed = 20240601;
    /// Exact solution used by the error-equation suite.
    Expr manufactured_u = parse("sin(pi*x)");
    int samples = 50;
};

/// Penalty bound C_sigma assumed by the norm-equivalence and coercivity checks.
inline constexpr double penalty_bound = 100.0;

namespace detail {

inline std::vector<double> scaled_penalties(const Mesh& m, int p, const CheckConfig& cfg)
{
    auto s = default_penalties(m, p, cfg.problem.eps1);
    for (double& v : s) {
        v *= cfg.penalty_scale;
    }
    return s;
}

inline void tally(SuiteResult& r, double violation)
{
    ++r.total;
    if (violation <= 1.0) {
        ++r.passed;
    }
    r.worst = std::max(r.worst, violation);
}

} // namespace detail

/// int D q + int v0 q' - (vb_right q(x_right) - vb_left q(x_left)) = 0 for every
/// Legendre q of degree <= p-1, checked with an independent high-order quadrature.
inline SuiteResult check_weak_derivative(const CheckConfig& cfg)
{
    SuiteResult res{"weak derivative identity"};
    std::mt19937_64 rng(cfg.seed);
    for (int p = std::max(cfg.p_min, 1); p <= cfg.p_max; ++p) {
        const Mesh mesh = sbl_mesh_for(cfg.problem, p, cfg.kappa);
        const QuadRule rule = gauss_rule(2 * p + 4);
        for (int s = 0; s < cfg.samples; ++s) {
            const WeakFunction v = random_weak_function(mesh, p, rng, false);
            const BrokenPoly d = weak_derivative(v);
            for (std::size_t j = 0; j < mesh.num_elements(); ++j) {
                const ElementPoly v0 = v.element(j), dj = d.element(j);
                const double h = mesh.width(j);
                for (int m = 0; m < p; ++m) {
                    double int_dq = 0.0, int_v0dq = 0.0, mag = 0.0;
                    for (std::size_t q = 0; q < rule.size(); ++q) {
                        const double t = rule.nodes[q];
                        const auto lq = legendre_eval(m, t);
                        int_dq += rule.weights[q] * 0.5 * h * dj.eval_reference(t) * lq.value;
                        int_v0dq += rule.weights[q] * v0.eval_reference(t) * lq.derivative;
                        mag += rule.weights[q] * std::abs(v0.eval_reference(t) * lq.derivative);
                    }
                    const double boundary =
                        v.node_value(j + 1) - ((m % 2 == 0) ? 1.0 : -1.0) * v.node_value(j);
                    const double residual = int_dq + int_v0dq - boundary;
                    const double scale = std::abs(int_dq) + mag + std::abs(boundary) + 1.0;
                    detail::tally(res, std::abs(residual) / (1e-10 * scale));
                }
            }
        }
    }
    return res;
}

/// A_p(v, v) >= min(gamma, 1/4) |||v|||_p^2 for random v in V_{p,0}, together
/// with the penalty hypothesis eps1 p^2 / (h_j sigma_j) <= C_sigma.
inline SuiteResult check_coercivity(const CheckConfig& cfg)
{
    SuiteResult res{"coercivity"};
    std::mt19937_64 rng(cfg.seed + 1);
    const double gamma = validate(cfg.problem).gamma_hat;
    const double c = std::min(gamma, 0.25);
    double min_ratio = INFINITY;
    for (int p = std::max(cfg.p_min, 1); p <= cfg.p_max; ++p) {
        const Mesh mesh = sbl_mesh_for(cfg.problem, p, cfg.kappa);
        const auto sigmas = detail::scaled_penalties(mesh, p, cfg);
        for (std::size_t j = 0; j < mesh.num_elements(); ++j) {
            const double ratio = cfg.problem.eps1 * p * p / (mesh.width(j) * sigmas[j]);
            detail::tally(res, std::isfinite(ratio) ? ratio / penalty_bound : INFINITY);
        }
        const int nq = quadrature_points(p, cfg.quad_double);
        for (int s = 0; s < cfg.samples; ++s) {
            const WeakFunction v = random_weak_function(mesh, p, rng);
            const double a = bilinear_apply(v, v, cfg.problem, sigmas, nq);
            const double n2 = std::pow(norm_p(v, cfg.problem, sigmas), 2);
            min_ratio = std::min(min_ratio, a / n2);
            const double deficit = c * n2 - a;
            detail::tally(res, deficit <= 0.0 ? 0.0 : deficit / (1e-10 * (std::abs(a) + n2)));
        }
    }
    res.detail = "min A(v,v)/|||v|||_p^2 = " + std::to_string(min_ratio) + ", asserted >= " + std::to_string(c);
    return res;
}

/// |||v|||_p / |||v||| within [1/50, 50] for random v.
inline SuiteResult check_norm_equivalence(const CheckConfig& cfg)
{
    SuiteResult res{"norm equivalence"};
    std::mt19937_64 rng(cfg.seed + 2);
    double lo = INFINITY, hi = 0.0;
    for (int p = std::max(cfg.p_min, 1); p <= cfg.p_max; ++p) {
        const Mesh mesh = sbl_mesh_for(cfg.problem, p, cfg.kappa);
        const auto sigmas = detail::scaled_penalties(mesh, p, cfg);
        for (int s = 0; s < cfg.samples; ++s) {
            const WeakFunction v = random_weak_function(mesh, p, rng, false);
            const double ratio = norm_p(v, cfg.problem, sigmas) / norm_broken(v, cfg.problem, sigmas);
            lo = std::min(lo, ratio);
            hi = std::max(hi, ratio);
            detail::tally(res, std::max(ratio / 50.0, 1.0 / (50.0 * ratio)));
        }
    }
    res.detail = "envelope [" + std::to_string(lo) + ", " + std::to_string(hi) + "]";
    return res;
}

/// A_p(I u - u_p, v) = E1 + E2 + E3 for a manufactured exact solution.
inline SuiteResult check_error_equation(const CheckConfig& cfg)
{
    SuiteResult res{"error equation"};
    std::mt19937_64 rng(cfg.seed + 3);
    const ManufacturedCase mc = manufacture(cfg.manufactured_u, cfg.problem);
    for (int p : {2, 4, 6}) {
        if (p < cfg.p_min || p > cfg.p_max) {
            continue;
        }
        const Mesh mesh = sbl_mesh_for(mc.problem, p, cfg.kappa);
        const auto sigmas = detail::scaled_penalties(mesh, p, cfg);
        const WeakFunction up = solve_problem(mc.problem, mesh, p, {cfg.quad_double, cfg.penalty_scale});
        const int nq = quadrature_points(p, cfg.quad_double);
        for (int s = 0; s < cfg.samples; ++s) {
            const WeakFunction v = random_weak_function(mesh, p, rng);
            const ErrorEquation ee = error_equation(mc, up, v, sigmas, nq);
            detail::tally(res, ee.residual() / (1e-8 * ee.scale));
        }
    }
    return res;
}

/// u = x(1 - x) is reproduced to 1e-9 relative energy error for p >= 2.
inline SuiteResult check_polynomial_reproduction(const CheckConfig& cfg)
{
    SuiteResult res{"polynomial reproduction"};
    const ManufacturedCase mc = manufacture("x*(1 - x)", cfg.problem);
    for (int p = std::max(cfg.p_min, 2); p <= cfg.p_max; ++p) {
        const Mesh mesh = sbl_mesh_for(mc.problem, p, cfg.kappa);
        const auto sigmas = detail::scaled_penalties(mesh, p, cfg);
        try {
            const WeakFunction up = solve_problem(mc.problem, mesh, p, {cfg.quad_double, cfg.penalty_scale});
            const double err = exact_energy_error(mc.u, mc.u_prime, up, mc.problem, sigmas);
            const WeakFunction iu = WeakFunction::interpolant(mesh, p, mc.u);
            const double scale = norm_broken(iu, mc.problem, sigmas);
            detail::tally(res, err / (1e-9 * scale));
        } catch (const SingularMatrix&) {
            detail::tally(res, INFINITY);
        }
    }
    return res;
}

/// Assembled matrices and right-hand sides agree between n and 2n quadrature points.
inline SuiteResult check_quadrature_stability(const CheckConfig& cfg)
{
    SuiteResult res{"quadrature stability"};
    for (int p = std::max(cfg.p_min, 1); p <= cfg.p_max; ++p) {
        const Mesh mesh = sbl_mesh_for(cfg.problem, p, cfg.kappa);
        AssemblyOptions base, doubled;
        base.sigmas = doubled.sigmas = detail::scaled_penalties(mesh, p, cfg);
        doubled.quad_double = true;
        const AssembledSystem a = assemble(cfg.problem, mesh, p, base);
        const AssembledSystem b = assemble(cfg.problem, mesh, p, doubled);
        const double dm = (a.matrix - b.matrix).norm() / a.matrix.norm();
        const double dr = (a.rhs - b.rhs).norm() / std::max(a.rhs.norm(), 1e-300);
        detail::tally(res, std::max(dm, dr) / 1e-10);
    }
    return res;
}

inline std::vector<SuiteResult> run_checks(const CheckConfig& cfg)
{
    std::vector<SuiteResult> out;
    out.push_back(check_weak_derivative(cfg));
    out.push_back(check_coercivity(cfg));
    out.push_back(check_norm_equivalence(cfg));
    out.push_back(check_error_equation(cfg));
    out.push_back(check_polynomial_reproduction(cfg));
    if (cfg.quad_double) {
        out.push_back(check_quadrature_stability(cfg));
    }
    return out;
}

} // namespace wghp
