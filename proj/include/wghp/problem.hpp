#pragma once

// The continuous boundary value problem
//
//   -eps1 u'' + eps2 b u' + r u = f  on (0, 1),  u(0) = u(1) = 0,
//
// together with the sampled checks of its standing assumptions and the layer
// scales mu0 <= mu1 that drive the layer-adapted mesh.

#include "wghp/error.hpp"
#include "wghp/expr.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <string_view>

namespace wghp {

struct ProblemSpec {
    double eps1 = 1.0;
    double eps2 = 1.0;
    Expr b = Expr::number(1.0);
    Expr b_prime = Expr::number(0.0);
    Expr r = Expr::number(1.0);
    Expr f = Expr::number(1.0);
};

/// Builds a problem, deriving b' symbolically. Both parameters must lie in (0, 1].
inline ProblemSpec make_problem(double eps1, double eps2, const Expr& b, const Expr& r, const Expr& f)
{
    if (!(eps1 > 0.0 && eps1 <= 1.0)) {
        throw std::invalid_argument("eps1 must lie in (0, 1]");
    }
    if (!(eps2 > 0.0 && eps2 <= 1.0)) {
        throw std::invalid_argument("eps2 must lie in (0, 1]");
    }
    return ProblemSpec{eps1, eps2, b, differentiate(b), r, f};
}

inline ProblemSpec make_problem(double eps1, double eps2, std::string_view b, std::string_view r,
                                std::string_view f)
{
    return make_problem(eps1, eps2, parse(b), parse(r), parse(f));
}

enum class Regime { ConvectionDiffusion, ReactionConvectionDiffusion, ReactionDiffusion };

inline const char* to_string(Regime regime) noexcept
{
    switch (regime) {
    case Regime::ConvectionDiffusion: return "CD";
    case Regime::ReactionConvectionDiffusion: return "RCD";
    case Regime::ReactionDiffusion: return "RD";
    }
    return "?";
}

/// Convection-diffusion iff eps2 > 0.9; otherwise reaction-convection-diffusion
/// iff 4 eps1 < eps2^2 (convection dominates the discriminant of the
/// characteristic equation); otherwise reaction-diffusion.
inline Regime classify_regime(double eps1, double eps2)
{
    if (eps2 > 0.9) {
        return Regime::ConvectionDiffusion;
    }
    if (4.0 * eps1 < eps2 * eps2) {
        return Regime::ReactionConvectionDiffusion;
    }
    return Regime::ReactionDiffusion;
}

struct Validation {
    double gamma_hat;
    /// gamma_hat is positive but below 1e-8.
    bool marginal;
};

/// Checks b > 0, r >= 0 and r - eps2 b'/2 > 0 on `samples` uniform points of [0, 1]
/// (endpoints included) and returns the sampled minimum of r - eps2 b'/2.
inline Validation validate(const ProblemSpec& spec, int samples = 2049)
{
    if (samples < 2) {
        throw std::invalid_argument("validate: need at least two samples");
    }
    auto fail = [](const char* what, double x, double v) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%s violated at x = %.17g (value %.17g)", what, x, v);
        throw AssumptionViolation(buf);
    };
    double gamma = std::numeric_limits<double>::infinity();
    for (int i = 0; i < samples; ++i) {
        const double x = static_cast<double>(i) / (samples - 1);
        const double bx = spec.b(x);
        if (!(bx > 0.0)) {
            fail("b > 0", x, bx);
        }
        const double rx = spec.r(x);
        if (!(rx >= 0.0)) {
            fail("r >= 0", x, rx);
        }
        gamma = std::min(gamma, rx - 0.5 * spec.eps2 * spec.b_prime(x));
    }
    if (!(gamma > 0.0)) {
        fail("r - eps2 b'/2 >= gamma > 0", 0.0, gamma);
    }
    return {gamma, gamma < 1e-8};
}

struct MuPair {
    double mu0;
    double mu1;
};

namespace detail {

// (-eps2 b + sqrt(eps2^2 b^2 + 4 eps1 r)) / (2 eps1), written without cancellation
inline double mu0_at(double eps1, double eps2, double b, double r)
{
    const double eb = eps2 * b;
    const double root = std::sqrt(eb * eb + 4.0 * eps1 * r);
    return 2.0 * r / (eb + root);
}

inline double mu1_at(double eps1, double eps2, double b, double r)
{
    const double eb = eps2 * b;
    return (eb + std::sqrt(eb * eb + 4.0 * eps1 * r)) / (2.0 * eps1);
}

template <class G>
double sampled_min(G&& g, int samples)
{
    double best = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (int i = 0; i < samples; ++i) {
        const double v = g(static_cast<double>(i) / (samples - 1));
        if (v < best) {
            best = v;
            arg = i;
        }
    }
    // one refinement pass over the two neighbouring cells
    const double lo = static_cast<double>(std::max(arg - 1, 0)) / (samples - 1);
    const double hi = static_cast<double>(std::min(arg + 1, samples - 1)) / (samples - 1);
    for (int i = 0; i < samples; ++i) {
        best = std::min(best, g(lo + (hi - lo) * i / (samples - 1)));
    }
    return best;
}

} // namespace detail

/// mu0 and mu1 minimised over a uniform grid with one local refinement.
/// Accepts eps2 = 0 (pure reaction-diffusion limit).
inline MuPair compute_mu(double eps1, double eps2, const Expr& b, const Expr& r, int samples = 2049)
{
    if (samples < 2) {
        throw std::invalid_argument("compute_mu: need at least two samples");
    }
    const double mu0 = detail::sampled_min(
        [&](double x) { return detail::mu0_at(eps1, eps2, b(x), r(x)); }, samples);
    const double mu1 = detail::sampled_min(
        [&](double x) { return detail::mu1_at(eps1, eps2, b(x), r(x)); }, samples);
    return {mu0, mu1};
}

inline MuPair compute_mu(const ProblemSpec& spec, int samples = 2049)
{
    return compute_mu(spec.eps1, spec.eps2, spec.b, spec.r, samples);
}

} // namespace wghp
