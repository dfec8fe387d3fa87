#pragma once

// Legendre polynomials, Gauss-Legendre quadrature and the two element-level
// approximation operators used throughout: the L2 projection onto P_p and the
// interpolant that matches endpoint values and is H1-orthogonal inside.
//
// Polynomials on an interval (a, b) are stored as coefficients against the
// (non-normalised) Legendre basis P_k(t), t = (2x - a - b) / (b - a). The
// element mass matrix is diagonal: (P_k, P_m)_{(a,b)} = h / (2k + 1) delta_km.

#include "wghp/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace wghp {

struct LegendreValue {
    double value;
    double derivative;
};

/// P_k(t) and P_k'(t) from the three-term recurrence.
inline LegendreValue legendre_eval(int k, double t)
{
    if (k < 0) {
        throw std::invalid_argument("legendre_eval: negative degree");
    }
    double p_prev = 0.0, p = 1.0;
    double d_prev = 0.0, d = 0.0;
    for (int n = 0; n < k; ++n) {
        // (n+1) P_{n+1} = (2n+1) t P_n - n P_{n-1}
        const double p_next = ((2.0 * n + 1.0) * t * p - n * p_prev) / (n + 1.0);
        // P'_{n+1} = P'_{n-1} + (2n+1) P_n
        const double d_next = d_prev + (2.0 * n + 1.0) * p;
        p_prev = p;
        p = p_next;
        d_prev = d;
        d = d_next;
    }
    return {p, d};
}

/// Fills values[k] = P_k(t) and derivs[k] = P_k'(t) for k = 0 .. values.size()-1.
inline void legendre_all(double t, std::span<double> values, std::span<double> derivs)
{
    const std::size_t n = values.size();
    if (n == 0) {
        return;
    }
    values[0] = 1.0;
    derivs[0] = 0.0;
    if (n == 1) {
        return;
    }
    values[1] = t;
    derivs[1] = 1.0;
    for (std::size_t k = 1; k + 1 < n; ++k) {
        const double kk = static_cast<double>(k);
        values[k + 1] = ((2.0 * kk + 1.0) * t * values[k] - kk * values[k - 1]) / (kk + 1.0);
        derivs[k + 1] = derivs[k - 1] + (2.0 * kk + 1.0) * values[k];
    }
}

struct QuadRule {
    std::vector<double> nodes;   // ascending, in [-1, 1]
    std::vector<double> weights; // positive, sum to 2
    std::size_t size() const noexcept { return nodes.size(); }
};

/// n-point Gauss-Legendre rule. Roots of P_n by Newton iteration from
/// Chebyshev-like guesses, falling back to bisection on the bracket between
/// neighbouring Chebyshev points if Newton escapes it.
inline QuadRule gauss_rule(int n)
{
    if (n < 1) {
        throw std::invalid_argument("gauss_rule: need at least one point");
    }
    QuadRule rule;
    rule.nodes.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    const double pi = std::numbers::pi;
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        // i-th largest root lies in (cos(pi (i+1)/(n+1/2)), cos(pi i/(n+1/2)))
        double hi = std::cos(pi * i / (n + 0.5));
        double lo = std::cos(pi * (i + 1) / (n + 0.5));
        double t = std::cos(pi * (i + 0.75) / (n + 0.5));
        bool converged = false;
        for (int it = 0; it < 100; ++it) {
            const auto [v, d] = legendre_eval(n, t);
            const double step = v / d;
            const double next = t - step;
            if (!(next > lo && next < hi)) {
                break;
            }
            t = next;
            if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(t))) {
                converged = true;
                break;
            }
        }
        if (!converged) {
            const double f_lo = legendre_eval(n, lo).value;
            for (int it = 0; it < 200 && hi - lo > 1e-17; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double f_mid = legendre_eval(n, mid).value;
                if ((f_mid < 0) == (f_lo < 0)) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            t = 0.5 * (lo + hi);
        }
        if (n % 2 == 1 && i == half - 1) {
            t = 0.0;
        }
        const double d = legendre_eval(n, t).derivative;
        const double w = 2.0 / ((1.0 - t * t) * d * d);
        const auto hi_idx = static_cast<std::size_t>(n - 1 - i);
        const auto lo_idx = static_cast<std::size_t>(i);
        rule.nodes[hi_idx] = t;
        rule.nodes[lo_idx] = -t;
        rule.weights[hi_idx] = w;
        rule.weights[lo_idx] = w;
    }
    return rule;
}

/// Number of Gauss points used for coefficient-weighted integrals at degree p.
inline int quadrature_points(int degree, bool doubled = false)
{
    const int n = degree + 6;
    return doubled ? 2 * n : n;
}

/// Legendre coefficients (in the reference variable t) of the t-derivative of
/// the series with coefficients `c`. Result has size max(1, c.size() - 1).
inline std::vector<double> legendre_series_derivative(std::span<const double> c)
{
    const std::size_t n = c.size();
    std::vector<double> d(n > 1 ? n - 1 : 1, 0.0);
    // P_k' = sum_{m < k, k - m odd} (2m + 1) P_m
    double odd_tail = 0.0, even_tail = 0.0; // sums of c_k over k > m by parity of k
    for (std::size_t k = n; k-- > 1;) {
        (k % 2 == 0 ? even_tail : odd_tail) += c[k];
        const std::size_t m = k - 1;
        d[m] = (2.0 * m + 1.0) * (m % 2 == 0 ? odd_tail : even_tail);
    }
    return d;
}

/// Polynomial on (a, b) in the mapped Legendre basis.
class ElementPoly {
public:
    ElementPoly() = default;
    ElementPoly(double a, double b, std::vector<double> coeffs)
        : a_(a), b_(b), coeffs_(std::move(coeffs))
    {
        if (!(a_ < b_)) {
            throw std::invalid_argument("ElementPoly: need a < b");
        }
        if (coeffs_.empty()) {
            coeffs_.push_back(0.0);
        }
    }

    double a() const noexcept { return a_; }
    double b() const noexcept { return b_; }
    double width() const noexcept { return b_ - a_; }
    int degree() const noexcept { return static_cast<int>(coeffs_.size()) - 1; }
    std::span<const double> coeffs() const noexcept { return coeffs_; }

    double to_reference(double x) const noexcept { return (2.0 * x - a_ - b_) / (b_ - a_); }
    double from_reference(double t) const noexcept { return 0.5 * (a_ + b_) + 0.5 * (b_ - a_) * t; }

    double eval_reference(double t) const
    {
        // Clenshaw for the Legendre recurrence
        double b1 = 0.0, b2 = 0.0;
        for (std::size_t k = coeffs_.size(); k-- > 0;) {
            const double kk = static_cast<double>(k);
            const double alpha = (2.0 * kk + 1.0) / (kk + 1.0) * t;
            const double beta = -(kk + 1.0) / (kk + 2.0);
            const double bk = coeffs_[k] + alpha * b1 + beta * b2;
            b2 = b1;
            b1 = bk;
        }
        return b1;
    }

    double operator()(double x) const { return eval_reference(to_reference(x)); }

    /// Classical derivative d/dx as a polynomial of degree max(0, p - 1).
    ElementPoly derivative() const
    {
        auto d = legendre_series_derivative(coeffs_);
        const double scale = 2.0 / width();
        for (auto& v : d) {
            v *= scale;
        }
        return ElementPoly(a_, b_, std::move(d));
    }

    /// Value at x = a from inside the element.
    double left_trace() const noexcept
    {
        double s = 0.0;
        for (std::size_t k = 0; k < coeffs_.size(); ++k) {
            s += (k % 2 == 0) ? coeffs_[k] : -coeffs_[k];
        }
        return s;
    }
    /// Value at x = b from inside the element.
    double right_trace() const noexcept
    {
        double s = 0.0;
        for (double c : coeffs_) {
            s += c;
        }
        return s;
    }

    double l2_norm_squared() const noexcept
    {
        double s = 0.0;
        for (std::size_t k = 0; k < coeffs_.size(); ++k) {
            s += coeffs_[k] * coeffs_[k] / (2.0 * k + 1.0);
        }
        return s * width();
    }

private:
    double a_ = -1.0;
    double b_ = 1.0;
    std::vector<double> coeffs_{0.0};
};

/// L2(a,b)-orthogonal projection of y onto P_p using `quad_points` Gauss points.
template <class F>
ElementPoly l2_project(F&& y, int p, double a, double b, int quad_points)
{
    if (p < 0) {
        throw std::invalid_argument("l2_project: negative degree");
    }
    const QuadRule rule = gauss_rule(quad_points);
    std::vector<double> c(static_cast<std::size_t>(p + 1), 0.0);
    std::vector<double> vals(c.size()), ders(c.size());
    for (std::size_t q = 0; q < rule.size(); ++q) {
        const double t = rule.nodes[q];
        const double yq = y(0.5 * (a + b) + 0.5 * (b - a) * t);
        legendre_all(t, vals, ders);
        for (std::size_t k = 0; k < c.size(); ++k) {
            c[k] += rule.weights[q] * yq * vals[k];
        }
    }
    for (std::size_t k = 0; k < c.size(); ++k) {
        c[k] *= (2.0 * k + 1.0) / 2.0;
    }
    return ElementPoly(a, b, std::move(c));
}

/// The interpolant I y in P_p: (Iy - y)(a) = (Iy - y)(b) = 0 and
/// int (Iy - y)' q' = 0 for all q in P_p.
///
/// Built as y(a) plus the integral of the degree-(p-1) Legendre truncation of
/// y'. The Legendre coefficients of y' are obtained by parts, so only values of
/// y are needed.
template <class F>
ElementPoly interpolate(F&& y, int p, double a, double b, int quad_points)
{
    if (p < 1) {
        throw std::invalid_argument("interpolate: degree must be at least 1");
    }
    const double ya = y(a);
    const double yb = y(b);
    const QuadRule rule = gauss_rule(quad_points);
    const auto np = static_cast<std::size_t>(p);
    // d_k: coefficients of dy/dt, k = 0 .. p-1
    std::vector<double> d(np, 0.0);
    std::vector<double> vals(np), ders(np);
    for (std::size_t q = 0; q < rule.size(); ++q) {
        const double t = rule.nodes[q];
        const double yq = y(0.5 * (a + b) + 0.5 * (b - a) * t);
        legendre_all(t, vals, ders);
        for (std::size_t k = 0; k < np; ++k) {
            d[k] -= rule.weights[q] * yq * ders[k];
        }
    }
    for (std::size_t k = 0; k < np; ++k) {
        const double boundary = yb - ((k % 2 == 0) ? ya : -ya);
        d[k] = (2.0 * k + 1.0) / 2.0 * (d[k] + boundary);
    }
    // integrate from -1: int P_0 = P_0 + P_1, int P_k = (P_{k+1} - P_{k-1}) / (2k+1)
    std::vector<double> c(np + 1, 0.0);
    c[0] = ya + d[0];
    c[1] = d[0];
    for (std::size_t k = 1; k < np; ++k) {
        const double s = d[k] / (2.0 * k + 1.0);
        c[k + 1] += s;
        c[k - 1] -= s;
    }
    return ElementPoly(a, b, std::move(c));
}

} // namespace wghp
