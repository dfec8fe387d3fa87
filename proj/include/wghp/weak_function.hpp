#pragma once

// Weak functions v = (v0, vb) on a mesh: a polynomial v0 of degree p inside
// each element plus independent values vb at the nodes. Provides the weak
// derivative D_{p-1}, the weak convection derivative D^c_p, the two
// stabilisers, the jump seminorm and the two energy norms.
//
// Elements are numbered j = 0 .. N-1 with element j = (x_j, x_{j+1}).

#include "wghp/error.hpp"
#include "wghp/expr.hpp"
#include "wghp/legendre.hpp"
#include "wghp/mesh.hpp"
#include "wghp/problem.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace wghp {

/// Mesh-aligned piecewise polynomial of a fixed degree.
class BrokenPoly {
public:
    BrokenPoly(Mesh mesh, int degree)
        : mesh_(std::move(mesh)), degree_(degree),
          coeffs_(mesh_.num_elements() * static_cast<std::size_t>(degree + 1), 0.0)
    {
    }

    const Mesh& mesh() const noexcept { return mesh_; }
    int degree() const noexcept { return degree_; }
    std::size_t num_elements() const noexcept { return mesh_.num_elements(); }
    std::span<double> coeffs(std::size_t j) noexcept { return {coeffs_.data() + j * block(), block()}; }
    std::span<const double> coeffs(std::size_t j) const noexcept { return {coeffs_.data() + j * block(), block()}; }
    std::span<const double> all_coeffs() const noexcept { return coeffs_; }

    ElementPoly element(std::size_t j) const
    {
        const auto c = coeffs(j);
        return ElementPoly(mesh_.node(j), mesh_.node(j + 1), {c.begin(), c.end()});
    }

    double l2_norm_squared() const
    {
        double s = 0.0;
        for (std::size_t j = 0; j < num_elements(); ++j) {
            s += element(j).l2_norm_squared();
        }
        return s;
    }

private:
    std::size_t block() const noexcept { return static_cast<std::size_t>(degree_ + 1); }

    Mesh mesh_;
    int degree_;
    std::vector<double> coeffs_;
};

class WeakFunction {
public:
    /// The zero function.
    WeakFunction(Mesh mesh, int degree)
        : mesh_(std::move(mesh)), degree_(degree),
          v0_(mesh_.num_elements() * static_cast<std::size_t>(degree + 1), 0.0),
          vb_(mesh_.num_nodes(), 0.0)
    {
        if (degree < 0) {
            throw std::invalid_argument("WeakFunction: negative degree");
        }
    }

    WeakFunction(Mesh mesh, int degree, std::vector<double> interior, std::vector<double> node_values)
        : WeakFunction(std::move(mesh), degree)
    {
        if (interior.size() != v0_.size() || node_values.size() != vb_.size()) {
            throw std::invalid_argument("WeakFunction: block sizes do not match mesh and degree");
        }
        v0_ = std::move(interior);
        vb_ = std::move(node_values);
    }

    /// Weak function whose interior part is the element interpolant of y and
    /// whose node values are y(x_i); conforming by construction.
    template <class F>
    static WeakFunction interpolant(const Mesh& mesh, int degree, F&& y, int quad_points = -1)
    {
        WeakFunction w(mesh, degree);
        const int nq = quad_points > 0 ? quad_points : quadrature_points(degree);
        for (std::size_t j = 0; j < mesh.num_elements(); ++j) {
            const ElementPoly e = interpolate(y, degree, mesh.node(j), mesh.node(j + 1), nq);
            std::copy(e.coeffs().begin(), e.coeffs().end(), w.interior(j).begin());
        }
        for (std::size_t i = 0; i < mesh.num_nodes(); ++i) {
            w.vb_[i] = y(mesh.node(i));
        }
        return w;
    }

    const Mesh& mesh() const noexcept { return mesh_; }
    int degree() const noexcept { return degree_; }
    std::size_t num_elements() const noexcept { return mesh_.num_elements(); }

    std::span<double> interior(std::size_t j) noexcept { return {v0_.data() + j * block(), block()}; }
    std::span<const double> interior(std::size_t j) const noexcept { return {v0_.data() + j * block(), block()}; }
    std::span<const double> all_interior() const noexcept { return v0_; }
    std::span<double> node_values() noexcept { return vb_; }
    std::span<const double> node_values() const noexcept { return vb_; }
    double node_value(std::size_t i) const noexcept { return vb_[i]; }

    ElementPoly element(std::size_t j) const
    {
        const auto c = interior(j);
        return ElementPoly(mesh_.node(j), mesh_.node(j + 1), {c.begin(), c.end()});
    }

    /// v0(x_j^+) on element j.
    double trace_left(std::size_t j) const noexcept
    {
        double s = 0.0;
        const auto c = interior(j);
        for (std::size_t k = 0; k < c.size(); ++k) {
            s += (k % 2 == 0) ? c[k] : -c[k];
        }
        return s;
    }
    /// v0(x_{j+1}^-) on element j.
    double trace_right(std::size_t j) const noexcept
    {
        double s = 0.0;
        for (double c : interior(j)) {
            s += c;
        }
        return s;
    }
    /// (v0 - vb)(x_j^+) on element j.
    double jump_left(std::size_t j) const noexcept { return trace_left(j) - vb_[j]; }
    /// (v0 - vb)(x_{j+1}^-) on element j.
    double jump_right(std::size_t j) const noexcept { return trace_right(j) - vb_[j + 1]; }

    /// Same function viewed in the degree-q space, q >= degree.
    WeakFunction embedded(int q) const
    {
        if (q < degree_) {
            throw std::invalid_argument("WeakFunction::embedded: target degree too small");
        }
        WeakFunction w(mesh_, q);
        for (std::size_t j = 0; j < num_elements(); ++j) {
            std::copy(interior(j).begin(), interior(j).end(), w.interior(j).begin());
        }
        w.vb_ = vb_;
        return w;
    }

    WeakFunction& operator+=(const WeakFunction& o)
    {
        check_compatible(o);
        for (std::size_t i = 0; i < v0_.size(); ++i) {
            v0_[i] += o.v0_[i];
        }
        for (std::size_t i = 0; i < vb_.size(); ++i) {
            vb_[i] += o.vb_[i];
        }
        return *this;
    }
    WeakFunction& operator-=(const WeakFunction& o) { return *this += (-1.0) * o; }
    WeakFunction& operator*=(double s)
    {
        for (double& v : v0_) {
            v *= s;
        }
        for (double& v : vb_) {
            v *= s;
        }
        return *this;
    }
    friend WeakFunction operator+(WeakFunction a, const WeakFunction& b) { return a += b; }
    friend WeakFunction operator-(WeakFunction a, const WeakFunction& b) { return a -= b; }
    friend WeakFunction operator*(double s, WeakFunction a) { return a *= s; }

    void check_compatible(const WeakFunction& o) const
    {
        if (!(mesh_ == o.mesh_) || degree_ != o.degree_) {
            throw MeshError("weak functions live on different meshes or degrees");
        }
    }

private:
    std::size_t block() const noexcept { return static_cast<std::size_t>(degree_ + 1); }

    Mesh mesh_;
    int degree_;
    std::vector<double> v0_;
    std::vector<double> vb_;
};

/// sigma_j = eps1 p^2 / h_j
inline std::vector<double> default_penalties(const Mesh& mesh, int p, double eps1)
{
    std::vector<double> s(mesh.num_elements());
    for (std::size_t j = 0; j < s.size(); ++j) {
        s[j] = eps1 * p * p / mesh.width(j);
    }
    return s;
}

/// D_{p-1} v: per element the D in P_{p-1} with
/// int D q = -int v0 q' + vb_{j+1} q(x_{j+1}) - vb_j q(x_j) for all q in P_{p-1}.
inline BrokenPoly weak_derivative(const WeakFunction& v)
{
    const int p = v.degree();
    if (p < 1) {
        throw std::invalid_argument("weak_derivative: degree must be at least 1");
    }
    const Mesh& mesh = v.mesh();
    BrokenPoly d(mesh, p - 1);
    // With c_k the Legendre coefficients of v0, int v0 P_m' = 2 sum_{k < m, m - k odd} c_k, so
    // D_m (h / (2m+1)) = (vb_{j+1} - v0(x_{j+1})) - (-1)^m (vb_j - v0(x_j)) + 2 sum_{k > m, k - m odd} c_k.
    // This form keeps the cancellation inside the jumps.
    for (std::size_t j = 0; j < mesh.num_elements(); ++j) {
        const auto c = v.interior(j);
        auto out = d.coeffs(j);
        const double gap_right = v.node_value(j + 1) - v.trace_right(j);
        const double gap_left = v.node_value(j) - v.trace_left(j);
        const double h = mesh.width(j);
        // tail[m] = sum_{k >= m, k - m even} c_k
        std::vector<double> tail(c.size() + 2, 0.0);
        for (std::size_t k = c.size(); k-- > 0;) {
            tail[k] = c[k] + tail[k + 2];
        }
        for (std::size_t m = 0; m < out.size(); ++m) {
            const double left = (m % 2 == 0) ? gap_left : -gap_left;
            out[m] = (2.0 * m + 1.0) / h * (gap_right - left + 2.0 * tail[m + 1]);
        }
    }
    return d;
}

/// D^c_p v: per element the D in P_p with
/// int D q = -int v0 (bq)' + vb_{j+1} (bq)(x_{j+1}) - vb_j (bq)(x_j) for all q in P_p.
inline BrokenPoly weak_convection_derivative(const WeakFunction& v, const Expr& b, const Expr& b_prime,
                                             int quad_points = -1)
{
    const int p = v.degree();
    if (p < 1) {
        throw std::invalid_argument("weak_convection_derivative: degree must be at least 1");
    }
    const Mesh& mesh = v.mesh();
    BrokenPoly d(mesh, p);
    const QuadRule rule = gauss_rule(quad_points > 0 ? quad_points : quadrature_points(p));
    std::vector<double> vals(static_cast<std::size_t>(p + 1)), ders(vals.size());
    for (std::size_t j = 0; j < mesh.num_elements(); ++j) {
        const ElementPoly v0 = v.element(j);
        const double h = mesh.width(j);
        auto out = d.coeffs(j);
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const double t = rule.nodes[q];
            const double x = v0.from_reference(t);
            const double w = rule.weights[q] * v0.eval_reference(t);
            const double bx = b(x), dbx = b_prime(x);
            legendre_all(t, vals, ders);
            // (h/2) (b' P_m + b (2/h) P_m')
            for (std::size_t m = 0; m < out.size(); ++m) {
                out[m] -= w * (0.5 * h * dbx * vals[m] + bx * ders[m]);
            }
        }
        const double b_left = b(mesh.node(j)), b_right = b(mesh.node(j + 1));
        for (std::size_t m = 0; m < out.size(); ++m) {
            const double left = ((m % 2 == 0) ? 1.0 : -1.0) * v.node_value(j) * b_left;
            out[m] = (2.0 * m + 1.0) / h * (out[m] + v.node_value(j + 1) * b_right - left);
        }
    }
    return d;
}

namespace detail {

inline void check_pair(const WeakFunction& u, const WeakFunction& v, std::size_t n_sigmas)
{
    u.check_compatible(v);
    if (n_sigmas != u.num_elements()) {
        throw MeshError("penalty count does not match element count");
    }
}

} // namespace detail

/// S(u, v) = sum_j sigma_j [(u0-ub)(v0-vb)](x_{j+1}^-) + [(u0-ub)(v0-vb)](x_j^+)
inline double stabilizer_S(const WeakFunction& u, const WeakFunction& v, std::span<const double> sigmas)
{
    detail::check_pair(u, v, sigmas.size());
    double s = 0.0;
    for (std::size_t j = 0; j < u.num_elements(); ++j) {
        s += sigmas[j] * (u.jump_right(j) * v.jump_right(j) + u.jump_left(j) * v.jump_left(j));
    }
    return s;
}

/// S_c(u, v) = sum_j eps2 b(x_{j+1}) [(u0-ub)(v0-vb)](x_{j+1}^-); outflow ends only.
inline double stabilizer_Sc(const WeakFunction& u, const WeakFunction& v, const Expr& b, double eps2)
{
    u.check_compatible(v);
    const Mesh& mesh = u.mesh();
    double s = 0.0;
    for (std::size_t j = 0; j < u.num_elements(); ++j) {
        s += eps2 * b(mesh.node(j + 1)) * u.jump_right(j) * v.jump_right(j);
    }
    return s;
}

/// |v|_J^2; the last element carries weight 1/2.
inline double jump_seminorm_squared(const WeakFunction& v, const Expr& b, double eps2)
{
    const Mesh& mesh = v.mesh();
    const std::size_t n = v.num_elements();
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double w = (j + 1 == n) ? 0.5 : 1.0;
        const double e = v.jump_right(j);
        s += w * eps2 * b(mesh.node(j + 1)) * e * e;
    }
    return s;
}

inline double jump_seminorm(const WeakFunction& v, const Expr& b, double eps2)
{
    return std::sqrt(jump_seminorm_squared(v, b, eps2));
}

namespace detail {

inline double l2_squared(const WeakFunction& v)
{
    double s = 0.0;
    for (std::size_t j = 0; j < v.num_elements(); ++j) {
        s += v.element(j).l2_norm_squared();
    }
    return s;
}

inline double trace_terms(const WeakFunction& v, const ProblemSpec& pb, std::span<const double> sigmas)
{
    return stabilizer_S(v, v, sigmas) + stabilizer_Sc(v, v, pb.b, pb.eps2) +
           jump_seminorm_squared(v, pb.b, pb.eps2);
}

} // namespace detail

/// |||v|||_p with the weak derivative D_{p-1}.
inline double norm_p(const WeakFunction& v, const ProblemSpec& pb, std::span<const double> sigmas)
{
    const double d = weak_derivative(v).l2_norm_squared();
    return std::sqrt(pb.eps1 * d + detail::l2_squared(v) + detail::trace_terms(v, pb, sigmas));
}

/// |||v||| with the elementwise classical derivative of v0.
inline double norm_broken(const WeakFunction& v, const ProblemSpec& pb, std::span<const double> sigmas)
{
    double d = 0.0;
    for (std::size_t j = 0; j < v.num_elements(); ++j) {
        d += v.element(j).derivative().l2_norm_squared();
    }
    return std::sqrt(pb.eps1 * d + detail::l2_squared(v) + detail::trace_terms(v, pb, sigmas));
}

} // namespace wghp
