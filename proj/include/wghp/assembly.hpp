#pragma once

// Assembly and solution of the weak Galerkin system
//
//   A_p(u, v) = eps1 (D_{p-1} u, D_{p-1} v) + eps2 (D^c_p u, v0) + (r u0, v0)
//             + S(u, v) + S_c(u, v)  =  (f, v0)   for all v in V_{p,0}.
//
// Unknowns: p+1 Legendre coefficients per element followed by the values at
// the N-1 interior nodes. The boundary node values are fixed to zero and
// eliminated.

#include "wghp/error.hpp"
#include "wghp/legendre.hpp"
#include "wghp/mesh.hpp"
#include "wghp/problem.hpp"
#include "wghp/weak_function.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace wghp {

struct DofMap {
    static constexpr std::size_t eliminated = std::numeric_limits<std::size_t>::max();

    std::size_t num_elements = 1;
    int degree = 1;

    std::size_t block() const noexcept { return static_cast<std::size_t>(degree + 1); }
    std::size_t interior(std::size_t j, std::size_t k) const noexcept { return j * block() + k; }
    /// Index of the value at node i, or `eliminated` for the two boundary nodes.
    std::size_t node(std::size_t i) const noexcept
    {
        if (i == 0 || i == num_elements) {
            return eliminated;
        }
        return num_elements * block() + i - 1;
    }
    std::size_t total() const noexcept { return num_elements * block() + num_elements - 1; }

    /// Global indices of the local unknowns [c_0 .. c_p, vb_left, vb_right] of element j.
    std::vector<std::size_t> element_dofs(std::size_t j) const
    {
        std::vector<std::size_t> g(block() + 2);
        for (std::size_t k = 0; k < block(); ++k) {
            g[k] = interior(j, k);
        }
        g[block()] = node(j);
        g[block() + 1] = node(j + 1);
        return g;
    }
};

struct AssemblyOptions {
    /// Per-element penalties; eps1 p^2 / h_j when empty.
    std::optional<std::vector<double>> sigmas;
    /// Use twice the default number of quadrature points.
    bool quad_double = false;
};

struct AssembledSystem {
    Mesh mesh;
    int degree = 1;
    DofMap dofs;
    std::vector<double> sigmas;
    int quad_points = 7;
    /// matrix(i, j) = A_p(phi_j, phi_i)
    Eigen::MatrixXd matrix;
    Eigen::VectorXd rhs;
};

namespace detail {

struct ElementContribution {
    Eigen::MatrixXd matrix; // rows: test unknowns, columns: trial unknowns
    Eigen::VectorXd load;
};

/// Exact matrix of the weak derivative on one element: maps the local
/// unknowns [c_0 .. c_p, vb_left, vb_right] to the p Legendre coefficients of D_{p-1}.
inline Eigen::MatrixXd weak_derivative_operator(int p, double h)
{
    const int n = p + 3;
    Eigen::MatrixXd op = Eigen::MatrixXd::Zero(p, n);
    for (int m = 0; m < p; ++m) {
        const double s = (2.0 * m + 1.0) / h;
        // int P_k P_m' dt = 2 if k < m and m - k odd
        for (int k = m - 1; k >= 0; k -= 2) {
            op(m, k) = -2.0 * s;
        }
        op(m, p + 1) = -s * ((m % 2 == 0) ? 1.0 : -1.0);
        op(m, p + 2) = s;
    }
    return op;
}

inline ElementContribution element_contribution(const ProblemSpec& pb, double a, double b, int p, double sigma,
                                                const QuadRule& rule)
{
    const double h = b - a;
    const int np = p + 1;
    const int n = p + 3;
    ElementContribution out{Eigen::MatrixXd::Zero(n, n), Eigen::VectorXd::Zero(n)};

    // diffusion: eps1 L^T M L
    const Eigen::MatrixXd L = weak_derivative_operator(p, h);
    Eigen::VectorXd mass(p);
    for (int m = 0; m < p; ++m) {
        mass(m) = h / (2.0 * m + 1.0);
    }
    out.matrix += pb.eps1 * L.transpose() * mass.asDiagonal() * L;

    // convection (D^c u, v0), reaction and load by quadrature
    std::vector<double> vals(static_cast<std::size_t>(np)), ders(vals.size());
    for (std::size_t q = 0; q < rule.size(); ++q) {
        const double t = rule.nodes[q];
        const double x = 0.5 * (a + b) + 0.5 * h * t;
        const double w = rule.weights[q];
        const double bx = pb.b(x), dbx = pb.b_prime(x), rx = pb.r(x), fx = pb.f(x);
        legendre_all(t, vals, ders);
        for (int m = 0; m < np; ++m) {
            const double bq_prime = 0.5 * h * dbx * vals[m] + bx * ders[m];
            out.load(m) += w * 0.5 * h * fx * vals[m];
            for (int k = 0; k < np; ++k) {
                out.matrix(m, k) += w * (-pb.eps2 * vals[k] * bq_prime + 0.5 * h * rx * vals[k] * vals[m]);
            }
        }
    }
    const double b_left = pb.b(a), b_right = pb.b(b);
    for (int m = 0; m < np; ++m) {
        out.matrix(m, p + 1) += -pb.eps2 * ((m % 2 == 0) ? 1.0 : -1.0) * b_left;
        out.matrix(m, p + 2) += pb.eps2 * b_right;
    }

    // stabilisers on the jumps (v0 - vb)(x^+_left) and (v0 - vb)(x^-_right)
    Eigen::VectorXd e_left = Eigen::VectorXd::Zero(n), e_right = Eigen::VectorXd::Zero(n);
    for (int k = 0; k < np; ++k) {
        e_left(k) = (k % 2 == 0) ? 1.0 : -1.0;
        e_right(k) = 1.0;
    }
    e_left(p + 1) = -1.0;
    e_right(p + 2) = -1.0;
    out.matrix += sigma * (e_right * e_right.transpose() + e_left * e_left.transpose());
    out.matrix += pb.eps2 * b_right * e_right * e_right.transpose();
    return out;
}

} // namespace detail

inline AssembledSystem assemble(const ProblemSpec& pb, const Mesh& mesh, int p, const AssemblyOptions& opts = {})
{
    if (p < 1) {
        throw std::invalid_argument("assemble: degree must be at least 1");
    }
    AssembledSystem sys;
    sys.mesh = mesh;
    sys.degree = p;
    sys.dofs = DofMap{mesh.num_elements(), p};
    sys.sigmas = opts.sigmas ? *opts.sigmas : default_penalties(mesh, p, pb.eps1);
    if (sys.sigmas.size() != mesh.num_elements()) {
        throw MeshError("penalty count does not match element count");
    }
    sys.quad_points = quadrature_points(p, opts.quad_double);
    const QuadRule rule = gauss_rule(sys.quad_points);

    const auto total = static_cast<Eigen::Index>(sys.dofs.total());
    sys.matrix = Eigen::MatrixXd::Zero(total, total);
    sys.rhs = Eigen::VectorXd::Zero(total);
    for (std::size_t j = 0; j < mesh.num_elements(); ++j) {
        const auto local =
            detail::element_contribution(pb, mesh.node(j), mesh.node(j + 1), p, sys.sigmas[j], rule);
        const auto g = sys.dofs.element_dofs(j);
        for (std::size_t r = 0; r < g.size(); ++r) {
            if (g[r] == DofMap::eliminated) {
                continue;
            }
            const auto gr = static_cast<Eigen::Index>(g[r]);
            sys.rhs(gr) += local.load(static_cast<Eigen::Index>(r));
            for (std::size_t c = 0; c < g.size(); ++c) {
                if (g[c] != DofMap::eliminated) {
                    sys.matrix(gr, static_cast<Eigen::Index>(g[c])) +=
                        local.matrix(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
                }
            }
        }
    }
    return sys;
}

/// Packs a global unknown vector into a weak function with zero boundary values.
inline WeakFunction unpack(const AssembledSystem& sys, const Eigen::VectorXd& x)
{
    WeakFunction u(sys.mesh, sys.degree);
    for (std::size_t j = 0; j < sys.mesh.num_elements(); ++j) {
        auto c = u.interior(j);
        for (std::size_t k = 0; k < c.size(); ++k) {
            c[k] = x(static_cast<Eigen::Index>(sys.dofs.interior(j, k)));
        }
    }
    auto vb = u.node_values();
    for (std::size_t i = 1; i + 1 < vb.size(); ++i) {
        vb[i] = x(static_cast<Eigen::Index>(sys.dofs.node(i)));
    }
    return u;
}

/// Inverse of unpack; boundary node values are dropped.
inline Eigen::VectorXd pack(const AssembledSystem& sys, const WeakFunction& u)
{
    Eigen::VectorXd x(static_cast<Eigen::Index>(sys.dofs.total()));
    for (std::size_t j = 0; j < sys.mesh.num_elements(); ++j) {
        const auto c = u.interior(j);
        for (std::size_t k = 0; k < c.size(); ++k) {
            x(static_cast<Eigen::Index>(sys.dofs.interior(j, k))) = c[k];
        }
    }
    for (std::size_t i = 1; i < sys.mesh.num_elements(); ++i) {
        x(static_cast<Eigen::Index>(sys.dofs.node(i))) = u.node_value(i);
    }
    return x;
}

/// Dense LU with partial pivoting. Throws SingularMatrix if the factorisation
/// breaks down or the relative residual exceeds 1e-10.
inline WeakFunction solve(const AssembledSystem& sys)
{
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(sys.matrix);
    const double rcond = lu.rcond();
    if (!(rcond > std::numeric_limits<double>::epsilon())) {
        throw SingularMatrix("system matrix is singular to working precision (rcond " + std::to_string(rcond) + ")");
    }
    const Eigen::VectorXd x = lu.solve(sys.rhs);
    if (!x.allFinite()) {
        throw SingularMatrix("non-finite solution");
    }
    const double bnorm = sys.rhs.norm();
    const double res = (sys.matrix * x - sys.rhs).norm();
    if (res > 1e-10 * bnorm) {
        throw SingularMatrix("relative residual " + std::to_string(res / bnorm) + " exceeds 1e-10");
    }
    return unpack(sys, x);
}

/// A_p(u, v) evaluated directly from the weak-space operators, no matrix involved.
inline double bilinear_apply(const WeakFunction& u, const WeakFunction& v, const ProblemSpec& pb,
                             std::span<const double> sigmas, int quad_points = -1)
{
    u.check_compatible(v);
    const int p = u.degree();
    const int nq = quad_points > 0 ? quad_points : quadrature_points(p);
    const Mesh& mesh = u.mesh();

    const BrokenPoly du = weak_derivative(u), dv = weak_derivative(v);
    const BrokenPoly dcu = weak_convection_derivative(u, pb.b, pb.b_prime, nq);
    double diffusion = 0.0, convection = 0.0, reaction = 0.0;
    const QuadRule rule = gauss_rule(nq);
    for (std::size_t j = 0; j < mesh.num_elements(); ++j) {
        const double h = mesh.width(j);
        const auto a = du.coeffs(j), c = dv.coeffs(j);
        for (std::size_t m = 0; m < a.size(); ++m) {
            diffusion += h / (2.0 * m + 1.0) * a[m] * c[m];
        }
        const auto dc = dcu.coeffs(j), v0 = v.interior(j);
        for (std::size_t m = 0; m < dc.size(); ++m) {
            convection += h / (2.0 * m + 1.0) * dc[m] * v0[m];
        }
        const ElementPoly ue = u.element(j), ve = v.element(j);
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const double t = rule.nodes[q];
            reaction += rule.weights[q] * 0.5 * h * pb.r(ue.from_reference(t)) * ue.eval_reference(t) *
                        ve.eval_reference(t);
        }
    }
    return pb.eps1 * diffusion + pb.eps2 * convection + reaction + stabilizer_S(u, v, sigmas) +
           stabilizer_Sc(u, v, pb.b, pb.eps2);
}

/// (f, v0) by quadrature.
inline double load_apply(const WeakFunction& v, const Expr& f, int quad_points = -1)
{
    const int nq = quad_points > 0 ? quad_points : quadrature_points(v.degree());
    const QuadRule rule = gauss_rule(nq);
    double s = 0.0;
    for (std::size_t j = 0; j < v.num_elements(); ++j) {
        const ElementPoly ve = v.element(j);
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const double t = rule.nodes[q];
            s += rule.weights[q] * 0.5 * ve.width() * f(ve.from_reference(t)) * ve.eval_reference(t);
        }
    }
    return s;
}

} // namespace wghp
