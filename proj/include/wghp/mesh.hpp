#pragma once

#include "wghp/error.hpp"
#include "wghp/problem.hpp"

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace wghp {

/// Partition 0 = x_0 < x_1 < ... < x_N = 1 of the unit interval.
class Mesh {
public:
    Mesh() : nodes_{0.0, 1.0} {}

    /// Validates and wraps a user supplied node list.
    static Mesh from_nodes(std::vector<double> nodes)
    {
        if (nodes.size() < 2) {
            throw MeshError("mesh needs at least two nodes");
        }
        if (nodes.front() != 0.0 || nodes.back() != 1.0) {
            throw MeshError("mesh must start at 0 and end at 1");
        }
        for (std::size_t i = 1; i < nodes.size(); ++i) {
            if (!(nodes[i] > nodes[i - 1])) {
                throw MeshError("mesh nodes must be strictly increasing (index " + std::to_string(i) + ")");
            }
        }
        Mesh m;
        m.nodes_ = std::move(nodes);
        return m;
    }

    std::size_t num_elements() const noexcept { return nodes_.size() - 1; }
    std::size_t num_nodes() const noexcept { return nodes_.size(); }
    double node(std::size_t i) const noexcept { return nodes_[i]; }
    /// Width of element j, which spans (x_j, x_{j+1}).
    double width(std::size_t j) const noexcept { return nodes_[j + 1] - nodes_[j]; }
    std::span<const double> nodes() const noexcept { return nodes_; }

    friend bool operator==(const Mesh&, const Mesh&) = default;

private:
    std::vector<double> nodes_;
};

inline Mesh user_mesh(std::vector<double> nodes) { return Mesh::from_nodes(std::move(nodes)); }

/// Spectral Boundary Layer mesh for the given regime.
///
/// RCD: {0, kp/mu0, 1 - kp/mu1, 1} if both layer widths are <= 1/4, else {0, 1}.
/// RD:  {0, kp sqrt(eps1), 1 - kp sqrt(eps1), 1} if kp sqrt(eps1) <= 1/4, else {0, 1}.
/// CD:  {0, 1 - kp eps1, 1} if kp eps1 <= 1/2, else {0, 1}.
inline Mesh build_sbl_mesh(Regime regime, double kappa, int p, const MuPair& mu, double eps1,
                           [[maybe_unused]] double eps2)
{
    if (p < 1 || !(kappa > 0.0)) {
        throw std::invalid_argument("build_sbl_mesh: need p >= 1 and kappa > 0");
    }
    const double kp = kappa * p;
    constexpr double degenerate = 1e-12;
    auto single = [] { return Mesh(); };
    auto three = [&](double left, double right) {
        if (!(left <= 0.25 && right <= 0.25) || left < degenerate || right < degenerate) {
            return single();
        }
        return Mesh::from_nodes({0.0, left, 1.0 - right, 1.0});
    };
    switch (regime) {
    case Regime::ReactionConvectionDiffusion: return three(kp / mu.mu0, kp / mu.mu1);
    case Regime::ReactionDiffusion: {
        const double w = kp * std::sqrt(eps1);
        return three(w, w);
    }
    case Regime::ConvectionDiffusion: {
        const double w = kp * eps1;
        if (!(w <= 0.5) || w < degenerate) {
            return single();
        }
        return Mesh::from_nodes({0.0, 1.0 - w, 1.0});
    }
    }
    return single();
}

} // namespace wghp
