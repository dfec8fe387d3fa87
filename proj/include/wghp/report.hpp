#pragma once

// CSV tables and static SVG plots: convergence records, per-curve slopes and
// the solution profile.

#include "wghp/problem.hpp"
#include "wghp/verify.hpp"
#include "wghp/weak_function.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace wghp {

inline constexpr const char* convergence_header =
    "regime,eps1,eps2,p,N,dof,err_rel_percent,err_abs,ref_degree,wall_ms";

/// %.17g, so values round-trip exactly.
inline std::string fmt17(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace detail {

inline std::string fmt(const char* pattern, double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, pattern, v);
    return buf;
}

inline std::string curve_label(double eps1, double eps2)
{
    return "eps1=" + fmt("%g", eps1) + ", eps2=" + fmt("%g", eps2) + " (" +
           to_string(classify_regime(eps1, eps2)) + ")";
}

// Okabe-Ito palette
inline const char* curve_colour(std::size_t i)
{
    static const char* colours[] = {"#0072B2", "#D55E00", "#009E73", "#CC79A7",
                                    "#E69F00", "#56B4E9", "#F0E442", "#000000"};
    return colours[i % (sizeof colours / sizeof *colours)];
}

} // namespace detail

inline void write_convergence_csv(std::ostream& out, std::span<const ConvergenceRecord> recs)
{
    out << convergence_header << '\n';
    for (const auto& r : recs) {
        out << to_string(r.regime) << ',' << fmt17(r.eps1) << ',' << fmt17(r.eps2) << ',' << r.p << ','
            << r.elements << ',' << r.dof << ',' << fmt17(100.0 * r.err_rel) << ',' << fmt17(r.err_abs) << ','
            << r.ref_degree << ',' << fmt17(r.wall_ms) << '\n';
    }
}

struct CurveSlope {
    double eps1;
    double eps2;
    Regime regime;
    double slope;
};

/// One least-squares slope of log10(relative error) vs p per (eps1, eps2), in key order.
inline std::vector<CurveSlope> curve_slopes(std::span<const ConvergenceRecord> recs)
{
    std::map<std::pair<double, double>, std::vector<ConvergenceRecord>> curves;
    for (const auto& r : recs) {
        curves[{r.eps1, r.eps2}].push_back(r);
    }
    std::vector<CurveSlope> out;
    for (const auto& [key, rs] : curves) {
        out.push_back({key.first, key.second, classify_regime(key.first, key.second), log10_slope(rs)});
    }
    return out;
}

inline void write_slopes_csv(std::ostream& out, std::span<const CurveSlope> slopes)
{
    out << "regime,eps1,eps2,slope_log10_per_p\n";
    for (const auto& s : slopes) {
        out << to_string(s.regime) << ',' << fmt17(s.eps1) << ',' << fmt17(s.eps2) << ',' << fmt17(s.slope) << '\n';
    }
}

/// Rows `u0,<element>,x,value` (samples_per_element uniform points including the
/// element ends) followed by rows `ub,<node>,x,value`.
inline void write_solution_csv(std::ostream& out, const WeakFunction& u, int samples_per_element = 200)
{
    const Mesh& mesh = u.mesh();
    out << "kind,index,x,value\n";
    for (std::size_t j = 0; j < mesh.num_elements(); ++j) {
        const ElementPoly e = u.element(j);
        for (int s = 0; s < samples_per_element; ++s) {
            const double t = samples_per_element > 1 ? -1.0 + 2.0 * s / (samples_per_element - 1) : 0.0;
            out << "u0," << j << ',' << fmt17(e.from_reference(t)) << ',' << fmt17(e.eval_reference(t)) << '\n';
        }
    }
    for (std::size_t i = 0; i < mesh.num_nodes(); ++i) {
        out << "ub," << i << ',' << fmt17(mesh.node(i)) << ',' << fmt17(u.node_value(i)) << '\n';
    }
}

namespace detail {

struct Frame {
    double width = 640, height = 440;
    double left = 70, right = 210, top = 30, bottom = 50;
    double x0, x1, y0, y1;

    double px(double x) const { return left + (x - x0) / (x1 - x0) * (width - left - right); }
    double py(double y) const { return height - bottom - (y - y0) / (y1 - y0) * (height - top - bottom); }
};

inline void svg_open(std::ostream& out, const Frame& f, const std::string& title)
{
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f.width << "\" height=\"" << f.height
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<text x=\"" << f.left << "\" y=\"18\" font-size=\"14\">" << title << "</text>\n";
    const double l = f.left, r = f.width - f.right, t = f.top, b = f.height - f.bottom;
    out << "<path d=\"M" << l << ' ' << t << " L" << l << ' ' << b << " L" << r << ' ' << b
        << "\" fill=\"none\" stroke=\"black\"/>\n";
}

inline void svg_tick_x(std::ostream& out, const Frame& f, double x, const std::string& label)
{
    const double X = f.px(x), b = f.height - f.bottom;
    out << "<line x1=\"" << fmt("%.2f", X) << "\" y1=\"" << b << "\" x2=\"" << fmt("%.2f", X) << "\" y2=\""
        << b + 5 << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << fmt("%.2f", X) << "\" y=\"" << b + 18 << "\" text-anchor=\"middle\">" << label
        << "</text>\n";
}

inline void svg_tick_y(std::ostream& out, const Frame& f, double y, const std::string& label)
{
    const double Y = f.py(y);
    out << "<line x1=\"" << f.left - 5 << "\" y1=\"" << fmt("%.2f", Y) << "\" x2=\"" << f.left << "\" y2=\""
        << fmt("%.2f", Y) << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << f.left - 8 << "\" y=\"" << fmt("%.2f", Y + 4) << "\" text-anchor=\"end\">" << label
        << "</text>\n";
}

} // namespace detail

/// Semi-log plot: p on the horizontal axis, log10 of the percentage relative
/// error on the vertical axis, one curve per (eps1, eps2). Failed cases are skipped.
inline void write_convergence_svg(std::ostream& out, std::span<const ConvergenceRecord> recs)
{
    std::map<std::pair<double, double>, std::vector<std::pair<int, double>>> curves;
    int pmin = 1, pmax = 2;
    double lo = INFINITY, hi = -INFINITY;
    bool any = false;
    for (const auto& r : recs) {
        auto& c = curves[{r.eps1, r.eps2}];
        const double pct = 100.0 * r.err_rel;
        if (!r.failure.empty() || !(pct > 0.0) || !std::isfinite(pct)) {
            continue;
        }
        const double y = std::log10(pct);
        c.emplace_back(r.p, y);
        pmin = any ? std::min(pmin, r.p) : r.p;
        pmax = any ? std::max(pmax, r.p) : r.p;
        lo = std::min(lo, y);
        hi = std::max(hi, y);
        any = true;
    }
    if (!any) {
        lo = -1.0;
        hi = 1.0;
    }
    if (pmax == pmin) {
        ++pmax;
    }
    detail::Frame f;
    f.x0 = pmin;
    f.x1 = pmax;
    f.y0 = std::floor(lo);
    f.y1 = std::max(std::ceil(hi), f.y0 + 1.0);
    detail::svg_open(out, f, "Relative energy error (percent) vs p");
    for (int p = pmin; p <= pmax; ++p) {
        detail::svg_tick_x(out, f, p, std::to_string(p));
    }
    for (int e = static_cast<int>(f.y0); e <= static_cast<int>(f.y1); ++e) {
        detail::svg_tick_y(out, f, e, "1e" + std::to_string(e));
    }
    out << "<text x=\"" << detail::fmt("%.2f", f.px(0.5 * (f.x0 + f.x1))) << "\" y=\"" << f.height - 12
        << "\" text-anchor=\"middle\">p</text>\n";
    std::size_t k = 0;
    for (const auto& [key, pts] : curves) {
        const char* colour = detail::curve_colour(k);
        if (!pts.empty()) {
            out << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
            for (std::size_t i = 0; i < pts.size(); ++i) {
                out << (i ? " " : "") << detail::fmt("%.2f", f.px(pts[i].first)) << ','
                    << detail::fmt("%.2f", f.py(pts[i].second));
            }
            out << "\"/>\n";
            for (const auto& [p, y] : pts) {
                out << "<circle cx=\"" << detail::fmt("%.2f", f.px(p)) << "\" cy=\"" << detail::fmt("%.2f", f.py(y))
                    << "\" r=\"3\" fill=\"" << colour << "\"/>\n";
            }
        }
        const double ly = f.top + 10 + 18.0 * k;
        const double lx = f.width - f.right + 12;
        out << "<line x1=\"" << lx << "\" y1=\"" << ly << "\" x2=\"" << lx + 20 << "\" y2=\"" << ly
            << "\" stroke=\"" << colour << "\" stroke-width=\"2\"/>\n"
            << "<text x=\"" << lx + 26 << "\" y=\"" << ly + 4 << "\" font-size=\"10\">"
            << detail::curve_label(key.first, key.second) << "</text>\n";
        ++k;
    }
    out << "</svg>\n";
}

/// Interior polynomial on every element as a polyline, node values as dots.
inline void write_solution_svg(std::ostream& out, const WeakFunction& u, int samples_per_element = 200)
{
    const Mesh& mesh = u.mesh();
    std::vector<std::vector<std::pair<double, double>>> pieces(mesh.num_elements());
    double lo = INFINITY, hi = -INFINITY;
    for (std::size_t j = 0; j < mesh.num_elements(); ++j) {
        const ElementPoly e = u.element(j);
        for (int s = 0; s < samples_per_element; ++s) {
            const double t = samples_per_element > 1 ? -1.0 + 2.0 * s / (samples_per_element - 1) : 0.0;
            const double v = e.eval_reference(t);
            pieces[j].emplace_back(e.from_reference(t), v);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    for (double v : u.node_values()) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (!(hi - lo > 1e-12)) {
        lo -= 0.5;
        hi += 0.5;
    }
    const double pad = 0.05 * (hi - lo);
    detail::Frame f;
    f.right = 30;
    f.x0 = 0.0;
    f.x1 = 1.0;
    f.y0 = lo - pad;
    f.y1 = hi + pad;
    detail::svg_open(out, f, "Approximate solution (interior part and node values)");
    for (int i = 0; i <= 10; ++i) {
        detail::svg_tick_x(out, f, 0.1 * i, detail::fmt("%.1f", 0.1 * i));
    }
    for (int i = 0; i <= 5; ++i) {
        const double y = f.y0 + (f.y1 - f.y0) * i / 5.0;
        detail::svg_tick_y(out, f, y, detail::fmt("%.3g", y));
    }
    for (const auto& piece : pieces) {
        out << "<polyline fill=\"none\" stroke=\"#0072B2\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < piece.size(); ++i) {
            out << (i ? " " : "") << detail::fmt("%.2f", f.px(piece[i].first)) << ','
                << detail::fmt("%.2f", f.py(piece[i].second));
        }
        out << "\"/>\n";
    }
    for (std::size_t i = 0; i < mesh.num_nodes(); ++i) {
        out << "<circle cx=\"" << detail::fmt("%.2f", f.px(mesh.node(i))) << "\" cy=\""
            << detail::fmt("%.2f", f.py(u.node_value(i))) << "\" r=\"4\" fill=\"#D55E00\"/>\n";
    }
    out << "</svg>\n";
}

} // namespace wghp
