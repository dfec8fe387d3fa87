#pragma once

// Command-line front end: `wg-hp solve|convergence|check [flags]`.
//
// Flags may also come from a line-oriented key=value file given with
// --config (keys are the long flag names without the dashes); flags given on
// the command line win over the file.

#include "wghp/checks.hpp"
#include "wghp/error.hpp"
#include "wghp/expr.hpp"
#include "wghp/problem.hpp"
#include "wghp/report.hpp"
#include "wghp/verify.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace wghp::cli {

enum ExitCode : int {
    ok = 0,
    internal_error = 1,
    config_error = 2,
    expression_error = 3,
    domain_error = 4,
    assumption_error = 5,
    singular_error = 6,
    mesh_error = 7,
    partial_failure = 8,
    check_failure = 9,
};

enum class Command { solve, convergence, check };

struct RunConfig {
    Command command = Command::solve;
    std::optional<double> eps1;
    std::optional<double> eps2;
    std::string eps_grid;
    std::optional<int> p;
    std::string p_range;
    double kappa = 1.0;
    std::string b = "cos(x)";
    std::string r = "1 + x";
    std::string f = "exp(x)";
    std::string manufactured_u;
    std::string out;
    std::string svg;
    std::string ref_mesh = "same";
    bool quad_double = false;
    std::uint64_t seed = 20240601;
    double penalty_scale = 1.0;
    bool record_timing = false;
    unsigned threads = 0;
};

inline constexpr double default_eps1 = 1e-5;
inline constexpr double default_eps2 = 1e-2;

/// One pair per regime plus the model problem: (1e-5, 1e-2) RCD, (1e-8, 1) CD,
/// (1e-4, 1e-5) RD, (1e-8, 1e-3) RCD.
inline std::vector<std::pair<double, double>> default_eps_grid()
{
    return {{1e-5, 1e-2}, {1e-8, 1.0}, {1e-4, 1e-5}, {1e-8, 1e-3}};
}

namespace detail {

inline double to_double(std::string_view s, std::string_view what)
{
    while (!s.empty() && s.front() == ' ') {
        s.remove_prefix(1);
    }
    while (!s.empty() && s.back() == ' ') {
        s.remove_suffix(1);
    }
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
        throw ConfigError("invalid number '" + std::string(s) + "' in " + std::string(what));
    }
    return v;
}

inline int to_int(std::string_view s, std::string_view what)
{
    int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
        throw ConfigError("invalid integer '" + std::string(s) + "' in " + std::string(what));
    }
    return v;
}

inline void check_eps(double e, const char* name)
{
    if (!(e > 0.0 && e <= 1.0)) {
        throw ConfigError(std::string(name) + " must lie in (0, 1], got " + fmt17(e));
    }
}

} // namespace detail

/// "e1:e2,e1:e2,..." -> pairs.
inline std::vector<std::pair<double, double>> parse_eps_grid(std::string_view text)
{
    std::vector<std::pair<double, double>> out;
    while (!text.empty()) {
        const auto comma = text.find(',');
        const std::string_view item = text.substr(0, comma);
        const auto colon = item.find(':');
        if (colon == std::string_view::npos) {
            throw ConfigError("eps-grid entry '" + std::string(item) + "' is not of the form eps1:eps2");
        }
        const double e1 = detail::to_double(item.substr(0, colon), "eps-grid");
        const double e2 = detail::to_double(item.substr(colon + 1), "eps-grid");
        detail::check_eps(e1, "eps1");
        detail::check_eps(e2, "eps2");
        out.emplace_back(e1, e2);
        text = comma == std::string_view::npos ? std::string_view() : text.substr(comma + 1);
    }
    if (out.empty()) {
        throw ConfigError("eps-grid is empty");
    }
    return out;
}

/// "a..b" -> a, a+1, ..., b.
inline std::vector<int> parse_p_range(std::string_view text)
{
    const auto dots = text.find("..");
    if (dots == std::string_view::npos) {
        throw ConfigError("p-range '" + std::string(text) + "' is not of the form a..b");
    }
    const int a = detail::to_int(text.substr(0, dots), "p-range");
    const int b = detail::to_int(text.substr(dots + 2), "p-range");
    if (a < 1 || b < a) {
        throw ConfigError("p-range needs 1 <= a <= b, got " + std::string(text));
    }
    std::vector<int> out;
    for (int p = a; p <= b; ++p) {
        out.push_back(p);
    }
    return out;
}

/// Degrees requested by the config; `fallback` when neither --p nor --p-range is given.
inline std::vector<int> degrees(const RunConfig& cfg, std::pair<int, int> fallback)
{
    if (!cfg.p_range.empty()) {
        return parse_p_range(cfg.p_range);
    }
    if (cfg.p) {
        if (*cfg.p < 1) {
            throw ConfigError("p must be >= 1");
        }
        return {*cfg.p};
    }
    return parse_p_range(std::to_string(fallback.first) + ".." + std::to_string(fallback.second));
}

inline void validate_common(const RunConfig& cfg)
{
    if (cfg.eps1) {
        detail::check_eps(*cfg.eps1, "eps1");
    }
    if (cfg.eps2) {
        detail::check_eps(*cfg.eps2, "eps2");
    }
    if (!(cfg.kappa > 0.0)) {
        throw ConfigError("kappa must be positive");
    }
    if (!(cfg.penalty_scale >= 0.0)) {
        throw ConfigError("penalty-scale must be non-negative");
    }
}

namespace detail {

// Writes to the file at `path`, or to `fallback` when the path is empty.
template <class Body>
void emit(const std::string& path, std::ostream& fallback, Body&& body)
{
    if (path.empty()) {
        body(fallback);
        return;
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) {
        throw ConfigError("cannot open '" + path + "' for writing");
    }
    body(file);
    if (!file) {
        throw ConfigError("error writing '" + path + "'");
    }
}

inline std::string slopes_path(const std::string& out)
{
    const std::filesystem::path p(out);
    return (p.parent_path() / (p.stem().string() + "_slopes.csv")).string();
}

} // namespace detail

inline int run_solve(const RunConfig& cfg, std::ostream& out, std::ostream& log)
{
    validate_common(cfg);
    const auto ps = degrees(cfg, {4, 4});
    if (ps.size() != 1) {
        throw ConfigError("solve takes a single degree (--p)");
    }
    const int p = ps.front();
    ProblemSpec pb = make_problem(cfg.eps1.value_or(default_eps1), cfg.eps2.value_or(default_eps2),
                                  parse(cfg.b), parse(cfg.r), parse(cfg.f));
    std::optional<ManufacturedCase> mc;
    if (!cfg.manufactured_u.empty()) {
        mc = manufacture(parse(cfg.manufactured_u), pb);
        pb = mc->problem;
    }
    const Validation val = validate(pb);
    if (val.marginal) {
        log << "warning: r - eps2 b'/2 is only " << fmt17(val.gamma_hat) << " (marginal)\n";
    }
    const Mesh mesh = sbl_mesh_for(pb, p, cfg.kappa);
    const WeakFunction u = solve_problem(pb, mesh, p, {cfg.quad_double, cfg.penalty_scale});
    log << "regime " << to_string(classify_regime(pb.eps1, pb.eps2)) << ", " << mesh.num_elements()
        << " elements, " << DofMap{mesh.num_elements(), p}.total() << " unknowns\n";
    if (mc) {
        auto sigmas = default_penalties(mesh, p, pb.eps1);
        for (double& s : sigmas) {
            s *= cfg.penalty_scale;
        }
        log << "energy error against the manufactured solution: "
            << fmt17(exact_energy_error(mc->u, mc->u_prime, u, pb, sigmas)) << '\n';
    }
    detail::emit(cfg.out, out, [&](std::ostream& os) { write_solution_csv(os, u); });
    if (!cfg.svg.empty()) {
        detail::emit(cfg.svg, out, [&](std::ostream& os) { write_solution_svg(os, u); });
    }
    return ok;
}

inline int run_convergence(const RunConfig& cfg, std::ostream& out, std::ostream& log)
{
    validate_common(cfg);
    if (!cfg.manufactured_u.empty()) {
        throw ConfigError("--manufactured-u is supported by solve and check only");
    }
    const auto ps = degrees(cfg, {1, 10});
    std::vector<std::pair<double, double>> grid;
    if (!cfg.eps_grid.empty()) {
        grid = parse_eps_grid(cfg.eps_grid);
    } else if (cfg.eps1 || cfg.eps2) {
        grid = {{cfg.eps1.value_or(default_eps1), cfg.eps2.value_or(default_eps2)}};
    } else {
        grid = default_eps_grid();
    }
    const ProblemFamily fam{parse(cfg.b), parse(cfg.r), parse(cfg.f)};
    StudyOptions so;
    so.kappa = cfg.kappa;
    so.rebuilt_reference_mesh = cfg.ref_mesh == "rebuilt";
    so.quad_double = cfg.quad_double;
    so.record_time = cfg.record_timing;
    so.threads = cfg.threads;
    const auto recs = convergence_study(fam, ps, grid, so);

    int failures = 0;
    for (const auto& r : recs) {
        if (!r.failure.empty()) {
            ++failures;
            log << "case eps1=" << fmt17(r.eps1) << " eps2=" << fmt17(r.eps2) << " p=" << r.p
                << " failed: " << r.failure << '\n';
        }
    }
    detail::emit(cfg.out, out, [&](std::ostream& os) { write_convergence_csv(os, recs); });
    const auto slopes = curve_slopes(recs);
    for (const auto& s : slopes) {
        log << "slope " << to_string(s.regime) << " eps1=" << fmt17(s.eps1) << " eps2=" << fmt17(s.eps2) << ": "
            << fmt17(s.slope) << " per unit p\n";
    }
    if (!cfg.out.empty()) {
        detail::emit(detail::slopes_path(cfg.out), out, [&](std::ostream& os) { write_slopes_csv(os, slopes); });
    }
    if (!cfg.svg.empty()) {
        detail::emit(cfg.svg, out, [&](std::ostream& os) { write_convergence_svg(os, recs); });
    }
    return failures ? partial_failure : ok;
}

inline int run_check(const RunConfig& cfg, std::ostream& out, std::ostream&)
{
    validate_common(cfg);
    const auto ps = degrees(cfg, {1, 8});
    CheckConfig cc;
    cc.problem = make_problem(cfg.eps1.value_or(default_eps1), cfg.eps2.value_or(default_eps2), parse(cfg.b),
                              parse(cfg.r), parse(cfg.f));
    validate(cc.problem);
    cc.p_min = ps.front();
    cc.p_max = ps.back();
    cc.kappa = cfg.kappa;
    cc.penalty_scale = cfg.penalty_scale;
    cc.quad_double = cfg.quad_double;
    cc.seed = cfg.seed;
    if (!cfg.manufactured_u.empty()) {
        cc.manufactured_u = parse(cfg.manufactured_u);
    }
    out << "seed " << cc.seed << ", p " << cc.p_min << ".." << cc.p_max << ", penalty scale "
        << fmt17(cc.penalty_scale) << '\n';
    bool all = true;
    for (const auto& s : run_checks(cc)) {
        all = all && s.ok();
        out << (s.ok() ? "PASS " : "FAIL ") << s.name << ": " << s.passed << '/' << s.total
            << " within tolerance, worst normalised violation " << fmt17(s.worst);
        if (!s.detail.empty()) {
            out << " (" << s.detail << ')';
        }
        out << '\n';
    }
    return all ? ok : check_failure;
}

inline int dispatch(const RunConfig& cfg, std::ostream& out, std::ostream& log)
{
    switch (cfg.command) {
    case Command::solve: return run_solve(cfg, out, log);
    case Command::convergence: return run_convergence(cfg, out, log);
    case Command::check: return run_check(cfg, out, log);
    }
    return internal_error;
}

/// Runs a command and maps every error class to its exit code.
inline int run(const RunConfig& cfg, std::ostream& out, std::ostream& log)
{
    try {
        return dispatch(cfg, out, log);
    } catch (const ParseError& e) {
        log << "expression error: " << e.what() << '\n';
        return expression_error;
    } catch (const UnsupportedDerivative& e) {
        log << "expression error: " << e.what() << '\n';
        return expression_error;
    } catch (const DomainError& e) {
        log << "domain error: " << e.what() << '\n';
        return domain_error;
    } catch (const AssumptionViolation& e) {
        log << "assumption violated: " << e.what() << '\n';
        return assumption_error;
    } catch (const SingularMatrix& e) {
        log << "singular system: " << e.what() << '\n';
        return singular_error;
    } catch (const MeshError& e) {
        log << "mesh error: " << e.what() << '\n';
        return mesh_error;
    } catch (const ConfigError& e) {
        log << "configuration error: " << e.what() << '\n';
        return config_error;
    } catch (const std::invalid_argument& e) {
        log << "configuration error: " << e.what() << '\n';
        return config_error;
    } catch (const std::exception& e) {
        log << "internal error: " << e.what() << '\n';
        return internal_error;
    }
}

/// Parses argv and runs. Usage errors exit with config_error; --help with 0.
inline int main_entry(int argc, const char* const* argv, std::ostream& out = std::cout,
                      std::ostream& log = std::cerr)
{
    RunConfig cfg;
    CLI::App app{"hp weak Galerkin solver for -eps1 u'' + eps2 b u' + r u = f on (0, 1), u(0) = u(1) = 0",
                 "wg-hp"};
    app.set_config("--config", "", "key=value configuration file (flags override it)");
    app.require_subcommand(1);
    app.add_option("--eps1", cfg.eps1, "diffusion parameter in (0, 1]");
    app.add_option("--eps2", cfg.eps2, "convection parameter in (0, 1]");
    app.add_option("--eps-grid", cfg.eps_grid, "convergence grid \"e1:e2,e1:e2,...\"");
    app.add_option("--p", cfg.p, "polynomial degree");
    app.add_option("--p-range", cfg.p_range, "degree range a..b");
    app.add_option("--kappa", cfg.kappa, "mesh parameter kappa > 0")->capture_default_str();
    app.add_option("--b", cfg.b, "convection coefficient b(x)")->capture_default_str();
    app.add_option("--r", cfg.r, "reaction coefficient r(x)")->capture_default_str();
    app.add_option("--f", cfg.f, "right-hand side f(x)")->capture_default_str();
    app.add_option("--manufactured-u", cfg.manufactured_u, "exact solution; f is derived from it");
    app.add_option("--out", cfg.out, "CSV output path (stdout when omitted)");
    app.add_option("--svg", cfg.svg, "SVG plot path");
    app.add_option("--ref-mesh", cfg.ref_mesh, "reference mesh for error estimates")
        ->check(CLI::IsMember({"same", "rebuilt"}))
        ->capture_default_str();
    app.add_flag("--quad-double", cfg.quad_double, "double the number of quadrature points");
    app.add_option("--seed", cfg.seed, "seed of the random property suites")->capture_default_str();
    app.add_option("--penalty-scale", cfg.penalty_scale, "multiplier of the penalties eps1 p^2 / h")
        ->capture_default_str();
    app.add_flag("--record-timing", cfg.record_timing, "store wall time in the wall_ms column");
    app.add_option("--threads", cfg.threads, "worker threads for convergence (0: all cores)");

    auto* solve = app.add_subcommand("solve", "solve one problem and write the solution samples");
    auto* conv = app.add_subcommand("convergence", "p-convergence sweep over an (eps1, eps2) grid");
    auto* check = app.add_subcommand("check", "run the property suites");
    for (auto* sub : {solve, conv, check}) {
        sub->fallthrough();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, log);
        return code == 0 ? ok : config_error;
    }
    cfg.command = solve->parsed() ? Command::solve : conv->parsed() ? Command::convergence : Command::check;
    return run(cfg, out, log);
}

} // namespace wghp::cli
