// Command-line driver: every subcommand runs one batch experiment from a
// flat key=value config and leaves its artifacts, a checksum manifest, and a
// runinfo file in the output directory.  Exit codes: 0 success, 2 invalid
// input or configuration, 3 an iterative solver hit its cap.

#include <algorithm>
#include <array>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <random>
#include <string>
#include <vector>

#include "nembrane/effective_model.hpp"
#include "nembrane/energy3d.hpp"
#include "nembrane/errors.hpp"
#include "nembrane/experiment.hpp"
#include "nembrane/membrane_fem.hpp"
#include "nembrane/microstructure.hpp"
#include "nembrane/qtensor.hpp"

using namespace nembrane;

namespace {

struct CliOptions {
    std::string command;
    std::string config_path;
    std::string out_dir = "out";
    std::uint64_t seed = 42;
    int threads = 4;
    bool list = false;
    bool help = false;
};

const char* kUsage =
    "usage: nembrane <subcommand> [--config <path>] [--out <dir>] [--seed <u64>]\n"
    "                [--threads <n>]\n"
    "       nembrane --list\n"
    "\n"
    "Runs one experiment per invocation and writes CSV/SVG/text artifacts plus\n"
    "manifest.txt (FNV-1a checksums) and runinfo.txt into the output directory.\n"
    "Configs are flat key = value lines with dotted keys; '#' starts a comment.\n";

void print_list() {
    std::printf(
        "project          random symmetric tensors through both projections; "
        "comparison CSV\n"
        "microstructure   laminate basis, tiling compatibility report, convergence "
        "table, SVG cross-section\n"
        "solve-membrane   minimize the membrane energy on a structured mesh; "
        "solution CSV\n"
        "gamma-sweep      recovery-energy gap to the limit energy along the "
        "thickness ladder; CSV + SVG\n"
        "energy3d-direct  full two-layer quadrature of one recovery state against "
        "the accounting bracket\n");
}

std::uint64_t parse_u64(const std::string& text, const char* flag) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(text.c_str(), &end, 10);
    if (end == text.c_str() || *end != '\0') {
        throw ParseError(std::string(flag) + ": not an unsigned integer: " + text);
    }
    return static_cast<std::uint64_t>(v);
}

CliOptions parse_args(int argc, char** argv) {
    CliOptions opt;
    auto value_of = [&](int& i, const char* flag) -> std::string {
        if (i + 1 >= argc) throw ParseError(std::string(flag) + " needs a value");
        return argv[++i];
    };
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--list") {
            opt.list = true;
        } else if (arg == "--help" || arg == "-h") {
            opt.help = true;
        } else if (arg == "--config") {
            opt.config_path = value_of(i, "--config");
        } else if (arg == "--out") {
            opt.out_dir = value_of(i, "--out");
        } else if (arg == "--seed") {
            opt.seed = parse_u64(value_of(i, "--seed"), "--seed");
        } else if (arg == "--threads") {
            const std::uint64_t t = parse_u64(value_of(i, "--threads"), "--threads");
            if (t < 1 || t > 1024) throw ParseError("--threads: must be in [1,1024]");
            opt.threads = static_cast<int>(t);
        } else if (!arg.empty() && arg[0] == '-') {
            throw ParseError("unknown flag: " + arg);
        } else if (opt.command.empty()) {
            opt.command = arg;
        } else {
            throw ParseError("unexpected argument: " + arg);
        }
    }
    return opt;
}

RunConfig load_config(const CliOptions& opt) {
    if (opt.config_path.empty()) return RunConfig{};
    return RunConfig::parse_file(opt.config_path);
}

MaterialParams material_from(const RunConfig& cfg) {
    return MaterialParams(cfg.get_double("material.lambda", 1.0),
                          cfg.get_double("material.mu", 1.0));
}

std::vector<double> split_doubles(const std::string& text, const std::string& key) {
    std::vector<double> vals;
    std::size_t begin = 0;
    while (begin <= text.size()) {
        std::size_t end = text.find(',', begin);
        if (end == std::string::npos) end = text.size();
        const std::string item = text.substr(begin, end - begin);
        char* stop = nullptr;
        const double v = std::strtod(item.c_str(), &stop);
        if (stop == item.c_str() || *stop != '\0') {
            throw ParseError("config key \"" + key + "\": not a number list: \"" + text +
                             "\"");
        }
        vals.push_back(v);
        begin = end + 1;
    }
    if (vals.empty()) throw ParseError("config key \"" + key + "\": empty list");
    return vals;
}

std::vector<int> split_ints(const std::string& text, const std::string& key) {
    std::vector<int> vals;
    for (const double v : split_doubles(text, key)) {
        const int n = static_cast<int>(std::lround(v));
        if (std::abs(v - n) > 1e-12) {
            throw ParseError("config key \"" + key + "\": not an integer list: \"" + text +
                             "\"");
        }
        vals.push_back(n);
    }
    return vals;
}

double portable_uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

std::array<double, 2> grain_lo_from(const RunConfig& cfg) {
    return {cfg.get_double("grain.lo1", 0.0), cfg.get_double("grain.lo2", 0.0)};
}

std::array<double, 2> grain_hi_from(const RunConfig& cfg) {
    return {cfg.get_double("grain.hi1", 2.0), cfg.get_double("grain.hi2", 2.0)};
}

std::array<double, 2> ubar_from(const RunConfig& cfg) {
    return {cfg.get_double("ubar.u1", 1.0), cfg.get_double("ubar.u2", 0.0)};
}

void write_text(const std::string& path, const std::string& content) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw ValidationError("cannot write " + path);
    std::fwrite(content.data(), 1, content.size(), f);
    std::fclose(f);
}

int cmd_project(const CliOptions& opt, const RunConfig& cfg) {
    cfg.reject_unknown(
        {"material.lambda", "material.mu", "project.count", "project.scale"});
    const MaterialParams mat = material_from(cfg);
    const int count = cfg.get_int("project.count", 50);
    const double scale = cfg.get_double("project.scale", 1.0);
    if (count < 1) throw ValidationError("project.count must be at least 1");
    if (!(scale > 0.0)) throw ValidationError("project.scale must be positive");

    RunContext ctx(opt.out_dir, "project", opt.seed, opt.threads);
    CsvWriter csv(ctx.path("projection.csv"),
                  {"index", "a11", "a22", "a33", "a12", "a13", "a23", "dist2_weighted",
                   "weighted_at_euclidean", "dist2_euclidean", "lambda_min", "lambda_max"});

    std::mt19937_64 rng(opt.seed);
    double worst_order = 0.0;   // weighted distance above the euclidean point
    double worst_trace = 0.0;
    double worst_infeasible = 0.0;
    for (int i = 0; i < count; ++i) {
        SymTensor3 A;
        A.a11 = portable_uniform(rng, -scale, scale);
        A.a22 = portable_uniform(rng, -scale, scale);
        A.a33 = portable_uniform(rng, -scale, scale);
        A.a12 = portable_uniform(rng, -scale, scale);
        A.a13 = portable_uniform(rng, -scale, scale);
        A.a23 = portable_uniform(rng, -scale, scale);

        const QTensor qw = project_QB_weighted(A, mat);
        const double dw = weighted_norm_sq(A - qw.t, mat);
        const QTensor qe = project_QB_euclidean(A);
        const double dw_at_e = weighted_norm_sq(A - qe.t, mat);
        const double de = (A - qe.t).frobenius_sq();
        const EigenDecomp ed = eig_sym3(qw.t);

        csv.row({static_cast<double>(i), A.a11, A.a22, A.a33, A.a12, A.a13, A.a23, dw,
                 dw_at_e, de, ed.eigenvalues[0], ed.eigenvalues[2]});

        worst_order = std::max(worst_order, dw - dw_at_e);
        worst_trace = std::max(worst_trace, std::abs(qw.t.trace()));
        worst_infeasible = std::max(worst_infeasible,
                                    std::max(-1.0 / 3.0 - ed.eigenvalues[0],
                                             ed.eigenvalues[2] - 2.0 / 3.0));
    }
    csv.close();

    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "samples %d\n"
                  "max dist2_weighted excess over the euclidean point %.3e\n"
                  "max |trace| of the weighted projection %.3e\n"
                  "max eigenvalue-bound violation %.3e\n",
                  count, worst_order, worst_trace, worst_infeasible);
    write_text(ctx.path("summary.txt"), buf);
    ctx.finish();
    return 0;
}

int cmd_microstructure(const CliOptions& opt, const RunConfig& cfg) {
    cfg.reject_unknown({"target.q11", "target.q22", "target.q33", "target.q12",
                        "target.q13", "target.q23", "tiling.n_list", "tiling.extent",
                        "convergence.n_list", "svg.n"});
    SymTensor3 t;
    t.a11 = cfg.get_double("target.q11", 0.0);
    t.a22 = cfg.get_double("target.q22", 0.0);
    t.a33 = cfg.get_double("target.q33", 0.0);
    t.a12 = cfg.get_double("target.q12", 0.0);
    t.a13 = cfg.get_double("target.q13", 0.0);
    t.a23 = cfg.get_double("target.q23", 0.0);
    const QTensor Q(t);
    if (!is_biaxial(Q, 0.0)) {
        throw NotBiaxial("microstructure: target eigenvalues leave [-1/3, 2/3]");
    }

    const std::vector<int> ns =
        split_ints(cfg.get_string("tiling.n_list", "1,4,16"), "tiling.n_list");
    const std::vector<int> conv_ns =
        split_ints(cfg.get_string("convergence.n_list", "4,8,16,32"),
                   "convergence.n_list");
    const double extent = cfg.get_double("tiling.extent", 2.0);
    if (!(extent > 0.0)) throw ValidationError("tiling.extent must be positive");
    const int svg_n = cfg.get_int("svg.n", 4);

    const auto [target, frame] = diagonalize_target(Q);
    const LaminateBasis basis = build_laminate_basis(target);

    RunContext ctx(opt.out_dir, "microstructure", opt.seed, opt.threads);

    {
        CsvWriter csv(ctx.path("basis.csv"),
                      {"type", "g11", "g12", "g13", "g21", "g22", "g23", "g31", "g32",
                       "g33", "eig1", "eig2", "eig3"});
        for (int j = 0; j < 4; ++j) {
            const Mat3& G = basis.G[static_cast<std::size_t>(j)];
            const EigenDecomp ed = eig_sym3(G.sym());
            csv.row({static_cast<double>(j + 1), G(0, 0), G(0, 1), G(0, 2), G(1, 0),
                     G(1, 1), G(1, 2), G(2, 0), G(2, 1), G(2, 2), ed.eigenvalues[0],
                     ed.eigenvalues[1], ed.eigenvalues[2]});
        }
        csv.close();
    }

    Box3 box;
    box.lo = {-extent / 2.0, -extent / 2.0, -extent / 2.0};
    box.hi = {extent / 2.0, extent / 2.0, extent / 2.0};

    std::string report;
    {
        char line[256];
        std::snprintf(line, sizeof(line), "target spectrum %.12g %.12g %.12g\n", target.a,
                      target.b, target.c);
        report += line;
        if (basis.degenerate) {
            report += "branch slabs (lowest eigenvalue at the wall)\n";
        } else {
            std::snprintf(line, sizeof(line), "branch slanted, period %.12g\n",
                          basis.period);
            report += line;
        }
        for (const int n : ns) {
            const Tiling tiling = build_tiling(basis, n, box);
            const HadamardReport had = check_hadamard(tiling);
            const PWAffineMap fn = build_fn(tiling);
            std::snprintf(line, sizeof(line),
                          "n %d: cells %zu, interfaces %d, max_sigma2 %.3e, "
                          "direction_residual %.3e, loop_residual %.3e, volume_defect "
                          "%.3e\n",
                          n, tiling.cells.size(), had.interfaces, had.max_sigma2,
                          had.max_direction_residual, fn.max_loop_residual,
                          std::abs(tiling.box_volume() - tiling.cells_volume()));
            report += line;
        }
    }

    {
        const WeakConvergenceReport conv = weak_convergence_report(target, conv_ns, box);
        CsvWriter csv(ctx.path("convergence.csv"), {"n", "window_avg_dev", "sup_dev"});
        for (const auto& row : conv.rows) {
            csv.row({static_cast<double>(row.n), row.window_avg_dev, row.sup_dev});
        }
        csv.close();
        char line[128];
        std::snprintf(line, sizeof(line), "window-average slope %.4f\nsup slope %.4f\n",
                      conv.avg_slope, conv.sup_slope);
        report += line;
    }
    write_text(ctx.path("compatibility.txt"), report);

    {
        const Tiling tiling = build_tiling(basis, svg_n, box);
        const double size = 480.0;
        const double margin = 20.0;
        const double sx = (size - 2.0 * margin) / (box.hi[0] - box.lo[0]);
        const double sz = (size - 2.0 * margin) / (box.hi[2] - box.lo[2]);
        SvgCanvas svg(size, size);
        svg.rect(0.0, 0.0, size, size, "#ffffff");
        const std::array<std::string, 4> fill = {"#4878a8", "#d09048", "#68a868",
                                                 "#b05868"};
        for (const TilingCell& cell : tiling.cells) {
            if (!(cell.y0 <= 0.0 && 0.0 < cell.y1)) continue;  // x2 = 0 slice
            std::vector<std::array<double, 2>> pts;
            pts.reserve(cell.poly.size());
            for (const auto& p : cell.poly) {
                pts.push_back({margin + (p[0] - box.lo[0]) * sx,
                               size - margin - (p[1] - box.lo[2]) * sz});
            }
            svg.polygon(pts, fill[static_cast<std::size_t>(cell.type - 1)], "#202020",
                        0.4);
        }
        svg.text(margin, 14.0, "cell types, section x2 = 0", 11.0);
        svg.write(ctx.path("tiling.svg"));
    }

    ctx.finish();
    return 0;
}

int cmd_solve_membrane(const CliOptions& opt, const RunConfig& cfg) {
    cfg.reject_unknown({"material.lambda", "material.mu", "mesh.lx", "mesh.ly", "mesh.nx",
                        "mesh.ny", "foundation.enabled", "clamp.left", "clamp.right",
                        "clamp.bottom", "clamp.top", "load.f1", "load.f2", "solver.tol",
                        "solver.max_iter"});
    MembraneProblem problem;
    problem.material = material_from(cfg);
    problem.mesh = make_membrane_mesh(
        cfg.get_double("mesh.lx", 1.0), cfg.get_double("mesh.ly", 1.0),
        cfg.get_int("mesh.nx", 16), cfg.get_int("mesh.ny", 16));
    problem.with_foundation = cfg.get_int("foundation.enabled", 1) != 0;
    problem.clamped = {cfg.get_int("clamp.left", 1) != 0,
                       cfg.get_int("clamp.right", 1) != 0,
                       cfg.get_int("clamp.bottom", 1) != 0,
                       cfg.get_int("clamp.top", 1) != 0};
    const double f1 = cfg.get_double("load.f1", 0.5);
    const double f2 = cfg.get_double("load.f2", 0.0);
    if (f1 != 0.0 || f2 != 0.0) {
        problem.load = [f1, f2](double, double) { return std::array<double, 2>{f1, f2}; };
    }
    const double tol = cfg.get_double("solver.tol", 1e-7);
    const int max_iter = cfg.get_int("solver.max_iter", 200000);

    RunContext ctx(opt.out_dir, "solve-membrane", opt.seed, opt.threads);
    const MembraneSolveReport sol = solve_membrane(problem, tol, max_iter);
    export_solution(problem, sol.dof, ctx.path("solution.csv"));

    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "nodes %d\n"
                  "energy %.12g\n"
                  "grad_norm %.3e\n"
                  "iterations %d\n"
                  "restarts %d\n",
                  problem.mesh.node_count(), sol.energy, sol.grad_norm, sol.iterations,
                  sol.restarts);
    write_text(ctx.path("report.txt"), buf);
    ctx.finish();
    return 0;
}

void write_gap_plot(const std::string& path, const std::vector<GammaSweepRow>& rows) {
    const double w = 420.0;
    const double h = 320.0;
    const double m = 40.0;
    double lx0 = 1e300, lx1 = -1e300, ly0 = 1e300, ly1 = -1e300;
    for (const auto& r : rows) {
        lx0 = std::min(lx0, std::log10(r.eps));
        lx1 = std::max(lx1, std::log10(r.eps));
        ly0 = std::min(ly0, std::log10(std::max(r.gap, 1e-300)));
        ly1 = std::max(ly1, std::log10(std::max(r.bracket, 1e-300)));
    }
    if (!(lx1 > lx0)) lx1 = lx0 + 1.0;
    if (!(ly1 > ly0)) ly1 = ly0 + 1.0;
    const auto px = [&](double lx) { return m + (lx - lx0) / (lx1 - lx0) * (w - 2 * m); };
    const auto py = [&](double ly) {
        return h - m - (ly - ly0) / (ly1 - ly0) * (h - 2 * m);
    };
    SvgCanvas svg(w, h);
    svg.rect(0.0, 0.0, w, h, "#ffffff");
    svg.line(m, h - m, w - m, h - m, "#202020", 1.0);
    svg.line(m, m, m, h - m, "#202020", 1.0);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        svg.line(px(std::log10(rows[i - 1].eps)),
                 py(std::log10(std::max(rows[i - 1].gap, 1e-300))),
                 px(std::log10(rows[i].eps)),
                 py(std::log10(std::max(rows[i].gap, 1e-300))), "#4878a8", 1.6);
        svg.line(px(std::log10(rows[i - 1].eps)),
                 py(std::log10(std::max(rows[i - 1].bracket, 1e-300))),
                 px(std::log10(rows[i].eps)),
                 py(std::log10(std::max(rows[i].bracket, 1e-300))), "#b05868", 1.2);
    }
    svg.text(m, 16.0, "log10 gap (blue) and bracket (red) vs log10 epsilon", 11.0);
    svg.write(path);
}

int cmd_gamma_sweep(const CliOptions& opt, const RunConfig& cfg) {
    cfg.reject_unknown({"material.lambda", "material.mu", "ubar.u1", "ubar.u2",
                        "grain.lo1", "grain.lo2", "grain.hi1", "grain.hi2",
                        "sweep.eps_list"});
    const MaterialParams mat = material_from(cfg);
    const std::vector<double> eps_list =
        split_doubles(cfg.get_string("sweep.eps_list", "0.2,0.1,0.05,0.025"),
                      "sweep.eps_list");

    const GammaSweepReport rep =
        gamma_sweep(ubar_from(cfg), mat, grain_lo_from(cfg), grain_hi_from(cfg), eps_list);

    RunContext ctx(opt.out_dir, "gamma-sweep", opt.seed, opt.threads);
    {
        CsvWriter csv(ctx.path("sweep.csv"),
                      {"epsilon", "bulk", "bracket", "film", "total", "E0", "gap"});
        for (const auto& r : rep.rows) {
            csv.row({r.eps, r.bulk, r.bracket, r.film, r.total, r.e0, r.gap});
        }
        csv.close();
    }
    {
        CsvWriter csv(ctx.path("details.csv"),
                      {"epsilon", "eta", "delta", "rho", "collar", "curvature"});
        for (const auto& r : rep.rows) {
            csv.row({r.eps, r.eta, r.delta, r.rho, r.collar, r.curvature});
        }
        csv.close();
    }
    write_gap_plot(ctx.path("gap.svg"), rep.rows);

    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "foundation density %.12g\n"
                  "bracket constant %.12g\n"
                  "uniaxial residual %.3e\n"
                  "mean residual %.3e\n"
                  "final gap %.12g within bracket %.12g: %s\n",
                  rep.dist_sq, rep.c_meas, rep.uniaxial_residual, rep.mean_residual,
                  rep.rows.back().gap, rep.rows.back().bracket,
                  rep.rows.back().gap <= rep.rows.back().bracket ? "yes" : "no");
    write_text(ctx.path("summary.txt"), buf);
    ctx.finish();
    return 0;
}

int cmd_energy3d_direct(const CliOptions& opt, const RunConfig& cfg) {
    cfg.reject_unknown({"material.lambda", "material.mu", "ubar.u1", "ubar.u2",
                        "grain.lo1", "grain.lo2", "grain.hi1", "grain.hi2", "scaling.eps",
                        "scaling.eta", "scaling.delta_e", "scaling.delta", "scaling.rho",
                        "quad.n_inplane", "quad.n_transverse", "h.width"});
    const MaterialParams mat = material_from(cfg);
    const std::array<double, 2> ubar = ubar_from(cfg);
    std::array<double, 2> lo = grain_lo_from(cfg);
    std::array<double, 2> hi = grain_hi_from(cfg);
    if (!cfg.has("grain.hi1")) hi[0] = 0.2;
    if (!cfg.has("grain.hi2")) hi[1] = 0.2;

    const double eps = cfg.get_double("scaling.eps", 0.2);
    if (!(eps > 0.0 && eps < 1.0)) {
        throw ValidationError("scaling.eps must lie in (0, 1)");
    }
    ScalingParams sc;
    sc.eps = eps;
    sc.eta = cfg.get_double("scaling.eta", eps * eps);
    sc.delta_e = cfg.get_double("scaling.delta_e", eps * eps * eps);
    sc.delta = cfg.get_double("scaling.delta", eps * eps * eps);
    sc.rho = cfg.get_double("scaling.rho", std::min(std::sqrt(eps), 0.04));
    sc.validate();

    const int n_inplane = cfg.get_int("quad.n_inplane", 200);
    const int n_transverse = cfg.get_int("quad.n_transverse", 200);

    const NematicRecovery nem = build_recovery_nematic(ubar, mat, sc, lo, hi);
    const HApproximant h = build_h_approximant(lo, hi, nem.qbar.t.a33, mat, sc.eps,
                                               cfg.get_double("h.width", 0.05));
    const Field3D film = build_recovery_film(ubar, h, sc.eps);
    const Field3D bonding =
        superpose(build_recovery_bonding(ubar, h, sc.eps), corrector_field(nem));

    const GrainAccounting acc = grain_accounting(nem, h, ubar);
    const EnergyBreakdown direct =
        energy_I(film, bonding, nem, n_inplane, n_transverse, opt.threads);

    RunContext ctx(opt.out_dir, "energy3d-direct", opt.seed, opt.threads);
    {
        CsvWriter csv(ctx.path("direct.csv"),
                      {"epsilon", "film", "bonding", "curvature", "total", "bulk",
                       "bracket", "gap"});
        csv.row({sc.eps, direct.film, direct.bonding, direct.curvature, direct.total,
                 acc.bulk, acc.bracket, direct.total - acc.bulk});
        csv.close();
    }
    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "direct total %.12g\n"
                  "accounted bulk %.12g\n"
                  "bracket %.12g\n"
                  "direct within bulk +/- bracket: %s\n",
                  direct.total, acc.bulk, acc.bracket,
                  std::abs(direct.total - acc.bulk) <= acc.bracket ? "yes" : "no");
    write_text(ctx.path("summary.txt"), buf);
    ctx.finish();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        const CliOptions opt = parse_args(argc, argv);
        if (opt.help) {
            std::fputs(kUsage, stdout);
            return 0;
        }
        if (opt.list) {
            print_list();
            return 0;
        }
        if (opt.command.empty()) {
            std::fputs(kUsage, stderr);
            return 2;
        }
        const RunConfig cfg = load_config(opt);
        if (opt.command == "project") return cmd_project(opt, cfg);
        if (opt.command == "microstructure") return cmd_microstructure(opt, cfg);
        if (opt.command == "solve-membrane") return cmd_solve_membrane(opt, cfg);
        if (opt.command == "gamma-sweep") return cmd_gamma_sweep(opt, cfg);
        if (opt.command == "energy3d-direct") return cmd_energy3d_direct(opt, cfg);
        throw ParseError("unknown subcommand: " + opt.command +
                         " (run with --list to enumerate)");
    } catch (const NoConvergence& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
