#pragma once

#include <chrono>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "latsum/bench.hpp"
#include "latsum/bundle.hpp"
#include "latsum/canonical.hpp"
#include "latsum/errors.hpp"
#include "latsum/lattice.hpp"
#include "latsum/newton.hpp"
#include "latsum/parallel.hpp"
#include "latsum/qtt.hpp"

namespace latsum {

struct CheckResult {
    std::string label;
    bool pass = false;
    double measured = 0.0;
    double threshold = 0.0;
    std::string detail;
};

struct CsvTable {
    std::string filename;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

struct ReproReport {
    std::string name;
    std::vector<CheckResult> checks;
    std::vector<CsvTable> tables;
    double elapsed_s = 0.0;

    bool all_pass() const {
        for (const CheckResult& c : checks)
            if (!c.pass) return false;
        return true;
    }
};

namespace detail {

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
    }

private:
    std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

inline std::string format_index(Index v) { return std::to_string(v); }

} // namespace detail

// Assembled-vs-direct agreement on an 8 x 8 x 2 box of unit charges, n = 64
// per cell: the two sums are algebraic regroupings of the same windowed
// kernel columns, so their densified grids must agree to near machine
// accuracy. Compared slab by slab without materializing either full grid.
inline ReproReport run_fig5() {
    detail::Stopwatch watch;
    ReproReport report;
    report.name = "fig5";

    LatticeSpec spec;
    spec.L = {8, 8, 2};
    spec.unit = GridSpec(2.0, 64);
    spec.charges = {Charge{{0.0, 0.0, 0.0}, 1.0}};
    const double eps = 1e-6;
    const QuadratureRule rule = calibrate_for_lattice(spec, eps);
    const CanonicalTensor3 master = build_lattice_master(spec, rule);
    const SumResult assembled = assembled_box_sum(spec, master);
    const SumResult direct = direct_sum(spec, master);
    const StreamDiff diff = max_norm_diff_canonical(assembled.tensor, direct.tensor);
    const double rel = diff.max_diff / diff.max_abs_b;

    CsvTable table;
    table.filename = "fig5.csv";
    table.header = {"L1",        "L2",          "L3",      "n",       "eps",
                    "rank_asm",  "rank_direct", "max_diff_au", "max_abs_au", "rel_diff"};
    table.rows.push_back({"8", "8", "2", "64", format_double(eps),
                          detail::format_index(assembled.rank), detail::format_index(direct.rank),
                          format_double(diff.max_diff), format_double(diff.max_abs_b),
                          format_double(rel)});
    report.tables.push_back(std::move(table));
    report.checks.push_back({"assembled-vs-direct max relative diff", rel <= 1e-12, rel, 1e-12,
                             "8x8x2 lattice, n=64, eps=1e-6"});
    report.elapsed_s = watch.seconds();
    report.checks.push_back({"runtime budget (s)", report.elapsed_s < 60.0, report.elapsed_s, 60.0,
                             "single-threaded slab comparison included"});
    return report;
}

// Kernel rank growth under grid refinement: at fixed accuracy the calibrated
// rank gains at most an additive constant per grid doubling.
inline ReproReport run_table1() {
    detail::Stopwatch watch;
    ReproReport report;
    report.name = "table1";
    const double eps = 1e-7;
    const double b = 16.0;

    CsvTable table;
    table.filename = "table1.csv";
    table.header = {"n", "M", "C0", "rank", "probe_rel_err"};
    std::vector<Index> ranks;
    std::vector<Index> nlist{512, 1024, 2048, 4096, 8192};
    for (Index n : nlist) {
        const GridSpec grid(b, n);
        const KernelTolerance tol = default_tolerance(grid, eps);
        const QuadratureRule rule = calibrate_quadrature(grid, tol);
        const double err =
            measure_probe_error(build_newton_tensor(grid, rule), kernel_probe_set(grid, tol));
        ranks.push_back(rule.node_count());
        table.rows.push_back({detail::format_index(n), std::to_string(rule.M),
                              format_double(rule.C0), detail::format_index(rule.node_count()),
                              format_double(err)});
    }
    report.tables.push_back(std::move(table));
    for (std::size_t i = 0; i + 1 < ranks.size(); ++i) {
        const double incr = static_cast<double>(ranks[i + 1] - ranks[i]);
        report.checks.push_back({"rank increment at n=" + std::to_string(nlist[i]), incr <= 4.0,
                                 incr, 4.0,
                                 "R(" + std::to_string(2 * nlist[i]) + ") - R(" +
                                     std::to_string(nlist[i]) + ")"});
    }
    report.elapsed_s = watch.seconds();
    report.checks.push_back({"runtime budget (s)", report.elapsed_s < 60.0, report.elapsed_s, 60.0,
                             "five calibrations, eps=1e-7"});
    return report;
}

// Wall-time scaling: the assembled sum does 1D work per axis and scales
// near L^2 on cubic lattices; the direct sum materializes L^3 * R columns of
// length L*n and grows strictly faster.
inline ReproReport run_table2() {
    detail::Stopwatch watch;
    ReproReport report;
    report.name = "table2";
    const int prev_threads = max_threads();
    set_max_threads(1);

    try {
        const GridSpec unit(2.0, 64);
        const double eps = 1e-6;
        const BenchResult assembled = bench_scaling(BenchOp::assembled, {8, 16, 32}, unit, eps);
        const BenchResult direct = bench_scaling(BenchOp::direct, {2, 4, 8}, unit, eps);

        CsvTable table;
        table.filename = "table2.csv";
        table.header = {"op", "L", "time_ms", "rank", "mem_bytes"};
        for (const BenchResult* res : {&assembled, &direct})
            for (const BenchRow& row : res->rows)
                table.rows.push_back({bench_op_name(res->op), detail::format_index(row.L),
                                      format_double(row.time_ms), detail::format_index(row.rank),
                                      std::to_string(row.mem_bytes)});
        report.tables.push_back(std::move(table));

        CsvTable slopes;
        slopes.filename = "table2_slopes.csv";
        slopes.header = {"op", "L_range", "slope"};
        slopes.rows.push_back({"assembled", "8..32", format_double(assembled.slope)});
        slopes.rows.push_back({"direct", "2..8", format_double(direct.slope)});
        report.tables.push_back(std::move(slopes));

        report.checks.push_back({"assembled slope in [1.6, 2.4]",
                                 assembled.slope >= 1.6 && assembled.slope <= 2.4, assembled.slope,
                                 2.4, "L in {8,16,32}, n=64, threads=1"});
        report.checks.push_back({"direct slope > assembled slope", direct.slope > assembled.slope,
                                 direct.slope, assembled.slope, "L in {2,4,8}, n=64, threads=1"});
    } catch (...) {
        set_max_threads(prev_threads);
        throw;
    }
    set_max_threads(prev_threads);
    report.elapsed_s = watch.seconds();
    report.checks.push_back(
        {"runtime budget (s)", report.elapsed_s < 300.0, report.elapsed_s, 300.0, "median of 3"});
    return report;
}

// Conditional growth of the box-sum center value: ~L^2 for cubes, ~L for
// planes, ~log L for lines of unit charges.
inline ReproReport run_fig7() {
    detail::Stopwatch watch;
    ReproReport report;
    report.name = "fig7";
    const GridSpec unit(2.0, 32);
    const double eps = 1e-8;

    CsvTable table;
    table.filename = "fig7.csv";
    table.header = {"kind", "L", "rank", "p_center_au"};
    auto record = [&](const char* kind, const std::vector<SeriesPoint>& pts) {
        for (const SeriesPoint& pt : pts)
            table.rows.push_back({kind, detail::format_index(pt.L), detail::format_index(pt.rank),
                                  format_double(pt.p_center)});
    };

    const std::vector<SeriesPoint> cube =
        center_value_series(SeriesKind::cube, {2, 4, 8, 16}, unit, eps);
    const std::vector<SeriesPoint> plane =
        center_value_series(SeriesKind::plane, {2, 4, 8, 16}, unit, eps);
    const std::vector<SeriesPoint> line =
        center_value_series(SeriesKind::line, {8, 16, 32}, unit, eps);
    record("cube", cube);
    record("plane", plane);
    record("line", line);
    report.tables.push_back(std::move(table));

    auto fit_exponent = [](const std::vector<SeriesPoint>& pts) {
        std::vector<double> lx, ly;
        for (const SeriesPoint& pt : pts) {
            lx.push_back(std::log(static_cast<double>(pt.L)));
            ly.push_back(std::log(pt.p_center));
        }
        return fit_slope(lx, ly);
    };
    const double cube_exp = fit_exponent(cube);
    const double plane_exp = fit_exponent(plane);
    const double line_ratio = (line[2].p_center - line[1].p_center) /
                              (line[1].p_center - line[0].p_center);
    report.checks.push_back({"cube growth exponent in [1.6, 2.2]",
                             cube_exp >= 1.6 && cube_exp <= 2.2, cube_exp, 2.2, "L in {2,4,8,16}"});
    report.checks.push_back({"plane growth exponent in [0.8, 1.2]",
                             plane_exp >= 0.8 && plane_exp <= 1.2, plane_exp, 1.2,
                             "L in {2,4,8,16}"});
    report.checks.push_back({"line increment ratio in [0.4, 1.1]",
                             line_ratio >= 0.4 && line_ratio <= 1.1, line_ratio, 1.1,
                             "(p32-p16)/(p16-p8), log growth has ratio near 1"});
    report.elapsed_s = watch.seconds();
    report.checks.push_back(
        {"runtime budget (s)", report.elapsed_s < 120.0, report.elapsed_s, 120.0, ""});
    return report;
}

// Richardson extrapolation stabilizes the divergent center-value series:
// consecutive extrapolated values approach each other faster than the raw
// ones for the linear (plane) and quadratic (cube) growth laws.
inline ReproReport run_fig9() {
    detail::Stopwatch watch;
    ReproReport report;
    report.name = "fig9";
    const GridSpec unit(2.0, 32);
    const double eps = 1e-8;
    const std::vector<Index> L_list{4, 8, 16, 32, 64};

    CsvTable table;
    table.filename = "fig9.csv";
    table.header = {"kind", "L", "p_center_au", "p_hat_au"};

    auto study = [&](SeriesKind kind, const char* kind_name, RichardsonOrder order) {
        const std::vector<SeriesPoint> pts = center_value_series(kind, L_list, unit, eps);
        std::vector<double> p_hat(pts.size() - 1);
        for (std::size_t i = 0; i + 1 < pts.size(); ++i)
            p_hat[i] = richardson_extrapolate(pts[i].p_center, pts[i + 1].p_center, order);
        for (std::size_t i = 0; i < pts.size(); ++i)
            table.rows.push_back({kind_name, detail::format_index(pts[i].L),
                                  format_double(pts[i].p_center),
                                  i + 1 < pts.size() ? format_double(p_hat[i]) : ""});
        for (std::size_t i = 0; i + 2 < pts.size(); ++i) {
            const double raw = std::abs(pts[i + 1].p_center - pts[i].p_center);
            const double ext = std::abs(p_hat[i + 1] - p_hat[i]);
            report.checks.push_back({std::string(kind_name) + " |phat_2L-phat_L| < |p_2L-p_L| at L=" +
                                         std::to_string(L_list[i]),
                                     ext < raw, ext, raw, "extrapolated increments shrink"});
        }
    };
    study(SeriesKind::plane, "plane", RichardsonOrder::linear);
    study(SeriesKind::cube, "cube", RichardsonOrder::quadratic);
    report.tables.push_back(std::move(table));
    report.elapsed_s = watch.seconds();
    report.checks.push_back(
        {"runtime budget (s)", report.elapsed_s < 120.0, report.elapsed_s, 120.0, ""});
    return report;
}

// Quantized ranks of assembled vectors grow logarithmically in both the
// lattice count L (fixed total grid) and the grid size N (fixed L).
inline ReproReport run_fig11() {
    detail::Stopwatch watch;
    ReproReport report;
    report.name = "fig11";
    const double eps_kernel = 1e-6;
    const double eps_qtt = 1e-8;

    CsvTable table;
    table.filename = "fig11.csv";
    table.header = {"study", "L", "n", "N", "rank_kernel", "avg_max_qtt_rank"};

    auto measure = [&](Index L, Index N_total) {
        LatticeSpec spec;
        spec.L = {L, L, L};
        spec.unit = GridSpec(1.0, N_total / L);
        spec.charges = {Charge{{0.0, 0.0, 0.0}, 1.0}};
        const QuadratureRule rule = calibrate_for_lattice(spec, eps_kernel);
        const CanonicalTensor3 master = build_lattice_master(spec, rule);
        const AssembledQttResult res = assembled_qtt_sum(spec, master, eps_qtt, &rule);
        return std::pair<double, Index>(res.avg_max_rank, rule.node_count());
    };

    auto run_study = [&](const char* study, const std::vector<std::pair<Index, Index>>& configs) {
        std::vector<double> avg;
        for (const auto& [L, N_total] : configs) {
            const auto [rank, R] = measure(L, N_total);
            avg.push_back(rank);
            table.rows.push_back({study, detail::format_index(L),
                                  detail::format_index(N_total / L),
                                  detail::format_index(N_total), detail::format_index(R),
                                  format_double(rank)});
        }
        for (std::size_t i = 0; i + 1 < avg.size(); ++i) {
            const double incr = avg[i + 1] - avg[i];
            report.checks.push_back({std::string(study) + " avg max-rank increment #" +
                                         std::to_string(i + 1) + " <= 3",
                                     incr <= 3.0, incr, 3.0, "doubling step"});
        }
    };
    run_study("vary_L_fixed_N", {{4, 16384}, {8, 16384}, {16, 16384}, {32, 16384}});
    run_study("vary_N_fixed_L", {{8, 4096}, {8, 8192}, {8, 16384}, {8, 32768}});
    report.tables.push_back(std::move(table));
    report.elapsed_s = watch.seconds();
    report.checks.push_back(
        {"runtime budget (s)", report.elapsed_s < 300.0, report.elapsed_s, 300.0, ""});
    return report;
}

inline ReproReport repro_suite(const std::string& name) {
    if (name == "fig5") return run_fig5();
    if (name == "table1") return run_table1();
    if (name == "table2") return run_table2();
    if (name == "fig7") return run_fig7();
    if (name == "fig9") return run_fig9();
    if (name == "fig11") return run_fig11();
    throw validation_error("repro: unknown suite '" + name +
                           "' (expected table1, table2, fig5, fig7, fig9 or fig11)");
}

inline void write_csv_table(const std::string& dir, const CsvTable& table) {
    const std::string path = dir + "/" + table.filename;
    std::ofstream out(path);
    if (!out) throw validation_error("csv: cannot open '" + path + "' for writing");
    for (std::size_t i = 0; i < table.header.size(); ++i)
        out << (i ? "," : "") << table.header[i];
    out << "\n";
    for (const std::vector<std::string>& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
        out << "\n";
    }
    if (!out) throw validation_error("csv: write to '" + path + "' failed");
}

} // namespace latsum
