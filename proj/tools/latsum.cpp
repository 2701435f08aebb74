// latsum: lattice summation of Newton-kernel potentials in low-rank form.
// Subcommands cover kernel construction, box/periodic lattice sums, growth
// series, QTT rank studies, basis projection, benchmarking and the packaged
// reproduction suites. Exit codes: 0 success, 2 validation error, 3 check
// failure, 4 resource guard.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "latsum/latsum.hpp"

namespace {

using latsum::Index;
using latsum::Vector;
using nlohmann::json;

constexpr int exit_ok = 0;
constexpr int exit_validation = 2;
constexpr int exit_check_failed = 3;
constexpr int exit_resource_guard = 4;

// Every run serializes its resolved configuration next to its primary
// output, so artifacts are reproducible from the file alone.
void write_run_config(const std::string& anchor_path, const json& config) {
    const std::string path = anchor_path + ".run.json";
    std::ofstream out(path);
    if (!out) throw latsum::validation_error("config: cannot open '" + path + "' for writing");
    out << config.dump(2) << "\n";
    if (!out) throw latsum::validation_error("config: write to '" + path + "' failed");
}

json base_config(const std::string& command, int threads_flag, long seed) {
    json cfg;
    cfg["command"] = command;
    cfg["threads"] = latsum::max_threads();
    cfg["threads_flag"] = threads_flag;
    cfg["seed"] = seed;
    return cfg;
}

std::array<Index, 3> parse_lattice_counts(const std::vector<Index>& L) {
    if (L.size() == 1) return {L[0], L[0], L[0]};
    if (L.size() == 3) return {L[0], L[1], L[2]};
    throw latsum::validation_error("--L expects one count or three comma-separated counts");
}

std::string lattice_to_string(const std::array<Index, 3>& L) {
    return std::to_string(L[0]) + "x" + std::to_string(L[1]) + "x" + std::to_string(L[2]);
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
    latsum::CsvTable table;
    table.filename = std::filesystem::path(path).filename().string();
    table.header = header;
    table.rows = rows;
    const std::string dir = std::filesystem::path(path).parent_path().string();
    latsum::write_csv_table(dir.empty() ? std::string(".") : dir, table);
}

latsum::LatticeSpec make_lattice(const std::vector<Index>& L, Index n, double b,
                                 const std::string& charges_path) {
    latsum::LatticeSpec spec;
    spec.L = parse_lattice_counts(L);
    spec.unit = latsum::GridSpec(b, n);
    if (charges_path.empty())
        spec.charges = {latsum::Charge{{0.0, 0.0, 0.0}, 1.0}};
    else
        spec.charges = latsum::read_charges_csv(charges_path);
    spec.validate();
    return spec;
}

std::array<double, 3> grid_origin(const latsum::Dims3& dims, double h) {
    return {latsum::GridSpec::midpoint(0, dims[0], h), latsum::GridSpec::midpoint(0, dims[1], h),
            latsum::GridSpec::midpoint(0, dims[2], h)};
}

int run_kernel(Index n, double b, double eps, int M, double C0, bool doubled,
               const std::string& out, const std::string& report, const json& cfg) {
    write_run_config(out, cfg);
    const latsum::GridSpec grid(b, n);
    const latsum::KernelTolerance tol = latsum::default_tolerance(grid, eps);

    latsum::CalibrationTrace trace;
    latsum::QuadratureRule rule;
    if (M > 0) {
        rule = latsum::sinc_quadrature(eps, tol.a_min, tol.a_max, M, C0 > 0.0 ? C0 : 1.0);
    } else {
        rule = latsum::calibrate_quadrature(grid, tol, &trace);
    }

    const Index len = doubled ? 2 * n : n;
    const latsum::CanonicalTensor3 kernel = latsum::build_newton_tensor(grid, rule, doubled);
    const latsum::GridSpec eval_grid(doubled ? 2.0 * b : b, len);
    const double err =
        latsum::measure_probe_error(kernel, latsum::kernel_probe_set(eval_grid, tol));

    latsum::TensorBundle bundle{kernel, grid.h(), grid_origin(kernel.dims(), grid.h())};
    latsum::save_bundle(out, bundle);

    std::cout << "kernel: rank " << rule.node_count() << " (M=" << rule.M << ", C0=" << rule.C0
              << "), grid " << len << "^3, h=" << grid.h() << "\n"
              << "measured relative error " << err << " over [" << tol.a_min << ", " << tol.a_max
              << "] (requested " << eps << ")\n"
              << "calibration candidates tried: " << trace.entries.size() << "\n"
              << "bundle written to " << out << "\n";

    if (!report.empty()) {
        std::vector<std::vector<std::string>> rows;
        for (const auto& e : trace.entries)
            rows.push_back({std::to_string(e.M), latsum::format_double(e.C0),
                            latsum::format_double(e.err)});
        if (rows.empty())
            rows.push_back({std::to_string(rule.M), latsum::format_double(rule.C0),
                            latsum::format_double(err)});
        write_csv(report, {"M", "C0", "probe_rel_err"}, rows);
    }
    return exit_ok;
}

int run_sum(bool periodic, const std::vector<Index>& L, Index n, double b, double eps,
            const std::string& charges_path, const std::string& out, const std::string& report,
            const json& cfg) {
    write_run_config(out, cfg);
    const latsum::LatticeSpec spec = make_lattice(L, n, b, charges_path);
    const latsum::QuadratureRule rule = latsum::calibrate_for_lattice(spec, eps);
    const latsum::CanonicalTensor3 master = latsum::build_lattice_master(spec, rule);
    const latsum::SumResult sum = periodic ? latsum::assembled_periodic_sum(spec, master)
                                           : latsum::assembled_box_sum(spec, master);

    latsum::TensorBundle bundle{sum.tensor, spec.unit.h(),
                                grid_origin(sum.grid_dims, spec.unit.h())};
    latsum::save_bundle(out, bundle);

    const double p_center = latsum::eval_point(sum.tensor, sum.grid_dims[0] / 2,
                                               sum.grid_dims[1] / 2, sum.grid_dims[2] / 2);
    std::cout << (periodic ? "periodic" : "box") << " sum: lattice " << lattice_to_string(spec.L)
              << ", grid " << latsum::dims_to_string(sum.grid_dims) << ", rank " << sum.rank
              << ", kernel rank " << rule.node_count() << "\n"
              << "center value " << p_center << " au, assembly time " << sum.time_ms << " ms\n"
              << "bundle written to " << out << "\n";

    if (!report.empty())
        write_csv(report, {"L", "rank", "time_ms", "p_center_au", "p_hat_au"},
                  {{lattice_to_string(spec.L), std::to_string(sum.rank),
                    latsum::format_double(sum.time_ms), latsum::format_double(p_center), ""}});
    return exit_ok;
}

int run_series(const std::string& kind_name, const std::vector<Index>& L_list, Index n, double b,
               double eps, const std::string& extrapolate, const std::string& report,
               const json& cfg) {
    write_run_config(report, cfg);
    latsum::SeriesKind kind;
    if (kind_name == "line")
        kind = latsum::SeriesKind::line;
    else if (kind_name == "plane")
        kind = latsum::SeriesKind::plane;
    else if (kind_name == "cube")
        kind = latsum::SeriesKind::cube;
    else
        throw latsum::validation_error("--kind must be line, plane or cube");

    bool use_richardson = false;
    latsum::RichardsonOrder order = latsum::RichardsonOrder::linear;
    if (extrapolate == "linear") {
        use_richardson = true;
    } else if (extrapolate == "quadratic") {
        use_richardson = true;
        order = latsum::RichardsonOrder::quadratic;
    } else if (!extrapolate.empty() && extrapolate != "none") {
        throw latsum::validation_error("--extrapolate must be linear, quadratic or none");
    }

    const std::vector<latsum::SeriesPoint> pts =
        latsum::center_value_series(kind, L_list, latsum::GridSpec(b, n), eps);

    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        std::string p_hat;
        if (use_richardson && i + 1 < pts.size() && pts[i + 1].L == 2 * pts[i].L)
            p_hat = latsum::format_double(latsum::richardson_extrapolate(
                pts[i].p_center, pts[i + 1].p_center, order));
        rows.push_back({std::to_string(pts[i].L), std::to_string(pts[i].rank),
                        latsum::format_double(pts[i].time_ms),
                        latsum::format_double(pts[i].p_center), p_hat});
        std::cout << kind_name << " L=" << pts[i].L << ": p_center " << pts[i].p_center << " au"
                  << (p_hat.empty() ? "" : ", extrapolated " + p_hat) << "\n";
    }
    write_csv(report, {"L", "rank", "time_ms", "p_center_au", "p_hat_au"}, rows);
    std::cout << "series written to " << report << "\n";
    return exit_ok;
}

int run_qtt_ranks(const std::string& from, double eps, const std::string& report,
                  const json& cfg) {
    write_run_config(report, cfg);
    const latsum::TensorBundle bundle = latsum::load_bundle(from);
    if (bundle.tensor.rank() < 1)
        throw latsum::validation_error("qtt-ranks: bundle has rank 0, nothing to compress");

    std::vector<std::vector<std::string>> rows;
    double sum_max = 0.0;
    Index count = 0;
    for (int axis = 0; axis < 3; ++axis) {
        const latsum::Matrix& factor = bundle.tensor.factor(axis);
        const Index N = factor.rows();
        Index padded = 2;
        while (padded < N) padded *= 2;
        for (Index q = 0; q < bundle.tensor.rank(); ++q) {
            Vector v = Vector::Zero(padded);
            v.head(N) = factor.col(q);
            const latsum::QTTVector t = latsum::qtt_compress(v, eps);
            const latsum::RankProfile prof = latsum::qtt_rank_profile(t);
            const Vector rec = latsum::qtt_reconstruct(t);
            const double denom = factor.col(q).norm();
            const double err = denom > 0.0 ? (rec.head(N) - factor.col(q)).norm() / denom
                                           : rec.head(N).norm();
            rows.push_back({std::to_string(axis), std::to_string(q),
                            std::to_string(prof.max_rank), latsum::format_double(prof.avg_rank),
                            latsum::format_double(err)});
            sum_max += static_cast<double>(prof.max_rank);
            ++count;
        }
    }
    write_csv(report, {"axis", "q", "max_rank", "avg_rank", "err"}, rows);
    std::cout << "qtt-ranks: " << count << " columns from " << from << ", average max rank "
              << sum_max / static_cast<double>(count) << "\n"
              << "report written to " << report << "\n";
    return exit_ok;
}

int run_qtt_gauss(const std::vector<double>& p_list, const std::vector<double>& eps_list,
                  Index levels, const std::string& report, const json& cfg) {
    write_run_config(report.empty() ? "qtt-gauss" : report, cfg);
    if (levels < 2 || levels > 24)
        throw latsum::validation_error("qtt-gauss: --levels must lie in [2, 24]");
    for (double eps : eps_list)
        if (!(eps > 0.0) || !(eps < 1.0))
            throw latsum::validation_error("qtt-gauss: eps values must lie in (0, 1)");
    const Index N = Index{1} << levels;

    std::vector<std::vector<std::string>> rows;
    for (double p : p_list) {
        if (!(p > 0.0)) throw latsum::validation_error("qtt-gauss: p must be positive");
        std::vector<double> lx, ly;
        for (double eps : eps_list) {
            // Sample the Gaussian over its eps-essential support.
            const double a = std::sqrt(2.0) * p * std::sqrt(std::log(1.0 / eps));
            Vector v(N);
            for (Index i = 0; i < N; ++i) {
                const double x =
                    (static_cast<double>(i) + 0.5) / static_cast<double>(N) * 2.0 * a - a;
                v[i] = std::exp(-x * x / (2.0 * p * p));
            }
            const Index r = latsum::max_unfolding_rank(v, eps);
            rows.push_back({latsum::format_double(p), latsum::format_double(eps),
                            std::to_string(r)});
            lx.push_back(std::log(1.0 / eps));
            ly.push_back(static_cast<double>(r));
        }
        const double slope = lx.size() >= 2 ? latsum::fit_slope(lx, ly) : 0.0;
        std::cout << "p=" << p << ": max rank vs ln(1/eps) slope " << slope << "\n";
    }
    if (!report.empty()) {
        write_csv(report, {"p", "eps", "max_rank"}, rows);
        std::cout << "report written to " << report << "\n";
    }
    return exit_ok;
}

int run_project(const std::string& from, const std::string& basis_path, const std::string& out,
                bool volume, const json& cfg) {
    write_run_config(out, cfg);
    const latsum::TensorBundle bundle = latsum::load_bundle(from);
    const latsum::Dims3 dims = bundle.tensor.dims();
    if (dims[0] != dims[1] || dims[0] != dims[2])
        throw latsum::validation_error("project: bundle grid " + latsum::dims_to_string(dims) +
                                       " is not cubic");
    const Index n = dims[0];
    if (n < 2 || n % 2 != 0)
        throw latsum::validation_error("project: bundle grid size must be even and >= 2");
    if (!(bundle.h > 0.0))
        throw latsum::validation_error("project: bundle has non-positive mesh width");
    const latsum::GridSpec grid(bundle.h * static_cast<double>(n), n);
    for (int l = 0; l < 3; ++l) {
        const double expected = grid.midpoint(0);
        if (std::abs(bundle.origin[static_cast<std::size_t>(l)] - expected) > 1e-9 * grid.b)
            throw latsum::validation_error(
                "project: bundle grid is not centered at the origin; basis sampling assumes "
                "a centered grid");
    }

    const std::vector<latsum::GaussianBasisSpec> specs = latsum::read_basis_csv(basis_path);
    const latsum::Rank1Basis basis = latsum::sample_gaussian_basis(grid, specs);
    const latsum::Matrix V = latsum::potential_matrix(basis, bundle.tensor, volume);

    std::vector<std::string> header;
    for (Index m = 0; m < V.cols(); ++m) header.push_back("v" + std::to_string(m) + "_au");
    std::vector<std::vector<std::string>> rows;
    for (Index k = 0; k < V.rows(); ++k) {
        std::vector<std::string> row;
        for (Index m = 0; m < V.cols(); ++m) row.push_back(latsum::format_double(V(k, m)));
        rows.push_back(std::move(row));
    }
    write_csv(out, header, rows);
    std::cout << "project: " << V.rows() << "x" << V.cols() << " matrix written to " << out
              << (volume ? " (volume element applied)" : " (raw scalar products)") << "\n";
    return exit_ok;
}

int run_bench(const std::string& op_name, const std::vector<Index>& L_list, Index n, double b,
              double eps, double timeout_s, const std::string& report, const json& cfg) {
    write_run_config(report.empty() ? "bench" : report, cfg);
    latsum::BenchOp op;
    if (op_name == "direct")
        op = latsum::BenchOp::direct;
    else if (op_name == "assembled")
        op = latsum::BenchOp::assembled;
    else if (op_name == "periodic")
        op = latsum::BenchOp::periodic;
    else
        throw latsum::validation_error("--op must be direct, assembled or periodic");

    const latsum::BenchResult res =
        latsum::bench_scaling(op, L_list, latsum::GridSpec(b, n), eps, timeout_s);

    std::vector<std::vector<std::string>> rows;
    for (const latsum::BenchRow& row : res.rows) {
        rows.push_back({std::to_string(row.L), latsum::format_double(row.time_ms),
                        std::to_string(row.rank), std::to_string(row.mem_bytes)});
        std::cout << op_name << " L=" << row.L << ": " << row.time_ms << " ms, rank " << row.rank
                  << ", " << row.mem_bytes << " bytes\n";
    }
    if (res.has_slope)
        std::cout << "log-log time slope: " << res.slope << "\n";
    else
        std::cout << "single point, no slope fit\n";
    if (!report.empty()) {
        write_csv(report, {"L", "time_ms", "rank", "mem_bytes"}, rows);
        std::cout << "report written to " << report << "\n";
    }
    return exit_ok;
}

int run_repro(const std::string& name, const std::string& out_dir, const json& cfg) {
    std::filesystem::create_directories(out_dir);
    write_run_config(out_dir + "/" + name, cfg);
    const latsum::ReproReport report = latsum::repro_suite(name);
    for (const latsum::CsvTable& table : report.tables) latsum::write_csv_table(out_dir, table);

    std::string summary;
    for (const latsum::CheckResult& c : report.checks) {
        summary += std::string(c.pass ? "PASS" : "FAIL") + "  " + c.label + "  (measured " +
                   latsum::format_double(c.measured) + ", threshold " +
                   latsum::format_double(c.threshold) + ")" +
                   (c.detail.empty() ? "" : "  [" + c.detail + "]") + "\n";
    }
    summary += std::string(report.all_pass() ? "PASS" : "FAIL") + "  " + report.name +
               " overall, " + latsum::format_double(report.elapsed_s) + " s\n";
    std::cout << summary;
    std::ofstream sum_out(out_dir + "/summary.txt");
    sum_out << summary;
    std::cout << "artifacts written to " << out_dir << "/\n";
    return report.all_pass() ? exit_ok : exit_check_failed;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"lattice summation of Newton-kernel potentials in low-rank tensor form"};
    app.require_subcommand(1);
    app.fallthrough();

    int threads = 0;
    long seed = 0;
    app.add_option("--threads", threads, "cap worker threads (0 = LATSUM_THREADS or hardware)");
    app.add_option("--seed", seed, "seed recorded in the run config");

    // kernel
    auto* kernel = app.add_subcommand("kernel", "build and calibrate the kernel tensor");
    Index k_n = 0;
    double k_b = 0.0, k_eps = 1e-6, k_c0 = 0.0;
    int k_m = 0;
    bool k_doubled = false;
    std::string k_out, k_report;
    kernel->add_option("--n", k_n, "cells per axis")->required();
    kernel->add_option("--b", k_b, "box edge (au)")->required();
    kernel->add_option("--eps", k_eps, "relative kernel accuracy");
    kernel->add_option("--M", k_m, "fixed half node count (skips calibration)");
    kernel->add_option("--C0", k_c0, "window depth used with --M");
    kernel->add_flag("--doubled", k_doubled, "build on the doubled 2n grid");
    kernel->add_option("--out", k_out, "output bundle path")->required();
    kernel->add_option("--report", k_report, "calibration trace CSV");

    // sum-box / sum-periodic
    std::vector<Index> s_L;
    Index s_n = 0;
    double s_b = 0.0, s_eps = 1e-6;
    std::string s_charges, s_out, s_report;
    auto add_sum_options = [&](CLI::App* cmd) {
        cmd->add_option("--L", s_L, "lattice counts L1,L2,L3 (single value = cubic)")
            ->required()
            ->delimiter(',');
        cmd->add_option("--n", s_n, "cells per unit-cell axis")->required();
        cmd->add_option("--b", s_b, "unit cell edge (au)")->required();
        cmd->add_option("--eps", s_eps, "relative kernel accuracy");
        cmd->add_option("--charges", s_charges, "charges CSV (x,y,z,Z); default one unit charge");
        cmd->add_option("--out", s_out, "output bundle path")->required();
        cmd->add_option("--report", s_report, "summary CSV");
    };
    auto* sum_box = app.add_subcommand("sum-box", "assembled potential sum over a bounded box");
    add_sum_options(sum_box);
    auto* sum_periodic =
        app.add_subcommand("sum-periodic", "assembled potential sum on the periodic unit cell");
    add_sum_options(sum_periodic);

    // series
    std::string se_kind = "cube", se_extrapolate, se_report = "series.csv";
    std::vector<Index> se_L;
    Index se_n = 32;
    double se_b = 2.0, se_eps = 1e-6;
    auto* series = app.add_subcommand("series", "center-value growth series over box sizes");
    series->add_option("--kind", se_kind, "line, plane or cube");
    series->add_option("--L", se_L, "ascending box sizes")->required()->delimiter(',');
    series->add_option("--n", se_n, "cells per unit-cell axis");
    series->add_option("--b", se_b, "unit cell edge (au)");
    series->add_option("--eps", se_eps, "relative kernel accuracy");
    series->add_option("--extrapolate", se_extrapolate, "linear, quadratic or none");
    series->add_option("--report", se_report, "output CSV");

    // qtt-ranks
    std::string q_from, q_report = "qtt_ranks.csv";
    double q_eps = 1e-8;
    auto* qtt_ranks =
        app.add_subcommand("qtt-ranks", "quantized rank profile of a bundle's factor columns");
    qtt_ranks->add_option("--from", q_from, "input bundle")->required();
    qtt_ranks->add_option("--eps", q_eps, "compression accuracy");
    qtt_ranks->add_option("--report", q_report, "output CSV");

    // qtt-gauss
    std::vector<double> g_p{1.0};
    std::vector<double> g_eps{1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8, 1e-9};
    Index g_levels = 12;
    std::string g_report;
    auto* qtt_gauss =
        app.add_subcommand("qtt-gauss", "quantized rank growth of sampled Gaussians");
    qtt_gauss->add_option("--p", g_p, "Gaussian widths")->delimiter(',');
    qtt_gauss->add_option("--eps-list", g_eps, "accuracies to sweep")->delimiter(',');
    qtt_gauss->add_option("--levels", g_levels, "vector length 2^levels");
    qtt_gauss->add_option("--report", g_report, "output CSV");

    // project
    std::string p_from, p_basis, p_out;
    bool p_no_volume = false;
    auto* project =
        app.add_subcommand("project", "Galerkin projection onto a Gaussian basis");
    project->add_option("--from", p_from, "potential bundle")->required();
    project->add_option("--basis", p_basis, "basis CSV (cx,cy,cz,sigma)")->required();
    project->add_option("--out", p_out, "output matrix CSV")->required();
    project->add_flag("--no-volume", p_no_volume, "skip the h^3 volume element");

    // bench
    std::string b_op = "assembled", b_report;
    std::vector<Index> b_L;
    Index b_n = 64;
    double b_b = 2.0, b_eps = 1e-6, b_timeout = 600.0;
    auto* bench = app.add_subcommand("bench", "wall-time scaling of a summation scheme");
    bench->add_option("--op", b_op, "direct, assembled or periodic");
    bench->add_option("--L", b_L, "ascending cubic lattice sizes")->required()->delimiter(',');
    bench->add_option("--n", b_n, "cells per unit-cell axis");
    bench->add_option("--b", b_b, "unit cell edge (au)");
    bench->add_option("--eps", b_eps, "relative kernel accuracy");
    bench->add_option("--timeout", b_timeout, "per-run timeout (s)");
    bench->add_option("--report", b_report, "output CSV");

    // repro
    std::string r_name, r_out;
    auto* repro = app.add_subcommand("repro", "packaged reproduction studies with checks");
    repro->add_option("--name", r_name, "table1, table2, fig5, fig7, fig9 or fig11")->required();
    repro->add_option("--out", r_out, "artifact directory (default repro_<name>)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_validation;
    }

    try {
        if (threads > 0) latsum::set_max_threads(threads);

        if (kernel->parsed()) {
            json cfg = base_config("kernel", threads, seed);
            cfg["params"] = {{"n", k_n},           {"b", k_b},   {"eps", k_eps},
                             {"M", k_m},           {"C0", k_c0}, {"doubled", k_doubled},
                             {"out", k_out},       {"report", k_report}};
            return run_kernel(k_n, k_b, k_eps, k_m, k_c0, k_doubled, k_out, k_report, cfg);
        }
        if (sum_box->parsed() || sum_periodic->parsed()) {
            const bool periodic = sum_periodic->parsed();
            json cfg = base_config(periodic ? "sum-periodic" : "sum-box", threads, seed);
            cfg["params"] = {{"L", s_L},           {"n", s_n},
                             {"b", s_b},           {"eps", s_eps},
                             {"charges", s_charges}, {"out", s_out},
                             {"report", s_report}};
            return run_sum(periodic, s_L, s_n, s_b, s_eps, s_charges, s_out, s_report, cfg);
        }
        if (series->parsed()) {
            json cfg = base_config("series", threads, seed);
            cfg["params"] = {{"kind", se_kind}, {"L", se_L},
                             {"n", se_n},       {"b", se_b},
                             {"eps", se_eps},   {"extrapolate", se_extrapolate},
                             {"report", se_report}};
            return run_series(se_kind, se_L, se_n, se_b, se_eps, se_extrapolate, se_report, cfg);
        }
        if (qtt_ranks->parsed()) {
            json cfg = base_config("qtt-ranks", threads, seed);
            cfg["params"] = {{"from", q_from}, {"eps", q_eps}, {"report", q_report}};
            return run_qtt_ranks(q_from, q_eps, q_report, cfg);
        }
        if (qtt_gauss->parsed()) {
            json cfg = base_config("qtt-gauss", threads, seed);
            cfg["params"] = {
                {"p", g_p}, {"eps_list", g_eps}, {"levels", g_levels}, {"report", g_report}};
            return run_qtt_gauss(g_p, g_eps, g_levels, g_report, cfg);
        }
        if (project->parsed()) {
            json cfg = base_config("project", threads, seed);
            cfg["params"] = {{"from", p_from},
                             {"basis", p_basis},
                             {"out", p_out},
                             {"volume_element", !p_no_volume}};
            return run_project(p_from, p_basis, p_out, !p_no_volume, cfg);
        }
        if (bench->parsed()) {
            json cfg = base_config("bench", threads, seed);
            cfg["params"] = {{"op", b_op},   {"L", b_L},         {"n", b_n},
                             {"b", b_b},     {"eps", b_eps},     {"timeout_s", b_timeout},
                             {"report", b_report}};
            return run_bench(b_op, b_L, b_n, b_b, b_eps, b_timeout, b_report, cfg);
        }
        if (repro->parsed()) {
            if (r_out.empty()) r_out = "repro_" + r_name;
            json cfg = base_config("repro", threads, seed);
            cfg["params"] = {{"name", r_name}, {"out", r_out}};
            return run_repro(r_name, r_out, cfg);
        }
        std::cerr << "no subcommand given\n";
        return exit_validation;
    } catch (const latsum::resource_guard_error& e) {
        std::cerr << "resource guard: " << e.what() << "\n";
        return exit_resource_guard;
    } catch (const latsum::validation_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_validation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_validation;
    }
}
