#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "latsum/errors.hpp"
#include "latsum/lattice.hpp"

namespace latsum {

enum class BenchOp { direct, assembled, periodic };

inline const char* bench_op_name(BenchOp op) {
    switch (op) {
        case BenchOp::direct: return "direct";
        case BenchOp::assembled: return "assembled";
        default: return "periodic";
    }
}

struct BenchRow {
    Index L = 0;
    double time_ms = 0.0;
    Index rank = 0;
    std::uint64_t mem_bytes = 0;
};

struct BenchResult {
    BenchOp op = BenchOp::assembled;
    std::vector<BenchRow> rows;
    double slope = 0.0;   // log-log fit of time vs L
    bool has_slope = false;
};

// Least-squares slope of y against x.
inline double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

inline std::uint64_t canonical_storage_bytes(const CanonicalTensor3& t) {
    std::uint64_t entries = static_cast<std::uint64_t>(t.rank());
    for (int l = 0; l < 3; ++l)
        entries += static_cast<std::uint64_t>(t.dim(l)) * static_cast<std::uint64_t>(t.rank());
    return entries * sizeof(double);
}

namespace detail {

// One timing sample: the average over enough repetitions to fill a 100 ms
// window, so sub-millisecond runs are resolvable and scheduler noise
// averages out instead of poisoning the sample.
inline double timed_batch_ms(const std::function<void()>& body, int reps) {
    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();
    for (int r = 0; r < reps; ++r) body();
    const double ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
    return ms / static_cast<double>(reps);
}

} // namespace detail

// Wall-time scaling of one summation scheme over cubic L x L x L lattices of
// unit charges (single charge at the cell center). The kernel rule is
// calibrated once for the largest box and the master tensor is built outside
// the timed region: the cost under study is the summation itself, and the
// master build is shared setup that would otherwise flatten the exponent.
inline BenchResult bench_scaling(BenchOp op, const std::vector<Index>& L_list,
                                 const GridSpec& unit, double eps, double timeout_s = 600.0) {
    unit.validate();
    if (L_list.empty()) throw validation_error("bench: empty L list");
    for (std::size_t i = 1; i < L_list.size(); ++i)
        if (L_list[i] <= L_list[i - 1])
            throw validation_error("bench: L list must be strictly ascending");

    LatticeSpec largest;
    largest.L = {L_list.back(), L_list.back(), L_list.back()};
    largest.unit = unit;
    largest.charges = {Charge{{0.0, 0.0, 0.0}, 1.0}};
    const QuadratureRule rule = calibrate_for_lattice(largest, eps);

    // Median of 3 samples per L, with the sample rounds interleaved across
    // the L values: a slow stretch (scheduler steal, frequency dip) then
    // lands on one round of every case instead of on all samples of one
    // case, and the per-case median rejects it.
    struct Case {
        LatticeSpec spec;
        CanonicalTensor3 master;
        SumResult last;
        int reps = 1;
        std::array<double, 3> samples{0.0, 0.0, 0.0};
    };
    std::vector<Case> cases;
    for (Index L : L_list) {
        Case c;
        c.spec = largest;
        c.spec.L = {L, L, L};
        c.master = build_lattice_master(c.spec, rule);
        cases.push_back(std::move(c));
    }
    auto body_for = [op](Case& c) {
        return std::function<void()>([op, &c]() {
            switch (op) {
                case BenchOp::direct: c.last = direct_sum(c.spec, c.master); break;
                case BenchOp::assembled: c.last = assembled_box_sum(c.spec, c.master); break;
                case BenchOp::periodic: c.last = assembled_periodic_sum(c.spec, c.master); break;
            }
        });
    };
    for (Case& c : cases) {
        const std::function<void()> body = body_for(c);
        double warm = detail::timed_batch_ms(body, 1);
        if (warm > timeout_s * 1000.0)
            throw resource_guard_error("bench: single run took " + std::to_string(warm / 1000.0) +
                                       " s, over the timeout of " + std::to_string(timeout_s) +
                                       " s");
        for (int i = 0; i < 2 && warm < 50.0; ++i)
            warm = std::min(warm, detail::timed_batch_ms(body, 1));
        c.reps = warm >= 100.0 ? 1 : static_cast<int>(std::ceil(100.0 / std::max(warm, 0.005)));
    }
    for (int round = 0; round < 3; ++round)
        for (Case& c : cases)
            c.samples[static_cast<std::size_t>(round)] = detail::timed_batch_ms(body_for(c), c.reps);

    BenchResult out;
    out.op = op;
    for (Case& c : cases) {
        std::sort(c.samples.begin(), c.samples.end());
        BenchRow row;
        row.L = c.spec.L[0];
        row.time_ms = c.samples[1];
        row.rank = c.last.rank;
        row.mem_bytes = canonical_storage_bytes(c.last.tensor);
        out.rows.push_back(row);
    }
    if (out.rows.size() >= 2) {
        std::vector<double> lx, ly;
        for (const BenchRow& r : out.rows) {
            lx.push_back(std::log(static_cast<double>(r.L)));
            ly.push_back(std::log(std::max(r.time_ms, 1e-6)));
        }
        out.slope = fit_slope(lx, ly);
        out.has_slope = true;
    }
    return out;
}

} // namespace latsum
