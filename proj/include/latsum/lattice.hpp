#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <string>
#include <vector>

#include "latsum/canonical.hpp"
#include "latsum/errors.hpp"
#include "latsum/grid.hpp"
#include "latsum/newton.hpp"
#include "latsum/parallel.hpp"
#include "latsum/quadrature.hpp"

namespace latsum {

// One point charge: position inside the unit cell [-b/2, b/2]^3, must lie
// exactly on a grid point (cell vertex), and a positive strength.
struct Charge {
    std::array<double, 3> pos{0.0, 0.0, 0.0};
    double Z = 1.0;
};

// L1 x L2 x L3 array of translated copies of a unit cell with M_0 charges.
// The target box spans [-L_l*b/2, L_l*b/2] per axis with L_l*n grid cells.
struct LatticeSpec {
    std::array<Index, 3> L{1, 1, 1};
    GridSpec unit;
    std::vector<Charge> charges;

    void validate() const {
        unit.validate();
        for (int l = 0; l < 3; ++l)
            if (L[static_cast<std::size_t>(l)] < 1)
                throw validation_error("lattice: cell count on axis " + std::to_string(l) +
                                       " must be >= 1");
        if (charges.empty()) throw validation_error("lattice: at least one charge required");
        for (std::size_t nu = 0; nu < charges.size(); ++nu) {
            if (!(charges[nu].Z > 0.0) || !std::isfinite(charges[nu].Z))
                throw validation_error("lattice: charge " + std::to_string(nu) +
                                       " must have positive finite Z");
            for (int l = 0; l < 3; ++l) charge_grid_index(l, nu);
        }
    }

    Index target_cells(int axis) const {
        return L[static_cast<std::size_t>(axis)] * unit.n;
    }
    Dims3 target_dims() const { return {target_cells(0), target_cells(1), target_cells(2)}; }
    Index charge_count() const { return static_cast<Index>(charges.size()); }
    Index cell_count() const { return L[0] * L[1] * L[2]; }

    // Grid-point index of charge nu on the unit-cell axis: pos = i*h - b/2.
    // Off-grid positions are rejected, not rounded.
    Index charge_grid_index(int axis, std::size_t nu) const {
        const double h = unit.h();
        const double p = charges[nu].pos[static_cast<std::size_t>(axis)];
        const double x = (p + unit.b / 2.0) / h;
        const double rounded = std::round(x);
        if (std::abs(x - rounded) > 1e-9 * static_cast<double>(unit.n) || rounded < 0.0 ||
            rounded > static_cast<double>(unit.n))
            throw validation_error("lattice: charge " + std::to_string(nu) + " coordinate " +
                                   std::to_string(p) + " on axis " + std::to_string(axis) +
                                   " does not lie on a grid point of the unit cell");
        return static_cast<Index>(rounded);
    }
};

// Contiguous restriction of a length-in_len master vector to out_len entries
// starting at shift; realizes one lattice translation on one axis.
struct WindowOp {
    Index shift = 0;
    Index in_len = 0;
    Index out_len = 0;

    WindowOp(Index shift_, Index in_len_, Index out_len_)
        : shift(shift_), in_len(in_len_), out_len(out_len_) {
        if (shift < 0 || out_len < 1 || shift + out_len > in_len)
            throw validation_error("window: [" + std::to_string(shift) + ", " +
                                   std::to_string(shift + out_len) + ") not inside master of " +
                                   std::to_string(in_len) + " entries");
    }
};

inline Vector window_apply(const Vector& master_col, const WindowOp& w) {
    if (master_col.size() != w.in_len)
        throw validation_error("window_apply: master has " + std::to_string(master_col.size()) +
                               " entries, window expects " + std::to_string(w.in_len));
    return master_col.segment(w.shift, w.out_len);
}

// Window starts. The master vector on axis l has 2N cells (N = L_l * n)
// centered at 0, so master midpoint s+i coincides with target midpoint i
// relative to a charge at grid index i_a of lattice cell k exactly when
// s = N - i_a - k*n; the charge grid makes every such window fit the master.
inline Index window_start_box(Index N, Index n, Index i_a, Index k) { return N - i_a - k * n; }

// Periodic variant: evaluation happens on the reference cell c = L/2 (the
// central cell; integer division covers the odd-L convention (L-1)/2), and
// cell k's contribution enters through the window starting at
// s = N + (c - k)*n - i_a of the same 2N master.
inline Index window_start_periodic(Index N, Index n, Index i_a, Index k, Index L) {
    return N + (L / 2 - k) * n - i_a;
}

// Kernel master on the doubled target grid: 2*L_l*n cells per axis, mesh h.
inline CanonicalTensor3 build_lattice_master(const LatticeSpec& spec, const QuadratureRule& rule) {
    spec.validate();
    const Dims3 N = spec.target_dims();
    return build_newton_master({2 * N[0], 2 * N[1], 2 * N[2]}, spec.unit.h(), rule);
}

// Calibrates the kernel for a lattice run: the accuracy interval must reach
// the largest charge-to-point distance, so probes are drawn from a cubic
// grid of the doubled target extent (same mesh h).
inline QuadratureRule calibrate_for_lattice(const LatticeSpec& spec, double eps,
                                            CalibrationTrace* trace = nullptr) {
    spec.validate();
    const Index maxL = std::max({spec.L[0], spec.L[1], spec.L[2]});
    const GridSpec cal_grid(2.0 * static_cast<double>(maxL) * spec.unit.b, 2 * maxL * spec.unit.n);
    const KernelTolerance tol(eps, spec.unit.h(),
                              std::sqrt(3.0) * static_cast<double>(maxL) * spec.unit.b);
    return calibrate_quadrature(cal_grid, tol, trace);
}

// Potential-sum output: the canonical tensor on the evaluation grid plus
// run metadata.
struct SumResult {
    CanonicalTensor3 tensor;
    Dims3 grid_dims{0, 0, 0};
    Index rank = 0;
    double time_ms = 0.0;
};

namespace detail {

inline void require_master_matches(const LatticeSpec& spec, const CanonicalTensor3& master) {
    const Dims3 N = spec.target_dims();
    for (int l = 0; l < 3; ++l) {
        if (master.dim(l) != 2 * N[static_cast<std::size_t>(l)])
            throw validation_error("lattice: master axis " + std::to_string(l) + " has " +
                                   std::to_string(master.dim(l)) + " cells, expected doubled " +
                                   "target grid " + std::to_string(2 * N[static_cast<std::size_t>(l)]));
    }
    if (master.rank() < 1) throw validation_error("lattice: master tensor has rank 0");
}

inline double elapsed_ms(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
}

} // namespace detail

inline constexpr Index default_direct_column_guard = 1000000;

// Concatenation sum over every charge and every lattice cell: rank
// M_0 * L1*L2*L3 * R. Column order: charge-major, then lattice cell in
// lexicographic (k1, k2, k3) order, then kernel rank index. The oracle
// baseline for the assembled scheme; refuses to build oversized ranks.
inline SumResult direct_sum(const LatticeSpec& spec, const CanonicalTensor3& master,
                            Index column_guard = default_direct_column_guard) {
    const auto t0 = std::chrono::steady_clock::now();
    spec.validate();
    detail::require_master_matches(spec, master);
    const Dims3 N = spec.target_dims();
    const Index n = spec.unit.n;
    const Index R = master.rank();
    const Index cells = spec.cell_count();
    const Index cols = spec.charge_count() * cells * R;
    if (cols > column_guard)
        throw resource_guard_error("direct_sum: " + std::to_string(cols) +
                                   " columns exceed the guard of " + std::to_string(column_guard));

    std::array<Matrix, 3> factors;
    for (int l = 0; l < 3; ++l) factors[l].resize(N[static_cast<std::size_t>(l)], cols);
    Vector weights(cols);

    const Index groups = spec.charge_count() * cells;
    parallel_for(groups, [&](std::int64_t g) {
        const Index nu = static_cast<Index>(g) / cells;
        const Index kflat = static_cast<Index>(g) % cells;
        const Index k1 = kflat / (spec.L[1] * spec.L[2]);
        const Index k2 = (kflat / spec.L[2]) % spec.L[1];
        const Index k3 = kflat % spec.L[2];
        const std::array<Index, 3> k{k1, k2, k3};
        const Index base = static_cast<Index>(g) * R;
        for (int l = 0; l < 3; ++l) {
            const Index Nl = N[static_cast<std::size_t>(l)];
            const Index i_a = spec.charge_grid_index(l, static_cast<std::size_t>(nu));
            const Index s = window_start_box(Nl, n, i_a, k[static_cast<std::size_t>(l)]);
            for (Index q = 0; q < R; ++q)
                factors[static_cast<std::size_t>(l)].col(base + q) =
                    master.factor(l).col(q).segment(s, Nl);
        }
        for (Index q = 0; q < R; ++q)
            weights[base + q] = spec.charges[static_cast<std::size_t>(nu)].Z * master.weights()[q];
    });

    SumResult out;
    out.tensor = CanonicalTensor3(CanonicalTensor3::trusted_components_t{}, std::move(factors),
                                  std::move(weights));
    out.grid_dims = N;
    out.rank = out.tensor.rank();
    out.time_ms = detail::elapsed_ms(t0);
    return out;
}

namespace detail {

// Per-axis assembled columns: column (nu, q) is the sum over lattice shifts
// (ascending k, fixed order for bit-stable results) of the windowed master
// column q. The product over axes then expands to the full triple lattice
// sum, because the 3D shift set is the tensor product of the per-axis sets.
// The k loop runs eight shifts per memory pass; left-to-right addition keeps
// the exact ascending-k rounding order while amortizing loop overhead, so
// the cost per shift stays flat in the window length.
inline Matrix assembled_axis_columns(const LatticeSpec& spec, const CanonicalTensor3& master,
                                     int axis, bool periodic) {
    const Index n = spec.unit.n;
    const Index Ll = spec.L[static_cast<std::size_t>(axis)];
    const Index Nl = Ll * n;
    const Index out_len = periodic ? n : Nl;
    const Index R = master.rank();
    Matrix cols(out_len, spec.charge_count() * R);
    parallel_for(spec.charge_count() * R, [&](std::int64_t c) {
        const Index nu = static_cast<Index>(c) / R;
        const Index q = static_cast<Index>(c) % R;
        const Index i_a = spec.charge_grid_index(axis, static_cast<std::size_t>(nu));
        const double* mc = master.factor(axis).col(q).data();
        // Window starts descend by exactly n per shift, so stream k is
        // mc + start(0) - k * n for the box and periodic variants alike.
        const Index s0 = periodic ? window_start_periodic(Nl, n, i_a, 0, Ll)
                                  : window_start_box(Nl, n, i_a, 0);
        const double* base = mc + s0;
        double* __restrict out = cols.col(static_cast<Index>(c)).data();
        Index k;
        if (Ll >= 8) {
            const double* __restrict w0 = base;
            const double* __restrict w1 = base - n;
            const double* __restrict w2 = base - 2 * n;
            const double* __restrict w3 = base - 3 * n;
            const double* __restrict w4 = base - 4 * n;
            const double* __restrict w5 = base - 5 * n;
            const double* __restrict w6 = base - 6 * n;
            const double* __restrict w7 = base - 7 * n;
            for (Index i = 0; i < out_len; ++i)
                out[i] = w0[i] + w1[i] + w2[i] + w3[i] + w4[i] + w5[i] + w6[i] + w7[i];
            k = 8;
        } else {
            for (Index i = 0; i < out_len; ++i) out[i] = base[i];
            k = 1;
        }
        for (; k + 8 <= Ll; k += 8) {
            const double* __restrict w0 = base - k * n;
            const double* __restrict w1 = base - (k + 1) * n;
            const double* __restrict w2 = base - (k + 2) * n;
            const double* __restrict w3 = base - (k + 3) * n;
            const double* __restrict w4 = base - (k + 4) * n;
            const double* __restrict w5 = base - (k + 5) * n;
            const double* __restrict w6 = base - (k + 6) * n;
            const double* __restrict w7 = base - (k + 7) * n;
            for (Index i = 0; i < out_len; ++i)
                out[i] = out[i] + w0[i] + w1[i] + w2[i] + w3[i] + w4[i] + w5[i] + w6[i] + w7[i];
        }
        for (; k < Ll; ++k) {
            const double* __restrict w0 = base - k * n;
            for (Index i = 0; i < out_len; ++i) out[i] += w0[i];
        }
    });
    return cols;
}

inline SumResult assembled_sum(const LatticeSpec& spec, const CanonicalTensor3& master,
                               bool periodic) {
    const auto t0 = std::chrono::steady_clock::now();
    spec.validate();
    require_master_matches(spec, master);
    const Index R = master.rank();
    std::array<Matrix, 3> factors;
    for (int l = 0; l < 3; ++l) factors[l] = assembled_axis_columns(spec, master, l, periodic);
    Vector weights(spec.charge_count() * R);
    for (Index nu = 0; nu < spec.charge_count(); ++nu)
        for (Index q = 0; q < R; ++q)
            weights[nu * R + q] = spec.charges[static_cast<std::size_t>(nu)].Z * master.weights()[q];

    SumResult out;
    out.tensor = CanonicalTensor3(CanonicalTensor3::trusted_components_t{}, std::move(factors),
                                  std::move(weights));
    out.grid_dims = periodic ? Dims3{spec.unit.n, spec.unit.n, spec.unit.n} : spec.target_dims();
    out.rank = out.tensor.rank();
    out.time_ms = elapsed_ms(t0);
    return out;
}

} // namespace detail

// Box sum over the whole L1 x L2 x L3 target grid at rank M_0 * R: per axis,
// the L_l shifted windows of each master column collapse into a single
// column by pointwise summation.
inline SumResult assembled_box_sum(const LatticeSpec& spec, const CanonicalTensor3& master) {
    return detail::assembled_sum(spec, master, false);
}

// Periodic variant: same collapse, but every window lands on the n^3
// reference cell (the central cell of the supercell), giving the unit-cell
// potential with contributions from all L1*L2*L3 images.
inline SumResult assembled_periodic_sum(const LatticeSpec& spec, const CanonicalTensor3& master) {
    return detail::assembled_sum(spec, master, true);
}

enum class SeriesKind { line, plane, cube };

inline std::array<Index, 3> series_cells(SeriesKind kind, Index L) {
    switch (kind) {
        case SeriesKind::line: return {L, 1, 1};
        case SeriesKind::plane: return {L, L, 1};
        default: return {L, L, L};
    }
}

struct SeriesPoint {
    Index L = 0;
    Index rank = 0;
    double time_ms = 0.0;
    double p_center = 0.0;
};

// Center values p_L of growing lattice sums of unit charges (one per cell,
// at the cell center): the box-sum tensor evaluated at the central grid
// midpoint (index N_l/2 per axis). One kernel rule, calibrated for the
// largest box, is shared across the series so that differences p_2L - p_L
// are free of kernel-recalibration noise.
inline std::vector<SeriesPoint> center_value_series(SeriesKind kind,
                                                    const std::vector<Index>& L_list,
                                                    const GridSpec& unit, double eps) {
    unit.validate();
    if (L_list.empty()) throw validation_error("series: empty L list");
    for (std::size_t i = 1; i < L_list.size(); ++i)
        if (L_list[i] <= L_list[i - 1])
            throw validation_error("series: L list must be strictly ascending");

    LatticeSpec largest;
    largest.L = series_cells(kind, L_list.back());
    largest.unit = unit;
    largest.charges = {Charge{{0.0, 0.0, 0.0}, 1.0}};
    const QuadratureRule rule = calibrate_for_lattice(largest, eps);

    std::vector<SeriesPoint> out;
    out.reserve(L_list.size());
    for (Index L : L_list) {
        LatticeSpec spec = largest;
        spec.L = series_cells(kind, L);
        const CanonicalTensor3 master = build_lattice_master(spec, rule);
        const SumResult sum = assembled_box_sum(spec, master);
        SeriesPoint pt;
        pt.L = L;
        pt.rank = sum.rank;
        pt.time_ms = sum.time_ms;
        pt.p_center = eval_point(sum.tensor, sum.grid_dims[0] / 2, sum.grid_dims[1] / 2,
                                 sum.grid_dims[2] / 2);
        out.push_back(pt);
    }
    return out;
}

enum class RichardsonOrder { linear, quadratic };

// Eliminates the leading divergent term of a conditionally convergent
// series from two box sizes: linear growth via 2p - p2, quadratic via
// (4p - p2) / 3.
inline double richardson_extrapolate(double p, double p2, RichardsonOrder order) {
    return order == RichardsonOrder::linear ? 2.0 * p - p2 : (4.0 * p - p2) / 3.0;
}

} // namespace latsum
