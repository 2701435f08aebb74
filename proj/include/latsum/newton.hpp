#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "latsum/canonical.hpp"
#include "latsum/errors.hpp"
#include "latsum/grid.hpp"
#include "latsum/quadrature.hpp"

namespace latsum {

// Exact integral of exp(-t^2 x^2) over each cell of a length-n (or doubled
// length-2n) axis centered at 0: entry i = sqrt(pi)/(2t) * (erf(t x_{i+1}) -
// erf(t x_i)) with cell vertices x_i; the t = 0 integrand is constant 1, so
// every entry is the cell width. Vertex coordinates are formed from integer
// offsets so the vector is even bit for bit.
inline Vector gaussian_moment_vector(const GridSpec& grid, double t, bool doubled) {
    grid.validate();
    if (!(t >= 0.0) || !std::isfinite(t))
        throw validation_error("gaussian_moment_vector: t must be finite and >= 0");
    const Index len = doubled ? 2 * grid.n : grid.n;
    const double h = grid.h();
    Vector out(len);
    if (t == 0.0) {
        out.setConstant(h);
        return out;
    }
    const double scale = std::sqrt(M_PI) / (2.0 * t);
    auto vertex = [&](Index i) { return static_cast<double>(i - len / 2) * h; };
    for (Index i = 0; i < len; ++i)
        out[i] = scale * (std::erf(t * vertex(i + 1)) - std::erf(t * vertex(i)));
    return out;
}

// Midpoint samples of exp(-t^2 x^2) on a length-len axis of mesh h centered
// at 0. These are the kernel tensor's factor columns: the tensor then matches
// the exponential sum pointwise at every grid midpoint, so its error at a
// probe is exactly the quadrature error at the probe radius.
inline Vector gaussian_sample_vector(Index len, double h, double t) {
    if (len < 2 || len % 2 != 0)
        throw validation_error("gaussian_sample_vector: length must be even and >= 2");
    Vector out(len);
    for (Index i = 0; i < len; ++i) {
        const double x = t * GridSpec::midpoint(i, len, h);
        out[i] = std::exp(-x * x);
    }
    return out;
}

// Kernel tensor on a (possibly per-axis) grid of the given cell counts, all
// sharing mesh h and centered at 0. Rank = node count; weights are the
// quadrature weights; axes with equal length share identical factor matrices.
inline CanonicalTensor3 build_newton_master(const Dims3& lens, double h, const QuadratureRule& rule) {
    const Index r = rule.node_count();
    std::array<Matrix, 3> factors;
    for (int l = 0; l < 3; ++l) {
        bool copied = false;
        for (int m = 0; m < l; ++m) {
            if (lens[m] == lens[l]) {
                factors[l] = factors[m];
                copied = true;
                break;
            }
        }
        if (copied) continue;
        factors[l].resize(lens[l], r);
        for (Index q = 0; q < r; ++q)
            factors[l].col(q) = gaussian_sample_vector(lens[l], h, rule.exponents[q]);
    }
    return CanonicalTensor3(std::move(factors), rule.weights);
}

// Rank-(2M+1) canonical approximation of 1/||x|| at the midpoints of the
// grid (doubled selects the 2n-cell grid on [-b, b]^3).
inline CanonicalTensor3 build_newton_tensor(const GridSpec& grid, const QuadratureRule& rule,
                                            bool doubled = false) {
    grid.validate();
    const Index len = doubled ? 2 * grid.n : grid.n;
    return build_newton_master({len, len, len}, grid.h(), rule);
}

// One accuracy probe: a grid midpoint index triple and its radius.
struct ProbePoint {
    Index i, j, k;
    double r;
};

// Deterministic subset of grid midpoints with a_min <= ||x|| <= a_max:
// the full 16^3 shell around the origin (where the kernel error peaks), the
// axis / face-diagonal / body-diagonal rays (dense radial coverage), and a
// strided lattice for generic large radii. Exhaustive enumeration would be
// n^3 and is far too large for the calibration grids.
inline std::vector<ProbePoint> kernel_probe_set(const GridSpec& grid, const KernelTolerance& tol) {
    grid.validate();
    tol.validate();
    const Index n = grid.n;
    const double h = grid.h();
    std::vector<Index> keys;
    auto push = [&](Index i, Index j, Index k) {
        if (i < 0 || i >= n || j < 0 || j >= n || k < 0 || k >= n) return;
        keys.push_back((i * n + j) * n + k);
    };
    const Index shell = std::min<Index>(8, n / 2);
    for (Index i = n / 2 - shell; i < n / 2 + shell; ++i)
        for (Index j = n / 2 - shell; j < n / 2 + shell; ++j)
            for (Index k = n / 2 - shell; k < n / 2 + shell; ++k) push(i, j, k);
    for (Index i = 0; i < n; ++i) {
        push(i, n / 2, n / 2);
        push(i, i, n / 2);
        push(i, i, i);
    }
    const Index stride = std::max<Index>(1, n / 16);
    for (Index i = 0; i < n; i += stride)
        for (Index j = 0; j < n; j += stride)
            for (Index k = 0; k < n; k += stride) push(i, j, k);
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());

    std::vector<ProbePoint> probes;
    probes.reserve(keys.size());
    for (Index key : keys) {
        const Index i = key / (n * n), j = (key / n) % n, k = key % n;
        const double x = grid.midpoint(i), y = grid.midpoint(j), z = grid.midpoint(k);
        const double r = std::sqrt(x * x + y * y + z * z);
        if (r >= tol.a_min && r <= tol.a_max) probes.push_back({i, j, k, r});
    }
    return probes;
}

// Max over probes of |T(i,j,k) - 1/r| * r, the relative-error certificate of
// the kernel tensor against the exact Newton kernel.
inline double measure_probe_error(const CanonicalTensor3& kernel,
                                  const std::vector<ProbePoint>& probes) {
    double worst = 0.0;
    for (const ProbePoint& p : probes) {
        const double v = eval_point(kernel, p.i, p.j, p.k);
        worst = std::max(worst, std::abs(v * p.r - 1.0));
    }
    return worst;
}

struct CalibrationTrace {
    struct Entry {
        int M;
        double C0;
        double err;
    };
    std::vector<Entry> entries;
};

inline constexpr int default_calibration_cap = 128;

// Smallest M (and the best window depth C0 from {1,2,3,4} at that M) whose
// kernel tensor meets the requested relative accuracy on the probe set.
// Linear scan in M: the probe error decays exponentially, so the scan cost
// is dominated by the final few candidates.
inline QuadratureRule calibrate_quadrature(const GridSpec& grid, const KernelTolerance& tol,
                                           CalibrationTrace* trace = nullptr,
                                           int m_cap = default_calibration_cap) {
    grid.validate();
    tol.validate();
    const std::vector<ProbePoint> probes = kernel_probe_set(grid, tol);
    if (probes.empty())
        throw validation_error("calibrate_quadrature: no grid midpoints in [a_min, a_max]");
    static constexpr double c0_candidates[] = {1.0, 2.0, 3.0, 4.0};
    double global_best = std::numeric_limits<double>::infinity();
    for (int M = 2; M <= m_cap; ++M) {
        QuadratureRule best_rule;
        double best_err = std::numeric_limits<double>::infinity();
        for (double c0 : c0_candidates) {
            QuadratureRule rule = sinc_quadrature(tol.eps, tol.a_min, tol.a_max, M, c0);
            const double err = measure_probe_error(build_newton_tensor(grid, rule), probes);
            if (trace) trace->entries.push_back({M, c0, err});
            if (err < best_err) {
                best_err = err;
                best_rule = std::move(rule);
            }
        }
        global_best = std::min(global_best, best_err);
        if (best_err <= tol.eps) return best_rule;
    }
    throw resource_guard_error("calibrate_quadrature: no rule with M <= " + std::to_string(m_cap) +
                               " meets eps = " + std::to_string(tol.eps) +
                               "; best achieved error " + std::to_string(global_best));
}

} // namespace latsum
