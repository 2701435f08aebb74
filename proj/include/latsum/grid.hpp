#pragma once

#include <cmath>
#include <string>

#include "latsum/canonical.hpp"
#include "latsum/errors.hpp"

namespace latsum {

// Uniform cubic grid of n x n x n cells over [-b/2, b/2]^3; function values
// live at cell midpoints. n is kept even so the midpoints straddle the origin
// symmetrically and grid points (cell vertices) include the origin.
struct GridSpec {
    double b = 0.0;
    Index n = 0;

    GridSpec() = default;
    GridSpec(double box, Index cells) : b(box), n(cells) { validate(); }

    void validate() const {
        if (!(b > 0.0) || !std::isfinite(b))
            throw validation_error("grid: box edge must be positive, got " + std::to_string(b));
        if (n < 2 || n % 2 != 0)
            throw validation_error("grid: n must be even and at least 2, got " +
                                   std::to_string(n));
    }

    double h() const { return b / static_cast<double>(n); }

    // Midpoint of cell i on a length-len axis centered at 0 with mesh h.
    static double midpoint(Index i, Index len, double h) {
        return (static_cast<double>(i) + 0.5 - static_cast<double>(len) / 2.0) * h;
    }
    double midpoint(Index i) const { return midpoint(i, n, h()); }
};

// Accuracy request for the kernel approximation: relative error eps over
// radii a_min <= ||x|| <= a_max. Defaults exclude the singular cell (a_min =
// one mesh width) and reach the full box diagonal.
struct KernelTolerance {
    double eps = 0.0;
    double a_min = 0.0;
    double a_max = 0.0;

    KernelTolerance() = default;
    KernelTolerance(double eps_, double amin, double amax)
        : eps(eps_), a_min(amin), a_max(amax) {
        validate();
    }

    void validate() const {
        if (!(eps > 0.0) || !(eps < 1.0))
            throw validation_error("tolerance: eps must lie in (0, 1), got " +
                                   std::to_string(eps));
        if (!(a_min > 0.0) || !(a_min < a_max))
            throw validation_error("tolerance: need 0 < a_min < a_max, got a_min = " +
                                   std::to_string(a_min) + ", a_max = " + std::to_string(a_max));
    }
};

inline KernelTolerance default_tolerance(const GridSpec& grid, double eps) {
    return KernelTolerance(eps, grid.h(), std::sqrt(3.0) * grid.b);
}

} // namespace latsum
