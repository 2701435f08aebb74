#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "latsum/canonical.hpp"
#include "latsum/errors.hpp"
#include "latsum/grid.hpp"
#include "latsum/parallel.hpp"

namespace latsum {

struct GaussianBasisSpec {
    std::array<double, 3> center{0.0, 0.0, 0.0};
    double sigma = 1.0;
};

// Separable basis: each function is a triple of per-axis midpoint-sample
// vectors, i.e. a rank-1 tensor that never needs 3D storage.
struct Rank1Basis {
    std::vector<std::array<Vector, 3>> funcs;
    Index n = 0;
    double h = 0.0;

    Index size() const { return static_cast<Index>(funcs.size()); }
};

inline Rank1Basis sample_gaussian_basis(const GridSpec& grid,
                                        const std::vector<GaussianBasisSpec>& specs) {
    grid.validate();
    if (specs.empty()) throw validation_error("basis: at least one function required");
    Rank1Basis out;
    out.n = grid.n;
    out.h = grid.h();
    out.funcs.reserve(specs.size());
    for (std::size_t f = 0; f < specs.size(); ++f) {
        const GaussianBasisSpec& s = specs[f];
        if (!(s.sigma > 0.0) || !std::isfinite(s.sigma))
            throw validation_error("basis: function " + std::to_string(f) +
                                   " needs positive finite sigma");
        std::array<Vector, 3> axes;
        for (int l = 0; l < 3; ++l) {
            if (!std::isfinite(s.center[static_cast<std::size_t>(l)]))
                throw validation_error("basis: function " + std::to_string(f) +
                                       " has a non-finite center");
            axes[static_cast<std::size_t>(l)].resize(grid.n);
            for (Index i = 0; i < grid.n; ++i) {
                const double d = grid.midpoint(i) - s.center[static_cast<std::size_t>(l)];
                axes[static_cast<std::size_t>(l)][i] = std::exp(-d * d / (2.0 * s.sigma * s.sigma));
            }
        }
        out.funcs.push_back(std::move(axes));
    }
    return out;
}

// Matrix of basis-pair projections of a potential tensor:
// V(k, m) = <G_k .* G_m, P>, optionally times the midpoint-rule volume
// element h^3 to approximate the integral. The pair product is rank-1 and
// the scalar product runs over per-axis inner products, so each entry costs
// O(R * n) and no 3D array is ever formed. Entries are computed for k <= m
// and mirrored, making the result exactly symmetric.
inline Matrix potential_matrix(const Rank1Basis& basis, const CanonicalTensor3& P,
                               bool volume_element) {
    if (basis.size() < 1) throw validation_error("potential_matrix: empty basis");
    for (int l = 0; l < 3; ++l)
        if (P.dim(l) != basis.n)
            throw validation_error("potential_matrix: tensor axis " + std::to_string(l) + " has " +
                                   std::to_string(P.dim(l)) + " cells, basis has " +
                                   std::to_string(basis.n));
    const Index nb = basis.size();
    const double scale = volume_element ? basis.h * basis.h * basis.h : 1.0;
    Matrix V(nb, nb);
    const Index pairs = nb * (nb + 1) / 2;
    parallel_for(pairs, [&](std::int64_t flat) {
        // Unrank the flat upper-triangle index (row-major over k <= m).
        Index k = 0;
        Index left = static_cast<Index>(flat);
        while (left >= nb - k) {
            left -= nb - k;
            ++k;
        }
        const Index m = k + left;
        std::array<Matrix, 3> factors;
        for (int l = 0; l < 3; ++l)
            factors[l] = basis.funcs[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)]
                             .cwiseProduct(
                                 basis.funcs[static_cast<std::size_t>(m)][static_cast<std::size_t>(l)]);
        const CanonicalTensor3 pair(std::move(factors), Vector::Ones(1));
        const double value = scale * scalar_product(pair, P);
        V(k, m) = value;
        V(m, k) = value;
    });
    return V;
}

} // namespace latsum
