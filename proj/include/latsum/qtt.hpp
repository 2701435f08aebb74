#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/SVD>

#include "latsum/canonical.hpp"
#include "latsum/errors.hpp"
#include "latsum/lattice.hpp"
#include "latsum/parallel.hpp"

namespace latsum {

inline bool is_power_of_two(Index n) { return n > 0 && (n & (n - 1)) == 0; }

inline Index log2_exact(Index n) {
    Index l = 0;
    while ((Index{1} << l) < n) ++l;
    return l;
}

// Binary-quantized vector of length 2^levels as a train of order-3 cores.
// Core k is stored as a (2 * r_{k-1}) x r_k matrix whose row alpha + r_{k-1}*j
// pairs the incoming rank index alpha with bit j; bit k of the vector index
// is the k-th least significant (column-major folding), so reshapes are plain
// buffer reinterpretations. Boundary ranks r_0 = r_levels = 1.
struct QTTVector {
    std::vector<Matrix> cores;
    double eps_used = 0.0;

    Index levels() const { return static_cast<Index>(cores.size()); }
    Index length() const { return Index{1} << levels(); }

    // Interior rank profile r_1 .. r_{levels-1}.
    std::vector<Index> ranks() const {
        std::vector<Index> out;
        for (std::size_t k = 0; k + 1 < cores.size(); ++k) out.push_back(cores[k].cols());
        return out;
    }
};

// Left-to-right SVD sweep: at step k the carry (r_{k-1} x rest) folds its next
// bit into the rows and is truncated at the per-step Frobenius budget
// eps * ||v||_2 / sqrt(levels - 1), which by the standard TT error calculus
// bounds the total 2-norm error by eps * ||v||_2.
inline QTTVector qtt_compress(const Vector& v, double eps) {
    const Index N = v.size();
    if (N < 2 || !is_power_of_two(N))
        throw validation_error("qtt_compress: length " + std::to_string(N) +
                               " is not a power of two >= 2");
    if (!(eps > 0.0)) throw validation_error("qtt_compress: eps must be positive");
    const Index L = log2_exact(N);
    const double delta = eps * v.norm() / std::sqrt(static_cast<double>(std::max<Index>(L - 1, 1)));

    QTTVector out;
    out.eps_used = eps;
    out.cores.reserve(static_cast<std::size_t>(L));
    Vector carry = v;
    Index r_prev = 1;
    Index rest = N;
    for (Index k = 0; k + 1 < L; ++k) {
        // The carry buffer (r_prev x rest, column-major) reinterprets as the
        // bit-folded (2 r_prev) x (rest/2) matrix with no copy.
        Eigen::Map<const Matrix> folded(carry.data(), 2 * r_prev, rest / 2);
        Eigen::BDCSVD<Matrix> svd(folded, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const Vector& sigma = svd.singularValues();
        Index keep = sigma.size();
        double tail = 0.0;
        for (Index i = sigma.size(); i-- > 0;) {
            tail += sigma[i] * sigma[i];
            if (std::sqrt(tail) > delta) break;
            keep = i;
        }
        keep = std::max<Index>(keep, 1);
        out.cores.push_back(svd.matrixU().leftCols(keep));
        const Matrix next = sigma.head(keep).asDiagonal() * svd.matrixV().leftCols(keep).transpose();
        rest /= 2;
        r_prev = keep;
        carry = Eigen::Map<const Vector>(next.data(), keep * rest);
    }
    out.cores.push_back(Eigen::Map<const Matrix>(carry.data(), 2 * r_prev, 1));
    return out;
}

// Exact contraction of the cores back to the full vector.
inline Vector qtt_reconstruct(const QTTVector& t) {
    if (t.cores.empty()) throw validation_error("qtt_reconstruct: empty train");
    Matrix w = t.cores.front();
    for (std::size_t k = 1; k < t.cores.size(); ++k) {
        const Matrix& core = t.cores[k];
        const Index r_prev = core.rows() / 2;
        if (w.cols() != r_prev)
            throw validation_error("qtt_reconstruct: rank profile mismatch at core " +
                                   std::to_string(k));
        const Index len = w.rows();
        Matrix next(2 * len, core.cols());
        next.topRows(len).noalias() = w * core.topRows(r_prev);
        next.bottomRows(len).noalias() = w * core.bottomRows(r_prev);
        w = std::move(next);
    }
    if (t.cores.back().cols() != 1)
        throw validation_error("qtt_reconstruct: boundary rank is not 1");
    return Eigen::Map<const Vector>(w.data(), w.rows());
}

struct RankProfile {
    std::vector<Index> ranks;  // interior r_1 .. r_{levels-1}
    Index max_rank = 1;
    double avg_rank = 1.0;
};

inline RankProfile qtt_rank_profile(const QTTVector& t) {
    RankProfile out;
    out.ranks = t.ranks();
    if (!out.ranks.empty()) {
        out.max_rank = *std::max_element(out.ranks.begin(), out.ranks.end());
        double sum = 0.0;
        for (Index r : out.ranks) sum += static_cast<double>(r);
        out.avg_rank = sum / static_cast<double>(out.ranks.size());
    }
    return out;
}

// eps-rank of each unfolding 2^k x 2^(L-k): the smallest r whose discarded
// singular tail has Frobenius norm <= eps * ||v||_2. Unlike the sweep ranks,
// these are intrinsic to the vector (no per-step budget split), which is the
// right measurement for rank-bound laws.
inline std::vector<Index> unfolding_rank_profile(const Vector& v, double eps) {
    const Index N = v.size();
    if (N < 2 || !is_power_of_two(N))
        throw validation_error("unfolding_rank_profile: length is not a power of two >= 2");
    const Index L = log2_exact(N);
    const double thresh = eps * v.norm();
    std::vector<Index> out;
    for (Index k = 1; k < L; ++k) {
        Eigen::Map<const Matrix> unfolding(v.data(), Index{1} << k, Index{1} << (L - k));
        Eigen::BDCSVD<Matrix> svd(unfolding);
        const Vector& sigma = svd.singularValues();
        Index keep = sigma.size();
        double tail = 0.0;
        for (Index i = sigma.size(); i-- > 0;) {
            tail += sigma[i] * sigma[i];
            if (std::sqrt(tail) > thresh) break;
            keep = i;
        }
        out.push_back(std::max<Index>(keep, 1));
    }
    return out;
}

inline Index max_unfolding_rank(const Vector& v, double eps) {
    const std::vector<Index> ranks = unfolding_rank_profile(v, eps);
    return ranks.empty() ? 1 : *std::max_element(ranks.begin(), ranks.end());
}

// Tiling a length-2^L1 block over 2^L2 blocks cannot raise the max
// quantized rank, and pointwise modulation multiplies rank bounds at most:
// rank(F .* x) <= rank(F) * rank(x0). Both laws are measured (unfolding
// ranks at matched eps) and reported alongside the modulated vector.
struct ModulationReport {
    Vector x;    // tiled vector
    Vector fx;   // F .* x
    Index r0 = 1, rx = 1, rF = 1, rfx = 1;
    bool tiling_bound_ok = false;
    bool product_bound_ok = false;
};

inline ModulationReport block_modulated_vector(const Vector& x0, Index n_blocks, const Vector& F,
                                               double eps) {
    if (x0.size() < 2 || !is_power_of_two(x0.size()))
        throw validation_error("block_modulated_vector: block length must be a power of two >= 2");
    if (n_blocks < 1 || !is_power_of_two(n_blocks))
        throw validation_error("block_modulated_vector: block count must be a power of two >= 1");
    if (F.size() != x0.size() * n_blocks)
        throw validation_error("block_modulated_vector: modulator length " +
                               std::to_string(F.size()) + " != " + std::to_string(x0.size()) +
                               " * " + std::to_string(n_blocks));
    ModulationReport out;
    out.x.resize(F.size());
    for (Index blk = 0; blk < n_blocks; ++blk) out.x.segment(blk * x0.size(), x0.size()) = x0;
    out.fx = F.cwiseProduct(out.x);
    out.r0 = max_unfolding_rank(x0, eps);
    out.rx = max_unfolding_rank(out.x, eps);
    out.rF = max_unfolding_rank(F, eps);
    out.rfx = max_unfolding_rank(out.fx, eps);
    out.tiling_bound_ok = out.rx <= out.r0;
    out.product_bound_ok = out.rfx <= out.rF * out.r0;
    return out;
}

struct QttColumnReport {
    int axis = 0;
    Index column = 0;      // charge-major column index (nu * R + q)
    Index max_rank = 1;
    double avg_rank = 1.0;
    double rec_err = 0.0;  // 2-norm error on the unpadded prefix, relative
    int regime = -1;       // 1 = kernel node localized within one cell span, 0 = global, -1 = n/a
};

struct AssembledQttResult {
    std::vector<QTTVector> columns;        // axis-major: axis * cols_per_axis + column
    std::vector<QttColumnReport> reports;  // same order
    Dims3 padded_len{0, 0, 0};
    double avg_max_rank = 0.0;
};

inline constexpr Index default_qtt_pad_guard = Index{1} << 26;

// Compresses every assembled box-sum column to QTT. Columns whose length is
// not a power of two are zero-extended on the right; rank reports carry the
// reconstruction error measured on the unpadded prefix so padding artifacts
// stay visible. When the quadrature rule is supplied, each column is tagged
// by regime: a node with effective Gaussian width sqrt(log(1/eps))/tau_q
// within one cell edge b acts locally (few overlapping windows), the rest
// act globally; the two regimes carry different rank-growth laws.
inline AssembledQttResult assembled_qtt_sum(const LatticeSpec& spec, const CanonicalTensor3& master,
                                            double eps, const QuadratureRule* rule = nullptr,
                                            Index pad_guard = default_qtt_pad_guard) {
    spec.validate();
    if (!(eps > 0.0)) throw validation_error("assembled_qtt_sum: eps must be positive");
    const Index R = master.rank();
    const Index cols_per_axis = spec.charge_count() * R;

    AssembledQttResult out;
    out.columns.resize(static_cast<std::size_t>(3 * cols_per_axis));
    out.reports.resize(static_cast<std::size_t>(3 * cols_per_axis));
    for (int axis = 0; axis < 3; ++axis) {
        const Matrix cols = detail::assembled_axis_columns(spec, master, axis, false);
        const Index N = cols.rows();
        Index padded = 2;
        while (padded < N) padded *= 2;
        if (padded > pad_guard)
            throw resource_guard_error("assembled_qtt_sum: padded length " +
                                       std::to_string(padded) + " exceeds the guard of " +
                                       std::to_string(pad_guard));
        out.padded_len[static_cast<std::size_t>(axis)] = padded;
        parallel_for(cols_per_axis, [&](std::int64_t c) {
            Vector v = Vector::Zero(padded);
            v.head(N) = cols.col(static_cast<Index>(c));
            QTTVector t = qtt_compress(v, eps);
            const Vector rec = qtt_reconstruct(t);
            const RankProfile prof = qtt_rank_profile(t);
            QttColumnReport rep;
            rep.axis = axis;
            rep.column = static_cast<Index>(c);
            rep.max_rank = prof.max_rank;
            rep.avg_rank = prof.avg_rank;
            const double denom = cols.col(static_cast<Index>(c)).norm();
            rep.rec_err = denom > 0.0
                              ? (rec.head(N) - cols.col(static_cast<Index>(c))).norm() / denom
                              : rec.head(N).norm();
            if (rule) {
                const Index q = static_cast<Index>(c) % R;
                const double tau = rule->exponents[q];
                rep.regime = std::sqrt(std::log(1.0 / eps)) / tau <= spec.unit.b ? 1 : 0;
            }
            const std::size_t slot = static_cast<std::size_t>(axis * cols_per_axis + c);
            out.columns[slot] = std::move(t);
            out.reports[slot] = rep;
        });
    }
    double sum = 0.0;
    for (const QttColumnReport& r : out.reports) sum += static_cast<double>(r.max_rank);
    out.avg_max_rank = sum / static_cast<double>(out.reports.size());
    return out;
}

} // namespace latsum
