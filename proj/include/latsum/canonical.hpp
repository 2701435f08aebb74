#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "latsum/errors.hpp"
#include "latsum/parallel.hpp"

namespace latsum {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

using Dims3 = std::array<Index, 3>;

inline std::string dims_to_string(const Dims3& d) {
    std::ostringstream os;
    os << "(" << d[0] << ", " << d[1] << ", " << d[2] << ")";
    return os.str();
}

// Rank-R canonical tensor: entry (i,j,k) = sum_q w_q * A1(i,q) * A2(j,q) * A3(k,q).
// Weights are kept separate from the factor columns (they are folded into
// columns only by add_coalescing). Rank 0 is the zero tensor of its dims.
// Immutable after construction.
class CanonicalTensor3 {
public:
    CanonicalTensor3() : CanonicalTensor3(Dims3{0, 0, 0}) {}

    // Zero tensor of the given dims (rank 0).
    explicit CanonicalTensor3(const Dims3& dims) : weights_(0) {
        for (int l = 0; l < 3; ++l) factors_[l].resize(dims[l], 0);
    }

    CanonicalTensor3(std::array<Matrix, 3> factors, Vector weights)
        : factors_(std::move(factors)), weights_(std::move(weights)) {
        const Index r = weights_.size();
        for (int l = 0; l < 3; ++l) {
            if (factors_[l].cols() != r)
                throw validation_error("canonical tensor: factor " + std::to_string(l) +
                                       " has " + std::to_string(factors_[l].cols()) +
                                       " columns, expected rank " + std::to_string(r));
            if (!factors_[l].allFinite())
                throw validation_error("canonical tensor: factor " + std::to_string(l) +
                                       " contains a non-finite value");
        }
        if (!weights_.allFinite())
            throw validation_error("canonical tensor: weights contain a non-finite value");
    }

    // Assembly paths whose components are linear combinations of factors from
    // already-validated tensors may skip the finiteness rescan; ranks are
    // still checked. Callers own the finiteness guarantee.
    struct trusted_components_t {};
    CanonicalTensor3(trusted_components_t, std::array<Matrix, 3> factors, Vector weights)
        : factors_(std::move(factors)), weights_(std::move(weights)) {
        const Index r = weights_.size();
        for (int l = 0; l < 3; ++l)
            if (factors_[l].cols() != r)
                throw validation_error("canonical tensor: factor " + std::to_string(l) +
                                       " has " + std::to_string(factors_[l].cols()) +
                                       " columns, expected rank " + std::to_string(r));
    }

    Index rank() const { return weights_.size(); }
    Index dim(int axis) const { return factors_[static_cast<std::size_t>(axis)].rows(); }
    Dims3 dims() const { return {factors_[0].rows(), factors_[1].rows(), factors_[2].rows()}; }

    const Matrix& factor(int axis) const { return factors_[static_cast<std::size_t>(axis)]; }
    const Vector& weights() const { return weights_; }

private:
    std::array<Matrix, 3> factors_;
    Vector weights_;
};

// Dense materialization target; column-major (first index fastest). Meant for
// oracle-sized grids, so all storage is a single flat array.
class DenseTensor3 {
public:
    DenseTensor3(Index n1, Index n2, Index n3)
        : dims_{n1, n2, n3}, data_(Vector::Zero(n1 * n2 * n3)) {}

    const Dims3& dims() const { return dims_; }
    Index size() const { return data_.size(); }

    double operator()(Index i, Index j, Index k) const {
        return data_[i + dims_[0] * (j + dims_[1] * k)];
    }
    double& operator()(Index i, Index j, Index k) {
        return data_[i + dims_[0] * (j + dims_[1] * k)];
    }

    const Vector& data() const { return data_; }
    Vector& data() { return data_; }

    // n1 x n2 slice at third index k.
    Eigen::Map<Matrix> slab(Index k) {
        return Eigen::Map<Matrix>(data_.data() + dims_[0] * dims_[1] * k, dims_[0], dims_[1]);
    }
    Eigen::Map<const Matrix> slab(Index k) const {
        return Eigen::Map<const Matrix>(data_.data() + dims_[0] * dims_[1] * k, dims_[0], dims_[1]);
    }

private:
    Dims3 dims_;
    Vector data_;
};

inline void require_same_dims(const Dims3& a, const Dims3& b, const char* op) {
    if (a != b)
        throw validation_error(std::string(op) + ": dimension mismatch " + dims_to_string(a) +
                               " vs " + dims_to_string(b));
}

// <A, B> = sum_{i,j} cA_i cB_j prod_l <a_i^(l), b_j^(l)>. The per-axis Gram
// matrices give the O(d n Ra Rb) cost; the final reduction runs rank-major
// (i outer, j inner) so results are reproducible bit for bit.
inline double scalar_product(const CanonicalTensor3& a, const CanonicalTensor3& b) {
    require_same_dims(a.dims(), b.dims(), "scalar_product");
    if (a.rank() == 0 || b.rank() == 0) return 0.0;
    std::array<Matrix, 3> gram;
    for (int l = 0; l < 3; ++l) gram[l] = a.factor(l).transpose() * b.factor(l);
    double sum = 0.0;
    for (Index i = 0; i < a.rank(); ++i)
        for (Index j = 0; j < b.rank(); ++j)
            sum += a.weights()[i] * b.weights()[j] * gram[0](i, j) * gram[1](i, j) * gram[2](i, j);
    return sum;
}

// Entrywise product; rank multiplies. Column order is rank-major in (i, j),
// i.e. result column q = i*Rb + j.
inline CanonicalTensor3 hadamard(const CanonicalTensor3& a, const CanonicalTensor3& b) {
    require_same_dims(a.dims(), b.dims(), "hadamard");
    const Index ra = a.rank(), rb = b.rank();
    std::array<Matrix, 3> factors;
    for (int l = 0; l < 3; ++l) factors[l].resize(a.dim(l), ra * rb);
    Vector weights(ra * rb);
    for (Index i = 0; i < ra; ++i) {
        for (Index j = 0; j < rb; ++j) {
            const Index q = i * rb + j;
            weights[q] = a.weights()[i] * b.weights()[j];
            for (int l = 0; l < 3; ++l)
                factors[l].col(q) = a.factor(l).col(i).cwiseProduct(b.factor(l).col(j));
        }
    }
    return CanonicalTensor3(std::move(factors), std::move(weights));
}

// Concatenation sum: rank adds, A's columns first.
inline CanonicalTensor3 add(const CanonicalTensor3& a, const CanonicalTensor3& b) {
    require_same_dims(a.dims(), b.dims(), "add");
    const Index ra = a.rank(), rb = b.rank();
    std::array<Matrix, 3> factors;
    for (int l = 0; l < 3; ++l) {
        factors[l].resize(a.dim(l), ra + rb);
        factors[l].leftCols(ra) = a.factor(l);
        factors[l].rightCols(rb) = b.factor(l);
    }
    Vector weights(ra + rb);
    weights.head(ra) = a.weights();
    weights.tail(rb) = b.weights();
    return CanonicalTensor3(std::move(factors), std::move(weights));
}

// Rank-preserving sum for two tensors whose factor matrices coincide on every
// axis except one. On that shared axis, column q of the result is
// cA_q * a_q + cB_q * b_q (weights folded in, result weights all 1); the other
// axes must match bitwise and are passed through.
inline CanonicalTensor3 add_coalescing(const CanonicalTensor3& a, const CanonicalTensor3& b,
                                       int shared_axis) {
    require_same_dims(a.dims(), b.dims(), "add_coalescing");
    if (shared_axis < 0 || shared_axis > 2)
        throw validation_error("add_coalescing: shared axis must be 0, 1 or 2");
    if (a.rank() != b.rank())
        throw validation_error("add_coalescing: rank mismatch " + std::to_string(a.rank()) +
                               " vs " + std::to_string(b.rank()));
    for (int l = 0; l < 3; ++l) {
        if (l == shared_axis) continue;
        if (!(a.factor(l).array() == b.factor(l).array()).all())
            throw validation_error("add_coalescing: factor matrices differ on non-shared axis " +
                                   std::to_string(l));
    }
    std::array<Matrix, 3> factors;
    for (int l = 0; l < 3; ++l) factors[l] = a.factor(l);
    Matrix& shared = factors[static_cast<std::size_t>(shared_axis)];
    for (Index q = 0; q < a.rank(); ++q)
        shared.col(q) = a.weights()[q] * a.factor(shared_axis).col(q) +
                        b.weights()[q] * b.factor(shared_axis).col(q);
    return CanonicalTensor3(std::move(factors), Vector::Ones(a.rank()));
}

enum class ConvMode { full, same };

// 1D discrete convolution, "full" length na+nb-1. "same" keeps na entries of
// the full result starting at offset nb/2, so convolving with a unit impulse
// at index nb/2 is the identity.
inline Vector convolve1d(const Vector& a, const Vector& b, ConvMode mode) {
    const Index na = a.size(), nb = b.size();
    Vector full = Vector::Zero(na + nb - 1);
    for (Index i = 0; i < na; ++i)
        for (Index j = 0; j < nb; ++j) full[i + j] += a[i] * b[j];
    if (mode == ConvMode::full) return full;
    return full.segment(nb / 2, na);
}

// Separable convolution: every pair of rank-1 terms convolves per axis.
// Rank multiplies; pair order matches hadamard (q = i*Rb + j).
inline CanonicalTensor3 convolve1d_canonical(const CanonicalTensor3& a, const CanonicalTensor3& b,
                                             ConvMode mode) {
    require_same_dims(a.dims(), b.dims(), "convolve1d_canonical");
    const Index ra = a.rank(), rb = b.rank();
    Dims3 out_dims;
    for (int l = 0; l < 3; ++l)
        out_dims[l] = (mode == ConvMode::full) ? a.dim(l) + b.dim(l) - 1 : a.dim(l);
    std::array<Matrix, 3> factors;
    for (int l = 0; l < 3; ++l) factors[l].resize(out_dims[l], ra * rb);
    Vector weights(ra * rb);
    for (Index i = 0; i < ra; ++i) {
        for (Index j = 0; j < rb; ++j) {
            const Index q = i * rb + j;
            weights[q] = a.weights()[i] * b.weights()[j];
            for (int l = 0; l < 3; ++l)
                factors[l].col(q) = convolve1d(a.factor(l).col(i), b.factor(l).col(j), mode);
        }
    }
    return CanonicalTensor3(std::move(factors), std::move(weights));
}

inline constexpr std::size_t default_densify_guard = std::size_t{1} << 27;

namespace detail {
// Writes slab k of the materialized tensor: A1 * diag(w .* A3(k, :)) * A2^T.
inline void densify_slab(const CanonicalTensor3& a, Index k, Matrix& out) {
    out.setZero(a.dim(0), a.dim(1));
    if (a.rank() == 0) return;
    const Vector scale = a.weights().cwiseProduct(a.factor(2).row(k).transpose());
    out.noalias() = a.factor(0) * scale.asDiagonal() * a.factor(1).transpose();
}
} // namespace detail

// Exact materialization. Refuses grids above the entry guard; the slab loop
// parallelizes over the third axis and each slab is a deterministic GEMM.
inline DenseTensor3 densify(const CanonicalTensor3& a,
                            std::size_t guard = default_densify_guard) {
    const Dims3 d = a.dims();
    const std::size_t total = static_cast<std::size_t>(d[0]) * static_cast<std::size_t>(d[1]) *
                              static_cast<std::size_t>(d[2]);
    if (total > guard)
        throw resource_guard_error("densify: " + std::to_string(total) +
                                   " entries exceed the guard of " + std::to_string(guard));
    DenseTensor3 out(d[0], d[1], d[2]);
    parallel_for(d[2], [&](std::int64_t k) {
        Matrix slab;
        detail::densify_slab(a, static_cast<Index>(k), slab);
        out.slab(static_cast<Index>(k)) = slab;
    });
    return out;
}

inline double max_norm_diff(const DenseTensor3& a, const DenseTensor3& b) {
    require_same_dims(a.dims(), b.dims(), "max_norm_diff");
    if (a.size() == 0) return 0.0;
    return (a.data() - b.data()).cwiseAbs().maxCoeff();
}

// Streaming max |A - B| over the full grid without materializing either
// tensor; also reports max |B| for relative error scaling. Works slab by slab,
// so grids far above the densify guard are fine.
struct StreamDiff {
    double max_diff = 0.0;
    double max_abs_b = 0.0;
};

inline StreamDiff max_norm_diff_canonical(const CanonicalTensor3& a, const CanonicalTensor3& b) {
    require_same_dims(a.dims(), b.dims(), "max_norm_diff_canonical");
    const Index n3 = a.dim(2);
    std::vector<StreamDiff> per_slab(static_cast<std::size_t>(n3));
    parallel_for(n3, [&](std::int64_t k) {
        Matrix sa, sb;
        detail::densify_slab(a, static_cast<Index>(k), sa);
        detail::densify_slab(b, static_cast<Index>(k), sb);
        StreamDiff d;
        d.max_diff = (sa - sb).cwiseAbs().maxCoeff();
        d.max_abs_b = sb.cwiseAbs().maxCoeff();
        per_slab[static_cast<std::size_t>(k)] = d;
    });
    StreamDiff total;
    for (const StreamDiff& d : per_slab) {
        total.max_diff = std::max(total.max_diff, d.max_diff);
        total.max_abs_b = std::max(total.max_abs_b, d.max_abs_b);
    }
    return total;
}

// Single entry in O(R); the accumulation runs in rank order.
inline double eval_point(const CanonicalTensor3& a, Index i, Index j, Index k) {
    const Dims3 d = a.dims();
    if (i < 0 || i >= d[0] || j < 0 || j >= d[1] || k < 0 || k >= d[2])
        throw validation_error("eval_point: index (" + std::to_string(i) + ", " +
                               std::to_string(j) + ", " + std::to_string(k) +
                               ") out of range for dims " + dims_to_string(d));
    double sum = 0.0;
    for (Index q = 0; q < a.rank(); ++q)
        sum += a.weights()[q] * a.factor(0)(i, q) * a.factor(1)(j, q) * a.factor(2)(k, q);
    return sum;
}

} // namespace latsum
