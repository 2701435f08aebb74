#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "test_support.hpp"

namespace latsum {
namespace {

Vector random_vector(std::mt19937& gen, Index n) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Vector v(n);
    for (Index i = 0; i < n; ++i) v[i] = dist(gen);
    return v;
}

double rec_rel_err(const QTTVector& t, const Vector& v) {
    return (qtt_reconstruct(t) - v).norm() / v.norm();
}

TEST(QttBasics, PowerOfTwoHelpers) {
    EXPECT_TRUE(is_power_of_two(1));
    EXPECT_TRUE(is_power_of_two(2));
    EXPECT_TRUE(is_power_of_two(1024));
    EXPECT_FALSE(is_power_of_two(0));
    EXPECT_FALSE(is_power_of_two(3));
    EXPECT_FALSE(is_power_of_two(-4));
    EXPECT_EQ(log2_exact(1), 0);
    EXPECT_EQ(log2_exact(2), 1);
    EXPECT_EQ(log2_exact(4096), 12);
}

TEST(QttBasics, RejectsBadInput) {
    EXPECT_THROW(qtt_compress(Vector::Ones(6), 1e-8), validation_error);
    EXPECT_THROW(qtt_compress(Vector::Ones(1), 1e-8), validation_error);
    EXPECT_THROW(qtt_compress(Vector::Ones(8), 0.0), validation_error);
    EXPECT_THROW(unfolding_rank_profile(Vector::Ones(6), 1e-8), validation_error);
}

TEST(QttRanks, ConstantVectorIsRankOne) {
    QTTVector t = qtt_compress(Vector::Constant(256, 3.25), 1e-12);
    RankProfile prof = qtt_rank_profile(t);
    EXPECT_EQ(prof.max_rank, 1);
    EXPECT_DOUBLE_EQ(prof.avg_rank, 1.0);
    EXPECT_LT(rec_rel_err(t, Vector::Constant(256, 3.25)), 1e-12);
}

TEST(QttRanks, GeometricSequenceIsRankOne) {
    // rho^i factors over the bits of i, so every unfolding has rank 1.
    Vector v(512);
    for (Index i = 0; i < 512; ++i) v[i] = std::pow(0.99, static_cast<double>(i));
    QTTVector t = qtt_compress(v, 1e-12);
    EXPECT_EQ(qtt_rank_profile(t).max_rank, 1);
    EXPECT_LT(rec_rel_err(t, v), 1e-12);
}

TEST(QttRanks, ImpulseIsRankOne) {
    for (Index pos : {Index{0}, Index{7}, Index{100}, Index{255}}) {
        Vector v = Vector::Zero(256);
        v[pos] = 1.0;
        QTTVector t = qtt_compress(v, 1e-12);
        EXPECT_EQ(qtt_rank_profile(t).max_rank, 1) << "pos " << pos;
        EXPECT_LT((qtt_reconstruct(t) - v).norm(), 1e-13);
    }
}

TEST(QttRanks, SinusoidIsRankTwo) {
    // Angle addition splits sin(w i + c) into two separable terms per bit.
    for (double omega : {0.01, 0.37, 2.1}) {
        Vector v(1024);
        for (Index i = 0; i < 1024; ++i) v[i] = std::sin(omega * static_cast<double>(i) + 0.3);
        QTTVector t = qtt_compress(v, 1e-10);
        EXPECT_LE(qtt_rank_profile(t).max_rank, 2) << "omega " << omega;
        EXPECT_LT(rec_rel_err(t, v), 1e-10);
    }
}

TEST(QttRanks, PolynomialDegreeBoundsRank) {
    // Degree-m polynomials have quantized rank at most m + 1.
    Vector v(2048);
    for (Index i = 0; i < 2048; ++i) {
        const double x = static_cast<double>(i) / 2048.0;
        v[i] = ((x - 0.4) * x + 0.25) * x - 1.0;
    }
    QTTVector t = qtt_compress(v, 1e-11);
    EXPECT_LE(qtt_rank_profile(t).max_rank, 4);
    EXPECT_LT(rec_rel_err(t, v), 1e-11);
}

TEST(QttRanks, RandomVectorHasMaximalRanks) {
    std::mt19937 gen(77);
    Vector v = random_vector(gen, 256);
    QTTVector t = qtt_compress(v, 1e-14);
    const std::vector<Index> ranks = t.ranks();
    ASSERT_EQ(ranks.size(), 7u);
    for (std::size_t k = 0; k < ranks.size(); ++k) {
        const Index full = std::min(Index{1} << (k + 1), Index{256} >> (k + 1));
        EXPECT_EQ(ranks[k], full) << "level " << k;
    }
    EXPECT_LT(rec_rel_err(t, v), 1e-12);
}

TEST(QttCompress, HonorsErrorContract) {
    // The per-step budget guarantees a total 2-norm error <= eps * ||v||.
    std::mt19937 gen(78);
    for (double eps : {1e-2, 1e-4, 1e-8}) {
        for (int trial = 0; trial < 7; ++trial) {
            // Mix a smooth carrier with noise so truncation actually happens.
            Vector v = random_vector(gen, 1024);
            for (Index i = 0; i < 1024; ++i)
                v[i] = std::exp(-std::pow((static_cast<double>(i) - 512.0) / 150.0, 2)) +
                       0.01 * v[i];
            QTTVector t = qtt_compress(v, eps);
            EXPECT_LE((qtt_reconstruct(t) - v).norm(), eps * v.norm())
                << "eps " << eps << " trial " << trial;
        }
    }
}

TEST(QttCompress, SmoothVectorCompresses) {
    Vector v(4096);
    for (Index i = 0; i < 4096; ++i) {
        const double x = (static_cast<double>(i) + 0.5) / 4096.0 * 10.0 - 5.0;
        v[i] = std::exp(-x * x);
    }
    QTTVector t = qtt_compress(v, 1e-6);
    EXPECT_LE(qtt_rank_profile(t).max_rank, 25);
    EXPECT_LT(qtt_rank_profile(t).avg_rank, 15.0);
}

TEST(UnfoldingRanks, MatchesKnownCases) {
    std::vector<Index> constant = unfolding_rank_profile(Vector::Constant(128, 2.0), 1e-10);
    for (Index r : constant) EXPECT_EQ(r, 1);

    std::mt19937 gen(79);
    Vector v = random_vector(gen, 128);
    std::vector<Index> random_ranks = unfolding_rank_profile(v, 1e-14);
    ASSERT_EQ(random_ranks.size(), 6u);
    for (std::size_t k = 0; k < random_ranks.size(); ++k)
        EXPECT_EQ(random_ranks[k], std::min(Index{1} << (k + 1), Index{128} >> (k + 1)));

    // A huge tolerance collapses every unfolding to rank 1.
    EXPECT_EQ(max_unfolding_rank(v, 0.999), 1);
}

TEST(UnfoldingRanks, SweepRanksNeverBeatUnfoldingRanks) {
    // The sweep splits its budget, so its ranks dominate the intrinsic ones.
    std::mt19937 gen(80);
    for (int trial = 0; trial < 5; ++trial) {
        Vector v = random_vector(gen, 512);
        for (Index i = 0; i < 512; ++i)
            v[i] += 3.0 * std::cos(0.02 * static_cast<double>(i));
        const double eps = 1e-4;
        std::vector<Index> sweep = qtt_compress(v, eps).ranks();
        std::vector<Index> intrinsic = unfolding_rank_profile(v, eps);
        ASSERT_EQ(sweep.size(), intrinsic.size());
        for (std::size_t k = 0; k < sweep.size(); ++k) EXPECT_GE(sweep[k], intrinsic[k]);
    }
}

TEST(Modulation, IdentityModulatorPreservesEverything) {
    Vector x0(64);
    for (Index i = 0; i < 64; ++i)
        x0[i] = std::exp(-std::pow((static_cast<double>(i) - 32.0) / 8.0, 2));
    ModulationReport rep = block_modulated_vector(x0, 1, Vector::Ones(64), 1e-10);
    EXPECT_TRUE((rep.x.array() == x0.array()).all());
    EXPECT_TRUE((rep.fx.array() == x0.array()).all());
    EXPECT_EQ(rep.rF, 1);
    EXPECT_EQ(rep.rx, rep.r0);
    EXPECT_TRUE(rep.tiling_bound_ok);
    EXPECT_TRUE(rep.product_bound_ok);
}

TEST(Modulation, TilingAndProductBoundsHold) {
    const Index block = 64, n_blocks = 8, total = block * n_blocks;
    Vector x0(block);
    for (Index i = 0; i < block; ++i)
        x0[i] = std::exp(-std::pow((static_cast<double>(i) + 0.5 - 32.0) / 6.0, 2));
    Vector F(total);
    for (Index i = 0; i < total; ++i) {
        const double tpos = (static_cast<double>(i) + 0.5) / static_cast<double>(total);
        F[i] = std::sin(2.0 * M_PI * 3.0 * tpos + 0.4) + 1.2;
    }
    ModulationReport rep = block_modulated_vector(x0, n_blocks, F, 1e-10);
    EXPECT_TRUE(rep.tiling_bound_ok);
    EXPECT_TRUE(rep.product_bound_ok);
    EXPECT_LE(rep.rx, rep.r0);
    EXPECT_LE(rep.rfx, rep.rF * rep.r0);
    // The tiled copy really is periodic replication.
    for (Index blk = 0; blk < n_blocks; ++blk)
        EXPECT_TRUE((rep.x.segment(blk * block, block).array() == x0.array()).all());
}

TEST(Modulation, RejectsBadShapes) {
    Vector x0 = Vector::Ones(64);
    EXPECT_THROW(block_modulated_vector(Vector::Ones(6), 2, Vector::Ones(12), 1e-8),
                 validation_error);
    EXPECT_THROW(block_modulated_vector(x0, 3, Vector::Ones(192), 1e-8), validation_error);
    EXPECT_THROW(block_modulated_vector(x0, 2, Vector::Ones(100), 1e-8), validation_error);
}

TEST(AssembledQtt, ReportsCoverEveryColumn) {
    LatticeSpec spec;
    spec.L = {2, 1, 1};
    spec.unit = GridSpec{2.0, 8};
    spec.charges = {Charge{}};
    QuadratureRule rule = calibrate_for_lattice(spec, 1e-4);
    CanonicalTensor3 master = build_lattice_master(spec, rule);
    AssembledQttResult res = assembled_qtt_sum(spec, master, 1e-8, &rule);
    const Index R = rule.node_count();
    ASSERT_EQ(res.columns.size(), static_cast<std::size_t>(3 * R));
    ASSERT_EQ(res.reports.size(), static_cast<std::size_t>(3 * R));
    EXPECT_EQ(res.padded_len, (Dims3{16, 8, 8}));
    for (const QttColumnReport& rep : res.reports) {
        EXPECT_LE(rep.rec_err, 1e-8);
        EXPECT_GE(rep.max_rank, 1);
        EXPECT_TRUE(rep.regime == 0 || rep.regime == 1);
    }
    EXPECT_GE(res.avg_max_rank, 1.0);

    AssembledQttResult untagged = assembled_qtt_sum(spec, master, 1e-8);
    for (const QttColumnReport& rep : untagged.reports) EXPECT_EQ(rep.regime, -1);
}

TEST(AssembledQtt, PadsNonPowerOfTwoAxes) {
    LatticeSpec spec;
    spec.L = {3, 1, 1};
    spec.unit = GridSpec{2.0, 6};
    spec.charges = {Charge{}};
    QuadratureRule rule = calibrate_for_lattice(spec, 1e-4);
    CanonicalTensor3 master = build_lattice_master(spec, rule);
    AssembledQttResult res = assembled_qtt_sum(spec, master, 1e-8, &rule);
    EXPECT_EQ(res.padded_len, (Dims3{32, 8, 8}));  // 18 -> 32, 6 -> 8
    for (const QttColumnReport& rep : res.reports) EXPECT_LE(rep.rec_err, 1e-8);
    EXPECT_THROW(assembled_qtt_sum(spec, master, 1e-8, &rule, 16), resource_guard_error);
}

TEST(AssembledQtt, ReconstructedColumnsRebuildTheSum) {
    // Rebuilding the factor matrices from the compressed columns must
    // reproduce the assembled tensor to a small multiple of eps.
    const double eps = 1e-8;
    LatticeSpec spec;
    spec.L = {2, 2, 2};
    spec.unit = GridSpec{2.0, 4};
    spec.charges = {Charge{}};
    QuadratureRule rule = calibrate_for_lattice(spec, 1e-4);
    CanonicalTensor3 master = build_lattice_master(spec, rule);
    SumResult assembled = assembled_box_sum(spec, master);
    AssembledQttResult res = assembled_qtt_sum(spec, master, eps, &rule);

    const Index R = rule.node_count();
    std::array<Matrix, 3> factors;
    for (int axis = 0; axis < 3; ++axis) {
        const Index N = spec.target_cells(axis);
        factors[static_cast<std::size_t>(axis)].resize(N, R);
        for (Index q = 0; q < R; ++q) {
            const Vector rec = qtt_reconstruct(res.columns[static_cast<std::size_t>(axis * R + q)]);
            factors[static_cast<std::size_t>(axis)].col(q) = rec.head(N);
        }
    }
    CanonicalTensor3 rebuilt(std::move(factors), Vector(assembled.tensor.weights()));
    StreamDiff d = max_norm_diff_canonical(rebuilt, assembled.tensor);
    EXPECT_LE(d.max_diff, 10.0 * eps * d.max_abs_b);
}

TEST(GaussianRankGrowth, LogarithmicInTolerance) {
    // Midpoint samples of a Gaussian over its essential support: the max
    // quantized rank grows at most affinely in ln(1/eps).
    const Index N = Index{1} << 12;
    const double p = 1.0;
    std::vector<double> log_inv_eps, max_ranks;
    for (double eps : {1e-3, 1e-5, 1e-7}) {
        const double a = std::sqrt(2.0) * p * std::sqrt(std::log(1.0 / eps));
        Vector v(N);
        for (Index i = 0; i < N; ++i) {
            const double x =
                (static_cast<double>(i) + 0.5) / static_cast<double>(N) * 2.0 * a - a;
            v[i] = std::exp(-x * x / (2.0 * p * p));
        }
        const Index r = max_unfolding_rank(v, eps);
        log_inv_eps.push_back(std::log(1.0 / eps));
        max_ranks.push_back(static_cast<double>(r));
        EXPECT_LE(r, 25);
    }
    const double slope =
        (max_ranks[2] - max_ranks[0]) / (log_inv_eps[2] - log_inv_eps[0]);
    EXPECT_GE(slope, 0.0);
    EXPECT_LE(slope, 4.0);
}

} // namespace
} // namespace latsum
