#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "test_support.hpp"

namespace latsum {
namespace {

using testing::random_tensor;

std::vector<GaussianBasisSpec> three_gaussians() {
    return {GaussianBasisSpec{{0.0, 0.0, 0.0}, 0.5},
            GaussianBasisSpec{{0.25, 0.0, -0.25}, 0.7},
            GaussianBasisSpec{{-0.5, 0.25, 0.0}, 0.9}};
}

// Dense oracle: sample every basis function on the full 3D grid and take the
// triple-loop weighted sum against a densified potential.
Matrix dense_potential_matrix(const GridSpec& grid, const std::vector<GaussianBasisSpec>& specs,
                              const CanonicalTensor3& P, bool volume_element) {
    const Index n = grid.n;
    const Index nb = static_cast<Index>(specs.size());
    DenseTensor3 dense = densify(P);
    std::vector<std::vector<double>> g(static_cast<std::size_t>(nb));
    for (Index f = 0; f < nb; ++f) {
        g[static_cast<std::size_t>(f)].resize(static_cast<std::size_t>(n * n * n));
        for (Index k = 0; k < n; ++k)
            for (Index j = 0; j < n; ++j)
                for (Index i = 0; i < n; ++i) {
                    const double dx = grid.midpoint(i) - specs[static_cast<std::size_t>(f)].center[0];
                    const double dy = grid.midpoint(j) - specs[static_cast<std::size_t>(f)].center[1];
                    const double dz = grid.midpoint(k) - specs[static_cast<std::size_t>(f)].center[2];
                    const double s2 = 2.0 * specs[static_cast<std::size_t>(f)].sigma *
                                      specs[static_cast<std::size_t>(f)].sigma;
                    g[static_cast<std::size_t>(f)][static_cast<std::size_t>(i + n * (j + n * k))] =
                        std::exp(-(dx * dx + dy * dy + dz * dz) / s2);
                }
    }
    const double scale = volume_element ? std::pow(grid.h(), 3) : 1.0;
    Matrix V(nb, nb);
    for (Index a = 0; a < nb; ++a)
        for (Index c = 0; c < nb; ++c) {
            double sum = 0.0;
            for (Index k = 0; k < n; ++k)
                for (Index j = 0; j < n; ++j)
                    for (Index i = 0; i < n; ++i)
                        sum += g[static_cast<std::size_t>(a)]
                                [static_cast<std::size_t>(i + n * (j + n * k))] *
                               g[static_cast<std::size_t>(c)]
                                [static_cast<std::size_t>(i + n * (j + n * k))] *
                               dense(i, j, k);
            V(a, c) = scale * sum;
        }
    return V;
}

TEST(GaussianBasis, SamplesMidpointValues) {
    GridSpec grid{2.0, 8};
    Rank1Basis basis = sample_gaussian_basis(grid, three_gaussians());
    EXPECT_EQ(basis.size(), 3);
    EXPECT_EQ(basis.n, 8);
    EXPECT_DOUBLE_EQ(basis.h, 0.25);
    const GaussianBasisSpec s = three_gaussians()[1];
    for (Index i = 0; i < 8; ++i) {
        const double d = grid.midpoint(i) - s.center[0];
        EXPECT_DOUBLE_EQ(basis.funcs[1][0][i], std::exp(-d * d / (2.0 * s.sigma * s.sigma)));
    }
}

TEST(GaussianBasis, HugeWidthGivesOnes) {
    GridSpec grid{2.0, 8};
    Rank1Basis basis =
        sample_gaussian_basis(grid, {GaussianBasisSpec{{0.0, 0.0, 0.0}, 1e8}});
    for (int l = 0; l < 3; ++l)
        for (Index i = 0; i < 8; ++i) EXPECT_NEAR(basis.funcs[0][static_cast<std::size_t>(l)][i], 1.0, 1e-15);
}

TEST(GaussianBasis, CenteredFunctionIsEven) {
    GridSpec grid{2.0, 8};
    Rank1Basis basis = sample_gaussian_basis(grid, {GaussianBasisSpec{{0.0, 0.0, 0.0}, 0.6}});
    for (int l = 0; l < 3; ++l)
        for (Index i = 0; i < 8; ++i)
            EXPECT_EQ(basis.funcs[0][static_cast<std::size_t>(l)][i],
                      basis.funcs[0][static_cast<std::size_t>(l)][7 - i]);
}

TEST(GaussianBasis, RejectsBadSpecs) {
    GridSpec grid{2.0, 8};
    EXPECT_THROW(sample_gaussian_basis(grid, {}), validation_error);
    EXPECT_THROW(sample_gaussian_basis(grid, {GaussianBasisSpec{{0, 0, 0}, 0.0}}),
                 validation_error);
    EXPECT_THROW(sample_gaussian_basis(grid, {GaussianBasisSpec{{0, 0, 0}, -1.0}}),
                 validation_error);
    GaussianBasisSpec nan_center{{std::nan(""), 0.0, 0.0}, 1.0};
    EXPECT_THROW(sample_gaussian_basis(grid, {nan_center}), validation_error);
}

TEST(PotentialMatrix, OnesBasisSumsAllEntries) {
    // A single flat basis function reduces V to the plain tensor entry sum.
    GridSpec grid{2.0, 4};
    Rank1Basis basis = sample_gaussian_basis(grid, {GaussianBasisSpec{{0.0, 0.0, 0.0}, 1e9}});
    CanonicalTensor3 ones = testing::constant_tensor({4, 4, 4}, 0.5);
    Matrix V = potential_matrix(basis, ones, false);
    ASSERT_EQ(V.rows(), 1);
    EXPECT_NEAR(V(0, 0), 0.5 * 64.0, 1e-10);
    Matrix Vh = potential_matrix(basis, ones, true);
    EXPECT_NEAR(Vh(0, 0), 0.5 * 64.0 * std::pow(0.5, 3), 1e-10);
}

TEST(PotentialMatrix, MatchesDenseTripleLoopOracle) {
    GridSpec grid{2.0, 8};
    std::vector<GaussianBasisSpec> specs = three_gaussians();
    Rank1Basis basis = sample_gaussian_basis(grid, specs);
    QuadratureRule rule =
        calibrate_quadrature(grid, default_tolerance(grid, 1e-4));
    CanonicalTensor3 P = build_newton_tensor(grid, rule);
    for (bool volume : {false, true}) {
        Matrix V = potential_matrix(basis, P, volume);
        Matrix want = dense_potential_matrix(grid, specs, P, volume);
        const double scale = want.cwiseAbs().maxCoeff();
        EXPECT_LT((V - want).cwiseAbs().maxCoeff() / scale, 1e-11) << "volume " << volume;
    }
}

TEST(PotentialMatrix, ExactlySymmetric) {
    GridSpec grid{2.0, 8};
    Rank1Basis basis = sample_gaussian_basis(grid, three_gaussians());
    std::mt19937 gen(99);
    CanonicalTensor3 P = random_tensor(gen, {8, 8, 8}, 5);
    Matrix V = potential_matrix(basis, P, true);
    for (Index k = 0; k < 3; ++k)
        for (Index m = 0; m < 3; ++m) EXPECT_EQ(V(k, m), V(m, k));
}

TEST(PotentialMatrix, BilinearInThePotential) {
    GridSpec grid{2.0, 6};
    Rank1Basis basis = sample_gaussian_basis(grid, three_gaussians());
    std::mt19937 gen(100);
    CanonicalTensor3 A = random_tensor(gen, {6, 6, 6}, 3);
    CanonicalTensor3 B = random_tensor(gen, {6, 6, 6}, 2);
    Matrix VA = potential_matrix(basis, A, true);
    Matrix VB = potential_matrix(basis, B, true);
    Matrix VAB = potential_matrix(basis, add(A, B), true);
    const double scale = VAB.cwiseAbs().maxCoeff();
    EXPECT_LT((VAB - (VA + VB)).cwiseAbs().maxCoeff() / scale, 1e-13);
}

TEST(PotentialMatrix, RejectsDimMismatch) {
    GridSpec grid{2.0, 8};
    Rank1Basis basis = sample_gaussian_basis(grid, three_gaussians());
    CanonicalTensor3 wrong = testing::constant_tensor({8, 8, 6}, 1.0);
    EXPECT_THROW(potential_matrix(basis, wrong, true), validation_error);
    Rank1Basis empty;
    empty.n = 8;
    EXPECT_THROW(potential_matrix(empty, testing::constant_tensor({8, 8, 8}, 1.0), true),
                 validation_error);
}

} // namespace
} // namespace latsum
