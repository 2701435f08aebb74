#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include <gtest/gtest.h>

#include "test_support.hpp"

namespace latsum {
namespace {

namespace fs = std::filesystem;

class BundleTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("latsum_test_" + std::to_string(::getpid()) + "_" +
                ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    fs::path dir_;
};

TEST_F(BundleTest, RoundTripsBitExactly) {
    std::mt19937 gen(201);
    CanonicalTensor3 t = testing::random_tensor(gen, {6, 4, 5}, 3);
    TensorBundle in{t, 0.125, {-1.0, 0.5, 2.0}};
    save_bundle(path("t.bundle"), in);
    TensorBundle out = load_bundle(path("t.bundle"));
    EXPECT_EQ(out.h, in.h);
    EXPECT_EQ(out.origin, in.origin);
    EXPECT_EQ(out.tensor.dims(), t.dims());
    EXPECT_EQ(out.tensor.rank(), t.rank());
    EXPECT_TRUE((out.tensor.weights().array() == t.weights().array()).all());
    for (int l = 0; l < 3; ++l)
        EXPECT_TRUE((out.tensor.factor(l).array() == t.factor(l).array()).all());
}

TEST_F(BundleTest, RoundTripsRankZero) {
    TensorBundle in{CanonicalTensor3(Dims3{3, 3, 3}), 0.5, {0.0, 0.0, 0.0}};
    save_bundle(path("zero.bundle"), in);
    TensorBundle out = load_bundle(path("zero.bundle"));
    EXPECT_EQ(out.tensor.rank(), 0);
    EXPECT_EQ(out.tensor.dims(), (Dims3{3, 3, 3}));
}

TEST_F(BundleTest, RejectsMissingCorruptAndTruncatedFiles) {
    EXPECT_THROW(load_bundle(path("missing.bundle")), validation_error);

    std::ofstream bad(path("bad.bundle"), std::ios::binary);
    bad << "NOTABNDL" << std::string(80, '\0');
    bad.close();
    EXPECT_THROW(load_bundle(path("bad.bundle")), validation_error);

    std::mt19937 gen(202);
    CanonicalTensor3 t = testing::random_tensor(gen, {4, 4, 4}, 2);
    save_bundle(path("full.bundle"), TensorBundle{t, 0.25, {0, 0, 0}});
    const auto full_size = fs::file_size(path("full.bundle"));
    std::ifstream src(path("full.bundle"), std::ios::binary);
    std::string head(static_cast<std::size_t>(full_size) / 2, '\0');
    src.read(head.data(), static_cast<std::streamsize>(head.size()));
    std::ofstream cut(path("cut.bundle"), std::ios::binary);
    cut.write(head.data(), static_cast<std::streamsize>(head.size()));
    cut.close();
    EXPECT_THROW(load_bundle(path("cut.bundle")), validation_error);
}

TEST(FormatDouble, RoundTripsExactly) {
    std::mt19937 gen(203);
    std::uniform_real_distribution<double> dist(-1e6, 1e6);
    for (int i = 0; i < 200; ++i) {
        const double x = dist(gen) * std::pow(10.0, (i % 13) - 6);
        EXPECT_EQ(std::stod(format_double(x)), x);
    }
    EXPECT_EQ(std::stod(format_double(1.0 / 3.0)), 1.0 / 3.0);
    EXPECT_EQ(std::stod(format_double(0.0)), 0.0);
}

TEST_F(BundleTest, ReadsChargesCsvWithAndWithoutHeader) {
    {
        std::ofstream out(path("charges.csv"));
        out << "x_au,y_au,z_au,Z\n";
        out << "0.0,0.0,0.0,1.0\n";
        out << "0.25,-0.25,0.5,2.5\n";
    }
    std::vector<Charge> charges = read_charges_csv(path("charges.csv"));
    ASSERT_EQ(charges.size(), 2u);
    EXPECT_EQ(charges[1].pos[0], 0.25);
    EXPECT_EQ(charges[1].Z, 2.5);

    {
        std::ofstream out(path("bare.csv"));
        out << "0.5,0,0,3\n";
    }
    std::vector<Charge> bare = read_charges_csv(path("bare.csv"));
    ASSERT_EQ(bare.size(), 1u);
    EXPECT_EQ(bare[0].Z, 3.0);
}

TEST_F(BundleTest, RejectsMalformedCsv) {
    {
        std::ofstream out(path("short.csv"));
        out << "x,y,z,Z\n0.0,0.0,1.0\n";
    }
    EXPECT_THROW(read_charges_csv(path("short.csv")), validation_error);
    {
        std::ofstream out(path("text.csv"));
        out << "x,y,z,Z\n0.0,oops,0.0,1.0\n";
    }
    EXPECT_THROW(read_charges_csv(path("text.csv")), validation_error);
    {
        std::ofstream out(path("empty.csv"));
        out << "x,y,z,Z\n";
    }
    EXPECT_THROW(read_charges_csv(path("empty.csv")), validation_error);
    EXPECT_THROW(read_charges_csv(path("nonexistent.csv")), validation_error);
}

TEST_F(BundleTest, ReadsBasisCsv) {
    {
        std::ofstream out(path("basis.csv"));
        out << "cx_au,cy_au,cz_au,sigma_au\n";
        out << "0.0,0.0,0.0,0.5\n";
        out << "0.25,0.0,-0.25,0.7\n";
        out << "-0.5,0.25,0.0,0.9\n";
    }
    std::vector<GaussianBasisSpec> basis = read_basis_csv(path("basis.csv"));
    ASSERT_EQ(basis.size(), 3u);
    EXPECT_EQ(basis[2].sigma, 0.9);
    EXPECT_EQ(basis[2].center[0], -0.5);
}

TEST_F(BundleTest, BundleCarriesLatticeResults) {
    // End-to-end: assemble a box sum, save, reload, evaluate.
    LatticeSpec spec;
    spec.L = {2, 1, 1};
    spec.unit = GridSpec{2.0, 8};
    spec.charges = {Charge{}};
    QuadratureRule rule = calibrate_for_lattice(spec, 1e-4);
    CanonicalTensor3 master = build_lattice_master(spec, rule);
    SumResult sum = assembled_box_sum(spec, master);
    TensorBundle bundle{sum.tensor, spec.unit.h(),
                        {GridSpec::midpoint(0, 16, 0.25), GridSpec::midpoint(0, 8, 0.25),
                         GridSpec::midpoint(0, 8, 0.25)}};
    save_bundle(path("sum.bundle"), bundle);
    TensorBundle loaded = load_bundle(path("sum.bundle"));
    EXPECT_EQ(loaded.tensor.dims(), (Dims3{16, 8, 8}));
    EXPECT_EQ(eval_point(loaded.tensor, 8, 4, 4), eval_point(sum.tensor, 8, 4, 4));
}

} // namespace
} // namespace latsum
