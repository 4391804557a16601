#include <gtest/gtest.h>

#include <random>

#include "support/helpers.hpp"

using namespace framelab;

TEST(Naimark, RandomParsevalFramesComplete) {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t n = 1 + rng() % 4;
        const std::size_t m = n + rng() % (9 - n);
        const auto f = testing_support::random_parseval(rng, m, n);
        for (const bool random : {false, true}) {
            const auto nc = random ? naimark_complement(f, {}, std::uint64_t(trial)) : naimark_complement(f);
            EXPECT_EQ(nc.family.size(), m);
            EXPECT_EQ(nc.family.dim(), m - n);
            const auto cert = verify_naimark_pair(f, nc.family);
            EXPECT_TRUE(cert.pass) << "trial " << trial;
            EXPECT_LE(cert.max_residual, 1e-10);
        }
    }
}

TEST(Naimark, SquareFrameHasZeroComplement) {
    const auto f = to_float(testing_support::family(2, {{1, 0}, {0, 1}}));
    const auto nc = naimark_complement(f);
    EXPECT_TRUE(nc.zero_complement);
    EXPECT_EQ(nc.family.dim(), 0u);
    EXPECT_TRUE(verify_naimark_pair(f, nc.family).pass);
}

TEST(Naimark, RejectsNonParseval) {
    EXPECT_THROW(naimark_complement(to_float(testing_support::family(2, {{1, 0}, {0, 1}, {1, 1}}))), FrameError);
}

TEST(Naimark, ExactInputIsConvertedWithANote) {
    const auto nc = naimark_complement(testing_support::family(2, {{1, 0}, {0, 1}}));
    EXPECT_FALSE(nc.conversion_note.empty());
}

TEST(Naimark, ComplexParsevalFrame) {
    // Rows of a 3x3 Fourier matrix scaled by 1/sqrt(3), first two columns.
    const double s = 1.0 / std::sqrt(3.0);
    const double pi = std::acos(-1.0);
    Matrix<Complex> rows(3, 2);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 2; ++j) rows(i, j) = s * std::polar(1.0, 2.0 * pi * double(i * j) / 3.0);
    const VectorFamily<Complex> f(2, rows);
    ASSERT_TRUE(is_parseval(f));
    const auto nc = naimark_complement(f);
    EXPECT_TRUE(verify_naimark_pair(f, nc.family).pass);
}

TEST(Naimark, FullSparkAgreesAcrossThePair) {
    std::mt19937_64 rng(77);
    Context ctx;
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = 1 + rng() % 3;
        const std::size_t m = n + 1 + rng() % 3;
        auto f = testing_support::random_parseval(rng, m, n);
        if (trial % 4 == 0) {
            // Duplicate a direction so full spark fails on one side.
            Matrix<double> rows = f.rows();
            std::copy(rows.row(0).begin(), rows.row(0).end(), rows.row(1).begin());
            f = canonical_tight_transform(VectorFamily<double>(n, rows));
        }
        const auto g = naimark_complement(f).family;
        EXPECT_EQ(is_full_spark(f, ctx), is_full_spark(g, ctx)) << "trial " << trial;
    }
}

TEST(Naimark, VerifyRejectsMismatchedShapes) {
    const auto f = to_float(testing_support::family(2, {{1, 0}, {0, 1}}));
    EXPECT_THROW(verify_naimark_pair(f, VectorFamily<double>(1, Matrix<double>{{1.0}, {0.0}, {1.0}})), FrameError);
}
