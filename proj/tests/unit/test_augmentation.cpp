#include <gtest/gtest.h>

#include <random>

#include "support/helpers.hpp"

using namespace framelab;
using testing_support::family;

namespace {

/// Whether any of `trials` random draws of `s` added vectors gives the
/// complement property.
bool some_addition_of_size_works(const VectorFamily<Rational>& f, std::size_t s, int trials, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (int t = 0; t < trials; ++t) {
        auto g = f;
        for (std::size_t i = 0; i < s; ++i) {
            const auto v = random_integer_vector<Rational>(rng, f.dim(), 10);
            g = g.appended(std::span<const Rational>(v));
        }
        if (check_complement_property(g).holds) return true;
    }
    return false;
}

}  // namespace

TEST(Augment, CompletePropertyNeedsNothing) {
    const auto r = augment_to_cp(family(2, {{1, 0}, {0, 1}, {1, 1}}));
    EXPECT_EQ(r.added.size(), 0u);
    EXPECT_TRUE(r.final_cp.holds);
}

TEST(Augment, PlaneBasisNeedsOne) {
    const auto f = family(2, {{1, 0}, {0, 1}});
    const auto r = augment_to_cp(f, {7});
    EXPECT_EQ(r.k, 1u);
    EXPECT_EQ(r.added.size(), 1u);
    EXPECT_TRUE(r.final_cp.holds);
    EXPECT_TRUE(oracle::complement_property(testing_support::rows_of(f.concat(r.added)), 2));
}

TEST(Augment, MinimalityAgainstRandomProbes) {
    const auto f = family(3, {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 1, 0}});
    const auto r = augment_to_cp(f, {3});
    EXPECT_EQ(r.k, oracle::deficiency(testing_support::rows_of(f), 3));
    EXPECT_EQ(r.added.size(), r.k);
    EXPECT_TRUE(r.final_cp.holds);
    for (std::size_t s = 0; s < r.k; ++s) EXPECT_FALSE(some_addition_of_size_works(f, s, 200, 5 + s));
}

TEST(Augment, TwoSplitsNeedingSeparateRepairs) {
    // Two disjoint planes each carrying three vectors: the deficiency is 2
    // but both splits {e1,e2,e1+e2 | rest} and {e3,e4,e3+e4 | rest} leave a
    // plane on each side, and one generic vector cannot fix both at once.
    const auto f = family(4, {{1, 0, 0, 0}, {0, 1, 0, 0}, {1, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}, {0, 0, 1, 1}});
    const auto d = complement_deficiency(f);
    EXPECT_EQ(d.k, 2u);
    EXPECT_EQ(d.min_additions, 3u);
    const auto r = augment_to_cp(f, {1});
    EXPECT_EQ(r.added.size(), 3u);
    EXPECT_TRUE(r.final_cp.holds);
    EXPECT_FALSE(some_addition_of_size_works(f, 2, 200, 17));
}

TEST(Augment, TraceMeetsGrowthBound) {
    std::mt19937_64 rng(23);
    int done = 0;
    while (done < 30) {
        const std::size_t n = 2 + rng() % 3, m = n + rng() % 3;
        const auto rows = oracle::random_rows(rng, m, n, 1);
        if (oracle::rank(rows) < n) continue;
        ++done;
        const auto r = augment_to_cp(family(rows, n), {std::uint64_t(done)});
        EXPECT_TRUE(r.final_cp.holds);
        EXPECT_EQ(r.added.size(), r.min_additions);
        ASSERT_EQ(r.trace.size(), r.added.size());
        for (const auto& t : r.trace) EXPECT_GE(t.min_side_dim, t.growth_bound) << "round " << t.round;
    }
}

TEST(Augment, Errors) {
    EXPECT_THROW(augment_to_cp(family(2, {{1, 0}})), FrameError);
    SamplingOptions none;
    none.budget = 0;
    EXPECT_THROW(augment_to_cp(family(2, {{1, 0}, {0, 1}}), none), FrameError);
}

TEST(Admissible, Examples) {
    const auto f = family(3, {{1, 0, 0}, {0, 1, 0}});
    const std::vector<Rational> inside{1, 1, 0}, generic{1, 1, 1};
    EXPECT_FALSE(is_admissible_next(f, inside));
    // Splits of {e1, e2}: each side is a line, so e1+e2+e3 avoids all of them.
    EXPECT_TRUE(is_admissible_next(f, generic));
    const std::vector<Rational> on_line{2, 0, 0};
    EXPECT_FALSE(is_admissible_next(f, on_line));

    const auto cp = family(2, {{1, 0}, {0, 1}, {1, 1}});
    const std::vector<Rational> any{1, 0};
    EXPECT_TRUE(is_admissible_next(cp, any));
}

TEST(DirectSum, LinesGiveOneVector) {
    const auto r = direct_sum_augment(family(1, {{1}}), family(1, {{1}}), {4});
    ASSERT_EQ(r.added.size(), 1u);
    EXPECT_NE(r.added.rows()(0, 0), 0);
    EXPECT_NE(r.added.rows()(0, 1), 0);
    EXPECT_TRUE(r.combined_cp.holds);
    EXPECT_FALSE(check_complement_property(family(2, {{1, 0}, {0, 1}})).holds);
}

TEST(DirectSum, PlanesGiveThreeVectors) {
    const auto f = family(2, {{1, 0}, {0, 1}, {1, 1}});
    const auto g = family(2, {{1, 0}, {0, 1}, {1, -1}});
    const auto r = direct_sum_augment(f, g, {8});
    EXPECT_EQ(r.added.size(), 3u);
    EXPECT_EQ(r.combined.dim(), 4u);
    EXPECT_TRUE(r.combined_cp.holds);
    EXPECT_TRUE(oracle::complement_property(testing_support::rows_of(r.combined), 4));

    // Two added vectors never suffice.
    const auto base = r.combined.subset(std::vector<std::size_t>{3, 4, 5, 6, 7, 8});
    EXPECT_FALSE(some_addition_of_size_works(base, 2, 100, 2));
}

TEST(DirectSum, PremiseFailure) {
    EXPECT_THROW(direct_sum_augment(family(2, {{1, 0}, {0, 1}}), family(1, {{1}})), PremiseFailedError);
}

TEST(HyperplaneCompletion, FiveVectorsGainPhaseRetrieval) {
    const auto c = complete_hyperplane_family(testing_support::five_vectors(), {2});
    EXPECT_EQ(c.pr.decision, PrDecision::PassExact);
    const auto g = testing_support::five_vectors().appended(std::span<const Rational>(c.vector));
    EXPECT_TRUE(oracle::complement_property(testing_support::rows_of(g), 3));
}

TEST(HyperplaneCompletion, LowDimensionalSplitIsRejected) {
    try {
        complete_hyperplane_family(family(3, {{1, 0, 0}, {0, 1, 0}}));
        FAIL() << "expected PremiseFailedError";
    } catch (const PremiseFailedError& e) {
        ASSERT_TRUE(e.partition());
        EXPECT_LE(std::min(e.partition()->dim_subset, e.partition()->dim_complement), 1u);
    }
}

TEST(HyperplaneCompletion, PropertyAlreadyHolds) {
    const auto c = complete_hyperplane_family(family(2, {{1, 0}, {0, 1}, {1, 1}}));
    EXPECT_EQ(c.pr.decision, PrDecision::PassExact);
}
