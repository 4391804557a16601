#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "support/helpers.hpp"

using namespace framelab;
using testing_support::family;
using testing_support::span;

namespace {

oracle::QVec as_q(const std::vector<Rational>& v) { return v; }

}  // namespace

TEST(VectorPhaseRetrieval, Examples) {
    EXPECT_EQ(pr_vectors_real(family(2, {{1, 0}, {0, 1}, {1, 1}})).decision, PrDecision::PassExact);
    EXPECT_EQ(pr_vectors_real(family(3, {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 1, 0}, {1, 0, 1}, {0, 1, 1}})).decision,
              PrDecision::PassExact);

    const auto f = testing_support::five_vectors();
    const auto c = pr_vectors_real(f);
    ASSERT_EQ(c.decision, PrDecision::Fail);
    ASSERT_TRUE(c.witness);
    EXPECT_TRUE(c.witness_exact);
    const auto& w = *c.witness;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const auto a = oracle::dot(as_q(w.x), f.vector(i)), b = oracle::dot(as_q(w.y), f.vector(i));
        EXPECT_EQ(a * a, b * b);
    }
    EXPECT_NE(w.x, w.y);
}

TEST(VectorPhaseRetrieval, AgreesWithExhaustiveWitnessSearch) {
    std::mt19937_64 rng(101);
    for (int trial = 0; trial < 150; ++trial) {
        const std::size_t n = 1 + rng() % 3, m = 1 + rng() % 5;
        const auto rows = oracle::random_nonzero_rows(rng, m, n, 2);
        const auto c = pr_vectors_real(family(rows, n));
        const auto w = oracle::phase_retrieval_witness(rows, n);
        EXPECT_EQ(c.decision == PrDecision::Fail, w.has_value()) << "trial " << trial;
        EXPECT_NE(c.decision, PrDecision::PassBudgeted);
    }
}

TEST(VectorPhaseRetrieval, FloatWitnessIsVerified) {
    const auto c = pr_vectors_real(to_float(testing_support::five_vectors()));
    ASSERT_EQ(c.decision, PrDecision::Fail);
    EXPECT_LE(c.witness_residual, Tolerance{}.witness);
}

TEST(ComplexPhaseRetrieval, NecessaryConditionOnly) {
    const VectorFamily<Complex> basis(2, Matrix<Complex>{{Complex(1, 0), Complex(0, 0)}, {Complex(0, 0), Complex(1, 0)}});
    EXPECT_EQ(pr_vectors_complex_necessary(basis).verdict, ComplexVerdict::Fail);
    const VectorFamily<Complex> four(2, Matrix<Complex>{{Complex(1, 0), Complex(0, 0)},
                                                        {Complex(0, 0), Complex(1, 0)},
                                                        {Complex(1, 0), Complex(1, 0)},
                                                        {Complex(1, 0), Complex(0, 1)}});
    EXPECT_EQ(pr_vectors_complex_necessary(four).verdict, ComplexVerdict::InconclusiveNecessaryPassed);
}

TEST(VectorNormRetrieval, Examples) {
    EXPECT_EQ(norm_retrieval_vectors_real(family(3, {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}})).decision, PrDecision::PassExact);
    EXPECT_EQ(norm_retrieval_vectors_real(family(2, {{1, 0}, {0, 1}, {1, 1}})).decision, PrDecision::PassExact);

    const auto c = norm_retrieval_vectors_real(family(2, {{1, 0}}));
    ASSERT_EQ(c.decision, PrDecision::Fail);
    const auto& w = *c.witness;
    // Equal measurements, different norms.
    EXPECT_EQ(w.x[0] * w.x[0], w.y[0] * w.y[0]);
    EXPECT_NE(oracle::dot(as_q(w.x), as_q(w.x)), oracle::dot(as_q(w.y), as_q(w.y)));
}

TEST(VectorNormRetrieval, AgreesWithBruteForce) {
    std::mt19937_64 rng(103);
    for (int trial = 0; trial < 150; ++trial) {
        const std::size_t n = 1 + rng() % 3, m = 1 + rng() % 5;
        const auto rows = oracle::random_nonzero_rows(rng, m, n, 2);
        const auto c = norm_retrieval_vectors_real(family(rows, n));
        EXPECT_EQ(c.decision == PrDecision::Fail, oracle::norm_retrieval_witness(rows, n).has_value()) << "trial " << trial;
        if (c.decision == PrDecision::Fail) {
            const auto& w = *c.witness;
            for (const auto& phi : rows) {
                const auto a = oracle::dot(as_q(w.x), phi), b = oracle::dot(as_q(w.y), phi);
                EXPECT_EQ(a * a, b * b);
            }
            EXPECT_NE(oracle::dot(as_q(w.x), as_q(w.x)), oracle::dot(as_q(w.y), as_q(w.y)));
        }
    }
}

TEST(SubspacePhaseRetrieval, SixSubspacesPassWithinBudget) {
    const auto c = pr_subspaces_real(testing_support::six_subspaces(), 300, 0);
    EXPECT_EQ(c.decision, PrDecision::PassBudgeted);
    ASSERT_TRUE(c.min_residual);
    EXPECT_GT(*c.min_residual, 10 * Tolerance{}.witness);
    EXPECT_EQ(c.search_budget, 300u);
}

TEST(SubspacePhaseRetrieval, ShearedFamilyFailsWithExactWitness) {
    const auto sf = apply_invertible(testing_support::six_subspaces(), testing_support::shear());
    const auto c = pr_subspaces_real(sf, 200, 0);
    ASSERT_EQ(c.decision, PrDecision::Fail);
    ASSERT_TRUE(c.witness);
    EXPECT_TRUE(c.witness_exact);
    const auto nx = projection_norms_squared(sf, c.witness->x);
    const auto ny = projection_norms_squared(sf, c.witness->y);
    EXPECT_EQ(nx, ny);
    std::vector<Rational> neg = c.witness->y;
    for (auto& v : neg) v = -v;
    EXPECT_NE(c.witness->x, c.witness->y);
    EXPECT_NE(c.witness->x, neg);
}

TEST(SubspacePhaseRetrieval, UnionFailureIsExact) {
    // Two lines and a line in 3-space: the basis union cannot span twice.
    const SubspaceFamily<Rational> sf(3, {span(3, {{1, 0, 0}}), span(3, {{0, 1, 0}}), span(3, {{0, 0, 1}})});
    const auto c = pr_subspaces_real(sf, 50, 0);
    EXPECT_EQ(c.decision, PrDecision::Fail);
    EXPECT_EQ(c.stage, "onb_union");
}

TEST(SubspacePhaseRetrieval, LinesReduceToVectors) {
    const SubspaceFamily<Rational> sf(2, {span(2, {{1, 0}}), span(2, {{0, 1}}), span(2, {{1, 1}})});
    const auto c = pr_subspaces_real(sf, 50, 0);
    EXPECT_EQ(c.decision, PrDecision::PassExact);
    EXPECT_EQ(c.stage, "lines");
}

TEST(SubspacePhaseRetrieval, DeterministicForASeed) {
    const auto sf = to_float(testing_support::six_subspaces());
    const auto a = pr_subspaces_real(sf, 100, 9);
    const auto b = pr_subspaces_real(sf, 100, 9);
    EXPECT_EQ(a.decision, b.decision);
    EXPECT_EQ(*a.min_residual, *b.min_residual);
}

TEST(SubspaceNormRetrieval, ComplementFamilyPassesExactly) {
    const SubspaceFamily<Rational> perp(3, {span(3, {{0, 0, 1}}), span(3, {{1, 0, 0}, {0, 0, 1}}), span(3, {{1, 0, 0}, {0, 1, 0}}),
                                            span(3, {{1, -1, 0}, {0, 0, 1}}), span(3, {{0, 1, -1}, {1, 0, 0}}),
                                            span(3, {{1, 0, -1}, {0, 1, 0}})});
    const auto c = norm_retrieval_subspaces_real(perp, 100, 0);
    EXPECT_EQ(c.decision, PrDecision::PassExact);
    EXPECT_TRUE(pr_subspaces_real(perp, 200, 0).passed());
}

TEST(SubspaceNormRetrieval, FailureCarriesAWitness) {
    const SubspaceFamily<Rational> sf(2, {span(2, {{1, 0}})});
    const auto c = norm_retrieval_subspaces_real(sf, 50, 0);
    ASSERT_EQ(c.decision, PrDecision::Fail);
    const auto& w = *c.witness;
    EXPECT_EQ(projection_norms_squared(sf, w.x), projection_norms_squared(sf, w.y));
    EXPECT_NE(oracle::dot(as_q(w.x), as_q(w.x)), oracle::dot(as_q(w.y), as_q(w.y)));

    // A plane and a tilted line in 3-space: measurements miss part of the norm.
    const SubspaceFamily<double> g(3, {Subspace<double>::span_of(3, Matrix<double>{{1, 0, 0}, {0, 1, 0}}),
                                       Subspace<double>::span_of(3, Matrix<double>{{0, 1, 1}})});
    const auto d = norm_retrieval_subspaces_real(g, 100, 0);
    ASSERT_EQ(d.decision, PrDecision::Fail);
    const auto r = verify_subspace_witness(g, *d.witness, Tolerance{});
    EXPECT_TRUE(r.has_value());
}

TEST(EquimodularBasis, AllThreeCases) {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g;
    int seen[4] = {0, 0, 0, 0};
    for (int trial = 0; trial < 90; ++trial) {
        Matrix<double> span_rows(3, 4);
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 4; ++j) span_rows(i, j) = g(rng);
        const auto w = Subspace<double>::span_of(4, span_rows);
        std::vector<double> x(4), y(4);
        for (auto& v : x) v = g(rng);
        const auto px = w.project(std::span<const double>(x));
        const double nx = norm2(px);
        std::vector<double> py;
        const int want = 1 + trial % 3;
        if (want == 1) {
            py = px;
            for (auto& v : py) v = -v;
        } else {
            for (auto& v : y) v = g(rng);
            py = w.project(std::span<const double>(y));
            if (want == 2) {
                const double c = dot(py, px) / (nx * nx);
                for (std::size_t k = 0; k < 4; ++k) py[k] -= c * px[k];
            }
        }
        const double s = nx / norm2(py);
        for (auto& v : py) v *= s;
        // y = Py plus a component orthogonal to W.
        for (auto& v : y) v = g(rng);
        const auto pyy = w.project(std::span<const double>(y));
        for (std::size_t k = 0; k < 4; ++k) y[k] = y[k] - pyy[k] + py[k];

        const auto b = equimodular_onb(w, std::span<const double>(x), std::span<const double>(y));
        EXPECT_EQ(b.proof_case, want);
        ++seen[b.proof_case];
        EXPECT_LE(b.ortho_residual, 1e-10);
        EXPECT_LE(b.equimodular_residual, 1e-8);
        EXPECT_EQ(b.basis.cols(), 3u);
    }
    EXPECT_EQ(seen[1], 30);
    EXPECT_EQ(seen[2], 30);
    EXPECT_EQ(seen[3], 30);

    const auto w = Subspace<double>::span_of(2, Matrix<double>{{1, 0}});
    const std::vector<double> x{1, 0}, y{2, 0};
    EXPECT_THROW(equimodular_onb(w, std::span<const double>(x), std::span<const double>(y)), FrameError);
}

TEST(SpanningCheck, OrthonormalChoicesReduceToTheUnion) {
    const auto sf = testing_support::six_subspaces();
    std::vector<VectorFamily<Rational>> per;
    for (const auto& s : sf.subspaces()) per.push_back(s.basis_family());
    const auto r = norm_retrieval_spanning_check(sf, per);
    EXPECT_TRUE(r.premise_holds);
    EXPECT_EQ(r.flattened.decision, PrDecision::PassExact);
}

TEST(SpanningCheck, NonOrthogonalChoiceLosesPhaseRetrieval) {
    const auto sf = testing_support::six_subspaces();
    std::vector<VectorFamily<Rational>> per{family(3, {{1, 1, 0}, {0, 1, 0}}), family(3, {{0, 1, 0}}), family(3, {{0, 0, 1}}),
                                            family(3, {{1, 1, 0}}),            family(3, {{0, 1, 1}}), family(3, {{1, 0, 1}})};
    const auto r = norm_retrieval_spanning_check(sf, per);
    EXPECT_EQ(r.flattened.decision, PrDecision::Fail);
}

TEST(SpanningCheck, PremiseFailureIsReported) {
    const auto sf = testing_support::six_subspaces();
    std::vector<VectorFamily<Rational>> per;
    for (const auto& s : sf.subspaces()) per.push_back(s.basis_family());
    per[0] = family(3, {{1, 0, 0}});  // one vector in a plane
    const auto r = norm_retrieval_spanning_check(sf, per);
    EXPECT_FALSE(r.premise_holds);
    ASSERT_TRUE(r.first_failed_subspace);
    EXPECT_EQ(*r.first_failed_subspace, 0u);

    per[0] = family(3, {{0, 0, 1}});
    EXPECT_THROW(norm_retrieval_spanning_check(sf, per), FrameError);
}

TEST(Transforms, InvertibleAndProjected) {
    const auto f = family(2, {{1, 0}, {0, 1}});
    const auto t = apply_invertible(f, Matrix<Rational>{{1, 1}, {0, 1}});
    EXPECT_EQ(t.rows(), (Matrix<Rational>{{1, 0}, {1, 1}}));
    EXPECT_THROW(apply_invertible(f, Matrix<Rational>{{1, 1}, {1, 1}}), FrameError);

    const auto sheared = apply_invertible(testing_support::six_subspaces(), testing_support::shear());
    const std::vector<Rational> e1{1, 0, 0}, v6{1, -1, 1};
    EXPECT_TRUE(sheared[3].contains(std::span<const Rational>(e1)));
    EXPECT_TRUE(sheared[5].contains(std::span<const Rational>(v6)));

    const auto p = project_family(family(2, {{1, 0}, {1, 1}}), span(2, {{1, 0}}));
    EXPECT_EQ(p.dim(), 1u);
    EXPECT_EQ(p.rows()(0, 0), p.rows()(1, 0));
}

TEST(Reconstruction, RoundTripsAndBranches) {
    std::mt19937_64 rng(13);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 300; ++trial) {
        std::array<double, 3> x{g(rng), g(rng), g(rng)};
        if (trial % 5 == 0) x[0] = 0.0;
        if (trial % 7 == 0) x[1] = x[2] = 0.0;
        const auto r = reconstruct_johnsex(johnsex_measurements(x));
        double plus = 0, minus = 0;
        for (int k = 0; k < 3; ++k) {
            plus = std::max(plus, std::abs(r.x[k] - x[k]));
            minus = std::max(minus, std::abs(r.x[k] + x[k]));
        }
        EXPECT_LE(std::min(plus, minus), 1e-8) << "trial " << trial << " branch " << r.branch;
    }
    EXPECT_EQ(reconstruct_johnsex(johnsex_measurements({0, 0, 2})).branch, "single_coefficient");
    EXPECT_EQ(reconstruct_johnsex(johnsex_measurements({0, 1, 2})).branch, "first_coefficient_zero");
    EXPECT_EQ(reconstruct_johnsex(johnsex_measurements({1, 1, 2})).branch, "first_coefficient_nonzero");
    EXPECT_THROW(reconstruct_johnsex({1, 1, 1, 1, 1, 1}), FrameError);
    EXPECT_THROW(reconstruct_johnsex({1, 2, 1, 1, 1, 1}), FrameError);
}
