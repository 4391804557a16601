#pragma once

// Adding vectors until the complement property holds.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "framelab/phase_retrieval.hpp"
#include "framelab/random.hpp"
#include "framelab/spark.hpp"

namespace framelab {

/// PremiseFailed with the partition (if any) that shows why.
class PremiseFailedError : public FrameError {
public:
    PremiseFailedError(const std::string& what, std::optional<PartitionCertificate> partition)
        : FrameError(ErrorCode::PremiseFailed, what), partition_(std::move(partition)) {}

    const std::optional<PartitionCertificate>& partition() const noexcept { return partition_; }

private:
    std::optional<PartitionCertificate> partition_;
};

struct SamplingOptions {
    std::uint64_t seed = 0;
    /// Candidate draws allowed per added vector.
    std::size_t budget = 1000;
    /// Integer coordinates are drawn from [-bound, bound].
    int bound = 10;
};

namespace detail {

/// A split with two non-spanning sides, tracked by bitmask.
struct DeficientSplit {
    Mask side_a = 0;
    Mask side_b = 0;
    std::size_t dim_a = 0;
    std::size_t dim_b = 0;
};

template <Scalar T>
std::vector<DeficientSplit> doubly_deficient_splits(const VectorFamily<T>& f, const Context& ctx) {
    std::vector<DeficientSplit> out;
    const std::size_t m = f.size();
    const std::size_t n = f.dim();
    if (m == 0) {
        if (n > 0) out.push_back({0, 0, 0, 0});
        return out;
    }
    RankOracle<T> oracle(f.rows(), ctx.tol);
    const Mask all = full_mask(m);
    for_each_partition(oracle, n, true, ctx, [&](Mask s, const PairDims& d) {
        if (!d.pruned && d.dim_c < n) out.push_back({s, all & ~s, d.dim_s, d.dim_c});
        return true;
    });
    return out;
}

template <Scalar T>
Matrix<T> with_row(const Matrix<T>& rows, const std::vector<T>& v) {
    Matrix<T> one(1, v.size());
    std::copy(v.begin(), v.end(), one.row(0).begin());
    return rows.rows() == 0 ? one : rows.vstack(one);
}

}  // namespace detail

/// True iff the candidate lies outside both side spans of every split of f
/// into two non-spanning sets. Vacuously true under the complement property.
template <RealScalar T>
bool is_admissible_next(const VectorFamily<T>& f, const std::vector<T>& candidate, const Context& ctx = {}) {
    if (candidate.size() != f.dim()) throw FrameError(ErrorCode::DimensionMismatch, "candidate length differs from dim");
    require_scan_size(f.size() + 1, ctx);
    const auto splits = detail::doubly_deficient_splits(f, ctx);
    if (splits.empty()) return true;
    RankOracle<T> oracle(detail::with_row(f.rows(), candidate), ctx.tol);
    const Mask cand = Mask{1} << f.size();
    for (const auto& s : splits) {
        if (oracle.rank_mask(s.side_a | cand) == s.dim_a) return false;
        if (oracle.rank_mask(s.side_b | cand) == s.dim_b) return false;
    }
    return true;
}

struct AugmentRound {
    std::size_t round = 0;
    std::size_t draws = 0;
    /// Splits of the current family with two non-spanning sides, before adding.
    std::size_t deficient_splits = 0;
    /// Over the original non-spanning splits: smallest side dimension once
    /// every vector added so far joins both sides.
    std::size_t min_side_dim = 0;
    /// The growth bound min(N, N - k + round).
    std::size_t growth_bound = 0;
};

template <RealScalar T>
struct AugmentResult {
    VectorFamily<T> added;
    /// Complement deficiency of the input.
    std::size_t k = 0;
    /// Vectors actually needed; larger than k when two splits are deficient
    /// in ways one generic vector cannot repair together.
    std::size_t min_additions = 0;
    std::optional<PartitionCertificate> min_additions_witness;
    std::vector<AugmentRound> trace;
    CpCertificate final_cp;
    std::size_t total_draws = 0;
};

/// Adds vectors one at a time, each drawn at random and accepted when it
/// avoids both side spans of every currently non-spanning split (and of the
/// original splits joined with the vectors added so far).
template <RealScalar T>
AugmentResult<T> augment_to_cp(const VectorFamily<T>& f, const SamplingOptions& opt = {}, const Context& ctx = {}) {
    const std::size_t n = f.dim();
    const auto def = complement_deficiency(f, ctx);
    AugmentResult<T> res;
    res.k = def.k;
    res.min_additions = def.min_additions;
    res.min_additions_witness = def.min_additions_witness;
    res.added = VectorFamily<T>(n);
    require_scan_size(f.size() + def.min_additions, ctx);

    const auto original = detail::doubly_deficient_splits(f, ctx);
    std::vector<detail::DeficientSplit> current = original;
    Matrix<T> rows = f.rows();
    Mask added_mask = 0;
    std::mt19937_64 rng(opt.seed);

    for (std::size_t r = 1; r <= def.min_additions; ++r) {
        AugmentRound round;
        round.round = r;
        round.deficient_splits = current.size();
        const Mask cand_bit = Mask{1} << rows.rows();
        std::optional<std::vector<T>> accepted;
        while (round.draws < opt.budget && !accepted) {
            ++round.draws;
            auto cand = random_integer_vector<T>(rng, n, opt.bound);
            RankOracle<T> oracle(detail::with_row(rows, cand), ctx.tol);
            bool ok = true;
            for (const auto& s : current) {
                if (oracle.rank_mask(s.side_a | cand_bit) == s.dim_a ||
                    oracle.rank_mask(s.side_b | cand_bit) == s.dim_b) {
                    ok = false;
                    break;
                }
            }
            for (std::size_t i = 0; ok && i < original.size(); ++i) {
                for (Mask side : {original[i].side_a, original[i].side_b}) {
                    const std::size_t before = oracle.rank_mask(side | added_mask);
                    if (before < n && oracle.rank_mask(side | added_mask | cand_bit) == before) {
                        ok = false;
                        break;
                    }
                }
            }
            if (ok) accepted = std::move(cand);
        }
        res.total_draws += round.draws;
        if (!accepted) {
            throw FrameError(ErrorCode::CandidateBudgetExhausted,
                             "no admissible vector in " + std::to_string(opt.budget) + " draws (round " +
                                 std::to_string(r) + ")");
        }
        // Admissibility makes both extensions of a split gain one dimension.
        std::vector<detail::DeficientSplit> next;
        for (const auto& s : current) {
            if (s.dim_a + 1 < n) next.push_back({s.side_a | cand_bit, s.side_b, s.dim_a + 1, s.dim_b});
            if (s.dim_b + 1 < n) next.push_back({s.side_a, s.side_b | cand_bit, s.dim_a, s.dim_b + 1});
        }
        current = std::move(next);
        rows = detail::with_row(rows, *accepted);
        added_mask |= cand_bit;
        res.added = res.added.appended(*accepted);

        RankOracle<T> after(rows, ctx.tol);
        round.min_side_dim = n;
        for (const auto& s : original) {
            round.min_side_dim = std::min({round.min_side_dim, after.rank_mask(s.side_a | added_mask),
                                           after.rank_mask(s.side_b | added_mask)});
        }
        round.growth_bound = std::min(n, n - def.k + r);
        res.trace.push_back(round);
    }
    res.final_cp = check_complement_property(VectorFamily<T>(n, rows), ctx);
    return res;
}

namespace detail {

/// Normals of the hyperplanes spanned by (N-1)-subsets of the rows,
/// without duplicates in exact mode.
template <RealScalar T>
std::vector<std::vector<T>> hyperplane_normals(const Matrix<T>& rows, std::size_t n, const Context& ctx) {
    std::vector<std::vector<T>> out;
    if (n == 0) return out;
    const std::size_t m = rows.rows();
    require_scan_size(m, ctx);
    if (m + 1 < n) return out;
    RankOracle<T> oracle(rows.rows() == 0 ? Matrix<T>(0, n) : rows, ctx.tol);
    for (Mask s : subsets_of_size(m, n - 1)) {
        if (n > 1 && oracle.rank_mask(s) < n - 1) continue;
        const auto idx = mask_indices(s);
        const Matrix<T> sub = idx.empty() ? Matrix<T>(0, n) : rows.select_rows(idx);
        auto normal = null_space_basis(sub, ctx.tol).column(0);
        if constexpr (ExactScalar<T>) {
            const auto lead = std::find_if(normal.begin(), normal.end(), [](const T& x) { return sgn(x) != 0; });
            const T pivot = *lead;
            for (auto& x : normal) x /= pivot;
            if (std::find(out.begin(), out.end(), normal) != out.end()) continue;
        }
        out.push_back(std::move(normal));
    }
    return out;
}

template <RealScalar T>
bool off_all_hyperplanes(const std::vector<std::vector<T>>& normals, const std::vector<T>& v, const Tolerance& tol) {
    for (const auto& nrm : normals) {
        const T d = dot(nrm, v);
        if constexpr (ExactScalar<T>) {
            if (sgn(d) == 0) return false;
        } else {
            if (std::abs(d) <= tol.rank * std::max(1.0, norm2(nrm) * norm2(v))) return false;
        }
    }
    return true;
}

}  // namespace detail

template <RealScalar T>
struct DirectSumResult {
    /// The N1 + N2 - 1 vectors added in the direct sum.
    VectorFamily<T> added;
    /// added, then f1 (+) 0, then 0 (+) f2.
    VectorFamily<T> combined;
    CpCertificate combined_cp;
    std::size_t total_draws = 0;
};

/// Given phase-retrieving f1 in N1-space and f2 in N2-space, adds
/// N1 + N2 - 1 vectors to (f1 (+) 0) u (0 (+) f2) so the union has the
/// complement property. Each vector avoids every hyperplane spanned by the
/// current family that contains one of the two summands.
template <RealScalar T>
DirectSumResult<T> direct_sum_augment(const VectorFamily<T>& f1, const VectorFamily<T>& f2, const SamplingOptions& opt = {},
                                      const Context& ctx = {}) {
    for (const auto* f : {&f1, &f2}) {
        const auto pr = pr_vectors_real(*f, ctx);
        if (!pr.passed()) {
            throw PremiseFailedError(std::string(f == &f1 ? "first" : "second") + " family does not do phase retrieval",
                                     pr.partition);
        }
    }
    const std::size_t n1 = f1.dim(), n2 = f2.dim(), n = n1 + n2;
    Matrix<T> rows(f1.size() + f2.size(), n);
    for (std::size_t i = 0; i < f1.size(); ++i)
        for (std::size_t j = 0; j < n1; ++j) rows(i, j) = f1[i][j];
    for (std::size_t i = 0; i < f2.size(); ++i)
        for (std::size_t j = 0; j < n2; ++j) rows(f1.size() + i, n1 + j) = f2[i][j];
    const Matrix<T> embedded = rows;

    DirectSumResult<T> res;
    res.added = VectorFamily<T>(n);
    std::mt19937_64 rng(opt.seed);
    Matrix<T> current = embedded;
    for (std::size_t r = 0; r + 1 < n; ++r) {
        std::vector<std::vector<T>> tracked;
        for (auto& nrm : detail::hyperplane_normals(current, n, ctx)) {
            auto zero = [&](std::size_t from, std::size_t to) {
                for (std::size_t j = from; j < to; ++j) {
                    if constexpr (ExactScalar<T>) {
                        if (sgn(nrm[j]) != 0) return false;
                    } else {
                        if (std::abs(nrm[j]) > ctx.tol.rank) return false;
                    }
                }
                return true;
            };
            if (zero(0, n1) || zero(n1, n)) tracked.push_back(std::move(nrm));
        }
        std::optional<std::vector<T>> accepted;
        std::size_t draws = 0;
        while (draws < opt.budget && !accepted) {
            ++draws;
            auto cand = random_integer_vector<T>(rng, n, opt.bound);
            if (detail::off_all_hyperplanes(tracked, cand, ctx.tol)) accepted = std::move(cand);
        }
        res.total_draws += draws;
        if (!accepted) {
            throw FrameError(ErrorCode::CandidateBudgetExhausted,
                             "no admissible vector in " + std::to_string(opt.budget) + " draws");
        }
        res.added = res.added.appended(*accepted);
        current = detail::with_row(current, *accepted);
    }
    res.combined = res.added.concat(VectorFamily<T>(n, embedded));
    res.combined_cp = check_complement_property(res.combined, ctx);
    return res;
}

template <RealScalar T>
struct HyperplaneCompletion {
    std::vector<T> vector;
    PRCertificate<T> pr;
    std::size_t draws = 0;
};

/// When every split into two non-spanning sets consists of two hyperplanes,
/// one vector off all spanned hyperplanes restores phase retrieval.
template <RealScalar T>
HyperplaneCompletion<T> complete_hyperplane_family(const VectorFamily<T>& f, const SamplingOptions& opt = {},
                                                   const Context& ctx = {}) {
    const std::size_t n = f.dim();
    const auto scan = hyperplane_partition_scan(f, ctx);
    if (!scan.all_hyperplanes) {
        for (const auto& p : scan.partitions) {
            if (p.dim_subset + 1 != n || p.dim_complement + 1 != n) {
                throw PremiseFailedError("a non-spanning side has dimension at most N-2; one vector cannot help", p);
            }
        }
    }
    const auto normals = detail::hyperplane_normals(f.rows(), n, ctx);
    std::mt19937_64 rng(opt.seed);
    HyperplaneCompletion<T> out;
    while (out.draws < opt.budget) {
        ++out.draws;
        auto cand = random_integer_vector<T>(rng, n, opt.bound);
        if (!detail::off_all_hyperplanes(normals, cand, ctx.tol)) continue;
        out.vector = std::move(cand);
        out.pr = pr_vectors_real(f.appended(out.vector), ctx);
        return out;
    }
    throw FrameError(ErrorCode::CandidateBudgetExhausted, "no vector off every hyperplane in " + std::to_string(opt.budget) + " draws");
}

}  // namespace framelab
