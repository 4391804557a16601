#pragma once

// Spark, full spark, the complement property, complement deficiency and
// the hyperplane structure of non-spanning partitions.

#include <bit>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "framelab/frame.hpp"
#include "framelab/parallel.hpp"

namespace framelab {

using Mask = std::uint64_t;

inline std::vector<std::size_t> mask_indices(Mask mask) {
    std::vector<std::size_t> idx;
    while (mask != 0) {
        idx.push_back(static_cast<std::size_t>(std::countr_zero(mask)));
        mask &= mask - 1;
    }
    return idx;
}

inline Mask full_mask(std::size_t m) { return m >= 64 ? ~Mask{0} : (Mask{1} << m) - 1; }

/// All k-subsets of {0..m-1} as bitmasks, in increasing numeric order.
inline std::vector<Mask> subsets_of_size(std::size_t m, std::size_t k) {
    std::vector<Mask> out;
    if (k > m) return out;
    if (k == 0) return {Mask{0}};
    Mask s = (Mask{1} << k) - 1;
    const Mask limit = Mask{1} << m;
    while (s < limit) {
        out.push_back(s);
        // Gosper's hack: next larger integer with the same popcount.
        const Mask c = s & (~s + 1);
        const Mask r = s + c;
        if (r == 0) break;
        s = (((r ^ s) >> 2) / c) | r;
    }
    return out;
}

/// Representatives S of the unordered pairs {S, S^c}: every subset that
/// contains index 0, ordered by size, then by bitmask.
inline std::vector<Mask> partition_representatives(std::size_t m, std::size_t size) {
    std::vector<Mask> out;
    if (m == 0 || size == 0) return out;
    for (Mask rest : subsets_of_size(m - 1, size - 1)) out.push_back((rest << 1) | Mask{1});
    return out;
}

enum class PartitionVerdict { BothDeficient, Spanning };

/// One split of the index set. Indices are 0-based here; reports add 1.
struct PartitionCertificate {
    std::vector<std::size_t> subset;
    std::vector<std::size_t> complement;
    std::size_t dim_subset = 0;
    std::size_t dim_complement = 0;
    PartitionVerdict verdict = PartitionVerdict::Spanning;
};

struct EnumerationDigest {
    std::uint64_t checked = 0;
    std::uint64_t pruned = 0;
};

struct CpCertificate {
    bool holds = false;
    std::string_view mode;
    EnumerationDigest digest;
    std::optional<PartitionCertificate> witness;
};

inline PartitionCertificate make_partition(Mask subset, std::size_t m, std::size_t dim_s, std::size_t dim_c,
                                           std::size_t n) {
    PartitionCertificate p;
    p.subset = mask_indices(subset);
    p.complement = mask_indices(full_mask(m) & ~subset);
    p.dim_subset = dim_s;
    p.dim_complement = dim_c;
    p.verdict = (dim_s >= n || dim_c >= n) ? PartitionVerdict::Spanning : PartitionVerdict::BothDeficient;
    return p;
}

inline void require_scan_size(std::size_t m, const Context& ctx) {
    if (m > 63) {
        throw FrameError(ErrorCode::ScanTooLarge, "subset enumeration supports at most 63 vectors");
    }
    if (m > ctx.max_scan) {
        throw FrameError(ErrorCode::ScanTooLarge, std::to_string(m) + " vectors exceed the scan limit of " +
                                                      std::to_string(ctx.max_scan) + " (use --force)");
    }
}

struct SparkReport {
    std::size_t spark = 0;
    /// Smallest dependent subset found first in enumeration order.
    std::optional<std::vector<std::size_t>> dependent_subset;
    EnumerationDigest digest;
};

/// Size of the smallest dependent subfamily, or M+1 when the family is
/// independent. Subsets are scanned by increasing size with early exit.
template <Scalar T>
SparkReport spark_report(const VectorFamily<T>& f, const Context& ctx = {}) {
    const std::size_t m = f.size();
    const std::size_t n = f.dim();
    require_scan_size(m, ctx);
    RankOracle<T> oracle(f.rows(), ctx.tol);
    SparkReport rep;
    const std::size_t top = std::min(m, n);
    for (std::size_t k = 1; k <= top; ++k) {
        const auto masks = subsets_of_size(m, k);
        std::optional<Mask> hit;
        ordered_scan(
            masks.size(), ctx.worker_count(),
            [&](std::size_t i) -> char { return oracle.rank_mask(masks[i]) < k ? 1 : 0; },
            [&](std::size_t i, char dependent) {
                ++rep.digest.checked;
                if (dependent) {
                    hit = masks[i];
                    return false;
                }
                return true;
            });
        if (hit) {
            rep.spark = k;
            rep.dependent_subset = mask_indices(*hit);
            return rep;
        }
    }
    if (m > n) {
        // Any N+1 vectors in N-space are dependent: the first such subset.
        rep.spark = n + 1;
        rep.dependent_subset = mask_indices(full_mask(n + 1));
    } else {
        rep.spark = m + 1;
    }
    return rep;
}

template <Scalar T>
std::size_t spark(const VectorFamily<T>& f, const Context& ctx = {}) {
    return spark_report(f, ctx).spark;
}

/// Every N-subset is a basis.
template <Scalar T>
bool is_full_spark(const VectorFamily<T>& f, const Context& ctx = {}) {
    if (f.size() < f.dim()) {
        throw FrameError(ErrorCode::TooFewVectors, "full spark needs at least N vectors");
    }
    const std::size_t m = f.size();
    const std::size_t n = f.dim();
    require_scan_size(m, ctx);
    RankOracle<T> oracle(f.rows(), ctx.tol);
    const auto masks = subsets_of_size(m, n);
    bool ok = true;
    ordered_scan(
        masks.size(), ctx.worker_count(), [&](std::size_t i) -> char { return oracle.rank_mask(masks[i]) == n ? 1 : 0; },
        [&](std::size_t, char full) {
            ok = full != 0;
            return ok;
        });
    return ok;
}

namespace detail {

struct PairDims {
    std::size_t dim_s = 0;
    std::size_t dim_c = 0;
    bool pruned = false;
};

/// Calls `visit(S, dims)` for each representative S in enumeration order;
/// `visit` returns false to stop. When `prune` is set, the complement rank
/// is skipped whenever S already spans (dim_c is then reported as 0).
template <Scalar T, class Visit>
void for_each_partition(const RankOracle<T>& oracle, std::size_t target, bool prune, const Context& ctx,
                        Visit&& visit) {
    const std::size_t m = oracle.size();
    const Mask all = full_mask(m);
    for (std::size_t size = 1; size <= m; ++size) {
        const auto reps = partition_representatives(m, size);
        bool stop = false;
        ordered_scan(
            reps.size(), ctx.worker_count(),
            [&](std::size_t i) {
                PairDims d;
                d.dim_s = oracle.rank_mask(reps[i]);
                if (prune && d.dim_s >= target) {
                    d.pruned = true;
                } else {
                    d.dim_c = oracle.rank_mask(all & ~reps[i]);
                }
                return d;
            },
            [&](std::size_t i, const PairDims& d) {
                if (!visit(reps[i], d)) {
                    stop = true;
                    return false;
                }
                return true;
            });
        if (stop) return;
    }
}

}  // namespace detail

/// Complement property with respect to a target dimension (the ambient
/// dimension by default, or the rank of a range the family lives in).
template <Scalar T>
CpCertificate check_complement_property_in(const VectorFamily<T>& f, std::size_t target, const Context& ctx = {}) {
    const std::size_t m = f.size();
    require_scan_size(m, ctx);
    CpCertificate cert;
    cert.mode = arithmetic_mode<T>();
    if (m == 0) {
        cert.holds = target == 0;
        if (!cert.holds) cert.witness = make_partition(0, 0, 0, 0, target);
        return cert;
    }
    RankOracle<T> oracle(f.rows(), ctx.tol);
    cert.holds = true;
    detail::for_each_partition(oracle, target, true, ctx, [&](Mask s, const detail::PairDims& d) {
        ++cert.digest.checked;
        if (d.pruned) {
            ++cert.digest.pruned;
            return true;
        }
        if (d.dim_c >= target) return true;
        cert.holds = false;
        cert.witness = make_partition(s, m, d.dim_s, d.dim_c, target);
        return false;
    });
    return cert;
}

template <Scalar T>
CpCertificate check_complement_property(const VectorFamily<T>& f, const Context& ctx = {}) {
    return check_complement_property_in(f, f.dim(), ctx);
}

struct DeficiencyReport {
    /// N minus the smallest complement dimension over non-spanning subsets.
    std::size_t k = 0;
    PartitionCertificate witness;
    /// Smallest number of generic vectors whose addition yields the
    /// complement property: max over doubly deficient partitions of
    /// 2N - 1 - dim_I - dim_Ic (0 when none). Never smaller than k.
    std::size_t min_additions = 0;
    std::optional<PartitionCertificate> min_additions_witness;
    EnumerationDigest digest;
};

/// Complement deficiency of a frame; k = 0 iff the complement property holds.
template <Scalar T>
DeficiencyReport complement_deficiency(const VectorFamily<T>& f, const Context& ctx = {}) {
    const std::size_t m = f.size();
    const std::size_t n = f.dim();
    require_scan_size(m, ctx);
    if (rank(f.rows(), ctx.tol) < n) throw FrameError(ErrorCode::NotAFrame, "family does not span");
    DeficiencyReport rep;
    // I = {} is non-spanning (for N >= 1) with complement of dimension N.
    std::size_t best = n;
    rep.witness = make_partition(0, m, 0, n, n);
    if (n == 0 || m == 0) return rep;
    RankOracle<T> oracle(f.rows(), ctx.tol);
    const Mask all = full_mask(m);
    detail::for_each_partition(oracle, n, false, ctx, [&](Mask s, const detail::PairDims& d) {
        ++rep.digest.checked;
        if (d.dim_s < n && d.dim_c < best) {
            best = d.dim_c;
            rep.witness = make_partition(s, m, d.dim_s, d.dim_c, n);
        }
        if (d.dim_c < n && d.dim_s < best) {
            best = d.dim_s;
            rep.witness = make_partition(all & ~s, m, d.dim_c, d.dim_s, n);
        }
        if (d.dim_s < n && d.dim_c < n) {
            const std::size_t need = 2 * n - 1 - d.dim_s - d.dim_c;
            if (need > rep.min_additions) {
                rep.min_additions = need;
                rep.min_additions_witness = make_partition(s, m, d.dim_s, d.dim_c, n);
            }
        }
        return true;
    });
    rep.k = n - best;
    return rep;
}

struct HyperplaneScan {
    std::vector<PartitionCertificate> partitions;
    bool all_hyperplanes = true;
    EnumerationDigest digest;
};

/// Every partition with two non-spanning sides, with both span dimensions.
template <Scalar T>
HyperplaneScan hyperplane_partition_scan(const VectorFamily<T>& f, const Context& ctx = {}) {
    const std::size_t m = f.size();
    const std::size_t n = f.dim();
    require_scan_size(m, ctx);
    HyperplaneScan scan;
    if (m == 0) {
        if (n > 0) {
            scan.partitions.push_back(make_partition(0, 0, 0, 0, n));
            scan.all_hyperplanes = n == 1;
        }
        return scan;
    }
    RankOracle<T> oracle(f.rows(), ctx.tol);
    detail::for_each_partition(oracle, n, true, ctx, [&](Mask s, const detail::PairDims& d) {
        ++scan.digest.checked;
        if (d.pruned) {
            ++scan.digest.pruned;
            return true;
        }
        if (d.dim_c >= n) return true;
        scan.partitions.push_back(make_partition(s, m, d.dim_s, d.dim_c, n));
        if (d.dim_s != n - 1 || d.dim_c != n - 1) scan.all_hyperplanes = false;
        return true;
    });
    return scan;
}

/// Union of the stored bases of the subspaces, with (subspace, basis index)
/// provenance for every flattened vector. Exact subspaces contribute their
/// orthogonal (unnormalized) bases, which have the same spans.
template <Scalar T>
struct OnbUnion {
    VectorFamily<T> vectors;
    std::vector<std::pair<std::size_t, std::size_t>> provenance;
};

template <Scalar T>
OnbUnion<T> onb_union(const SubspaceFamily<T>& sf) {
    OnbUnion<T> u{VectorFamily<T>(sf.dim()), {}};
    std::vector<std::vector<T>> rows;
    for (std::size_t i = 0; i < sf.size(); ++i) {
        const auto& b = sf[i].basis();
        for (std::size_t j = 0; j < b.cols(); ++j) {
            rows.push_back(b.column(j));
            u.provenance.emplace_back(i, j);
        }
    }
    u.vectors = VectorFamily<T>::from_vectors(sf.dim(), rows);
    return u;
}

/// A union built from randomly rotated orthonormal bases of each subspace.
inline OnbUnion<double> onb_union_randomized(const SubspaceFamily<double>& sf, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    OnbUnion<double> u{VectorFamily<double>(sf.dim()), {}};
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < sf.size(); ++i) {
        const auto& b = sf[i].basis();
        const std::size_t d = b.cols();
        Matrix<double> g(d, d);
        for (std::size_t r = 0; r < d; ++r)
            for (std::size_t c = 0; c < d; ++c) g(r, c) = gauss(rng);
        const Matrix<double> q = orthonormalize(g);
        const Matrix<double> rotated = q.cols() == d ? b * q : b;
        for (std::size_t j = 0; j < rotated.cols(); ++j) {
            rows.push_back(rotated.column(j));
            u.provenance.emplace_back(i, j);
        }
    }
    u.vectors = VectorFamily<double>::from_vectors(sf.dim(), rows);
    return u;
}

template <Scalar T>
HyperplaneScan hyperplane_partition_scan(const SubspaceFamily<T>& sf, const Context& ctx = {}) {
    return hyperplane_partition_scan(onb_union(sf).vectors, ctx);
}

struct BlockedReport {
    bool blocked = false;
    std::optional<PartitionCertificate> witness;
    EnumerationDigest digest;
};

/// True iff some partition with two non-spanning sides has a side of
/// dimension at most N-2; then no added subspace restores phase retrieval.
template <Scalar T>
BlockedReport cp_blocked_forever(const VectorFamily<T>& f, const Context& ctx = {}) {
    const auto scan = hyperplane_partition_scan(f, ctx);
    BlockedReport rep;
    rep.digest = scan.digest;
    const std::size_t n = f.dim();
    for (const auto& p : scan.partitions) {
        if (std::min(p.dim_subset, p.dim_complement) + 2 <= n) {
            rep.blocked = true;
            rep.witness = p;
            break;
        }
    }
    return rep;
}

template <Scalar T>
BlockedReport cp_blocked_forever(const SubspaceFamily<T>& sf, const Context& ctx = {}) {
    return cp_blocked_forever(onb_union(sf).vectors, ctx);
}

struct OpenProblemTrial {
    std::uint64_t seed = 0;
    bool union_has_partition = false;
    std::size_t min_side_dim = 0;
    std::size_t max_side_dim = 0;
};

/// Brute-force experiment for the open converse question: over randomized
/// orthonormal basis choices, record the smallest side dimension reached by
/// a partition of the union into two non-spanning sets. This never decides
/// the question; it only reports what the sampled bases show.
inline std::vector<OpenProblemTrial> open_problem_experiment(const SubspaceFamily<double>& sf, std::size_t trials,
                                                             std::uint64_t seed, const Context& ctx = {}) {
    std::vector<OpenProblemTrial> out;
    for (std::size_t t = 0; t < trials; ++t) {
        OpenProblemTrial trial;
        trial.seed = seed + t;
        const auto u = onb_union_randomized(sf, trial.seed);
        const auto scan = hyperplane_partition_scan(u.vectors, ctx);
        trial.union_has_partition = !scan.partitions.empty();
        if (trial.union_has_partition) {
            trial.min_side_dim = sf.dim();
            for (const auto& p : scan.partitions) {
                const auto lo = std::min(p.dim_subset, p.dim_complement);
                if (lo < trial.min_side_dim) {
                    trial.min_side_dim = lo;
                    trial.max_side_dim = std::max(p.dim_subset, p.dim_complement);
                }
            }
        }
        out.push_back(trial);
    }
    return out;
}

}  // namespace framelab
