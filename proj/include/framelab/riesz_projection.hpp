#pragma once

// Projections of orthonormal and Riesz bases: span/independence dualities
// and full-spark projection constructions.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "framelab/phase_retrieval.hpp"
#include "framelab/random.hpp"
#include "framelab/spark.hpp"

namespace framelab {

template <Scalar T>
Matrix<T> complementary_projector(const Matrix<T>& p) {
    return Matrix<T>::identity(p.rows()) - p;
}

/// Rows P v_i for the rows v_i of `vectors`.
template <Scalar T>
Matrix<T> apply_to_rows(const Matrix<T>& p, const Matrix<T>& vectors) {
    if (vectors.rows() == 0) return Matrix<T>(0, p.rows());
    return vectors * p.transpose();
}

template <Scalar T>
std::size_t rank_of_rows(const Matrix<T>& rows, std::span<const std::size_t> idx, const Tolerance& tol) {
    if (idx.empty()) return 0;
    return rank(rows.select_rows(idx), tol);
}

inline std::vector<std::size_t> complement_indices(std::span<const std::size_t> idx, std::size_t m) {
    std::vector<bool> in(m, false);
    for (auto i : idx) {
        if (i >= m) throw FrameError(ErrorCode::InvalidArgument, "index out of range");
        in[i] = true;
    }
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < m; ++i)
        if (!in[i]) out.push_back(i);
    return out;
}

struct DualityCheck {
    bool first = false;
    bool second = false;
    bool agree() const { return first == second; }
};

/// first: {P e_i}_{i in I} is independent; second: {(I-P) e_i}_{i not in I}
/// spans the range of I - P.
template <Scalar T>
DualityCheck bcps_duality_check(const Subspace<T>& p, std::span<const std::size_t> idx, const Tolerance& tol = {}) {
    const std::size_t m = p.ambient_dim();
    const Matrix<T>& proj = p.projector();
    const Matrix<T> comp = complementary_projector(proj);
    // Both projectors are symmetric, so row i is the image of e_i.
    DualityCheck c;
    c.first = rank_of_rows(proj, idx, tol) == idx.size();
    const auto rest = complement_indices(idx, m);
    c.second = rank_of_rows(comp, rest, tol) == m - p.dimension();
    return c;
}

enum class BasisKind { Orthonormal, Riesz };

struct FullSparkProjectionCheck {
    bool dual_criterion = false;
    bool direct = false;
    /// First index set (0-based) violating the dual criterion.
    std::optional<std::vector<std::size_t>> failing_subset;
    bool agree() const { return dual_criterion == direct; }
};

template <Scalar T>
void require_basis(const VectorFamily<T>& f, BasisKind kind, const Tolerance& tol) {
    if (f.size() != f.dim() || rank(f.rows(), tol) < f.dim()) {
        throw FrameError(ErrorCode::NotABasis, "vectors do not form a basis");
    }
    if (kind == BasisKind::Orthonormal) {
        const auto g = gram_matrix(f);
        const auto id = Matrix<T>::identity(f.size());
        bool ok;
        if constexpr (ExactScalar<T>) {
            ok = g == id;
        } else {
            ok = max_abs_diff(g, id) <= tol.ortho;
        }
        if (!ok) throw FrameError(ErrorCode::NotABasis, "basis is not orthonormal");
    }
}

/// Whether the N-subsets of `rows` (N = target) all have rank N: full spark
/// of vectors living in a target-dimensional range, measured in ambient
/// coordinates.
template <Scalar T>
bool full_spark_on_range(const Matrix<T>& rows, std::size_t target, const Context& ctx) {
    const std::size_t m = rows.rows();
    if (m < target) return false;
    require_scan_size(m, ctx);
    RankOracle<T> oracle(rows, ctx.tol);
    for (Mask s : subsets_of_size(m, target))
        if (oracle.rank_mask(s) < target) return false;
    return true;
}

/// Decides whether {P phi_i} is full spark on range(P) through the dual
/// criterion for the given basis kind, and directly.
/// Orthonormal: {(I-P) phi_i}_{i in I} spans (I-P)H for every |I| = M - rank P.
/// Riesz: span{(I-P) phi_i} meets span{phi_i}_{i in I} only in 0 for every
/// |I| = rank P.
template <RealScalar T>
FullSparkProjectionCheck full_spark_projection_check(const Subspace<T>& p, const VectorFamily<T>& f, BasisKind kind,
                                                     const Context& ctx = {}) {
    require_basis(f, kind, ctx.tol);
    const std::size_t m = f.size();
    const std::size_t r = p.dimension();
    if (p.ambient_dim() != m) throw FrameError(ErrorCode::DimensionMismatch, "projection lives in a different space");
    require_scan_size(m, ctx);
    const Matrix<T> comp = complementary_projector(p.projector());
    const Matrix<T> comp_rows = apply_to_rows(comp, f.rows());
    FullSparkProjectionCheck out;
    out.dual_criterion = true;
    if (kind == BasisKind::Orthonormal) {
        RankOracle<T> oracle(comp_rows, ctx.tol);
        for (Mask s : subsets_of_size(m, m - r)) {
            if (oracle.rank_mask(s) < m - r) {
                out.dual_criterion = false;
                out.failing_subset = mask_indices(s);
                break;
            }
        }
    } else {
        const std::size_t dim_u = rank(comp_rows, ctx.tol);
        const Matrix<T> stacked = comp_rows.vstack(f.rows());
        RankOracle<T> oracle(stacked, ctx.tol);
        const Mask comp_mask = full_mask(m);
        for (Mask s : subsets_of_size(m, r)) {
            // dim(U + V) = dim U + dim V iff U and V meet only in 0.
            if (oracle.rank_mask(comp_mask | (s << m)) < dim_u + r) {
                out.dual_criterion = false;
                out.failing_subset = mask_indices(s);
                break;
            }
        }
    }
    out.direct = full_spark_on_range(apply_to_rows(p.projector(), f.rows()), r, ctx);
    return out;
}

/// first: {P phi_i}_{i in I} spans P H; second: {(I-P) phi*_i}_{i not in I}
/// is independent, with phi* the dual Riesz basis.
template <RealScalar T>
DualityCheck riesz_span_independence_dual(const Subspace<T>& p, const VectorFamily<T>& f, std::span<const std::size_t> idx,
                                          const Tolerance& tol = {}) {
    const auto dual = dual_riesz_basis(f, tol);
    const std::size_t m = f.size();
    if (p.ambient_dim() != m) throw FrameError(ErrorCode::DimensionMismatch, "projection lives in a different space");
    DualityCheck c;
    c.first = rank_of_rows(apply_to_rows(p.projector(), f.rows()), idx, tol) == p.dimension();
    const auto rest = complement_indices(idx, m);
    c.second = rank_of_rows(apply_to_rows(complementary_projector(p.projector()), dual.rows()), rest, tol) == rest.size();
    return c;
}

/// Extends a family to a basis: keeps a maximal independent prefix-greedy
/// subset, then appends standard basis vectors in order.
template <Scalar T>
VectorFamily<T> complete_to_basis(const VectorFamily<T>& f, const Tolerance& tol = {}) {
    const std::size_t n = f.dim();
    const auto keep = independent_rows(f.rows(), tol);
    Matrix<T> rows = keep.empty() ? Matrix<T>(0, n) : f.rows().select_rows(keep);
    for (std::size_t j = 0; j < n && rows.rows() < n; ++j) {
        std::vector<T> e(n, T(0));
        e[j] = T(1);
        if (!span_contains(rows, std::span<const T>(e), tol)) {
            Matrix<T> one(1, n);
            one(0, j) = T(1);
            rows = rows.rows() == 0 ? one : rows.vstack(one);
        }
    }
    return {n, rows};
}

template <RealScalar T>
struct FullSparkProjection {
    /// Range of P (rank N).
    Subspace<T> range;
    std::size_t attempts = 0;
    /// The integer N x M frame whose row space fixed the construction.
    Matrix<T> seed_frame;
    bool full_spark_on_range = false;
    /// Phase retrieval of {P phi_i} on the range, when 2N - 1 <= M.
    std::optional<PRCertificate<T>> range_pr;
    /// max |P - P_float| against the literal S^{1/2}, S^{-1/2} route.
    double float_route_deviation = 0.0;
};

namespace detail {

/// Projection through the square-root route in floating point: with
/// S the frame operator of f, U = S^{-1/2} f is orthonormal; P0 projects
/// onto the row space of H in the U coordinates and W = S^{1/2}(I - P0').
inline Matrix<double> float_route_projector(const VectorFamily<double>& f, const Matrix<double>& h, const Tolerance& tol) {
    const std::size_t m = f.size();
    const Matrix<double> s = frame_operator(f);
    const Matrix<double> s_half = sqrt_psd(s);
    const Matrix<double> s_inv_half = inverse_sqrt_psd(s);
    // Columns of u are S^{-1/2} phi_i.
    const Matrix<double> phi_cols = f.rows().transpose();
    const Matrix<double> u = s_inv_half * phi_cols;
    const Matrix<double> p0 = projection_onto_span(h, tol);
    const Matrix<double> p0_rot = u * p0 * u.transpose();
    const Matrix<double> w_cols = s_half * (Matrix<double>::identity(m) - p0_rot);
    const Matrix<double> q = projection_onto_span(w_cols.transpose(), tol);
    return Matrix<double>::identity(m) - q;
}

}  // namespace detail

/// A rank-N projection P with {P phi_i} full spark on its range, for a Riesz
/// basis phi of M-space. A random integer N x M frame H that is full spark
/// fixes P0 (onto the row space of H); then W = S^{1/2}(I - P0')H_M with
/// P0' = U P0 U^T and U = S^{-1/2}Phi. Since S^{1/2}U = Phi, W is spanned by
/// Phi k for k in the null space of H, which keeps the exact route rational.
template <RealScalar T>
FullSparkProjection<T> construct_full_spark_projection(const VectorFamily<T>& f, std::size_t n,
                                                       const SamplingOptions& opt = {}, const Context& ctx = {}) {
    require_riesz_basis(f, ctx.tol);
    const std::size_t m = f.size();
    if (n > m) throw FrameError(ErrorCode::InvalidArgument, "rank must not exceed the dimension");
    FullSparkProjection<T> out;
    const Matrix<T> phi_cols = f.rows().transpose();
    std::mt19937_64 rng(opt.seed);
    while (out.attempts < opt.budget) {
        ++out.attempts;
        Matrix<T> h(n, m);
        for (std::size_t i = 0; i < n; ++i) {
            const auto row = random_integer_vector<T>(rng, m, opt.bound);
            std::copy(row.begin(), row.end(), h.row(i).begin());
        }
        // Columns of H as M vectors in N-space must be full spark.
        if (n > 0 && !is_full_spark(VectorFamily<T>(n, h.transpose()), ctx)) continue;
        const Matrix<T> k = null_space_basis(h, ctx.tol);
        Matrix<T> w_rows(0, m);
        if (k.cols() > 0) w_rows = (phi_cols * k).transpose();
        const Matrix<T> q = projection_onto_span(w_rows, ctx.tol);
        const Matrix<T> p = Matrix<T>::identity(m) - q;
        const Matrix<T> images = apply_to_rows(p, f.rows());
        out.range = Subspace<T>::span_of(m, images, ctx.tol);
        if (out.range.dimension() != n) continue;
        out.full_spark_on_range = full_spark_on_range(images, n, ctx);
        if (!out.full_spark_on_range) continue;
        out.seed_frame = h;
        if (2 * n >= 1 && 2 * n - 1 <= m) out.range_pr = pr_vectors_real(project_family(f, out.range), ctx);
        const Matrix<double> pf = detail::float_route_projector(to_float(f), to_float(h), ctx.tol);
        out.float_route_deviation = max_abs_diff(pf, to_float(out.range.projector()));
        return out;
    }
    throw FrameError(ErrorCode::ConstructionBudgetExhausted,
                     "no full-spark projection after " + std::to_string(opt.budget) + " attempts");
}

template <RealScalar T>
struct DualPairProjection {
    FullSparkProjection<T> projection;
    /// Phase retrieval of {P phi_i} on range(P).
    PRCertificate<T> primal;
    /// Phase retrieval of {(I-P) phi*_i} on range(I-P).
    PRCertificate<T> dual;
    std::size_t attempts = 0;
};

/// A rank-N projection for which {P phi_i} and {(I-P) phi*_i} both do phase
/// retrieval on their ranges; requires 2N - 1 <= M <= 2N + 1.
template <RealScalar T>
DualPairProjection<T> dual_pair_projection(const VectorFamily<T>& f, std::size_t n, const SamplingOptions& opt = {},
                                           const Context& ctx = {}) {
    const std::size_t m = f.size();
    if (2 * n < m + 1 || m > 2 * n + 1) {
        throw FrameError(ErrorCode::PreconditionRange, "needs 2N - 1 <= M <= 2N + 1 (M = " + std::to_string(m) +
                                                           ", N = " + std::to_string(n) + ")");
    }
    require_riesz_basis(f, ctx.tol);
    const auto dual = dual_riesz_basis(f, ctx.tol);
    DualPairProjection<T> out;
    for (std::size_t attempt = 0; attempt < opt.budget; ++attempt) {
        ++out.attempts;
        SamplingOptions inner = opt;
        inner.seed = derive_seed(opt.seed, attempt);
        auto proj = construct_full_spark_projection(f, n, inner, ctx);
        auto primal = pr_vectors_real(project_family(f, proj.range), ctx);
        const auto comp_range = proj.range.orthogonal_complement(ctx.tol);
        auto dual_pr = pr_vectors_real(project_family(dual, comp_range), ctx);
        if (primal.passed() && dual_pr.passed()) {
            out.projection = std::move(proj);
            out.primal = std::move(primal);
            out.dual = std::move(dual_pr);
            return out;
        }
    }
    throw FrameError(ErrorCode::ConstructionBudgetExhausted,
                     "no projection satisfying both conditions after " + std::to_string(opt.budget) + " attempts");
}

}  // namespace framelab
