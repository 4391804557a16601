#pragma once

// Frames, subspaces and their basic operators.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "framelab/error.hpp"
#include "framelab/matrix.hpp"
#include "framelab/numerics.hpp"
#include "framelab/scalar.hpp"

namespace framelab {

enum class Field { Real, Complex };

/// Indexed list of M coordinate vectors in an N-dimensional space, stored as
/// the rows of an M x N matrix.
template <Scalar T>
class VectorFamily {
public:
    VectorFamily() = default;

    explicit VectorFamily(std::size_t dim) : dim_(dim), rows_(0, dim) {}

    VectorFamily(std::size_t dim, Matrix<T> rows) : dim_(dim), rows_(std::move(rows)) {
        if (rows_.rows() != 0 && rows_.cols() != dim_) {
            throw FrameError(ErrorCode::DimensionMismatch, "vectors do not match the ambient dimension");
        }
        if (rows_.rows() == 0) rows_ = Matrix<T>(0, dim_);
    }

    static VectorFamily from_vectors(std::size_t dim, const std::vector<std::vector<T>>& vectors) {
        return VectorFamily(dim, Matrix<T>::from_rows(vectors, dim));
    }

    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return rows_.rows(); }
    bool empty() const noexcept { return size() == 0; }
    Field field() const noexcept { return scalar_traits<T>::complex ? Field::Complex : Field::Real; }

    std::span<const T> operator[](std::size_t i) const { return rows_.row(i); }
    std::vector<T> vector(std::size_t i) const { return rows_.row_vector(i); }

    /// Row i is phi_i (not conjugated).
    const Matrix<T>& rows() const noexcept { return rows_; }

    VectorFamily subset(std::span<const std::size_t> idx) const { return {dim_, rows_.select_rows(idx)}; }

    VectorFamily concat(const VectorFamily& other) const {
        if (other.dim_ != dim_) throw FrameError(ErrorCode::DimensionMismatch, "families live in different spaces");
        return {dim_, rows_.vstack(other.rows_)};
    }

    VectorFamily appended(std::span<const T> v) const {
        Matrix<T> one(1, dim_);
        if (v.size() != dim_) throw FrameError(ErrorCode::DimensionMismatch, "vector length differs from dim");
        std::copy(v.begin(), v.end(), one.row(0).begin());
        return {dim_, rows_.vstack(one)};
    }

    friend bool operator==(const VectorFamily& a, const VectorFamily& b) {
        return a.dim_ == b.dim_ && a.rows_ == b.rows_;
    }

private:
    std::size_t dim_ = 0;
    Matrix<T> rows_;
};

inline VectorFamily<double> to_float(const VectorFamily<Rational>& f) { return {f.dim(), to_float(f.rows())}; }
inline const VectorFamily<double>& to_float(const VectorFamily<double>& f) { return f; }
inline const VectorFamily<Complex>& to_float(const VectorFamily<Complex>& f) { return f; }
inline VectorFamily<Rational> to_exact(const VectorFamily<double>& f) { return {f.dim(), to_exact(f.rows())}; }

/// A subspace of an N-dimensional space. Float mode keeps an orthonormal
/// basis; exact mode keeps an orthogonal (unnormalized) rational basis with
/// its squared norms. Both cache the orthogonal projector.
template <Scalar T>
class Subspace {
public:
    Subspace() = default;

    /// Span of the rows of `spanning`; dependent rows are allowed.
    static Subspace span_of(std::size_t ambient_dim, const Matrix<T>& spanning, const Tolerance& tol = {}) {
        if (spanning.rows() != 0 && spanning.cols() != ambient_dim) {
            throw FrameError(ErrorCode::DimensionMismatch, "subspace basis does not match ambient dimension");
        }
        Subspace s;
        s.ambient_ = ambient_dim;
        const Matrix<T> rows = spanning.rows() == 0 ? Matrix<T>(0, ambient_dim) : spanning;
        if constexpr (ExactScalar<T>) {
            auto ob = orthogonal_basis(rows);
            s.basis_ = ob.columns.rows() == 0 ? Matrix<T>(ambient_dim, 0) : std::move(ob.columns);
            s.squared_norms_ = std::move(ob.squared_norms);
        } else {
            s.basis_ = orthonormalize(rows, tol);
            if (s.basis_.rows() == 0) s.basis_ = Matrix<T>(ambient_dim, 0);
            s.squared_norms_.assign(s.basis_.cols(), T(1));
        }
        s.projector_ = projection_onto_span(rows, tol);
        return s;
    }

    static Subspace whole_space(std::size_t n) { return span_of(n, Matrix<T>::identity(n)); }

    std::size_t ambient_dim() const noexcept { return ambient_; }
    std::size_t dimension() const noexcept { return basis_.cols(); }
    bool is_zero() const noexcept { return dimension() == 0; }

    /// Basis vectors as columns (orthonormal in float mode, orthogonal in exact mode).
    const Matrix<T>& basis() const noexcept { return basis_; }
    const std::vector<T>& squared_norms() const noexcept { return squared_norms_; }
    const Matrix<T>& projector() const noexcept { return projector_; }

    /// The stored basis as a family (one vector per basis column).
    VectorFamily<T> basis_family() const { return {ambient_, basis_.transpose()}; }

    std::vector<T> project(std::span<const T> x) const { return projector_ * x; }

    /// Orthogonal complement inside the ambient space.
    Subspace orthogonal_complement(const Tolerance& tol = {}) const {
        const Matrix<T> ns = null_space_basis(basis_.adjoint(), tol);
        return span_of(ambient_, ns.transpose(), tol);
    }

    bool contains(std::span<const T> v, const Tolerance& tol = {}) const {
        const auto p = project(v);
        if constexpr (ExactScalar<T>) {
            return std::equal(p.begin(), p.end(), v.begin());
        } else {
            double d = 0.0;
            for (std::size_t i = 0; i < p.size(); ++i) d += abs2(T(p[i] - v[i]));
            return std::sqrt(d) <= tol.witness * std::max(1.0, norm2<T>(v));
        }
    }

private:
    std::size_t ambient_ = 0;
    Matrix<T> basis_;
    std::vector<T> squared_norms_;
    Matrix<T> projector_;
};

template <Scalar T>
class SubspaceFamily {
public:
    SubspaceFamily() = default;
    explicit SubspaceFamily(std::size_t dim) : dim_(dim) {}
    SubspaceFamily(std::size_t dim, std::vector<Subspace<T>> subspaces) : dim_(dim), subspaces_(std::move(subspaces)) {
        for (const auto& s : subspaces_) {
            if (s.ambient_dim() != dim_) {
                throw FrameError(ErrorCode::DimensionMismatch, "subspaces live in different spaces");
            }
        }
    }

    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return subspaces_.size(); }
    const Subspace<T>& operator[](std::size_t i) const { return subspaces_[i]; }
    const std::vector<Subspace<T>>& subspaces() const noexcept { return subspaces_; }

    SubspaceFamily without(std::size_t i) const {
        auto copy = subspaces_;
        copy.erase(copy.begin() + static_cast<std::ptrdiff_t>(i));
        return {dim_, std::move(copy)};
    }

private:
    std::size_t dim_ = 0;
    std::vector<Subspace<T>> subspaces_;
};

inline Subspace<double> to_float(const Subspace<Rational>& s, const Tolerance& tol = {}) {
    return Subspace<double>::span_of(s.ambient_dim(), to_float(s.basis()).transpose(), tol);
}

inline SubspaceFamily<double> to_float(const SubspaceFamily<Rational>& sf, const Tolerance& tol = {}) {
    std::vector<Subspace<double>> out;
    for (const auto& s : sf.subspaces()) out.push_back(to_float(s, tol));
    return {sf.dim(), std::move(out)};
}

inline const SubspaceFamily<double>& to_float(const SubspaceFamily<double>& sf, const Tolerance& = {}) { return sf; }

/// M x N analysis matrix: row i is conj(phi_i), so (T x)_i = <x, phi_i>.
template <Scalar T>
Matrix<T> analysis_matrix(const VectorFamily<T>& f) {
    Matrix<T> t(f.size(), f.dim());
    for (std::size_t i = 0; i < f.size(); ++i)
        for (std::size_t j = 0; j < f.dim(); ++j) t(i, j) = conj(f[i][j]);
    return t;
}

/// S = T* T, i.e. S x = sum <x, phi_i> phi_i.
template <Scalar T>
Matrix<T> frame_operator(const VectorFamily<T>& f) {
    const auto t = analysis_matrix(f);
    return t.adjoint() * t;
}

/// Gram matrix G(i, j) = <phi_j, phi_i>.
template <Scalar T>
Matrix<T> gram_matrix(const VectorFamily<T>& f) {
    const auto t = analysis_matrix(f);
    return t * t.adjoint();
}

template <Scalar T>
struct FrameBounds {
    Enclosure<real_t<T>> lower;
    Enclosure<real_t<T>> upper;
    bool is_frame = false;
};

/// Optimal frame bounds as the extreme eigenvalues of S. A non-spanning
/// family reports lower bound 0 and is_frame = false.
template <Scalar T>
FrameBounds<T> frame_bounds(const VectorFamily<T>& f, const Tolerance& tol = {}) {
    FrameBounds<T> b;
    b.is_frame = rank(f.rows(), tol) == f.dim();
    if (f.dim() == 0) return b;
    const auto s = frame_operator(f);
    Matrix<T> sym = s;
    if constexpr (scalar_traits<T>::complex) {
        // Hermitian in exact arithmetic; drop rounding in the diagonal imaginary parts.
        for (std::size_t i = 0; i < sym.rows(); ++i) sym(i, i) = sym(i, i).real();
    }
    const auto ext = symmetric_spectrum_extremes(sym, tol);
    b.upper = ext.max_eig;
    b.lower = b.is_frame ? ext.min_eig : Enclosure<real_t<T>>{};
    return b;
}

template <Scalar T>
bool is_parseval(const VectorFamily<T>& f, const Tolerance& tol = {}) {
    const auto s = frame_operator(f);
    const auto id = Matrix<T>::identity(f.dim());
    if constexpr (ExactScalar<T>) {
        (void)tol;
        return s == id;
    } else {
        return max_abs_diff(s, id) <= tol.ortho;
    }
}

/// Inverse square root of a positive definite Hermitian matrix.
template <FloatScalar T>
Matrix<T> inverse_sqrt_psd(const Matrix<T>& s) {
    Eigen::SelfAdjointEigenSolver<EigenMatrix<T>> es(to_eigen(s));
    const auto& ev = es.eigenvalues();
    Eigen::VectorXd d(ev.size());
    for (Eigen::Index i = 0; i < ev.size(); ++i) d(i) = 1.0 / std::sqrt(ev(i));
    EigenMatrix<T> v = es.eigenvectors();
    EigenMatrix<T> r = v * d.cast<T>().asDiagonal() * v.adjoint();
    return from_eigen<T>(r);
}

template <FloatScalar T>
Matrix<T> sqrt_psd(const Matrix<T>& s) {
    Eigen::SelfAdjointEigenSolver<EigenMatrix<T>> es(to_eigen(s));
    const auto& ev = es.eigenvalues();
    Eigen::VectorXd d(ev.size());
    for (Eigen::Index i = 0; i < ev.size(); ++i) d(i) = std::sqrt(std::max(0.0, static_cast<double>(ev(i))));
    EigenMatrix<T> v = es.eigenvectors();
    EigenMatrix<T> r = v * d.cast<T>().asDiagonal() * v.adjoint();
    return from_eigen<T>(r);
}

/// {S^{-1/2} phi_i}: a Parseval frame, and an orthonormal basis when M = N.
template <FloatScalar T>
VectorFamily<T> canonical_tight_transform(const VectorFamily<T>& f, const Tolerance& tol = {}) {
    if (rank(f.rows(), tol) < f.dim()) throw FrameError(ErrorCode::NotAFrame, "family does not span");
    const auto s_inv_half = inverse_sqrt_psd(frame_operator(f));
    // Rows are phi_i^T, so the transformed rows are phi_i^T (S^{-1/2})^T.
    return {f.dim(), f.rows() * s_inv_half.transpose()};
}

template <Scalar T>
void require_riesz_basis(const VectorFamily<T>& f, const Tolerance& tol) {
    if (f.size() != f.dim()) {
        throw FrameError(ErrorCode::NotRieszBasis, "a Riesz basis needs exactly N vectors");
    }
    if (rank(f.rows(), tol) < f.dim()) {
        throw FrameError(ErrorCode::NotRieszBasis, "vectors are linearly dependent");
    }
}

/// Optimal Riesz bounds: extreme eigenvalues of the Gram matrix.
template <Scalar T>
SpectrumExtremes<real_t<T>> riesz_bounds(const VectorFamily<T>& f, const Tolerance& tol = {}) {
    require_riesz_basis(f, tol);
    Matrix<T> g = gram_matrix(f);
    if constexpr (scalar_traits<T>::complex) {
        for (std::size_t i = 0; i < g.rows(); ++i) g(i, i) = g(i, i).real();
    }
    return symmetric_spectrum_extremes(g, tol);
}

/// Biorthogonal dual: <phi*_i, phi_j> = delta_ij. The dual vectors are the
/// rows of F^{-1} where F has the phi_i as columns.
template <Scalar T>
VectorFamily<T> dual_riesz_basis(const VectorFamily<T>& f, const Tolerance& tol = {}) {
    require_riesz_basis(f, tol);
    const Matrix<T> basis_cols = f.rows().transpose();
    Matrix<T> inv = inverse(basis_cols, tol);
    if constexpr (scalar_traits<T>::complex) {
        // <phi*_i, phi_j> = sum phi*_i conj(phi_j): rows of conj(F^{-1}).
        for (std::size_t i = 0; i < inv.rows(); ++i)
            for (std::size_t j = 0; j < inv.cols(); ++j) inv(i, j) = std::conj(inv(i, j));
    }
    return {f.dim(), inv};
}

/// Whether every vector of `f` is nonzero (exactly, or above the rank tolerance).
template <Scalar T>
bool has_zero_vector(const VectorFamily<T>& f, const Tolerance& tol = {}) {
    for (std::size_t i = 0; i < f.size(); ++i) {
        if constexpr (ExactScalar<T>) {
            if (std::all_of(f[i].begin(), f[i].end(), [](const T& x) { return sgn(x) == 0; })) return true;
        } else {
            if (norm2<T>(f[i]) <= tol.rank) return true;
        }
    }
    return false;
}

}  // namespace framelab
