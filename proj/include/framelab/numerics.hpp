#pragma once

// Rank, null space, orthonormalization, projection and symmetric-spectrum
// primitives. Exact inputs use fraction-free integer elimination; float
// inputs go through Eigen's SVD / self-adjoint eigensolver and always
// compare against a Tolerance.

#include <Eigen/Dense>
#include <gmpxx.h>

#include <algorithm>
#include <bit>
#include <cstdint>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "framelab/error.hpp"
#include "framelab/matrix.hpp"
#include "framelab/scalar.hpp"

namespace framelab {

namespace detail {

inline constexpr std::uint64_t kModPrime = (std::uint64_t{1} << 61) - 1;

inline std::uint64_t mul_mod(std::uint64_t a, std::uint64_t b) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(a) * b) % kModPrime);
}

inline std::uint64_t pow_mod(std::uint64_t base, std::uint64_t exp) {
    std::uint64_t r = 1;
    while (exp != 0) {
        if (exp & 1U) r = mul_mod(r, base);
        base = mul_mod(base, base);
        exp >>= 1U;
    }
    return r;
}

using IntRow = std::vector<mpz_class>;
using ModRow = std::vector<std::uint64_t>;

/// Scales a rational row by the lcm of its denominators. Row rank is unchanged.
inline IntRow integer_row(std::span<const Rational> row) {
    mpz_class l = 1;
    for (const auto& q : row) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), q.get_den_mpz_t());
    IntRow out(row.size());
    for (std::size_t j = 0; j < row.size(); ++j) out[j] = row[j].get_num() * (l / row[j].get_den());
    return out;
}

inline ModRow mod_row(const IntRow& row) {
    ModRow out(row.size());
    for (std::size_t j = 0; j < row.size(); ++j) {
        out[j] = mpz_fdiv_ui(row[j].get_mpz_t(), kModPrime);
    }
    return out;
}

/// Rank modulo a 61-bit prime. Never exceeds the rank over Q, so a full
/// modular rank certifies full rational rank.
inline std::size_t modular_rank(std::vector<ModRow> a, std::size_t cols) {
    std::size_t r = 0;
    for (std::size_t c = 0; c < cols && r < a.size(); ++c) {
        std::size_t piv = r;
        while (piv < a.size() && a[piv][c] == 0) ++piv;
        if (piv == a.size()) continue;
        std::swap(a[piv], a[r]);
        const std::uint64_t inv = pow_mod(a[r][c], kModPrime - 2);
        for (std::size_t i = r + 1; i < a.size(); ++i) {
            if (a[i][c] == 0) continue;
            const std::uint64_t f = mul_mod(a[i][c], inv);
            for (std::size_t j = c; j < cols; ++j) {
                const std::uint64_t sub = mul_mod(f, a[r][j]);
                a[i][j] = a[i][j] >= sub ? a[i][j] - sub : a[i][j] + kModPrime - sub;
            }
        }
        ++r;
    }
    return r;
}

/// Fraction-free (Bareiss) elimination; exact rank of an integer matrix.
inline std::size_t bareiss_rank(std::vector<IntRow> a, std::size_t cols) {
    std::size_t r = 0;
    mpz_class prev = 1;
    mpz_class t;
    for (std::size_t c = 0; c < cols && r < a.size(); ++c) {
        std::size_t piv = r;
        while (piv < a.size() && sgn(a[piv][c]) == 0) ++piv;
        if (piv == a.size()) continue;
        std::swap(a[piv], a[r]);
        for (std::size_t i = r + 1; i < a.size(); ++i) {
            for (std::size_t j = c + 1; j < cols; ++j) {
                t = a[r][c] * a[i][j] - a[i][c] * a[r][j];
                mpz_divexact(a[i][j].get_mpz_t(), t.get_mpz_t(), prev.get_mpz_t());
            }
            a[i][c] = 0;
        }
        prev = a[r][c];
        ++r;
    }
    return r;
}

inline std::size_t exact_rank_rows(const std::vector<const IntRow*>& rows, const std::vector<const ModRow*>& mods,
                                   std::size_t cols) {
    const std::size_t full = std::min(rows.size(), cols);
    if (full == 0) return 0;
    std::vector<ModRow> m;
    m.reserve(mods.size());
    for (const auto* r : mods) m.push_back(*r);
    if (modular_rank(std::move(m), cols) == full) return full;
    std::vector<IntRow> z;
    z.reserve(rows.size());
    for (const auto* r : rows) z.push_back(*r);
    return bareiss_rank(std::move(z), cols);
}

template <FloatScalar T>
std::size_t svd_rank(const EigenMatrix<T>& m, double rank_tol) {
    if (m.rows() == 0 || m.cols() == 0) return 0;
    Eigen::JacobiSVD<EigenMatrix<T>> svd(m);
    const auto& s = svd.singularValues();
    const double cutoff = rank_tol * std::max(1.0, static_cast<double>(s(0)));
    std::size_t r = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > cutoff) ++r;
    return r;
}

}  // namespace detail

/// Rank queries against the rows of a fixed matrix, by index subset or
/// bitmask. Preprocesses the rows once; all queries are const and
/// thread-safe.
template <Scalar T>
class RankOracle {
public:
    RankOracle(const Matrix<T>& rows, const Tolerance& tol) : count_(rows.rows()), dim_(rows.cols()) {
        if constexpr (ExactScalar<T>) {
            (void)tol;
            ints_.reserve(count_);
            mods_.reserve(count_);
            for (std::size_t i = 0; i < count_; ++i) {
                ints_.push_back(detail::integer_row(rows.row(i)));
                mods_.push_back(detail::mod_row(ints_.back()));
            }
        } else {
            rows_ = to_eigen(rows);
            rank_tol_ = tol.rank;
        }
    }

    std::size_t size() const noexcept { return count_; }
    std::size_t dim() const noexcept { return dim_; }

    std::size_t rank(std::span<const std::size_t> idx) const {
        if constexpr (ExactScalar<T>) {
            std::vector<const detail::IntRow*> r;
            std::vector<const detail::ModRow*> m;
            r.reserve(idx.size());
            m.reserve(idx.size());
            for (auto i : idx) {
                r.push_back(&ints_[i]);
                m.push_back(&mods_[i]);
            }
            return detail::exact_rank_rows(r, m, dim_);
        } else {
            EigenMatrix<T> sub(static_cast<Eigen::Index>(idx.size()), static_cast<Eigen::Index>(dim_));
            for (std::size_t k = 0; k < idx.size(); ++k) sub.row(static_cast<Eigen::Index>(k)) = rows_.row(static_cast<Eigen::Index>(idx[k]));
            return detail::svd_rank<T>(sub, rank_tol_);
        }
    }

    std::size_t rank_mask(std::uint64_t mask) const {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < count_; ++i)
            if ((mask >> i) & 1U) idx.push_back(i);
        return rank(idx);
    }

    /// True iff the rows in `mask` span a space of dimension `target`
    /// (callers pass the ambient dimension, or the rank of the range they
    /// work in).
    bool spans_mask(std::uint64_t mask, std::size_t target) const {
        if (static_cast<std::size_t>(std::popcount(mask)) < target) return false;
        return rank_mask(mask) >= target;
    }

private:
    std::size_t count_ = 0;
    std::size_t dim_ = 0;
    std::vector<detail::IntRow> ints_;
    std::vector<detail::ModRow> mods_;
    EigenMatrix<std::conditional_t<ExactScalar<T>, double, T>> rows_;
    double rank_tol_ = 0.0;
};

/// Dimension of the row space.
template <Scalar T>
std::size_t rank(const Matrix<T>& m, const Tolerance& tol = {}) {
    if (m.rows() == 0 || m.cols() == 0) return 0;
    if constexpr (ExactScalar<T>) {
        std::vector<detail::IntRow> ints;
        for (std::size_t i = 0; i < m.rows(); ++i) ints.push_back(detail::integer_row(m.row(i)));
        return detail::bareiss_rank(std::move(ints), m.cols());
    } else {
        return detail::svd_rank<T>(to_eigen(m), tol.rank);
    }
}

/// Reduced row echelon form over Q; returns pivot columns.
inline std::vector<std::size_t> rref_in_place(Matrix<Rational>& a) {
    std::vector<std::size_t> pivots;
    std::size_t r = 0;
    for (std::size_t c = 0; c < a.cols() && r < a.rows(); ++c) {
        std::size_t piv = r;
        while (piv < a.rows() && sgn(a(piv, c)) == 0) ++piv;
        if (piv == a.rows()) continue;
        if (piv != r)
            for (std::size_t j = 0; j < a.cols(); ++j) std::swap(a(piv, j), a(r, j));
        const Rational inv = 1 / a(r, c);
        for (std::size_t j = c; j < a.cols(); ++j) a(r, j) *= inv;
        for (std::size_t i = 0; i < a.rows(); ++i) {
            if (i == r || sgn(a(i, c)) == 0) continue;
            const Rational f = a(i, c);
            for (std::size_t j = c; j < a.cols(); ++j) a(i, j) -= f * a(r, j);
        }
        pivots.push_back(c);
        ++r;
    }
    return pivots;
}

/// Columns form a basis of {x : m x = 0}.
template <Scalar T>
Matrix<T> null_space_basis(const Matrix<T>& m, const Tolerance& tol = {}) {
    const std::size_t n = m.cols();
    if (m.rows() == 0) return Matrix<T>::identity(n);
    if constexpr (ExactScalar<T>) {
        Matrix<Rational> a = m;
        const auto pivots = rref_in_place(a);
        std::vector<bool> is_pivot(n, false);
        for (auto p : pivots) is_pivot[p] = true;
        Matrix<Rational> basis(n, n - pivots.size());
        std::size_t k = 0;
        for (std::size_t f = 0; f < n; ++f) {
            if (is_pivot[f]) continue;
            basis(f, k) = 1;
            for (std::size_t r = 0; r < pivots.size(); ++r) basis(pivots[r], k) = -a(r, f);
            ++k;
        }
        return basis;
    } else {
        const auto e = to_eigen(m);
        Eigen::JacobiSVD<EigenMatrix<T>> svd(e, Eigen::ComputeFullV);
        const auto& s = svd.singularValues();
        const double cutoff = tol.rank * std::max(1.0, s.size() > 0 ? static_cast<double>(s(0)) : 0.0);
        Eigen::Index r = 0;
        for (Eigen::Index i = 0; i < s.size(); ++i)
            if (s(i) > cutoff) ++r;
        const Eigen::Index nn = static_cast<Eigen::Index>(n);
        EigenMatrix<T> v = svd.matrixV().rightCols(nn - r);
        return from_eigen<T>(v);
    }
}

/// Orthonormal basis (as columns) of the span of the rows of `vectors`.
/// Modified Gram-Schmidt with one re-orthogonalization pass.
template <FloatScalar T>
Matrix<T> orthonormalize(const Matrix<T>& vectors, const Tolerance& tol = {}) {
    const std::size_t n = vectors.cols();
    double scale = 1.0;
    for (std::size_t i = 0; i < vectors.rows(); ++i) scale = std::max(scale, norm2<T>(vectors.row(i)));
    std::vector<std::vector<T>> q;
    for (std::size_t i = 0; i < vectors.rows(); ++i) {
        std::vector<T> v = vectors.row_vector(i);
        for (int pass = 0; pass < 2; ++pass) {
            for (const auto& b : q) {
                const T c = dot(v, b);
                for (std::size_t k = 0; k < n; ++k) v[k] -= c * b[k];
            }
        }
        const double nv = norm2(v);
        if (nv > tol.rank * scale) {
            for (auto& x : v) x /= nv;
            q.push_back(std::move(v));
        }
    }
    return Matrix<T>::from_columns(q, n);
}

struct OrthogonalBasis {
    Matrix<Rational> columns;
    std::vector<Rational> squared_norms;
};

/// Exact orthogonal (not normalized) basis of the row span; square roots
/// leave Q so the squared norms are returned instead.
inline OrthogonalBasis orthogonal_basis(const Matrix<Rational>& vectors) {
    const std::size_t n = vectors.cols();
    std::vector<std::vector<Rational>> q;
    std::vector<Rational> nn;
    for (std::size_t i = 0; i < vectors.rows(); ++i) {
        std::vector<Rational> v = vectors.row_vector(i);
        for (std::size_t b = 0; b < q.size(); ++b) {
            const Rational c = dot(v, q[b]) / nn[b];
            if (sgn(c) == 0) continue;
            for (std::size_t k = 0; k < n; ++k) v[k] -= c * q[b][k];
        }
        Rational s = dot(v, v);
        if (sgn(s) != 0) {
            q.push_back(std::move(v));
            nn.push_back(std::move(s));
        }
    }
    return {Matrix<Rational>::from_columns(q, n), std::move(nn)};
}

/// Orthogonal projector onto the span of the rows of `vectors`.
template <Scalar T>
Matrix<T> projection_onto_span(const Matrix<T>& vectors, const Tolerance& tol = {}) {
    const std::size_t n = vectors.cols();
    Matrix<T> p(n, n);
    if constexpr (ExactScalar<T>) {
        (void)tol;
        const auto ob = orthogonal_basis(vectors);
        for (std::size_t b = 0; b < ob.squared_norms.size(); ++b) {
            for (std::size_t i = 0; i < n; ++i) {
                const Rational ci = ob.columns(i, b) / ob.squared_norms[b];
                if (sgn(ci) == 0) continue;
                for (std::size_t j = 0; j < n; ++j) p(i, j) += ci * ob.columns(j, b);
            }
        }
    } else {
        const auto q = orthonormalize(vectors, tol);
        p = q * q.adjoint();
    }
    return p;
}

template <Scalar R>
struct Enclosure {
    R lo{};
    R hi{};

    bool exact() const { return lo == hi; }
    double value() const { return (to_double(lo) + to_double(hi)) / 2.0; }
};

template <Scalar R>
struct SpectrumExtremes {
    Enclosure<R> min_eig;
    Enclosure<R> max_eig;
};

namespace detail {

/// Coefficients (ascending powers) of det(tI - A) by Faddeev-LeVerrier.
inline std::vector<Rational> characteristic_polynomial(const Matrix<Rational>& a) {
    const std::size_t n = a.rows();
    std::vector<Rational> c(n + 1);
    c[n] = 1;
    Matrix<Rational> mk(n, n);
    for (std::size_t k = 1; k <= n; ++k) {
        Matrix<Rational> next = a * mk;
        for (std::size_t i = 0; i < n; ++i) next(i, i) += c[n - k + 1];
        mk = std::move(next);
        const Matrix<Rational> am = a * mk;
        Rational tr = 0;
        for (std::size_t i = 0; i < n; ++i) tr += am(i, i);
        c[n - k] = -tr / static_cast<long>(k);
    }
    return c;
}

/// Coefficients of p(t + x).
inline std::vector<Rational> taylor_shift(std::vector<Rational> a, const Rational& t) {
    const std::size_t n = a.size() - 1;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = n; j-- > i;) a[j] += t * a[j + 1];
    return a;
}

inline std::size_t sign_variations(const std::vector<Rational>& a) {
    std::size_t v = 0;
    int last = 0;
    for (const auto& x : a) {
        const int s = sgn(x);
        if (s == 0) continue;
        if (last != 0 && s != last) ++v;
        last = s;
    }
    return v;
}

/// Root counts of a real-rooted polynomial relative to t. Descartes' rule
/// of signs is exact when every root is real.
struct RootCounts {
    std::size_t below;
    std::size_t at;
    std::size_t above;
};

inline RootCounts count_roots(const std::vector<Rational>& p, const Rational& t) {
    auto r = taylor_shift(p, t);
    std::size_t at = 0;
    while (at < r.size() && sgn(r[at]) == 0) ++at;
    const std::size_t above = sign_variations(r);
    for (std::size_t k = 1; k < r.size(); k += 2) r[k] = -r[k];
    return {sign_variations(r), at, above};
}

}  // namespace detail

/// Extreme eigenvalues of a symmetric (Hermitian) matrix. Float mode returns
/// point values; exact mode returns certified rational enclosures of width
/// at most tol.witness, collapsing to a point when the eigenvalue is hit
/// exactly during bisection.
template <Scalar T>
SpectrumExtremes<real_t<T>> symmetric_spectrum_extremes(const Matrix<T>& m, const Tolerance& tol = {}) {
    if (m.rows() != m.cols()) {
        throw FrameError(ErrorCode::NotSymmetric, "matrix is not square");
    }
    const std::size_t n = m.rows();
    if (n == 0) return {};
    if constexpr (ExactScalar<T>) {
        if (!(m == m.transpose())) {
            throw FrameError(ErrorCode::NotSymmetric, "exact matrix is not symmetric");
        }
        const auto p = detail::characteristic_polynomial(m);
        Rational lo = m(0, 0), hi = m(0, 0);
        for (std::size_t i = 0; i < n; ++i) {
            Rational radius = 0;
            for (std::size_t j = 0; j < n; ++j)
                if (j != i) radius += abs(m(i, j));
            lo = std::min<Rational>(lo, m(i, i) - radius);
            hi = std::max<Rational>(hi, m(i, i) + radius);
        }
        const Rational width = rational_from_double(tol.witness);
        auto smallest = [&]() -> Enclosure<Rational> {
            Rational a = lo, b = hi;
            if (detail::count_roots(p, a).at > 0) return {a, a};
            if (detail::count_roots(p, b).below == 0) return {b, b};
            while (b - a > width) {
                Rational mid = (a + b) / 2;
                const auto c = detail::count_roots(p, mid);
                if (c.below >= 1) {
                    b = mid;
                } else if (c.at >= 1) {
                    return {mid, mid};
                } else {
                    a = mid;
                }
            }
            return {a, b};
        };
        auto largest = [&]() -> Enclosure<Rational> {
            Rational a = lo, b = hi;
            if (detail::count_roots(p, b).at > 0) return {b, b};
            if (detail::count_roots(p, a).above == 0) return {a, a};
            while (b - a > width) {
                Rational mid = (a + b) / 2;
                const auto c = detail::count_roots(p, mid);
                if (c.above >= 1) {
                    a = mid;
                } else if (c.at >= 1) {
                    return {mid, mid};
                } else {
                    b = mid;
                }
            }
            return {a, b};
        };
        return {smallest(), largest()};
    } else {
        double scale = 1.0;
        for (const auto& x : m.data()) scale = std::max(scale, magnitude(x));
        if (max_abs_diff(m, m.adjoint()) > tol.ortho * scale) {
            throw FrameError(ErrorCode::NotSymmetric, "asymmetry exceeds ortho tolerance");
        }
        EigenMatrix<T> e = to_eigen(m);
        Eigen::SelfAdjointEigenSolver<EigenMatrix<T>> es(e, Eigen::EigenvaluesOnly);
        const auto& ev = es.eigenvalues();
        const double mn = ev(0);
        const double mx = ev(ev.size() - 1);
        return {{mn, mn}, {mx, mx}};
    }
}

/// Inverse of a square matrix; SingularOperator otherwise.
template <Scalar T>
Matrix<T> inverse(const Matrix<T>& m, const Tolerance& tol = {}) {
    const std::size_t n = m.rows();
    if (m.cols() != n) throw FrameError(ErrorCode::SingularOperator, "non-square operator");
    if constexpr (ExactScalar<T>) {
        (void)tol;
        Matrix<Rational> aug = m.hstack(Matrix<Rational>::identity(n));
        const auto piv = rref_in_place(aug);
        if (piv.size() < n || piv[n - 1] != n - 1) {
            throw FrameError(ErrorCode::SingularOperator, "operator is singular");
        }
        Matrix<Rational> inv(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) inv(i, j) = aug(i, n + j);
        return inv;
    } else {
        if (rank(m, tol) < n) throw FrameError(ErrorCode::SingularOperator, "operator is numerically singular");
        EigenMatrix<T> e = to_eigen(m);
        EigenMatrix<T> inv = e.fullPivLu().inverse();
        return from_eigen<T>(inv);
    }
}

/// Indices of a maximal independent subset of rows, chosen greedily in order.
template <Scalar T>
std::vector<std::size_t> independent_rows(const Matrix<T>& m, const Tolerance& tol = {}) {
    RankOracle<T> oracle(m, tol);
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        keep.push_back(i);
        if (oracle.rank(keep) < keep.size()) keep.pop_back();
    }
    return keep;
}

/// Whether v lies in the row span of `rows`.
template <Scalar T>
bool span_contains(const Matrix<T>& rows, std::span<const T> v, const Tolerance& tol = {}) {
    Matrix<T> one(1, v.size());
    std::copy(v.begin(), v.end(), one.row(0).begin());
    const auto with = rows.rows() == 0 ? one : rows.vstack(one);
    return rank(with, tol) == rank(rows, tol);
}


namespace detail {

/// v -= sum <v, b> b over an orthonormal list, two passes.
template <FloatScalar T>
void subtract_projections(std::vector<T>& v, const std::vector<std::vector<T>>& basis) {
    for (int pass = 0; pass < 2; ++pass) {
        for (const auto& b : basis) {
            const T c = dot(v, b);
            for (std::size_t k = 0; k < v.size(); ++k) v[k] -= c * b[k];
        }
    }
}

}  // namespace detail

}  // namespace framelab
