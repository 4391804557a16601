#pragma once

// Naimark complements of Parseval frames.

#include <cstdint>
#include <optional>
#include <random>
#include <string>

#include "framelab/frame.hpp"

namespace framelab {

template <FloatScalar T>
struct NaimarkComplement {
    /// Psi: M vectors in dimension M - N.
    VectorFamily<T> family;
    /// Set when M = N and the complement lives in the zero space.
    bool zero_complement = false;
    /// Non-empty when exact input was converted to floating point.
    std::string conversion_note;
};

/// Completes the isometry T (M x N) to a unitary [T | C] and returns the
/// rows of C (conjugated in the complex case), so that phi_i (+) psi_i is an
/// orthonormal basis of M-space. By default the new columns come from
/// standard basis vectors with the largest residual after projecting out
/// range(T) and the columns already chosen (lowest index on ties). With a
/// seed, random Gaussian vectors are used instead.
template <FloatScalar T>
NaimarkComplement<T> naimark_complement(const VectorFamily<T>& f, const Context& ctx = {},
                                        std::optional<std::uint64_t> random_seed = std::nullopt) {
    if (!is_parseval(f, ctx.tol)) throw FrameError(ErrorCode::NotParseval, "Naimark complements need a Parseval frame");
    const std::size_t m = f.size();
    const std::size_t n = f.dim();
    NaimarkComplement<T> out;
    if (m == n) {
        out.family = VectorFamily<T>(0, Matrix<T>(m, 0));
        out.zero_complement = true;
        return out;
    }
    const Matrix<T> t = analysis_matrix(f);
    std::vector<std::vector<T>> basis;
    for (std::size_t j = 0; j < n; ++j) basis.push_back(t.column(j));
    std::vector<std::vector<T>> added;
    std::mt19937_64 rng(random_seed.value_or(0));
    std::normal_distribution<double> gauss;

    while (added.size() < m - n) {
        std::vector<T> best;
        double best_norm = -1.0;
        if (random_seed) {
            for (int attempt = 0; attempt < 64 && best_norm <= ctx.tol.rank; ++attempt) {
                std::vector<T> v(m);
                for (auto& x : v) {
                    if constexpr (scalar_traits<T>::complex) {
                        const double re = gauss(rng);
                        const double im = gauss(rng);
                        x = T(re, im);
                    } else {
                        x = gauss(rng);
                    }
                }
                detail::subtract_projections(v, basis);
                best_norm = norm2(v);
                best = std::move(v);
            }
        } else {
            for (std::size_t j = 0; j < m; ++j) {
                std::vector<T> v(m, T(0));
                v[j] = T(1);
                detail::subtract_projections(v, basis);
                const double nv = norm2(v);
                if (nv > best_norm) {
                    best_norm = nv;
                    best = std::move(v);
                }
            }
        }
        if (best_norm <= ctx.tol.rank) {
            throw FrameError(ErrorCode::SingularOperator, "could not extend the isometry to a unitary");
        }
        for (auto& x : best) x /= best_norm;
        basis.push_back(best);
        added.push_back(std::move(best));
    }

    Matrix<T> psi(m, m - n);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < added.size(); ++j) psi(i, j) = conj(added[j][i]);
    out.family = VectorFamily<T>(m - n, std::move(psi));
    return out;
}

inline NaimarkComplement<double> naimark_complement(const VectorFamily<Rational>& f, const Context& ctx = {},
                                                    std::optional<std::uint64_t> random_seed = std::nullopt) {
    auto out = naimark_complement(to_float(f), ctx, random_seed);
    out.conversion_note = "exact input converted to double precision";
    return out;
}

struct NaimarkPairCertificate {
    bool pass = false;
    bool first_parseval = false;
    bool second_parseval = false;
    /// max |Gram(f) + Gram(g) - I|.
    double max_residual = 0.0;
};

/// Checks that f and g are Parseval and that phi_i (+) psi_i is orthonormal.
template <FloatScalar T>
NaimarkPairCertificate verify_naimark_pair(const VectorFamily<T>& f, const VectorFamily<T>& g, const Context& ctx = {}) {
    const std::size_t m = f.size();
    if (g.size() != m || f.dim() + g.dim() != m) {
        throw FrameError(ErrorCode::DimensionMismatch, "a Naimark pair needs M vectors in dimensions N and M - N");
    }
    NaimarkPairCertificate c;
    c.first_parseval = is_parseval(f, ctx.tol);
    c.second_parseval = g.dim() == 0 || is_parseval(g, ctx.tol);
    Matrix<T> sum = gram_matrix(f);
    if (g.dim() > 0) sum = sum + gram_matrix(g);
    c.max_residual = max_abs_diff(sum, Matrix<T>::identity(m));
    c.pass = c.first_parseval && c.second_parseval && c.max_residual <= ctx.tol.ortho;
    return c;
}

}  // namespace framelab
