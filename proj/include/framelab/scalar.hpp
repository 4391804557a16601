#pragma once

// Scalar kinds, tolerances and the small amount of per-call configuration
// shared by every module.

#include <gmpxx.h>

#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdlib>
#include <string>
#include <string_view>
#include <thread>

#include "framelab/error.hpp"

namespace framelab {

using Rational = mpq_class;
using Complex = std::complex<double>;

template <class T>
struct scalar_traits;

template <>
struct scalar_traits<double> {
    static constexpr bool exact = false;
    static constexpr bool complex = false;
    using real_type = double;
    static constexpr std::string_view mode = "float";
};

template <>
struct scalar_traits<Complex> {
    static constexpr bool exact = false;
    static constexpr bool complex = true;
    using real_type = double;
    static constexpr std::string_view mode = "float";
};

template <>
struct scalar_traits<Rational> {
    static constexpr bool exact = true;
    static constexpr bool complex = false;
    using real_type = Rational;
    static constexpr std::string_view mode = "exact";
};

template <class T>
concept Scalar = requires { scalar_traits<T>::exact; };

template <class T>
concept ExactScalar = Scalar<T> && scalar_traits<T>::exact;

template <class T>
concept FloatScalar = Scalar<T> && !scalar_traits<T>::exact;

template <class T>
concept RealScalar = Scalar<T> && !scalar_traits<T>::complex;

template <class T>
using real_t = typename scalar_traits<T>::real_type;

template <Scalar T>
constexpr std::string_view arithmetic_mode() {
    return scalar_traits<T>::mode;
}

inline double conj(double x) { return x; }
inline Complex conj(const Complex& z) { return std::conj(z); }
inline const Rational& conj(const Rational& q) { return q; }

inline double abs2(double x) { return x * x; }
inline double abs2(const Complex& z) { return std::norm(z); }
inline Rational abs2(const Rational& q) { return q * q; }

inline double to_double(double x) { return x; }
inline double to_double(const Complex& z) { return z.real(); }
inline double to_double(const Rational& q) { return q.get_d(); }

inline double magnitude(double x) { return std::abs(x); }
inline double magnitude(const Complex& z) { return std::abs(z); }
inline double magnitude(const Rational& q) { return std::abs(q.get_d()); }

inline bool exactly_zero(const Rational& q) { return sgn(q) == 0; }

/// Exact binary value of a double. Every finite double is a dyadic rational.
inline Rational rational_from_double(double x) {
    if (!std::isfinite(x)) {
        throw FrameError(ErrorCode::ParseError, "non-finite value cannot be made exact");
    }
    return Rational(x);
}

/// Parses "p", "p/q", or a decimal like "-0.25" into an exact rational.
inline Rational parse_rational(std::string_view text) {
    std::string s(text);
    auto trim = [](std::string& str) {
        const auto b = str.find_first_not_of(" \t");
        const auto e = str.find_last_not_of(" \t");
        str = b == std::string::npos ? std::string{} : str.substr(b, e - b + 1);
    };
    trim(s);
    if (s.empty()) {
        throw FrameError(ErrorCode::ParseError, "empty rational literal");
    }
    if (const auto dot = s.find('.'); dot != std::string::npos) {
        if (s.find('/') != std::string::npos || s.find_first_of("eE") != std::string::npos) {
            throw FrameError(ErrorCode::ParseError, "unsupported rational literal '" + s + "'");
        }
        std::string digits = s.substr(0, dot) + s.substr(dot + 1);
        const auto frac_len = s.size() - dot - 1;
        if (digits.empty() || digits == "-" || digits == "+") {
            throw FrameError(ErrorCode::ParseError, "bad decimal literal '" + s + "'");
        }
        if (digits.front() == '+') digits.erase(0, 1);
        mpz_class num;
        if (num.set_str(digits, 10) != 0) {
            throw FrameError(ErrorCode::ParseError, "bad decimal literal '" + s + "'");
        }
        mpz_class den;
        mpz_ui_pow_ui(den.get_mpz_t(), 10, frac_len);
        Rational q(num, den);
        q.canonicalize();
        return q;
    }
    if (s.front() == '+') s.erase(0, 1);
    Rational q;
    if (q.set_str(s, 10) != 0) {
        throw FrameError(ErrorCode::ParseError, "bad rational literal '" + s + "'");
    }
    if (sgn(q.get_den()) == 0) {
        throw FrameError(ErrorCode::ParseError, "zero denominator in '" + s + "'");
    }
    q.canonicalize();
    return q;
}

inline std::string to_string(const Rational& q) { return q.get_str(10); }

/// Rank, orthogonality and witness tolerances for float-mode decisions.
/// Exact-mode decisions never consult these.
struct Tolerance {
    double rank = 1e-9;
    double ortho = 1e-10;
    double witness = 1e-8;

    /// `--tol x`: the other two scale as 0.1x and 10x.
    static Tolerance from_rank(double rank_tol) {
        if (!(rank_tol > 0.0)) {
            throw FrameError(ErrorCode::InvalidArgument, "tolerances must be strictly positive");
        }
        return {rank_tol, 0.1 * rank_tol, 10.0 * rank_tol};
    }
};

/// Per-call settings: tolerances, the exponential-scan guard and a worker cap.
struct Context {
    Tolerance tol{};
    /// Exponential scans refuse families larger than this (lifted by --force).
    std::size_t max_scan = 24;
    /// 0 means FRAMELAB_THREADS if set, otherwise hardware concurrency.
    unsigned threads = 0;

    unsigned worker_count() const {
        unsigned n = threads;
        if (n == 0) {
            if (const char* env = std::getenv("FRAMELAB_THREADS")) {
                n = static_cast<unsigned>(std::strtoul(env, nullptr, 10));
            }
        }
        if (n == 0) n = std::thread::hardware_concurrency();
        return n == 0 ? 1 : n;
    }
};

}  // namespace framelab
