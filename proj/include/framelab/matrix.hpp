#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "framelab/error.hpp"
#include "framelab/scalar.hpp"

namespace framelab {

/// Dense row-major matrix over one of the supported scalars.
template <Scalar T>
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, T(0)) {}

    Matrix(std::initializer_list<std::initializer_list<T>> init) {
        rows_ = init.size();
        cols_ = rows_ == 0 ? 0 : init.begin()->size();
        data_.reserve(rows_ * cols_);
        for (const auto& r : init) {
            if (r.size() != cols_) {
                throw FrameError(ErrorCode::DimensionMismatch, "ragged matrix initializer");
            }
            data_.insert(data_.end(), r.begin(), r.end());
        }
    }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
        return m;
    }

    static Matrix from_rows(const std::vector<std::vector<T>>& rows, std::size_t cols) {
        Matrix m(rows.size(), cols);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != cols) {
                throw FrameError(ErrorCode::DimensionMismatch, "row length differs from column count");
            }
            std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
        }
        return m;
    }

    /// Columns given as a list of vectors of length `rows`.
    static Matrix from_columns(const std::vector<std::vector<T>>& cols, std::size_t rows) {
        Matrix m(rows, cols.size());
        for (std::size_t j = 0; j < cols.size(); ++j) {
            if (cols[j].size() != rows) {
                throw FrameError(ErrorCode::DimensionMismatch, "column length differs from row count");
            }
            for (std::size_t i = 0; i < rows; ++i) m(i, j) = cols[j][i];
        }
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return data_.empty(); }

    T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<T> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const T> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    std::vector<T> row_vector(std::size_t i) const {
        auto r = row(i);
        return {r.begin(), r.end()};
    }

    std::vector<T> column(std::size_t j) const {
        std::vector<T> c(rows_);
        for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
        return c;
    }

    Matrix transpose() const {
        Matrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    /// Conjugate transpose; equals transpose() for real scalars.
    Matrix adjoint() const {
        Matrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t(j, i) = conj((*this)(i, j));
        return t;
    }

    Matrix select_rows(std::span<const std::size_t> idx) const {
        Matrix s(idx.size(), cols_);
        for (std::size_t k = 0; k < idx.size(); ++k) {
            auto src = row(idx[k]);
            std::copy(src.begin(), src.end(), s.row(k).begin());
        }
        return s;
    }

    Matrix select_cols(std::span<const std::size_t> idx) const {
        Matrix s(rows_, idx.size());
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t k = 0; k < idx.size(); ++k) s(i, k) = (*this)(i, idx[k]);
        return s;
    }

    Matrix vstack(const Matrix& below) const {
        if (rows_ != 0 && below.rows_ != 0 && below.cols_ != cols_) {
            throw FrameError(ErrorCode::DimensionMismatch, "vstack column mismatch");
        }
        Matrix s(rows_ + below.rows_, rows_ != 0 ? cols_ : below.cols_);
        std::copy(data_.begin(), data_.end(), s.data_.begin());
        std::copy(below.data_.begin(), below.data_.end(), s.data_.begin() + static_cast<std::ptrdiff_t>(data_.size()));
        return s;
    }

    Matrix hstack(const Matrix& right) const {
        if (right.rows_ != rows_) {
            throw FrameError(ErrorCode::DimensionMismatch, "hstack row mismatch");
        }
        Matrix s(rows_, cols_ + right.cols_);
        for (std::size_t i = 0; i < rows_; ++i) {
            for (std::size_t j = 0; j < cols_; ++j) s(i, j) = (*this)(i, j);
            for (std::size_t j = 0; j < right.cols_; ++j) s(i, cols_ + j) = right(i, j);
        }
        return s;
    }

    friend Matrix operator*(const Matrix& a, const Matrix& b) {
        if (a.cols_ != b.rows_) {
            throw FrameError(ErrorCode::DimensionMismatch, "matrix product shape mismatch");
        }
        Matrix c(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const T& aik = a(i, k);
                if constexpr (ExactScalar<T>) {
                    if (sgn(aik) == 0) continue;
                }
                for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
            }
        return c;
    }

    friend std::vector<T> operator*(const Matrix& a, std::span<const T> x) {
        if (a.cols_ != x.size()) {
            throw FrameError(ErrorCode::DimensionMismatch, "matrix-vector shape mismatch");
        }
        std::vector<T> y(a.rows_, T(0));
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t j = 0; j < a.cols_; ++j) y[i] += a(i, j) * x[j];
        return y;
    }

    friend Matrix operator+(Matrix a, const Matrix& b) {
        a.check_same_shape(b);
        for (std::size_t k = 0; k < a.data_.size(); ++k) a.data_[k] += b.data_[k];
        return a;
    }

    friend Matrix operator-(Matrix a, const Matrix& b) {
        a.check_same_shape(b);
        for (std::size_t k = 0; k < a.data_.size(); ++k) a.data_[k] -= b.data_[k];
        return a;
    }

    friend Matrix operator*(const T& s, Matrix a) {
        for (auto& v : a.data_) v *= s;
        return a;
    }

    friend bool operator==(const Matrix& a, const Matrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

    const std::vector<T>& data() const noexcept { return data_; }

private:
    void check_same_shape(const Matrix& b) const {
        if (rows_ != b.rows_ || cols_ != b.cols_) {
            throw FrameError(ErrorCode::DimensionMismatch, "matrix shapes differ");
        }
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

template <Scalar T>
T dot(std::span<const T> a, std::span<const T> b) {
    // <a, b> = sum a_i conj(b_i)
    T s(0);
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * conj(b[i]);
    return s;
}

template <Scalar T>
T dot(const std::vector<T>& a, const std::vector<T>& b) {
    return dot<T>(std::span<const T>(a), std::span<const T>(b));
}

template <Scalar T>
double norm2(std::span<const T> a) {
    double s = 0.0;
    for (const auto& v : a) s += to_double(abs2(v));
    return std::sqrt(s);
}

template <Scalar T>
double norm2(const std::vector<T>& a) {
    return norm2<T>(std::span<const T>(a));
}

/// Largest absolute entry of a - b.
template <Scalar T>
double max_abs_diff(const Matrix<T>& a, const Matrix<T>& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw FrameError(ErrorCode::DimensionMismatch, "matrix shapes differ");
    }
    double m = 0.0;
    for (std::size_t k = 0; k < a.data().size(); ++k) {
        m = std::max(m, magnitude(T(a.data()[k] - b.data()[k])));
    }
    return m;
}

inline Matrix<double> to_float(const Matrix<Rational>& m) {
    Matrix<double> out(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = m(i, j).get_d();
    return out;
}

inline const Matrix<double>& to_float(const Matrix<double>& m) { return m; }

/// Exact binary values of every entry.
inline Matrix<Rational> to_exact(const Matrix<double>& m) {
    Matrix<Rational> out(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = rational_from_double(m(i, j));
    return out;
}

inline std::vector<double> to_float_vector(const std::vector<Rational>& v) {
    std::vector<double> out(v.size());
    for (std::size_t k = 0; k < v.size(); ++k) out[k] = v[k].get_d();
    return out;
}

inline const std::vector<double>& to_float_vector(const std::vector<double>& v) { return v; }

inline Matrix<Complex> to_complex(const Matrix<double>& m) {
    Matrix<Complex> out(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = m(i, j);
    return out;
}

template <FloatScalar T>
using EigenMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;

template <FloatScalar T>
EigenMatrix<T> to_eigen(const Matrix<T>& m) {
    EigenMatrix<T> e(static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols()));
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            e(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m(i, j);
    return e;
}

template <FloatScalar T>
Matrix<T> from_eigen(const EigenMatrix<T>& e) {
    Matrix<T> m(static_cast<std::size_t>(e.rows()), static_cast<std::size_t>(e.cols()));
    for (Eigen::Index i = 0; i < e.rows(); ++i)
        for (Eigen::Index j = 0; j < e.cols(); ++j)
            m(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = e(i, j);
    return m;
}

}  // namespace framelab
