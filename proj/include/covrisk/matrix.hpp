#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "covrisk/errors.hpp"

namespace covrisk {

// Dense row-major matrix of doubles. Sized for desk-scale problems
// (p up to a few hundred); no sparse or banded storage.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, fill) {
    if (rows < 0 || cols < 0) throw DimensionMismatchError("Matrix: negative dimension");
  }

  static Matrix identity(int p) {
    Matrix m(p, p);
    for (int i = 0; i < p; ++i) m(i, i) = 1.0;
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  double& operator()(int i, int j) { return data_[static_cast<std::size_t>(i) * cols_ + j]; }
  double operator()(int i, int j) const { return data_[static_cast<std::size_t>(i) * cols_ + j]; }

  Matrix transposed() const {
    Matrix t(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  double max_abs() const {
    double m = 0.0;
    for (double x : data_) m = std::max(m, std::abs(x));
    return m;
  }

  double frobenius_norm() const {
    double s = 0.0;
    for (double x : data_) s += x * x;
    return std::sqrt(s);
  }

  bool same_shape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols_ != b.rows_) throw DimensionMismatchError("Matrix multiply: shape mismatch");
    Matrix c(a.rows_, b.cols_);
    for (int i = 0; i < a.rows_; ++i) {
      for (int k = 0; k < a.cols_; ++k) {
        const double aik = a(i, k);
        if (aik == 0.0) continue;
        for (int j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
      }
    }
    return c;
  }

  friend Matrix operator-(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) throw DimensionMismatchError("Matrix subtract: shape mismatch");
    Matrix c = a;
    for (std::size_t i = 0; i < c.data_.size(); ++i) c.data_[i] -= b.data_[i];
    return c;
  }

  friend Matrix operator*(double s, const Matrix& a) {
    Matrix c = a;
    for (double& x : c.data_) x *= s;
    return c;
  }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

namespace detail {

// Left-looking Cholesky on the lower triangle of `a` (square, symmetric).
// Writes the factor into `out` (lower triangle, zeros above). Returns false
// as soon as a pivot falls at or below p * eps * max|a_ii|.
inline bool try_cholesky(const Matrix& a, Matrix& out) {
  const int p = a.rows();
  out = Matrix(p, p);
  double max_diag = 0.0;
  for (int i = 0; i < p; ++i) max_diag = std::max(max_diag, std::abs(a(i, i)));
  const double tol = p * std::numeric_limits<double>::epsilon() * max_diag;
  for (int j = 0; j < p; ++j) {
    double d = a(j, j);
    for (int k = 0; k < j; ++k) d -= out(j, k) * out(j, k);
    if (!(d > tol)) return false;
    const double ljj = std::sqrt(d);
    out(j, j) = ljj;
    for (int i = j + 1; i < p; ++i) {
      double s = a(i, j);
      for (int k = 0; k < j; ++k) s -= out(i, k) * out(j, k);
      out(i, j) = s / ljj;
    }
  }
  return true;
}

}  // namespace detail

// Symmetric positive definite matrix. Construction symmetrizes the input
// exactly ((m + m') / 2) and verifies positive definiteness by Cholesky
// pivoting; instances are immutable afterwards and safe to share across
// threads.
class SpdMatrix {
 public:
  explicit SpdMatrix(Matrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols()) throw DimensionMismatchError("SpdMatrix: matrix not square");
    if (m_.rows() < 1) throw DimensionMismatchError("SpdMatrix: dimension must be >= 1");
    for (int i = 0; i < m_.rows(); ++i) {
      for (int j = 0; j < i; ++j) {
        const double avg = 0.5 * (m_(i, j) + m_(j, i));
        m_(i, j) = avg;
        m_(j, i) = avg;
      }
    }
    Matrix scratch;
    if (!detail::try_cholesky(m_, scratch))
      throw NotPositiveDefiniteError("SpdMatrix: matrix is not positive definite");
  }

  static SpdMatrix identity(int p) { return SpdMatrix(Matrix::identity(p)); }

  static SpdMatrix diagonal(const std::vector<double>& d) {
    Matrix m(static_cast<int>(d.size()), static_cast<int>(d.size()));
    for (int i = 0; i < m.rows(); ++i) m(i, i) = d[i];
    return SpdMatrix(std::move(m));
  }

  int dim() const { return m_.rows(); }
  double operator()(int i, int j) const { return m_(i, j); }
  const Matrix& matrix() const { return m_; }

  double trace() const {
    double t = 0.0;
    for (int i = 0; i < dim(); ++i) t += m_(i, i);
    return t;
  }

 private:
  Matrix m_;
};

// Lower-triangular matrix with strictly positive diagonal (an element of the
// group of such matrices). Entries above the diagonal must be exactly zero.
class LowerTriangular {
 public:
  explicit LowerTriangular(Matrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols()) throw DimensionMismatchError("LowerTriangular: not square");
    for (int i = 0; i < m_.rows(); ++i) {
      if (!(m_(i, i) > 0.0))
        throw DomainError("LowerTriangular: diagonal entry " + std::to_string(i) +
                          " is not strictly positive");
      for (int j = i + 1; j < m_.cols(); ++j)
        if (m_(i, j) != 0.0)
          throw DomainError("LowerTriangular: nonzero entry above the diagonal");
    }
  }

  int dim() const { return m_.rows(); }
  double operator()(int i, int j) const { return m_(i, j); }
  const Matrix& matrix() const { return m_; }

  // T * T'.
  SpdMatrix times_transpose() const {
    const int p = dim();
    Matrix out(p, p);
    for (int i = 0; i < p; ++i) {
      for (int j = 0; j <= i; ++j) {
        double s = 0.0;
        for (int k = 0; k <= j; ++k) s += m_(i, k) * m_(j, k);
        out(i, j) = s;
        out(j, i) = s;
      }
    }
    return SpdMatrix(std::move(out));
  }

 private:
  Matrix m_;
};

}  // namespace covrisk
