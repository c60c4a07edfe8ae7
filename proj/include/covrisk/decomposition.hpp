#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "covrisk/errors.hpp"
#include "covrisk/matrix.hpp"

namespace covrisk {

// Result of the full pivot/Schur-complement reduction of an SPD matrix to its
// diagonal pivot form. pivots[k] is the (k+1)-th leading pivot; eliminations[k]
// holds the length-(p-k-1) column block of the k-th elimination matrix
// (the -A21/a11 vector). iwasawa_reconstruct() inverts the transform.
struct IwasawaResult {
  std::vector<double> pivots;
  std::vector<std::vector<double>> eliminations;

  int dim() const { return static_cast<int>(pivots.size()); }
};

struct EigenDecomposition {
  std::vector<double> eigenvalues;  // sorted descending
  Matrix eigenvectors;              // column i pairs with eigenvalues[i]
};

inline LowerTriangular cholesky(const SpdMatrix& a) {
  Matrix factor;
  if (!detail::try_cholesky(a.matrix(), factor))
    throw NotPositiveDefiniteError("cholesky: matrix is not positive definite");
  return LowerTriangular(std::move(factor));
}

// Full pivot reduction: repeatedly split off the leading 1x1 pivot and replace
// the trailing block with its Schur complement A22 - A21 A12 / a11.
inline IwasawaResult iwasawa_full(const SpdMatrix& a) {
  const int p = a.dim();
  Matrix work = a.matrix();
  IwasawaResult result;
  result.pivots.reserve(p);
  result.eliminations.reserve(p);
  double max_diag = 0.0;
  for (int i = 0; i < p; ++i) max_diag = std::max(max_diag, std::abs(work(i, i)));
  const double tol = p * std::numeric_limits<double>::epsilon() * max_diag;
  for (int k = 0; k < p; ++k) {
    const double pivot = work(k, k);
    if (!(pivot > tol))
      throw NotPositiveDefiniteError("iwasawa_full: pivot " + std::to_string(k) +
                                     " is not positive");
    result.pivots.push_back(pivot);
    std::vector<double> elim(p - k - 1);
    for (int i = k + 1; i < p; ++i) elim[i - k - 1] = -work(i, k) / pivot;
    for (int i = k + 1; i < p; ++i) {
      const double rik = work(i, k);
      for (int j = k + 1; j <= i; ++j) {
        const double upd = work(i, j) - rik * work(j, k) / pivot;
        work(i, j) = upd;
        work(j, i) = upd;
      }
    }
    result.eliminations.push_back(std::move(elim));
  }
  return result;
}

// Inverse of iwasawa_full: rebuilds the matrix as L D L' where D holds the
// pivots and column k of the unit lower-triangular L is the negated k-th
// elimination vector.
inline SpdMatrix iwasawa_reconstruct(const IwasawaResult& r) {
  const int p = r.dim();
  Matrix l = Matrix::identity(p);
  for (int k = 0; k < p; ++k)
    for (int i = k + 1; i < p; ++i) l(i, k) = -r.eliminations[k][i - k - 1];
  Matrix out(p, p);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = 0.0;
      for (int k = 0; k <= j; ++k) s += l(i, k) * r.pivots[k] * l(j, k);
      out(i, j) = s;
      out(j, i) = s;
    }
  }
  return SpdMatrix(std::move(out));
}

namespace detail {

inline constexpr int kJacobiMaxSweeps = 50;
inline constexpr double kJacobiTolerance = 1e-12;

inline double off_diagonal_norm(const Matrix& a) {
  double s = 0.0;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

}  // namespace detail

// Symmetric eigendecomposition by cyclic Jacobi rotations. Converges when the
// off-diagonal Frobenius norm drops below 1e-12 * ||a||_F; throws
// NoConvergenceError after 50 sweeps. Eigenvalues are returned descending,
// ties keeping the rotation output order.
inline EigenDecomposition eigh(const SpdMatrix& a) {
  const int p = a.dim();
  Matrix work = a.matrix();
  Matrix v = Matrix::identity(p);
  const double threshold = detail::kJacobiTolerance * work.frobenius_norm();

  int sweep = 0;
  while (detail::off_diagonal_norm(work) > threshold) {
    if (sweep++ >= detail::kJacobiMaxSweeps)
      throw NoConvergenceError("eigh: Jacobi iteration exceeded 50 sweeps");
    for (int q = 1; q < p; ++q) {
      for (int r = 0; r < q; ++r) {
        const double apq = work(r, q);
        if (apq == 0.0) continue;
        const double theta = (work(q, q) - work(r, r)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const double arr = work(r, r);
        const double aqq = work(q, q);
        work(r, r) = c * c * arr - 2.0 * s * c * apq + s * s * aqq;
        work(q, q) = s * s * arr + 2.0 * s * c * apq + c * c * aqq;
        work(r, q) = 0.0;
        work(q, r) = 0.0;
        for (int k = 0; k < p; ++k) {
          if (k == r || k == q) continue;
          const double akr = work(k, r);
          const double akq = work(k, q);
          work(k, r) = c * akr - s * akq;
          work(r, k) = work(k, r);
          work(k, q) = s * akr + c * akq;
          work(q, k) = work(k, q);
        }
        for (int k = 0; k < p; ++k) {
          const double vkr = v(k, r);
          const double vkq = v(k, q);
          v(k, r) = c * vkr - s * vkq;
          v(k, q) = s * vkr + c * vkq;
        }
      }
    }
  }

  std::vector<int> order(p);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int i, int j) { return work(i, i) > work(j, j); });

  EigenDecomposition result;
  result.eigenvalues.resize(p);
  result.eigenvectors = Matrix(p, p);
  for (int j = 0; j < p; ++j) {
    result.eigenvalues[j] = work(order[j], order[j]);
    for (int i = 0; i < p; ++i) result.eigenvectors(i, j) = v(i, order[j]);
  }
  return result;
}

// g a g', re-symmetrized. The loss-invariance statements quantify over
// exactly this transform.
inline SpdMatrix congruence(const SpdMatrix& a, const Matrix& g) {
  if (g.rows() != g.cols() || g.rows() != a.dim())
    throw DimensionMismatchError("congruence: transform shape mismatch");
  return SpdMatrix(g * a.matrix() * g.transposed());
}

namespace detail {

// Solves L x = b column-by-column for all columns of b (forward substitution).
inline Matrix forward_solve(const Matrix& l, const Matrix& b) {
  const int p = l.rows();
  Matrix x = b;
  for (int col = 0; col < b.cols(); ++col) {
    for (int i = 0; i < p; ++i) {
      double s = x(i, col);
      for (int k = 0; k < i; ++k) s -= l(i, k) * x(k, col);
      x(i, col) = s / l(i, i);
    }
  }
  return x;
}

}  // namespace detail

// Eigenvalues of sigma^{-1} phi, descending. Computed through the whitened
// symmetric problem eigh(L^{-1} phi L^{-T}) with sigma = L L', never through
// an explicit inverse.
inline std::vector<double> generalized_eigenvalues(const SpdMatrix& sigma, const SpdMatrix& phi) {
  if (sigma.dim() != phi.dim())
    throw DimensionMismatchError("generalized_eigenvalues: dimension mismatch");
  const LowerTriangular l = cholesky(sigma);
  // W = L^{-1} phi L^{-T}: solve L Y = phi, then L W' = Y'.
  Matrix y = detail::forward_solve(l.matrix(), phi.matrix());
  Matrix w = detail::forward_solve(l.matrix(), y.transposed());
  return eigh(SpdMatrix(std::move(w))).eigenvalues;
}

inline double determinant(const SpdMatrix& a) {
  const LowerTriangular t = cholesky(a);
  double d = 1.0;
  for (int i = 0; i < a.dim(); ++i) d *= t(i, i) * t(i, i);
  return d;
}

}  // namespace covrisk
