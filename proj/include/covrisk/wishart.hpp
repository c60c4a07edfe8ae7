#pragma once

#include <cmath>
#include <string>
#include <utility>

#include "covrisk/decomposition.hpp"
#include "covrisk/matrix.hpp"
#include "covrisk/rng.hpp"

namespace covrisk {

// One draw A from a Wishart distribution together with its triangular factor
// (A = T T', T the Bartlett/Cholesky factor) and the degrees of freedom.
struct WishartSample {
  WishartSample(LowerTriangular factor, int dof)
      : bartlett_factor(std::move(factor)),
        scatter(bartlett_factor.times_transpose()),
        n(dof) {
    if (n < bartlett_factor.dim())
      throw DomainError("WishartSample: degrees of freedom below dimension");
  }

  LowerTriangular bartlett_factor;
  SpdMatrix scatter;
  int n;

  int dim() const { return scatter.dim(); }
};

namespace detail {

// Bartlett factor of W(I, n): sqrt(chi-square(n - i)) on the diagonal
// (0-based row i), standard normals strictly below. Draw order is row by row,
// off-diagonals first, so streams replay identically everywhere.
inline Matrix sample_bartlett_factor(RngStream& rng, int p, int n) {
  Matrix t(p, p);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < i; ++j) t(i, j) = rng.next_normal();
    t(i, i) = std::sqrt(sample_chisq(rng, static_cast<double>(n - i)));
  }
  return t;
}

}  // namespace detail

inline WishartSample sample_wishart_identity(RngStream& rng, int p, int n) {
  if (p < 1) throw DomainError("sample_wishart_identity: dimension must be >= 1");
  if (n < p) throw DomainError("sample_wishart_identity: requires n >= p");
  return WishartSample(LowerTriangular(detail::sample_bartlett_factor(rng, p, n)), n);
}

// W(sigma, n): an identity-scale factor T is scaled by L = cholesky(sigma),
// giving A = (L T)(L T)'. With sigma = I this reproduces
// sample_wishart_identity bit for bit from the same stream.
inline WishartSample sample_wishart(RngStream& rng, const SpdMatrix& sigma, int n) {
  const int p = sigma.dim();
  if (n < p) throw DomainError("sample_wishart: requires n >= p");
  const LowerTriangular l = cholesky(sigma);
  const Matrix t = detail::sample_bartlett_factor(rng, p, n);
  return WishartSample(LowerTriangular(l.matrix() * t), n);
}

}  // namespace covrisk
