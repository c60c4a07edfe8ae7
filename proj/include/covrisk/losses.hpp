#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "covrisk/decomposition.hpp"
#include "covrisk/errors.hpp"
#include "covrisk/matrix.hpp"

namespace covrisk {

enum class LossKind { kStein, kGeodesic };

inline const char* to_string(LossKind loss) {
  return loss == LossKind::kStein ? "stein" : "geodesic";
}

inline LossKind parse_loss_kind(const std::string& name) {
  if (name == "stein") return LossKind::kStein;
  if (name == "geodesic") return LossKind::kGeodesic;
  throw DomainError("unknown loss kind: " + name);
}

namespace detail {

inline std::vector<double> loss_eigenvalues(const SpdMatrix& estimate, const SpdMatrix& sigma) {
  if (estimate.dim() != sigma.dim())
    throw DimensionMismatchError("loss: estimate and sigma dimensions differ");
  std::vector<double> lambda = generalized_eigenvalues(sigma, estimate);
  for (double x : lambda)
    if (!(x > 0.0)) throw NotPositiveDefiniteError("loss: nonpositive generalized eigenvalue");
  return lambda;
}

}  // namespace detail

// Likelihood loss tr(sigma^{-1} estimate) - log det(sigma^{-1} estimate) - p,
// written as sum(lambda_i - log lambda_i - 1) over the generalized
// eigenvalues. Zero iff estimate == sigma.
inline double stein_loss(const SpdMatrix& estimate, const SpdMatrix& sigma) {
  double loss = 0.0;
  for (double lambda : detail::loss_eigenvalues(estimate, sigma))
    loss += lambda - std::log(lambda) - 1.0;
  return loss;
}

// Squared geodesic distance on the SPD manifold: sum(log^2 lambda_i) over the
// generalized eigenvalues. (The geodesic length itself is the square root;
// the squared form is what the risk comparisons use.) Symmetric in its
// arguments, zero iff they coincide.
inline double geodesic_loss(const SpdMatrix& estimate, const SpdMatrix& sigma) {
  double loss = 0.0;
  for (double lambda : detail::loss_eigenvalues(estimate, sigma)) {
    const double lg = std::log(lambda);
    loss += lg * lg;
  }
  return loss;
}

}  // namespace covrisk
