#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "covrisk/errors.hpp"

namespace covrisk {

namespace detail {

// Lanczos approximation, g = 7 with 9 coefficients. Relative error is below
// 1e-13 on [0.5, 1e6], which covers every argument this library produces.
inline constexpr double kLanczos[9] = {
    0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
    771.32342877765313,      -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};

inline double log_gamma_positive(double x) {
  if (x < 0.5) {
    // Reflection; sin(pi x) > 0 on (0, 0.5).
    return std::log(std::numbers::pi / std::sin(std::numbers::pi * x)) -
           log_gamma_positive(1.0 - x);
  }
  const double z = x - 1.0;
  double a = kLanczos[0];
  for (int i = 1; i < 9; ++i) a += kLanczos[i] / (z + i);
  const double t = z + 7.5;
  return 0.5 * std::log(2.0 * std::numbers::pi) + (z + 0.5) * std::log(t) - t + std::log(a);
}

}  // namespace detail

inline double log_gamma(double x) {
  if (!(x > 0.0)) throw DomainError("log_gamma: argument must be positive");
  return detail::log_gamma_positive(x);
}

// psi(x), for x > 0. Upward recurrence lifts the argument above 8, then the
// Bernoulli asymptotic series (6 terms) applies.
inline double digamma(double x) {
  if (!(x > 0.0)) throw DomainError("digamma: argument must be positive");
  double acc = 0.0;
  while (x < 8.0) {
    acc -= 1.0 / x;
    x += 1.0;
  }
  const double inv2 = 1.0 / (x * x);
  const double series =
      inv2 * (1.0 / 12.0 -
              inv2 * (1.0 / 120.0 -
                      inv2 * (1.0 / 252.0 -
                              inv2 * (1.0 / 240.0 -
                                      inv2 * (1.0 / 132.0 - inv2 * (691.0 / 32760.0))))));
  return acc + std::log(x) - 0.5 / x - series;
}

// psi'(x), for x > 0. Same shift-then-asymptotic scheme as digamma.
inline double trigamma(double x) {
  if (!(x > 0.0)) throw DomainError("trigamma: argument must be positive");
  double acc = 0.0;
  while (x < 8.0) {
    acc += 1.0 / (x * x);
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  const double series =
      1.0 + inv * 0.5 +
      inv2 * (1.0 / 6.0 -
              inv2 * (1.0 / 30.0 -
                      inv2 * (1.0 / 42.0 -
                              inv2 * (1.0 / 30.0 -
                                      inv2 * (5.0 / 66.0 - inv2 * (691.0 / 2730.0))))));
  return acc + series * inv;
}

// First two moments of log X for X ~ chi-square(dof).
struct ChiSquareLogMoments {
  double dof;
  double mean_log;  // E[log X] = log 2 + psi(dof / 2)
  double var_log;   // Var[log X] = psi'(dof / 2)
};

inline ChiSquareLogMoments chisq_log_moments(double dof) {
  if (!(dof > 0.0)) throw DomainError("chisq_log_moments: dof must be positive");
  return ChiSquareLogMoments{dof, std::numbers::ln2 + digamma(0.5 * dof), trigamma(0.5 * dof)};
}

}  // namespace covrisk
