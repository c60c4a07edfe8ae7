#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "covrisk/decomposition.hpp"
#include "covrisk/errors.hpp"
#include "covrisk/matrix.hpp"
#include "covrisk/parallel.hpp"
#include "covrisk/rng.hpp"
#include "covrisk/special_functions.hpp"
#include "covrisk/wishart.hpp"

namespace covrisk {

enum class EstimatorKind {
  kMle,               // A / n
  kStein,             // T diag(1/(n+p-2i+1)) T'
  kIwasawaBest,       // diag(pivot_i / (n-i+1)), an estimate of the pivot form
  kGeodesicIwasawa,   // diag(exp(-E[log chi2_{n-i+1}]) * pivot_i)
  kGeodesicCholesky,  // T with diagonal rescaled by sqrt(exp(-E[log chi2])), times transpose
  kRotEqStein,        // U diag(l_i / E[l_i]) U'
  kRotEqGeodesic,     // U diag(exp(-E[log l_i]) * l_i) U'
};

inline constexpr EstimatorKind kAllEstimators[] = {
    EstimatorKind::kMle,           EstimatorKind::kStein,
    EstimatorKind::kIwasawaBest,   EstimatorKind::kGeodesicIwasawa,
    EstimatorKind::kGeodesicCholesky, EstimatorKind::kRotEqStein,
    EstimatorKind::kRotEqGeodesic};

inline const char* to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::kMle: return "mle";
    case EstimatorKind::kStein: return "stein";
    case EstimatorKind::kIwasawaBest: return "iwasawa-best";
    case EstimatorKind::kGeodesicIwasawa: return "geodesic-iwasawa";
    case EstimatorKind::kGeodesicCholesky: return "geodesic-cholesky";
    case EstimatorKind::kRotEqStein: return "roteq-stein";
    case EstimatorKind::kRotEqGeodesic: return "roteq-geodesic";
  }
  return "?";
}

inline EstimatorKind parse_estimator_kind(const std::string& name) {
  for (EstimatorKind kind : kAllEstimators)
    if (name == to_string(kind)) return kind;
  throw DomainError("unknown estimator kind: " + name);
}

// True when the estimator returns the diagonal pivot-form estimate rather
// than a full matrix estimate of sigma.
inline bool is_pivot_form(EstimatorKind kind) {
  return kind == EstimatorKind::kIwasawaBest || kind == EstimatorKind::kGeodesicIwasawa;
}

inline bool is_rotation_equivariant(EstimatorKind kind) {
  return kind == EstimatorKind::kRotEqStein || kind == EstimatorKind::kRotEqGeodesic;
}

inline SpdMatrix mle(const WishartSample& sample) {
  const int p = sample.dim();
  Matrix m(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) m(i, j) = sample.scatter(i, j) / sample.n;
  return SpdMatrix(std::move(m));
}

namespace detail {

// T diag(scale) T' for the sample's triangular factor.
inline SpdMatrix scaled_factor_product(const LowerTriangular& t, const std::vector<double>& scale) {
  const int p = t.dim();
  Matrix out(p, p);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = 0.0;
      for (int k = 0; k <= j; ++k) s += t(i, k) * scale[k] * t(j, k);
      out(i, j) = s;
      out(j, i) = s;
    }
  }
  return SpdMatrix(std::move(out));
}

inline std::vector<double> stein_divisors(int p, int n) {
  std::vector<double> d(p);
  for (int i = 0; i < p; ++i) d[i] = static_cast<double>(n + p - 2 * (i + 1) + 1);
  return d;
}

}  // namespace detail

// T D^{-1} T' with d_i = n + p - 2i + 1 (1-based i), T the triangular factor
// of the scatter matrix.
inline SpdMatrix stein_estimator(const WishartSample& sample) {
  const int p = sample.dim();
  std::vector<double> inv_d = detail::stein_divisors(p, sample.n);
  for (double& x : inv_d) x = 1.0 / x;
  return detail::scaled_factor_product(sample.bartlett_factor, inv_d);
}

// Best pivot-form estimator: pivot_i / (n - i + 1). Returned as the diagonal
// pivot-form estimate, to be compared against the pivot form of sigma.
inline SpdMatrix iwasawa_best(const WishartSample& sample) {
  const IwasawaResult iw = iwasawa_full(sample.scatter);
  std::vector<double> d(sample.dim());
  for (int i = 0; i < sample.dim(); ++i) d[i] = iw.pivots[i] / (sample.n - i);
  return SpdMatrix::diagonal(d);
}

// Geometric-mean-corrected pivot-form estimator:
// exp(-E[log chi2_{n-i+1}]) * pivot_i.
inline SpdMatrix geodesic_iwasawa(const WishartSample& sample) {
  const IwasawaResult iw = iwasawa_full(sample.scatter);
  std::vector<double> d(sample.dim());
  for (int i = 0; i < sample.dim(); ++i) {
    const double m = chisq_log_moments(static_cast<double>(sample.n - i)).mean_log;
    d[i] = std::exp(-m) * iw.pivots[i];
  }
  return SpdMatrix::diagonal(d);
}

// Factor-form analogue: copy the triangular factor, rescale only its diagonal
// so each log squared-diagonal is centered, and return T0 T0'.
inline SpdMatrix geodesic_cholesky(const WishartSample& sample) {
  const int p = sample.dim();
  Matrix t0 = sample.bartlett_factor.matrix();
  for (int i = 0; i < p; ++i) {
    const double m = chisq_log_moments(static_cast<double>(sample.n - i)).mean_log;
    t0(i, i) *= std::sqrt(std::exp(-m));
  }
  return LowerTriangular(std::move(t0)).times_transpose();
}

// Monte Carlo estimates of E[l_i] and E[log l_i] for the descending
// eigenvalues of W(I, n), used by the rotation-equivariant estimators. The
// expectations have no known closed form, so they are estimated by seeded
// simulation with reported standard errors.
struct SpectralCalibration {
  int p = 0;
  int n = 0;
  std::vector<double> mean_eigs;
  std::vector<double> mean_log_eigs;
  std::vector<double> se_mean_eigs;
  std::vector<double> se_mean_log_eigs;
  std::int64_t replicates = 0;
  std::uint64_t seed = 0;
};

// Sharded across substreams and merged in shard order, so the result is a
// pure function of (seed, stream, p, n, replicates) independent of workers.
inline SpectralCalibration calibrate_spectrum(int p, int n, std::int64_t replicates,
                                              const RngStream& rng, int workers = 1) {
  if (n < p) throw DomainError("calibrate_spectrum: requires n >= p");
  if (replicates < 10000)
    throw DomainError("calibrate_spectrum: needs at least 10^4 replicates");

  struct ShardSums {
    std::vector<KahanSum> eig, log_eig, eig2, log_eig2;
  };
  const ShardPlan plan = make_shard_plan(static_cast<std::size_t>(replicates));
  auto shard_fn = [&](std::size_t shard, std::size_t extent) {
    ShardSums sums;
    sums.eig.resize(p);
    sums.log_eig.resize(p);
    sums.eig2.resize(p);
    sums.log_eig2.resize(p);
    RngStream stream = rng.substream(1 + shard);
    for (std::size_t r = 0; r < extent; ++r) {
      const WishartSample sample = sample_wishart_identity(stream, p, n);
      const EigenDecomposition ed = eigh(sample.scatter);
      for (int i = 0; i < p; ++i) {
        const double l = ed.eigenvalues[i];
        const double lg = std::log(l);
        sums.eig[i].add(l);
        sums.log_eig[i].add(lg);
        sums.eig2[i].add(l * l);
        sums.log_eig2[i].add(lg * lg);
      }
    }
    return sums;
  };
  const std::vector<ShardSums> shards = run_sharded<ShardSums>(plan, workers, shard_fn);

  SpectralCalibration cal;
  cal.p = p;
  cal.n = n;
  cal.replicates = replicates;
  cal.seed = rng.seed();
  cal.mean_eigs.resize(p);
  cal.mean_log_eigs.resize(p);
  cal.se_mean_eigs.resize(p);
  cal.se_mean_log_eigs.resize(p);
  const double count = static_cast<double>(replicates);
  for (int i = 0; i < p; ++i) {
    KahanSum s1, s2, t1, t2;
    for (const ShardSums& sh : shards) {
      s1.add(sh.eig[i].value());
      s2.add(sh.eig2[i].value());
      t1.add(sh.log_eig[i].value());
      t2.add(sh.log_eig2[i].value());
    }
    const double mean = s1.value() / count;
    const double mean_log = t1.value() / count;
    const double var = std::max(0.0, (s2.value() - count * mean * mean) / (count - 1.0));
    const double var_log =
        std::max(0.0, (t2.value() - count * mean_log * mean_log) / (count - 1.0));
    cal.mean_eigs[i] = mean;
    cal.mean_log_eigs[i] = mean_log;
    cal.se_mean_eigs[i] = std::sqrt(var / count);
    cal.se_mean_log_eigs[i] = std::sqrt(var_log / count);
  }
  return cal;
}

namespace detail {

inline void check_calibration(const WishartSample& sample, const SpectralCalibration& cal) {
  if (cal.p != sample.dim() || cal.n != sample.n)
    throw DimensionMismatchError("calibration is for (p=" + std::to_string(cal.p) +
                                 ", n=" + std::to_string(cal.n) + "), sample is (p=" +
                                 std::to_string(sample.dim()) + ", n=" +
                                 std::to_string(sample.n) + ")");
}

inline SpdMatrix rotation_equivariant(const WishartSample& sample,
                                      const std::vector<double>& multipliers) {
  const EigenDecomposition ed = eigh(sample.scatter);
  const int p = sample.dim();
  const Matrix& u = ed.eigenvectors;
  Matrix out(p, p);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = 0.0;
      for (int k = 0; k < p; ++k) s += u(i, k) * multipliers[k] * ed.eigenvalues[k] * u(j, k);
      out(i, j) = s;
      out(j, i) = s;
    }
  }
  return SpdMatrix(std::move(out));
}

}  // namespace detail

// U diag(l_i / E[l_i]) U': keeps the sample eigenvectors, shrinks each
// eigenvalue by its calibrated mean.
inline SpdMatrix rot_eq_stein(const WishartSample& sample, const SpectralCalibration& cal) {
  detail::check_calibration(sample, cal);
  std::vector<double> m(cal.mean_eigs.size());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = 1.0 / cal.mean_eigs[i];
  return detail::rotation_equivariant(sample, m);
}

// U diag(exp(-E[log l_i]) * l_i) U': centers each log eigenvalue instead.
inline SpdMatrix rot_eq_geodesic(const WishartSample& sample, const SpectralCalibration& cal) {
  detail::check_calibration(sample, cal);
  std::vector<double> m(cal.mean_log_eigs.size());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = std::exp(-cal.mean_log_eigs[i]);
  return detail::rotation_equivariant(sample, m);
}

}  // namespace covrisk
