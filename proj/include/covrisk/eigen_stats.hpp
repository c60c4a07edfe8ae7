#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "covrisk/decomposition.hpp"
#include "covrisk/errors.hpp"
#include "covrisk/parallel.hpp"
#include "covrisk/rng.hpp"
#include "covrisk/special_functions.hpp"
#include "covrisk/wishart.hpp"

namespace covrisk {

// Eigenvalue spectrum of one W(I, n) draw. Construction sorts descending and
// requires strictly positive entries, so functions of a SpectrumSample are
// automatically symmetric in the input order.
struct SpectrumSample {
  SpectrumSample(int p_in, int n_in, std::vector<double> eigs)
      : p(p_in), n(n_in), eigenvalues(std::move(eigs)) {
    if (n < p || p < 1) throw DomainError("SpectrumSample: requires n >= p >= 1");
    if (static_cast<int>(eigenvalues.size()) != p)
      throw DimensionMismatchError("SpectrumSample: eigenvalue count != p");
    for (double l : eigenvalues)
      if (!(l > 0.0)) throw DomainError("SpectrumSample: eigenvalues must be positive");
    std::sort(eigenvalues.begin(), eigenvalues.end(), std::greater<double>());
  }

  int p;
  int n;
  std::vector<double> eigenvalues;  // descending
};

// Log of the printed joint eigenvalue density, implemented literally:
//   2^{-np/2} prod_i Gamma(3/2) / (Gamma(1+i/2) Gamma((n-p+i)/2))
//            * l_i^{(n-p+i)/2 - 1} e^{-l_i/2} * prod_{i<j} |l_i - l_j|
// with i pairing the i-th largest eigenvalue. At p = 1 this is exactly the
// chi-square(n) density. The printed normalizer is suspect for p >= 2 (its
// quadrature mass is not 1), so only the p = 1 reduction and the symmetry of
// the function are hard correctness gates; see the tests.
inline double log_joint_eigen_density(const SpectrumSample& spectrum) {
  const int p = spectrum.p;
  const int n = spectrum.n;
  const std::vector<double>& l = spectrum.eigenvalues;
  for (int i = 0; i + 1 < p; ++i)
    if (l[i] == l[i + 1]) throw DomainError("log_joint_eigen_density: tied eigenvalues");

  double value = -0.5 * n * p * std::numbers::ln2;
  for (int i = 1; i <= p; ++i) {
    value += log_gamma(1.5) - log_gamma(1.0 + 0.5 * i) - log_gamma(0.5 * (n - p + i));
    value += (0.5 * (n - p + i) - 1.0) * std::log(l[i - 1]) - 0.5 * l[i - 1];
  }
  for (int i = 0; i < p; ++i)
    for (int j = i + 1; j < p; ++j) value += std::log(std::abs(l[i] - l[j]));
  return value;
}

struct DetProductReport {
  int p = 0;
  int n = 0;
  double mc_mean = 0.0;
  double mc_se = 0.0;
  std::int64_t replicates = 0;
  std::uint64_t seed = 0;
  bool passed = false;  // |mc_mean - 1| <= 4 * mc_se
};

// Monte Carlo check of E[prod_i l_i / (n-p+i)] = 1. The product of the
// eigenvalues is the determinant, evaluated through the triangular factor.
inline DetProductReport det_product_check(int p, int n, std::int64_t replicates,
                                          const RngStream& rng, int workers = 1) {
  if (n < p || p < 1) throw DomainError("det_product_check: requires n >= p >= 1");
  if (replicates < 2) throw DomainError("det_product_check: needs >= 2 replicates");
  const ShardPlan plan = make_shard_plan(static_cast<std::size_t>(replicates));
  struct Sums {
    KahanSum sum, sum_sq;
  };
  auto shard_fn = [&](std::size_t shard, std::size_t extent) {
    Sums sums;
    RngStream stream = rng.substream(1 + shard);
    for (std::size_t r = 0; r < extent; ++r) {
      const Matrix t = detail::sample_bartlett_factor(stream, p, n);
      double prod = 1.0;
      for (int i = 0; i < p; ++i) prod *= t(i, i) * t(i, i) / (n - p + i + 1);
      sums.sum.add(prod);
      sums.sum_sq.add(prod * prod);
    }
    return sums;
  };
  const std::vector<Sums> shards = run_sharded<Sums>(plan, workers, shard_fn);
  KahanSum total, total_sq;
  for (const Sums& s : shards) {
    total.add(s.sum.value());
    total_sq.add(s.sum_sq.value());
  }
  const double count = static_cast<double>(replicates);
  const double mean = total.value() / count;
  const double var = std::max(0.0, (total_sq.value() - count * mean * mean) / (count - 1.0));

  DetProductReport report;
  report.p = p;
  report.n = n;
  report.mc_mean = mean;
  report.mc_se = std::sqrt(var / count);
  report.replicates = replicates;
  report.seed = rng.seed();
  report.passed = std::abs(mean - 1.0) <= 4.0 * report.mc_se;
  return report;
}

// Geometric mean of the limiting spectral law with ratio y = lim p/n:
// -1 - (1-y) log(1-y) / y on (0, 1], with the y -> 1 limit -1.
inline double mp_geometric_mean(double y) {
  if (!(y > 0.0) || y > 1.0) throw DomainError("mp_geometric_mean: y must lie in (0, 1]");
  if (y == 1.0) return -1.0;
  return -1.0 - (1.0 - y) * std::log1p(-y) / y;
}

// Side-by-side Monte Carlo estimates and asymptotic references for the
// spectrum of W(I, n)/n: the average log eigenvalue against the geometric
// mean of the limiting law, and the extreme log eigenvalues against
// log(1 -+ sqrt(y))^2. The references carry o(1) errors with no rate, so this
// is a report, not an assertion.
struct SpectralSummary {
  int p = 0;
  int n = 0;
  double y = 0.0;
  std::int64_t replicates = 0;
  std::uint64_t seed = 0;

  double avg_log_mean = 0.0;  // mean over replicates of (1/p) sum_i log(l_i/n)
  double avg_log_se = 0.0;
  double mp_reference = 0.0;

  double log_min_mean = 0.0;  // mean of log(min l_i / n)
  double log_min_se = 0.0;
  double edelman_min_reference = 0.0;

  double log_max_mean = 0.0;
  double log_max_se = 0.0;
  double edelman_max_reference = 0.0;

  // y at or near 1 makes the hard-edge reference log(1-sqrt(y))^2 diverge;
  // flagged so finite-size output is read accordingly.
  bool finite_size_warning = false;
};

inline SpectralSummary empirical_spectral_report(int p, int n, std::int64_t replicates,
                                                 const RngStream& rng, int workers = 1) {
  if (p < 2 || n < p) throw DomainError("empirical_spectral_report: requires n >= p >= 2");
  if (replicates < 2) throw DomainError("empirical_spectral_report: needs >= 2 replicates");
  struct Sums {
    KahanSum avg, avg_sq, mn, mn_sq, mx, mx_sq;
  };
  const ShardPlan plan = make_shard_plan(static_cast<std::size_t>(replicates), 64);
  auto shard_fn = [&](std::size_t shard, std::size_t extent) {
    Sums sums;
    RngStream stream = rng.substream(1 + shard);
    for (std::size_t r = 0; r < extent; ++r) {
      const WishartSample sample = sample_wishart_identity(stream, p, n);
      const EigenDecomposition ed = eigh(sample.scatter);
      double avg = 0.0;
      for (double l : ed.eigenvalues) avg += std::log(l / n);
      avg /= p;
      const double mx = std::log(ed.eigenvalues.front() / n);
      const double mn = std::log(ed.eigenvalues.back() / n);
      sums.avg.add(avg);
      sums.avg_sq.add(avg * avg);
      sums.mn.add(mn);
      sums.mn_sq.add(mn * mn);
      sums.mx.add(mx);
      sums.mx_sq.add(mx * mx);
    }
    return sums;
  };
  const std::vector<Sums> shards = run_sharded<Sums>(plan, workers, shard_fn);
  const double count = static_cast<double>(replicates);
  auto reduce = [&](KahanSum Sums::* sum, KahanSum Sums::* sum_sq) {
    KahanSum total, total_sq;
    for (const Sums& s : shards) {
      total.add((s.*sum).value());
      total_sq.add((s.*sum_sq).value());
    }
    const double mean = total.value() / count;
    const double var = std::max(0.0, (total_sq.value() - count * mean * mean) / (count - 1.0));
    return std::pair<double, double>{mean, std::sqrt(var / count)};
  };

  SpectralSummary s;
  s.p = p;
  s.n = n;
  s.y = static_cast<double>(p) / n;
  s.replicates = replicates;
  s.seed = rng.seed();
  std::tie(s.avg_log_mean, s.avg_log_se) = reduce(&Sums::avg, &Sums::avg_sq);
  std::tie(s.log_min_mean, s.log_min_se) = reduce(&Sums::mn, &Sums::mn_sq);
  std::tie(s.log_max_mean, s.log_max_se) = reduce(&Sums::mx, &Sums::mx_sq);
  s.mp_reference = mp_geometric_mean(s.y);
  const double root_y = std::sqrt(s.y);
  s.finite_size_warning = s.y >= 1.0 || n < 50;
  s.edelman_min_reference = s.y >= 1.0 ? -std::numeric_limits<double>::infinity()
                                       : 2.0 * std::log(1.0 - root_y);
  s.edelman_max_reference = 2.0 * std::log(1.0 + root_y);
  return s;
}

}  // namespace covrisk
