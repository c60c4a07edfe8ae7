#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "covrisk/estimators.hpp"
#include "covrisk/losses.hpp"
#include "covrisk/parallel.hpp"
#include "covrisk/special_functions.hpp"
#include "covrisk/wishart.hpp"

namespace covrisk {

// Which parameterization a risk was evaluated in. "Starred" means the loss is
// taken between the diagonal pivot form of the estimate and the pivot form of
// sigma (the one-to-one sigma <-> sigma* correspondence); "full" means the
// loss is taken between the matrices themselves. The closed-form geodesic
// risks of the pivot- and factor-based estimators are starred-coordinate
// statements, so tables carry this tag to never silently mix the two.
enum class Coordinates { kFull, kStarred };

inline const char* to_string(Coordinates c) {
  return c == Coordinates::kFull ? "full" : "starred";
}

// Evaluation coordinates for each estimator/loss pair. Pivot-form estimators
// are always compared in starred coordinates (their estimate lives there).
// The factor-based estimators (mle, stein, geodesic-cholesky) have exact
// closed-form Stein risks in full coordinates, but their geodesic risk
// formulas hold for the pivot reduction, not the full spectrum, so the
// geodesic loss is evaluated starred for them as well. Rotation-equivariant
// estimators reduce exactly through their eigenvalues, i.e. full coordinates.
inline Coordinates risk_coordinates(EstimatorKind kind, LossKind loss) {
  if (is_pivot_form(kind)) return Coordinates::kStarred;
  if (is_rotation_equivariant(kind)) return Coordinates::kFull;
  return loss == LossKind::kGeodesic ? Coordinates::kStarred : Coordinates::kFull;
}

struct RiskReport {
  EstimatorKind estimator;
  LossKind loss;
  int p = 0;
  int n = 0;
  std::optional<double> analytic;
  double mc_mean = 0.0;
  double mc_se = 0.0;
  std::int64_t replicates = 0;
  std::uint64_t seed = 0;
  Coordinates coordinates = Coordinates::kFull;
  // Set when an analytic value exists and the MC mean missed its 4-SE band;
  // reports are flagged, never silently accepted or aborted.
  bool flagged = false;
};

// Closed-form risk under the Stein loss at the best-invariant multipliers:
//   mle:          sum{ log n           - E[log chi2_{n-i+1}] }
//   stein:        sum{ log(n+p-2i+1)   - E[log chi2_{n-i+1}] }
//   iwasawa-best: sum{ log(n-i+1)      - E[log chi2_{n-i+1}] }
inline double analytic_stein_risk(EstimatorKind kind, int p, int n) {
  if (n < p || p < 1) throw DomainError("analytic_stein_risk: requires n >= p >= 1");
  double sum = 0.0;
  for (int i = 1; i <= p; ++i) {
    const double mean_log = chisq_log_moments(static_cast<double>(n - i + 1)).mean_log;
    switch (kind) {
      case EstimatorKind::kMle:
        sum += std::log(static_cast<double>(n)) - mean_log;
        break;
      case EstimatorKind::kStein:
        sum += std::log(static_cast<double>(n + p - 2 * i + 1)) - mean_log;
        break;
      case EstimatorKind::kIwasawaBest:
        sum += std::log(static_cast<double>(n - i + 1)) - mean_log;
        break;
      default:
        throw UnsupportedError(std::string("analytic_stein_risk: no closed form for ") +
                               to_string(kind));
    }
  }
  return sum;
}

// Closed-form geodesic risk (starred coordinates for the pivot/factor
// estimators): the geodesic-optimal estimators attain
// sum psi'((n-i+1)/2) in both pivot and factor coordinates, and the
// mean-based estimators exceed it by exactly their squared log-bias:
//   iwasawa-best: + sum{ log(n-i+1)    - E[log chi2_{n-i+1}] }^2
//   stein:        + sum{ log(n+p-2i+1) - E[log chi2_{n-i+1}] }^2
//   mle:          + sum{ log n         - E[log chi2_{n-i+1}] }^2
inline double analytic_geodesic_risk(EstimatorKind kind, int p, int n) {
  if (n < p || p < 1) throw DomainError("analytic_geodesic_risk: requires n >= p >= 1");
  double sum = 0.0;
  for (int i = 1; i <= p; ++i) {
    const ChiSquareLogMoments m = chisq_log_moments(static_cast<double>(n - i + 1));
    double bias = 0.0;
    switch (kind) {
      case EstimatorKind::kGeodesicIwasawa:
      case EstimatorKind::kGeodesicCholesky:
        break;
      case EstimatorKind::kIwasawaBest:
        bias = std::log(static_cast<double>(n - i + 1)) - m.mean_log;
        break;
      case EstimatorKind::kStein:
        bias = std::log(static_cast<double>(n + p - 2 * i + 1)) - m.mean_log;
        break;
      case EstimatorKind::kMle:
        bias = std::log(static_cast<double>(n)) - m.mean_log;
        break;
      default:
        throw UnsupportedError(std::string("analytic_geodesic_risk: no closed form for ") +
                               to_string(kind));
    }
    sum += m.var_log + bias * bias;
  }
  return sum;
}

inline std::optional<double> try_analytic_risk(EstimatorKind kind, LossKind loss, int p, int n) {
  try {
    return loss == LossKind::kStein ? analytic_stein_risk(kind, p, n)
                                    : analytic_geodesic_risk(kind, p, n);
  } catch (const UnsupportedError&) {
    return std::nullopt;
  }
}

// Formula tag embedded in machine-readable risk tables, identifying which
// closed form produced the analytic column. Empty when there is none.
inline const char* analytic_tag(EstimatorKind kind, LossKind loss) {
  if (loss == LossKind::kStein) {
    switch (kind) {
      case EstimatorKind::kMle: return "eq4";
      case EstimatorKind::kStein: return "eq6";
      case EstimatorKind::kIwasawaBest: return "eq17";
      default: return "";
    }
  }
  switch (kind) {
    case EstimatorKind::kGeodesicIwasawa: return "sec3-I";
    case EstimatorKind::kGeodesicCholesky: return "sec3-II";
    case EstimatorKind::kIwasawaBest: return "sec3-I-gap";
    case EstimatorKind::kStein: return "sec3-II-gap";
    case EstimatorKind::kMle: return "sec3-mle-gap";
    default: return "";
  }
}

inline SpdMatrix apply_estimator(EstimatorKind kind, const WishartSample& sample,
                                 const SpectralCalibration* cal = nullptr) {
  switch (kind) {
    case EstimatorKind::kMle: return mle(sample);
    case EstimatorKind::kStein: return stein_estimator(sample);
    case EstimatorKind::kIwasawaBest: return iwasawa_best(sample);
    case EstimatorKind::kGeodesicIwasawa: return geodesic_iwasawa(sample);
    case EstimatorKind::kGeodesicCholesky: return geodesic_cholesky(sample);
    case EstimatorKind::kRotEqStein:
    case EstimatorKind::kRotEqGeodesic:
      if (cal == nullptr)
        throw MissingCalibrationError(std::string(to_string(kind)) +
                                      " requires a spectral calibration");
      return kind == EstimatorKind::kRotEqStein ? rot_eq_stein(sample, *cal)
                                                : rot_eq_geodesic(sample, *cal);
  }
  throw DomainError("apply_estimator: unknown estimator kind");
}

namespace detail {

// Loss between the pivot form of the estimate and the identity pivot form.
inline double starred_loss(LossKind loss, const std::vector<double>& pivots) {
  double sum = 0.0;
  for (double v : pivots) {
    const double lg = std::log(v);
    sum += loss == LossKind::kStein ? v - lg - 1.0 : lg * lg;
  }
  return sum;
}

struct MomentSums {
  KahanSum sum, sum_sq;
};

inline std::pair<double, double> mean_and_se(const std::vector<MomentSums>& shards,
                                             double count) {
  KahanSum total, total_sq;
  for (const MomentSums& s : shards) {
    total.add(s.sum.value());
    total_sq.add(s.sum_sq.value());
  }
  const double mean = total.value() / count;
  const double var =
      std::max(0.0, (total_sq.value() - count * mean * mean) / (count - 1.0));
  return {mean, std::sqrt(var / count)};
}

}  // namespace detail

// Monte Carlo risk of an estimator at sigma = I (every invariance reduction
// in the closed forms is to this case; non-identity sigma transports by
// congruence). Replicates are sharded over substreams of `rng` and merged in
// shard order, so the report is a pure function of (seed, stream, arguments)
// and identical for every worker count. Reports with fewer than 10^3
// replicates are statistically meaningless but still computed, so callers
// can demonstrate the failure mode.
inline RiskReport mc_risk(EstimatorKind kind, LossKind loss, int p, int n,
                          std::int64_t replicates, const RngStream& rng,
                          const SpectralCalibration* cal = nullptr, int workers = 1) {
  if (n < p || p < 1) throw DomainError("mc_risk: requires n >= p >= 1");
  if (replicates < 2) throw DomainError("mc_risk: needs at least 2 replicates");
  if (is_rotation_equivariant(kind)) {
    if (cal == nullptr)
      throw MissingCalibrationError(std::string("mc_risk: ") + to_string(kind) +
                                    " requires a spectral calibration");
    if (cal->p != p || cal->n != n)
      throw DimensionMismatchError("mc_risk: calibration (p, n) mismatch");
  }

  const Coordinates coords = risk_coordinates(kind, loss);
  const SpdMatrix identity = SpdMatrix::identity(p);
  const ShardPlan plan = make_shard_plan(static_cast<std::size_t>(replicates));
  auto shard_fn = [&](std::size_t shard, std::size_t extent) {
    detail::MomentSums sums;
    RngStream stream = rng.substream(1 + shard);
    for (std::size_t r = 0; r < extent; ++r) {
      const WishartSample sample = sample_wishart_identity(stream, p, n);
      const SpdMatrix estimate = apply_estimator(kind, sample, cal);
      double value;
      if (coords == Coordinates::kStarred) {
        value = detail::starred_loss(loss, iwasawa_full(estimate).pivots);
      } else {
        value = loss == LossKind::kStein ? stein_loss(estimate, identity)
                                         : geodesic_loss(estimate, identity);
      }
      sums.sum.add(value);
      sums.sum_sq.add(value * value);
    }
    return sums;
  };
  const std::vector<detail::MomentSums> shards =
      run_sharded<detail::MomentSums>(plan, workers, shard_fn);
  const auto [mean, se] = detail::mean_and_se(shards, static_cast<double>(replicates));

  RiskReport report;
  report.estimator = kind;
  report.loss = loss;
  report.p = p;
  report.n = n;
  report.analytic = try_analytic_risk(kind, loss, p, n);
  report.mc_mean = mean;
  report.mc_se = se;
  report.replicates = replicates;
  report.seed = rng.seed();
  report.coordinates = coords;
  report.flagged = report.analytic && std::abs(mean - *report.analytic) > 4.0 * se;
  return report;
}

struct CheckResult {
  enum class Status { kPass, kFail, kInconclusive };
  std::string name;
  Status status = Status::kPass;
  std::string detail;

  bool passed() const { return status == Status::kPass; }
};

inline const char* to_string(CheckResult::Status s) {
  switch (s) {
    case CheckResult::Status::kPass: return "pass";
    case CheckResult::Status::kFail: return "fail";
    case CheckResult::Status::kInconclusive: return "inconclusive";
  }
  return "?";
}

namespace detail {

inline std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.8g", x);
  return buf;
}

// Equality check between an MC estimate and its analytic target at the 4-SE
// band; inconclusive when the band is too wide to distinguish the target
// from zero-scale alternatives.
inline CheckResult mc_vs_analytic(const std::string& name, const RiskReport& report) {
  CheckResult check;
  check.name = name;
  const double analytic = report.analytic.value();
  const double diff = report.mc_mean - analytic;
  check.detail = "mc=" + fmt(report.mc_mean) + " analytic=" + fmt(analytic) +
                 " diff=" + fmt(diff) + " se=" + fmt(report.mc_se);
  if (4.0 * report.mc_se > 0.5 * std::abs(analytic)) {
    check.status = CheckResult::Status::kInconclusive;
    check.detail += " (SE too wide to resolve)";
  } else if (std::abs(diff) > 4.0 * report.mc_se) {
    check.status = CheckResult::Status::kFail;
  }
  return check;
}

}  // namespace detail

// Per-coordinate risk at multipliers perturbed away from the geodesic-optimal
// point, evaluated on the same draws as the optimum.
struct PerturbedRisk {
  int coordinate = 0;   // 1-based
  double delta = 0.0;   // signed log-perturbation
  double mc_mean = 0.0;
  double mc_se = 0.0;
  double excess = 0.0;     // mc_mean - optimal mc_mean
  double predicted = 0.0;  // delta^2
  double combined_se = 0.0;
};

struct LocalOptimalityReport {
  int p = 0;
  int n = 0;
  double perturbation = 0.0;
  std::int64_t replicates = 0;
  std::uint64_t seed = 0;
  double optimal_mc_mean = 0.0;
  double optimal_mc_se = 0.0;
  std::vector<PerturbedRisk> perturbed;

  // Largest |excess - predicted| in units of the combined SE.
  double worst_deviation_sigmas() const {
    double worst = 0.0;
    for (const PerturbedRisk& r : perturbed)
      worst = std::max(worst, std::abs(r.excess - r.predicted) / r.combined_se);
    return worst;
  }
};

// Convexity probe of the geodesic risk in the factor coordinates: the
// multiplier of each coordinate is bumped by e^{+delta} and e^{-delta} around
// the optimum exp(-E[log chi2_{n-i+1}]). Expected excess risk is exactly
// delta^2, from E[(log(d_i t_ii^2) + delta)^2]. All risks, perturbed and
// optimal, are evaluated on the same seeded draws.
inline LocalOptimalityReport local_optimality_probe(int p, int n, std::int64_t replicates,
                                                const RngStream& rng, double perturbation,
                                                int workers = 1) {
  if (n < p || p < 1) throw DomainError("local_optimality_probe: requires n >= p >= 1");
  if (!(perturbation >= 0.0) || perturbation >= 0.5)
    throw DomainError("local_optimality_probe: perturbation must lie in [0, 0.5)");
  if (replicates < 2) throw DomainError("local_optimality_probe: needs >= 2 replicates");

  std::vector<double> optimal_log_mult(p);
  for (int i = 0; i < p; ++i)
    optimal_log_mult[i] = -chisq_log_moments(static_cast<double>(n - i)).mean_log;

  // Accumulator layout: slot 0 is the optimum, then (coordinate, sign) pairs.
  const int variants = 1 + 2 * p;
  struct ShardSums {
    std::vector<detail::MomentSums> slots;
  };
  const ShardPlan plan = make_shard_plan(static_cast<std::size_t>(replicates));
  auto shard_fn = [&](std::size_t shard, std::size_t extent) {
    ShardSums sums;
    sums.slots.resize(variants);
    RngStream stream = rng.substream(1 + shard);
    std::vector<double> centered(p);
    for (std::size_t r = 0; r < extent; ++r) {
      const Matrix t = detail::sample_bartlett_factor(stream, p, n);
      double base = 0.0;
      for (int i = 0; i < p; ++i) {
        centered[i] = optimal_log_mult[i] + 2.0 * std::log(t(i, i));
        base += centered[i] * centered[i];
      }
      sums.slots[0].sum.add(base);
      sums.slots[0].sum_sq.add(base * base);
      for (int j = 0; j < p; ++j) {
        for (int sign = 0; sign < 2; ++sign) {
          const double delta = sign == 0 ? perturbation : -perturbation;
          const double shifted = centered[j] + delta;
          const double value = base - centered[j] * centered[j] + shifted * shifted;
          detail::MomentSums& slot = sums.slots[1 + 2 * j + sign];
          slot.sum.add(value);
          slot.sum_sq.add(value * value);
        }
      }
    }
    return sums;
  };
  const std::vector<ShardSums> shards = run_sharded<ShardSums>(plan, workers, shard_fn);

  const double count = static_cast<double>(replicates);
  auto collect = [&](int slot) {
    std::vector<detail::MomentSums> column(shards.size());
    for (std::size_t s = 0; s < shards.size(); ++s) column[s] = shards[s].slots[slot];
    return detail::mean_and_se(column, count);
  };

  LocalOptimalityReport report;
  report.p = p;
  report.n = n;
  report.perturbation = perturbation;
  report.replicates = replicates;
  report.seed = rng.seed();
  const auto [opt_mean, opt_se] = collect(0);
  report.optimal_mc_mean = opt_mean;
  report.optimal_mc_se = opt_se;
  for (int j = 0; j < p; ++j) {
    for (int sign = 0; sign < 2; ++sign) {
      const auto [mean, se] = collect(1 + 2 * j + sign);
      PerturbedRisk r;
      r.coordinate = j + 1;
      r.delta = sign == 0 ? perturbation : -perturbation;
      r.mc_mean = mean;
      r.mc_se = se;
      r.excess = mean - opt_mean;
      r.predicted = perturbation * perturbation;
      r.combined_se = std::sqrt(se * se + opt_se * opt_se);
      report.perturbed.push_back(r);
    }
  }
  return report;
}

inline constexpr std::uint64_t kInnerStreamSpacing = std::uint64_t{1} << 24;

// Full verification battery at one (p, n): the analytic Stein-risk chain
// (strict for p >= 2, equalities at p = 1, plus the whole small-(p, n) grid),
// MC confirmation of each closed form, the coordinate-equality of the two
// geodesic minimum risks, the squared-bias gap identities, the
// rotation-equivariant inadmissibility direction, the local-optimality probe,
// and the decay of the Stein risks in n. MC checks report "inconclusive"
// rather than pass/fail when the requested replicate budget leaves the SE too
// wide to resolve the claim.
inline std::vector<CheckResult> verify_ordering(int p, int n, std::int64_t replicates,
                                                const RngStream& rng, int workers = 1) {
  if (n < p || p < 1) throw DomainError("verify_ordering: requires n >= p >= 1");
  std::vector<CheckResult> checks;
  std::uint64_t cursor = 0;
  auto next_stream = [&] {
    RngStream s = rng.substream(cursor);
    cursor += kInnerStreamSpacing;
    return s;
  };
  using Status = CheckResult::Status;

  // Analytic chain at (p, n).
  {
    const double r_iw = analytic_stein_risk(EstimatorKind::kIwasawaBest, p, n);
    const double r_st = analytic_stein_risk(EstimatorKind::kStein, p, n);
    const double r_ml = analytic_stein_risk(EstimatorKind::kMle, p, n);
    CheckResult c;
    c.name = "analytic-stein-chain";
    c.detail = "iwasawa=" + detail::fmt(r_iw) + " stein=" + detail::fmt(r_st) +
               " mle=" + detail::fmt(r_ml);
    const bool ok = p == 1 ? (r_iw == r_st && r_st == r_ml) : (r_iw < r_st && r_st < r_ml);
    c.status = ok ? Status::kPass : Status::kFail;
    checks.push_back(c);
  }

  // Analytic chain over the reference grid, and equality at p = 1.
  {
    CheckResult c;
    c.name = "analytic-stein-chain-grid";
    c.detail = "p in {2..6}, n in {p..40}";
    for (int gp = 2; gp <= 6 && c.status == Status::kPass; ++gp) {
      for (int gn = gp; gn <= 40; ++gn) {
        const double r_iw = analytic_stein_risk(EstimatorKind::kIwasawaBest, gp, gn);
        const double r_st = analytic_stein_risk(EstimatorKind::kStein, gp, gn);
        const double r_ml = analytic_stein_risk(EstimatorKind::kMle, gp, gn);
        if (!(r_iw < r_st && r_st < r_ml)) {
          c.status = Status::kFail;
          c.detail = "violated at p=" + std::to_string(gp) + " n=" + std::to_string(gn);
          break;
        }
      }
    }
    checks.push_back(c);

    CheckResult e;
    e.name = "analytic-stein-equality-p1";
    e.detail = "n in {1..40}";
    for (int gn = 1; gn <= 40; ++gn) {
      const double r_iw = analytic_stein_risk(EstimatorKind::kIwasawaBest, 1, gn);
      const double r_st = analytic_stein_risk(EstimatorKind::kStein, 1, gn);
      const double r_ml = analytic_stein_risk(EstimatorKind::kMle, 1, gn);
      if (r_iw != r_st || r_st != r_ml) {
        e.status = Status::kFail;
        e.detail = "violated at n=" + std::to_string(gn);
        break;
      }
    }
    checks.push_back(e);
  }

  // MC confirmation of the three Stein-loss closed forms.
  for (EstimatorKind kind :
       {EstimatorKind::kMle, EstimatorKind::kStein, EstimatorKind::kIwasawaBest}) {
    const RiskReport report =
        mc_risk(kind, LossKind::kStein, p, n, replicates, next_stream(), nullptr, workers);
    checks.push_back(
        detail::mc_vs_analytic(std::string("mc-stein-") + to_string(kind), report));
  }

  // Coordinate equality of the two geodesic minimum risks.
  {
    CheckResult c;
    c.name = "analytic-geodesic-coordinates-equal";
    const double gi = analytic_geodesic_risk(EstimatorKind::kGeodesicIwasawa, p, n);
    const double gc = analytic_geodesic_risk(EstimatorKind::kGeodesicCholesky, p, n);
    c.detail = "iwasawa=" + detail::fmt(gi) + " cholesky=" + detail::fmt(gc);
    c.status = gi == gc ? Status::kPass : Status::kFail;
    checks.push_back(c);
  }

  const RiskReport mc_gi = mc_risk(EstimatorKind::kGeodesicIwasawa, LossKind::kGeodesic, p, n,
                                   replicates, next_stream(), nullptr, workers);
  const RiskReport mc_gc = mc_risk(EstimatorKind::kGeodesicCholesky, LossKind::kGeodesic, p, n,
                                   replicates, next_stream(), nullptr, workers);
  checks.push_back(detail::mc_vs_analytic("mc-geodesic-geodesic-iwasawa", mc_gi));
  checks.push_back(detail::mc_vs_analytic("mc-geodesic-geodesic-cholesky", mc_gc));
  for (EstimatorKind kind : {EstimatorKind::kMle, EstimatorKind::kStein}) {
    const RiskReport r = mc_risk(kind, LossKind::kGeodesic, p, n, replicates, next_stream(),
                                 nullptr, workers);
    checks.push_back(
        detail::mc_vs_analytic(std::string("mc-geodesic-") + to_string(kind), r));
  }
  {
    CheckResult c;
    c.name = "mc-geodesic-iwasawa-vs-cholesky";
    const double diff = mc_gi.mc_mean - mc_gc.mc_mean;
    const double cse = std::sqrt(mc_gi.mc_se * mc_gi.mc_se + mc_gc.mc_se * mc_gc.mc_se);
    c.detail = "diff=" + detail::fmt(diff) + " combined_se=" + detail::fmt(cse);
    if (4.0 * cse > 0.5 * mc_gi.analytic.value())
      c.status = Status::kInconclusive;
    else if (std::abs(diff) > 4.0 * cse)
      c.status = Status::kFail;
    checks.push_back(c);
  }

  // Squared-bias gap identities, analytic side at machine precision.
  {
    auto gap_check = [&](const char* name, EstimatorKind kind) {
      CheckResult c;
      c.name = name;
      const double lhs = analytic_geodesic_risk(kind, p, n) -
                         analytic_geodesic_risk(EstimatorKind::kGeodesicIwasawa, p, n);
      double rhs = 0.0;
      for (int i = 1; i <= p; ++i) {
        const double mean_log = chisq_log_moments(static_cast<double>(n - i + 1)).mean_log;
        double log_div = 0.0;
        if (kind == EstimatorKind::kIwasawaBest)
          log_div = std::log(static_cast<double>(n - i + 1));
        else if (kind == EstimatorKind::kStein)
          log_div = std::log(static_cast<double>(n + p - 2 * i + 1));
        else
          log_div = std::log(static_cast<double>(n));
        rhs += (log_div - mean_log) * (log_div - mean_log);
      }
      c.detail = "gap=" + detail::fmt(lhs) + " squared_bias=" + detail::fmt(rhs);
      const double scale = std::max(std::abs(lhs), std::abs(rhs));
      c.status = std::abs(lhs - rhs) <= 1e-12 * scale ? Status::kPass : Status::kFail;
      return c;
    };
    checks.push_back(gap_check("analytic-gap-iwasawa-best", EstimatorKind::kIwasawaBest));
    checks.push_back(gap_check("analytic-gap-stein", EstimatorKind::kStein));
    checks.push_back(gap_check("analytic-gap-mle", EstimatorKind::kMle));
  }

  // MC confirmation of the pivot-form and factor-form gaps.
  {
    auto mc_gap_check = [&](const char* name, EstimatorKind kind, const RiskReport& minimum) {
      const RiskReport mc = mc_risk(kind, LossKind::kGeodesic, p, n, replicates, next_stream(),
                                    nullptr, workers);
      CheckResult c;
      c.name = name;
      const double gap_obs = mc.mc_mean - minimum.mc_mean;
      const double gap_ana = analytic_geodesic_risk(kind, p, n) -
                             analytic_geodesic_risk(EstimatorKind::kGeodesicIwasawa, p, n);
      const double cse = std::sqrt(mc.mc_se * mc.mc_se + minimum.mc_se * minimum.mc_se);
      c.detail = "observed=" + detail::fmt(gap_obs) + " analytic=" + detail::fmt(gap_ana) +
                 " combined_se=" + detail::fmt(cse);
      if (gap_ana <= 2.0 * cse) {
        c.status = Status::kInconclusive;
        c.detail += " (SE too wide to resolve)";
      } else if (std::abs(gap_obs - gap_ana) > 4.0 * cse) {
        c.status = Status::kFail;
      }
      return c;
    };
    checks.push_back(mc_gap_check("mc-gap-iwasawa-best", EstimatorKind::kIwasawaBest, mc_gi));
    checks.push_back(mc_gap_check("mc-gap-stein", EstimatorKind::kStein, mc_gc));
  }

  // Rotation-equivariant inadmissibility direction.
  {
    const std::int64_t cal_reps = std::max<std::int64_t>(replicates, 10000);
    const SpectralCalibration cal = calibrate_spectrum(p, n, cal_reps, next_stream(), workers);
    const RiskReport mc_go = mc_risk(EstimatorKind::kRotEqGeodesic, LossKind::kGeodesic, p, n,
                                     replicates, next_stream(), &cal, workers);
    const RiskReport mc_so = mc_risk(EstimatorKind::kRotEqStein, LossKind::kGeodesic, p, n,
                                     replicates, next_stream(), &cal, workers);
    CheckResult c;
    c.name = "mc-roteq-inadmissibility";
    double gap_pred = 0.0;
    for (int i = 0; i < p; ++i) {
      const double b = std::log(cal.mean_eigs[i]) - cal.mean_log_eigs[i];
      gap_pred += b * b;
    }
    const double gap_obs = mc_so.mc_mean - mc_go.mc_mean;
    const double cse = std::sqrt(mc_so.mc_se * mc_so.mc_se + mc_go.mc_se * mc_go.mc_se);
    c.detail = "observed=" + detail::fmt(gap_obs) + " predicted=" + detail::fmt(gap_pred) +
               " combined_se=" + detail::fmt(cse);
    if (gap_pred <= 4.0 * cse) {
      c.status = Status::kInconclusive;
      c.detail += " (SE too wide to resolve)";
    } else if (!(gap_obs > 2.0 * cse && gap_obs >= gap_pred - 4.0 * cse)) {
      c.status = Status::kFail;
    }
    checks.push_back(c);
  }

  // Local optimality of the geodesic multipliers.
  {
    const double delta = 0.2;
    const LocalOptimalityReport t2 =
        local_optimality_probe(p, n, replicates, next_stream(), delta, workers);
    CheckResult c;
    c.name = "local-optimality-probe";
    double min_cse = t2.perturbed.empty() ? 0.0 : t2.perturbed.front().combined_se;
    for (const PerturbedRisk& r : t2.perturbed) min_cse = std::min(min_cse, r.combined_se);
    c.detail = "worst_deviation=" + detail::fmt(t2.worst_deviation_sigmas()) + " sigmas";
    if (delta * delta <= 2.0 * min_cse) {
      c.status = Status::kInconclusive;
      c.detail += " (SE too wide to resolve)";
    } else if (t2.worst_deviation_sigmas() > 2.0) {
      c.status = Status::kFail;
    }
    checks.push_back(c);
  }

  // The three Stein risks decay monotonically to zero in n.
  {
    CheckResult c;
    c.name = "analytic-stein-decay";
    c.detail = "n in {p..200}";
    for (EstimatorKind kind :
         {EstimatorKind::kMle, EstimatorKind::kStein, EstimatorKind::kIwasawaBest}) {
      double prev = analytic_stein_risk(kind, p, p);
      for (int gn = p + 1; gn <= 200; ++gn) {
        const double cur = analytic_stein_risk(kind, p, gn);
        if (!(cur < prev)) {
          c.status = Status::kFail;
          c.detail = std::string("non-decreasing for ") + to_string(kind) +
                     " at n=" + std::to_string(gn);
          break;
        }
        prev = cur;
      }
      if (c.status != Status::kPass) break;
    }
    checks.push_back(c);
  }

  return checks;
}

}  // namespace covrisk
