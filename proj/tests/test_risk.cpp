#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "covrisk/risk.hpp"
#include "support/test_support.hpp"

using covrisk::CheckResult;
using covrisk::Coordinates;
using covrisk::EstimatorKind;
using covrisk::LossKind;
using covrisk::RiskReport;
using covrisk::RngStream;
using covrisk::analytic_geodesic_risk;
using covrisk::analytic_stein_risk;
using covrisk::mc_risk;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("analytic stein risk of the mle at p=1, n=10") {
  // log 10 - (log 2 + psi(5)), high-precision reference.
  REQUIRE_THAT(analytic_stein_risk(EstimatorKind::kMle, 1, 10),
               WithinRel(0.1033202440022999018739, 1e-12));
  REQUIRE(analytic_stein_risk(EstimatorKind::kStein, 1, 10) ==
          analytic_stein_risk(EstimatorKind::kMle, 1, 10));
}

TEST_CASE("analytic stein risks are strictly ordered for p >= 2") {
  for (int p = 2; p <= 6; ++p) {
    for (int n = p; n <= 40; ++n) {
      const double r_iw = analytic_stein_risk(EstimatorKind::kIwasawaBest, p, n);
      const double r_st = analytic_stein_risk(EstimatorKind::kStein, p, n);
      const double r_ml = analytic_stein_risk(EstimatorKind::kMle, p, n);
      REQUIRE(r_iw < r_st);
      REQUIRE(r_st < r_ml);
    }
  }
}

TEST_CASE("analytic stein risk rejects unsupported estimators") {
  REQUIRE_THROWS_AS(analytic_stein_risk(EstimatorKind::kRotEqStein, 3, 10),
                    covrisk::UnsupportedError);
  REQUIRE_THROWS_AS(analytic_stein_risk(EstimatorKind::kGeodesicCholesky, 3, 10),
                    covrisk::UnsupportedError);
  REQUIRE_THROWS_AS(analytic_stein_risk(EstimatorKind::kMle, 3, 2), covrisk::DomainError);
}

TEST_CASE("analytic geodesic minimum risk is the trigamma sum") {
  REQUIRE_THAT(analytic_geodesic_risk(EstimatorKind::kGeodesicCholesky, 1, 10),
               WithinRel(0.2213229557371153253613, 1e-12));  // psi'(5)
  for (int p = 1; p <= 6; ++p) {
    for (int n = p; n <= 30; ++n) {
      const double gi = analytic_geodesic_risk(EstimatorKind::kGeodesicIwasawa, p, n);
      const double gc = analytic_geodesic_risk(EstimatorKind::kGeodesicCholesky, p, n);
      REQUIRE(gi == gc);  // same expression, bit for bit
      REQUIRE(analytic_geodesic_risk(EstimatorKind::kStein, p, n) > gc);
    }
  }
  REQUIRE_THROWS_AS(analytic_geodesic_risk(EstimatorKind::kRotEqGeodesic, 3, 10),
                    covrisk::UnsupportedError);
}

TEST_CASE("gap identities hold to machine precision") {
  for (int p : {1, 2, 3, 5}) {
    const int n = p + 7;
    const double base = analytic_geodesic_risk(EstimatorKind::kGeodesicIwasawa, p, n);
    auto squared_bias = [&](double log_div, int i) {
      const double m = covrisk::chisq_log_moments(static_cast<double>(n - i + 1)).mean_log;
      return (log_div - m) * (log_div - m);
    };
    double gap_iw = 0.0, gap_st = 0.0;
    for (int i = 1; i <= p; ++i) {
      gap_iw += squared_bias(std::log(static_cast<double>(n - i + 1)), i);
      gap_st += squared_bias(std::log(static_cast<double>(n + p - 2 * i + 1)), i);
    }
    REQUIRE_THAT(analytic_geodesic_risk(EstimatorKind::kIwasawaBest, p, n) - base,
                 WithinRel(gap_iw, 1e-12));
    REQUIRE_THAT(analytic_geodesic_risk(EstimatorKind::kStein, p, n) - base,
                 WithinRel(gap_st, 1e-12));
  }
}

TEST_CASE("risk coordinates follow the evaluation policy") {
  REQUIRE(risk_coordinates(EstimatorKind::kIwasawaBest, LossKind::kStein) ==
          Coordinates::kStarred);
  REQUIRE(risk_coordinates(EstimatorKind::kGeodesicIwasawa, LossKind::kGeodesic) ==
          Coordinates::kStarred);
  REQUIRE(risk_coordinates(EstimatorKind::kMle, LossKind::kStein) == Coordinates::kFull);
  REQUIRE(risk_coordinates(EstimatorKind::kStein, LossKind::kStein) == Coordinates::kFull);
  REQUIRE(risk_coordinates(EstimatorKind::kMle, LossKind::kGeodesic) == Coordinates::kStarred);
  REQUIRE(risk_coordinates(EstimatorKind::kGeodesicCholesky, LossKind::kGeodesic) ==
          Coordinates::kStarred);
  REQUIRE(risk_coordinates(EstimatorKind::kRotEqStein, LossKind::kStein) == Coordinates::kFull);
  REQUIRE(risk_coordinates(EstimatorKind::kRotEqGeodesic, LossKind::kGeodesic) ==
          Coordinates::kFull);
}

TEST_CASE("mc stein risks match the closed forms") {
  const RngStream rng(8001);
  int band = 0;
  for (EstimatorKind kind :
       {EstimatorKind::kMle, EstimatorKind::kStein, EstimatorKind::kIwasawaBest}) {
    const RiskReport r =
        mc_risk(kind, LossKind::kStein, 3, 10, 30000, rng.substream(++band << 22));
    REQUIRE(r.analytic.has_value());
    REQUIRE_THAT(r.mc_mean, WithinAbs(*r.analytic, 4.0 * r.mc_se));
    REQUIRE_FALSE(r.flagged);
  }
}

TEST_CASE("mc geodesic risks match the closed forms in starred coordinates") {
  const RngStream rng(8002);
  int band = 0;
  for (EstimatorKind kind :
       {EstimatorKind::kMle, EstimatorKind::kStein, EstimatorKind::kIwasawaBest,
        EstimatorKind::kGeodesicIwasawa, EstimatorKind::kGeodesicCholesky}) {
    const RiskReport r =
        mc_risk(kind, LossKind::kGeodesic, 3, 10, 30000, rng.substream(++band << 22));
    REQUIRE(r.coordinates == Coordinates::kStarred);
    REQUIRE(r.analytic.has_value());
    REQUIRE_THAT(r.mc_mean, WithinAbs(*r.analytic, 4.0 * r.mc_se));
  }
}

TEST_CASE("scalar mc geodesic risk of the mle splits into variance plus bias") {
  const RngStream rng(8003);
  const RiskReport r = mc_risk(EstimatorKind::kMle, LossKind::kGeodesic, 1, 10, 50000, rng);
  const covrisk::ChiSquareLogMoments m = covrisk::chisq_log_moments(10.0);
  const double expected =
      m.var_log + (std::log(10.0) - m.mean_log) * (std::log(10.0) - m.mean_log);
  REQUIRE_THAT(*r.analytic, WithinRel(expected, 1e-13));
  REQUIRE_THAT(r.mc_mean, WithinAbs(expected, 4.0 * r.mc_se));
}

TEST_CASE("mc risk demands calibration for rotation-equivariant kinds") {
  const RngStream rng(8004);
  REQUIRE_THROWS_AS(
      mc_risk(EstimatorKind::kRotEqStein, LossKind::kStein, 3, 10, 5000, rng),
      covrisk::MissingCalibrationError);
  REQUIRE_THROWS_AS(mc_risk(EstimatorKind::kMle, LossKind::kStein, 3, 2, 5000, rng),
                    covrisk::DomainError);
  const covrisk::SpectralCalibration cal = calibrate_spectrum(2, 8, 10000, rng);
  REQUIRE_THROWS_AS(
      mc_risk(EstimatorKind::kRotEqStein, LossKind::kStein, 3, 10, 5000, rng, &cal),
      covrisk::DimensionMismatchError);
}

TEST_CASE("mc risk is deterministic and worker-independent") {
  const RngStream rng(8005, 9);
  const RiskReport a = mc_risk(EstimatorKind::kStein, LossKind::kStein, 3, 10, 20000, rng, nullptr, 1);
  const RiskReport b = mc_risk(EstimatorKind::kStein, LossKind::kStein, 3, 10, 20000, rng, nullptr, 4);
  REQUIRE(a.mc_mean == b.mc_mean);
  REQUIRE(a.mc_se == b.mc_se);
  const RiskReport c = mc_risk(EstimatorKind::kStein, LossKind::kStein, 3, 10, 20000, rng, nullptr, 1);
  REQUIRE(a.mc_mean == c.mc_mean);
}

TEST_CASE("equivariant estimators transport losses exactly across sigma") {
  // The identity-sigma reduction: for an equivariant estimator the loss at
  // (g A g', g g') equals the loss at (A, I) replicate by replicate.
  RngStream rng(8006);
  covrisk::Matrix g(3, 3);
  for (int i = 0; i < 3; ++i) {
    g(i, i) = 1.0 + rng.next_double();
    for (int j = 0; j < i; ++j) g(i, j) = rng.next_normal();
  }
  const covrisk::SpdMatrix sigma = congruence(covrisk::SpdMatrix::identity(3), g);
  for (int rep = 0; rep < 20; ++rep) {
    const covrisk::WishartSample s = sample_wishart_identity(rng, 3, 10);
    const covrisk::WishartSample moved =
        covrisk::WishartSample(covrisk::LowerTriangular(g * s.bartlett_factor.matrix()), 10);
    const double at_identity = covrisk::stein_loss(mle(s), covrisk::SpdMatrix::identity(3));
    const double transported = covrisk::stein_loss(mle(moved), sigma);
    REQUIRE_THAT(transported, WithinRel(at_identity, 1e-9));
  }
}

TEST_CASE("verify_ordering passes with an adequate budget") {
  const RngStream rng(8007);
  const std::vector<CheckResult> checks = verify_ordering(3, 10, 60000, rng, 2);
  REQUIRE(checks.size() >= 12);
  for (const CheckResult& c : checks) {
    INFO(c.name << ": " << c.detail);
    REQUIRE(c.status == CheckResult::Status::kPass);
  }
}

TEST_CASE("verify_ordering reports inconclusive when starved of replicates") {
  const RngStream rng(8008);
  const std::vector<CheckResult> checks = verify_ordering(3, 10, 10, rng);
  bool any_inconclusive = false;
  for (const CheckResult& c : checks)
    any_inconclusive |= c.status == CheckResult::Status::kInconclusive;
  REQUIRE(any_inconclusive);
}

TEST_CASE("verify_ordering at p=1 sees all three risks coincide") {
  const RngStream rng(8009);
  const std::vector<CheckResult> checks = verify_ordering(1, 10, 20000, rng);
  for (const CheckResult& c : checks) {
    INFO(c.name << ": " << c.detail);
    REQUIRE(c.status != CheckResult::Status::kFail);
  }
}

TEST_CASE("optimality probe: perturbed risks exceed the optimum by delta^2") {
  const RngStream rng(8010);
  const covrisk::LocalOptimalityReport report =
      local_optimality_probe(2, 10, 50000, rng, 0.2, 2);
  REQUIRE(report.perturbed.size() == 4);
  for (const covrisk::PerturbedRisk& r : report.perturbed) {
    REQUIRE_THAT(r.excess, WithinAbs(0.04, 2.0 * r.combined_se));
    REQUIRE(r.excess > 0.0);
  }
  // Sign symmetry: +delta and -delta agree within MC error.
  for (std::size_t j = 0; j + 1 < report.perturbed.size(); j += 2) {
    const auto& plus = report.perturbed[j];
    const auto& minus = report.perturbed[j + 1];
    REQUIRE_THAT(plus.excess - minus.excess, WithinAbs(0.0, 2.0 * plus.combined_se));
  }
}

TEST_CASE("optimality probe with zero perturbation is exactly the optimum") {
  const RngStream rng(8011);
  const covrisk::LocalOptimalityReport report = local_optimality_probe(2, 10, 5000, rng, 0.0);
  for (const covrisk::PerturbedRisk& r : report.perturbed) {
    REQUIRE(r.mc_mean == report.optimal_mc_mean);
    REQUIRE(r.excess == 0.0);
  }
  const RngStream rng2(8012);
  REQUIRE_THROWS_AS(local_optimality_probe(2, 10, 5000, rng2, 0.5), covrisk::DomainError);
  REQUIRE_THROWS_AS(local_optimality_probe(2, 10, 5000, rng2, -0.1), covrisk::DomainError);
}

TEST_CASE("analytic tags name every closed form") {
  REQUIRE(std::string(analytic_tag(EstimatorKind::kMle, LossKind::kStein)) == "eq4");
  REQUIRE(std::string(analytic_tag(EstimatorKind::kStein, LossKind::kStein)) == "eq6");
  REQUIRE(std::string(analytic_tag(EstimatorKind::kIwasawaBest, LossKind::kStein)) == "eq17");
  REQUIRE(std::string(analytic_tag(EstimatorKind::kGeodesicCholesky, LossKind::kGeodesic)) ==
          "sec3-II");
  REQUIRE(std::string(analytic_tag(EstimatorKind::kRotEqStein, LossKind::kStein)).empty());
}
