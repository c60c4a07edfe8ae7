// covrisk: covariance-estimator risk laboratory.
//
// Subcommands: risk-table, verify, decompose, sample, calibrate, spectra.
// All Monte Carlo output is a pure function of (subcommand, flags, seed):
// replicates are sharded over fixed counter-based substreams, so repeated
// runs and different --workers values produce byte-identical output.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "covrisk/covrisk.hpp"

namespace {

using covrisk::EstimatorKind;
using covrisk::LossKind;
using covrisk::RiskReport;
using covrisk::RngStream;
using covrisk::SpectralCalibration;

constexpr std::uint64_t kStreamBand = std::uint64_t{1} << 32;
constexpr std::uint64_t kCalibrationStream = 1 * kStreamBand;
constexpr std::uint64_t kVerifyStream = 16 * kStreamBand;
constexpr std::uint64_t kSampleStream = 17 * kStreamBand;
constexpr std::uint64_t kSpectraStream = 18 * kStreamBand;
constexpr std::uint64_t kDefaultSeed = 20240802;

std::uint64_t cell_stream(EstimatorKind kind, LossKind loss) {
  const auto kind_index = static_cast<std::uint64_t>(kind);
  const auto loss_index = static_cast<std::uint64_t>(loss);
  return (2 + 2 * kind_index + loss_index) * kStreamBand;
}

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string fmt6(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6f", x);
  return buf;
}

// Writes either to --output or to stdout.
class OutputTarget {
 public:
  explicit OutputTarget(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw covrisk::ParseError("cannot open output file: " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

struct CommonOptions {
  std::uint64_t seed = kDefaultSeed;
  int workers = 0;  // 0 = all available
  std::string format = "table";
  std::string output_path;
};

void add_common(CLI::App* cmd, CommonOptions* opts, bool with_format = true) {
  cmd->add_option("--seed", opts->seed, "RNG seed (64-bit)")
      ->envname("COVRISK_SEED")
      ->capture_default_str();
  cmd->add_option("--workers", opts->workers,
                  "Monte Carlo worker threads (0 = all available); results do not depend on it")
      ->capture_default_str();
  if (with_format)
    cmd->add_option("--format", opts->format, "Output format")
        ->check(CLI::IsMember({"table", "csv", "json"}))
        ->capture_default_str();
  cmd->add_option("--output", opts->output_path, "Write output to this file instead of stdout");
}

// ---------------------------------------------------------------------------
// risk-table

struct RiskTableOptions {
  CommonOptions common;
  int p = 0;
  int n = 0;
  std::int64_t replicates = 100000;
  std::int64_t calibration_replicates = 0;  // 0 = max(replicates, 10^4)
  std::string loss_filter;
  std::vector<std::string> estimator_names;
  std::string calibration_path;
};

nlohmann::json report_to_json(const RiskReport& r) {
  nlohmann::json j{{"estimator", covrisk::to_string(r.estimator)},
                   {"loss", covrisk::to_string(r.loss)},
                   {"coordinates", covrisk::to_string(r.coordinates)},
                   {"p", r.p},
                   {"n", r.n},
                   {"replicates", r.replicates},
                   {"seed", r.seed},
                   {"mc_mean", r.mc_mean},
                   {"mc_se", r.mc_se},
                   {"flagged", r.flagged}};
  if (r.analytic) {
    j["analytic"] = *r.analytic;
    j["analytic_tag"] = covrisk::analytic_tag(r.estimator, r.loss);
  } else {
    j["analytic"] = nullptr;
    j["analytic_tag"] = nullptr;
  }
  return j;
}

void write_risk_csv(std::ostream& out, const std::vector<RiskReport>& rows) {
  out << "estimator,loss,coordinates,p,n,replicates,seed,analytic,analytic_tag,mc_mean,mc_se,"
         "flagged\n";
  for (const RiskReport& r : rows) {
    out << covrisk::to_string(r.estimator) << ',' << covrisk::to_string(r.loss) << ','
        << covrisk::to_string(r.coordinates) << ',' << r.p << ',' << r.n << ',' << r.replicates
        << ',' << r.seed << ',';
    if (r.analytic) out << fmt17(*r.analytic);
    out << ',' << covrisk::analytic_tag(r.estimator, r.loss) << ',' << fmt17(r.mc_mean) << ','
        << fmt17(r.mc_se) << ',' << (r.flagged ? "true" : "false") << '\n';
  }
}

void write_risk_text(std::ostream& out, const std::vector<RiskReport>& rows) {
  char line[256];
  std::snprintf(line, sizeof(line), "%-18s %-9s %-8s %14s %12s %12s %10s  %s\n", "estimator",
                "loss", "coords", "analytic", "mc_mean", "mc_se", "replicates", "tag");
  out << line;
  for (const RiskReport& r : rows) {
    const std::string analytic = r.analytic ? fmt6(*r.analytic) : std::string("-");
    std::snprintf(line, sizeof(line), "%-18s %-9s %-8s %14s %12s %12s %10lld  %s%s\n",
                  covrisk::to_string(r.estimator), covrisk::to_string(r.loss),
                  covrisk::to_string(r.coordinates), analytic.c_str(), fmt6(r.mc_mean).c_str(),
                  fmt6(r.mc_se).c_str(), static_cast<long long>(r.replicates),
                  covrisk::analytic_tag(r.estimator, r.loss), r.flagged ? "  [FLAGGED]" : "");
    out << line;
  }
}

int run_risk_table(const RiskTableOptions& opts) {
  std::vector<EstimatorKind> kinds;
  if (opts.estimator_names.empty()) {
    kinds.assign(std::begin(covrisk::kAllEstimators), std::end(covrisk::kAllEstimators));
  } else {
    for (const std::string& name : opts.estimator_names)
      kinds.push_back(covrisk::parse_estimator_kind(name));
  }
  std::vector<LossKind> losses{LossKind::kStein, LossKind::kGeodesic};
  if (!opts.loss_filter.empty()) losses = {covrisk::parse_loss_kind(opts.loss_filter)};

  bool needs_calibration = false;
  for (EstimatorKind kind : kinds) needs_calibration |= covrisk::is_rotation_equivariant(kind);

  std::optional<SpectralCalibration> cal;
  if (needs_calibration) {
    if (!opts.calibration_path.empty()) {
      std::ifstream in(opts.calibration_path);
      if (!in) throw covrisk::ParseError("cannot open calibration file: " + opts.calibration_path);
      cal = covrisk::load_calibration(in, opts.p, opts.n);
      std::cerr << "loaded calibration from " << opts.calibration_path << " (p=" << cal->p
                << ", n=" << cal->n << ", replicates=" << cal->replicates << ")\n";
    } else {
      const std::int64_t cal_reps = opts.calibration_replicates > 0
                                        ? opts.calibration_replicates
                                        : std::max<std::int64_t>(opts.replicates, 10000);
      std::cerr << "computing spectral calibration (p=" << opts.p << ", n=" << opts.n
                << ", replicates=" << cal_reps << ")\n";
      cal = covrisk::calibrate_spectrum(opts.p, opts.n, cal_reps,
                                        RngStream(opts.common.seed, kCalibrationStream),
                                        opts.common.workers);
    }
  }

  std::vector<RiskReport> rows;
  for (EstimatorKind kind : kinds) {
    for (LossKind loss : losses) {
      const RngStream rng(opts.common.seed, cell_stream(kind, loss));
      rows.push_back(covrisk::mc_risk(kind, loss, opts.p, opts.n, opts.replicates, rng,
                                      cal ? &*cal : nullptr, opts.common.workers));
    }
  }

  OutputTarget target(opts.common.output_path);
  if (opts.common.format == "csv") {
    write_risk_csv(target.stream(), rows);
  } else if (opts.common.format == "json") {
    nlohmann::json j{{"p", opts.p},
                     {"n", opts.n},
                     {"replicates", opts.replicates},
                     {"seed", opts.common.seed},
                     {"rows", nlohmann::json::array()}};
    for (const RiskReport& r : rows) j["rows"].push_back(report_to_json(r));
    target.stream() << j.dump(2) << '\n';
  } else {
    write_risk_text(target.stream(), rows);
  }

  for (const RiskReport& r : rows)
    if (r.flagged) {
      std::cerr << "warning: " << covrisk::to_string(r.estimator) << "/"
                << covrisk::to_string(r.loss) << " missed its 4-SE band\n";
      return 1;
    }
  return 0;
}

// ---------------------------------------------------------------------------
// verify

struct VerifyOptions {
  CommonOptions common;
  int p = 3;
  int n = 10;
  std::int64_t replicates = 100000;
  bool json = false;  // shorthand for --format json
};

int run_verify(const VerifyOptions& opts) {
  const std::vector<covrisk::CheckResult> checks = covrisk::verify_ordering(
      opts.p, opts.n, opts.replicates, RngStream(opts.common.seed, kVerifyStream),
      opts.common.workers);
  bool all_passed = true;
  for (const covrisk::CheckResult& c : checks) all_passed &= c.passed();

  OutputTarget target(opts.common.output_path);
  if (opts.json || opts.common.format == "json") {
    nlohmann::json j{{"p", opts.p},
                     {"n", opts.n},
                     {"replicates", opts.replicates},
                     {"seed", opts.common.seed},
                     {"passed", all_passed},
                     {"checks", nlohmann::json::array()}};
    for (const covrisk::CheckResult& c : checks)
      j["checks"].push_back(nlohmann::json{
          {"name", c.name}, {"status", covrisk::to_string(c.status)}, {"detail", c.detail}});
    target.stream() << j.dump(2) << '\n';
  } else {
    for (const covrisk::CheckResult& c : checks) {
      char line[512];
      std::snprintf(line, sizeof(line), "[%-12s] %-36s %s\n", covrisk::to_string(c.status),
                    c.name.c_str(), c.detail.c_str());
      target.stream() << line;
    }
    target.stream() << (all_passed ? "all checks passed\n" : "NOT all checks passed\n");
  }
  return all_passed ? 0 : 1;
}

// ---------------------------------------------------------------------------
// decompose

struct DecomposeOptions {
  CommonOptions common;
  std::string input_path;
};

int run_decompose(const DecomposeOptions& opts) {
  covrisk::LoadedMatrix loaded = [&] {
    if (opts.input_path == "-") return covrisk::read_matrix(std::cin);
    std::ifstream in(opts.input_path);
    if (!in) throw covrisk::ParseError("cannot open matrix file: " + opts.input_path);
    return covrisk::read_matrix(in);
  }();
  if (loaded.max_asymmetry > 1e-8)
    std::cerr << "warning: input asymmetry " << loaded.max_asymmetry
              << " exceeds 1e-8; using the symmetric part\n";

  const covrisk::SpdMatrix a(loaded.matrix);  // not positive definite -> exit 1
  const covrisk::LowerTriangular factor = cholesky(a);
  const covrisk::IwasawaResult iw = iwasawa_full(a);
  const covrisk::EigenDecomposition ed = eigh(a);

  OutputTarget target(opts.common.output_path);
  std::ostream& out = target.stream();
  if (opts.common.format == "json") {
    nlohmann::json jfactor = nlohmann::json::array();
    for (int i = 0; i < a.dim(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (int j = 0; j < a.dim(); ++j) row.push_back(factor(i, j));
      jfactor.push_back(row);
    }
    nlohmann::json j{{"p", a.dim()},
                     {"max_asymmetry", loaded.max_asymmetry},
                     {"cholesky_factor", jfactor},
                     {"iwasawa_pivots", iw.pivots},
                     {"eigenvalues", ed.eigenvalues}};
    out << j.dump(2) << '\n';
  } else {
    out << "p " << a.dim() << "\n";
    out << "cholesky factor:\n";
    char buf[40];
    for (int i = 0; i < a.dim(); ++i) {
      for (int j = 0; j < a.dim(); ++j) {
        std::snprintf(buf, sizeof(buf), "%.12g", factor(i, j));
        out << (j == 0 ? "" : " ") << buf;
      }
      out << "\n";
    }
    out << "iwasawa pivots:";
    for (double v : iw.pivots) {
      std::snprintf(buf, sizeof(buf), "%.12g", v);
      out << ' ' << buf;
    }
    out << "\neigenvalues:";
    for (double v : ed.eigenvalues) {
      std::snprintf(buf, sizeof(buf), "%.12g", v);
      out << ' ' << buf;
    }
    out << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// sample

struct SampleOptions {
  CommonOptions common;
  int p = 0;
  int n = 0;
  int count = 1;
  std::string sigma_path;
};

int run_sample(const SampleOptions& opts) {
  std::optional<covrisk::SpdMatrix> sigma;
  if (!opts.sigma_path.empty()) {
    std::ifstream in(opts.sigma_path);
    if (!in) throw covrisk::ParseError("cannot open matrix file: " + opts.sigma_path);
    const covrisk::LoadedMatrix loaded = covrisk::read_matrix(in);
    if (loaded.max_asymmetry > 1e-8)
      std::cerr << "warning: sigma asymmetry " << loaded.max_asymmetry
                << " exceeds 1e-8; using the symmetric part\n";
    sigma = covrisk::SpdMatrix(loaded.matrix);
    if (sigma->dim() != opts.p) throw covrisk::DimensionMismatchError("--sigma dimension != --p");
  }
  RngStream rng(opts.common.seed, kSampleStream);

  OutputTarget target(opts.common.output_path);
  std::ostream& out = target.stream();
  nlohmann::json jdraws = nlohmann::json::array();
  for (int d = 0; d < opts.count; ++d) {
    const covrisk::WishartSample s = sigma ? sample_wishart(rng, *sigma, opts.n)
                                           : sample_wishart_identity(rng, opts.p, opts.n);
    if (opts.common.format == "json") {
      nlohmann::json m = nlohmann::json::array();
      for (int i = 0; i < opts.p; ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (int j = 0; j < opts.p; ++j) row.push_back(s.scatter(i, j));
        m.push_back(row);
      }
      jdraws.push_back(m);
    } else if (opts.common.format == "csv") {
      if (d == 0) out << "draw,i,j,value\n";
      for (int i = 0; i < opts.p; ++i)
        for (int j = 0; j < opts.p; ++j)
          out << d << ',' << i << ',' << j << ',' << fmt17(s.scatter(i, j)) << '\n';
    } else {
      if (d > 0) out << "\n";
      covrisk::write_matrix(out, s.scatter.matrix());
    }
  }
  if (opts.common.format == "json") {
    out << nlohmann::json{{"p", opts.p},
                          {"n", opts.n},
                          {"count", opts.count},
                          {"seed", opts.common.seed},
                          {"draws", jdraws}}
               .dump(2)
        << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------------------
// calibrate

struct CalibrateOptions {
  CommonOptions common;
  int p = 0;
  int n = 0;
  std::int64_t replicates = 100000;
};

int run_calibrate(const CalibrateOptions& opts) {
  const SpectralCalibration cal =
      covrisk::calibrate_spectrum(opts.p, opts.n, opts.replicates,
                                  RngStream(opts.common.seed, kCalibrationStream),
                                  opts.common.workers);
  OutputTarget target(opts.common.output_path);
  target.stream() << covrisk::calibration_to_json(cal).dump(2) << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// spectra

struct SpectraOptions {
  CommonOptions common;
  int p = 0;
  int n = 0;
  std::int64_t replicates = 400;
};

int run_spectra(const SpectraOptions& opts) {
  const covrisk::SpectralSummary s =
      covrisk::empirical_spectral_report(opts.p, opts.n, opts.replicates,
                                         RngStream(opts.common.seed, kSpectraStream),
                                         opts.common.workers);
  OutputTarget target(opts.common.output_path);
  std::ostream& out = target.stream();
  if (opts.common.format == "json") {
    out << nlohmann::json{{"p", s.p},
                          {"n", s.n},
                          {"y", s.y},
                          {"replicates", s.replicates},
                          {"seed", s.seed},
                          {"avg_log_mean", s.avg_log_mean},
                          {"avg_log_se", s.avg_log_se},
                          {"mp_reference", s.mp_reference},
                          {"log_min_mean", s.log_min_mean},
                          {"log_min_se", s.log_min_se},
                          {"edelman_min_reference", s.edelman_min_reference},
                          {"log_max_mean", s.log_max_mean},
                          {"log_max_se", s.log_max_se},
                          {"edelman_max_reference", s.edelman_max_reference},
                          {"finite_size_warning", s.finite_size_warning}}
               .dump(2)
        << '\n';
  } else if (opts.common.format == "csv") {
    out << "statistic,mc_mean,mc_se,reference\n";
    out << "avg_log," << fmt17(s.avg_log_mean) << ',' << fmt17(s.avg_log_se) << ','
        << fmt17(s.mp_reference) << '\n';
    out << "log_min," << fmt17(s.log_min_mean) << ',' << fmt17(s.log_min_se) << ','
        << fmt17(s.edelman_min_reference) << '\n';
    out << "log_max," << fmt17(s.log_max_mean) << ',' << fmt17(s.log_max_se) << ','
        << fmt17(s.edelman_max_reference) << '\n';
  } else {
    char line[256];
    std::snprintf(line, sizeof(line), "p=%d n=%d y=%.6g replicates=%lld seed=%llu\n", s.p, s.n,
                  s.y, static_cast<long long>(s.replicates),
                  static_cast<unsigned long long>(s.seed));
    out << line;
    std::snprintf(line, sizeof(line), "%-24s %12s %12s %12s\n", "statistic", "mc_mean", "mc_se",
                  "reference");
    out << line;
    std::snprintf(line, sizeof(line), "%-24s %12s %12s %12s\n", "avg log(l_i/n)",
                  fmt6(s.avg_log_mean).c_str(), fmt6(s.avg_log_se).c_str(),
                  fmt6(s.mp_reference).c_str());
    out << line;
    std::snprintf(line, sizeof(line), "%-24s %12s %12s %12s\n", "log(min l_i/n)",
                  fmt6(s.log_min_mean).c_str(), fmt6(s.log_min_se).c_str(),
                  fmt6(s.edelman_min_reference).c_str());
    out << line;
    std::snprintf(line, sizeof(line), "%-24s %12s %12s %12s\n", "log(max l_i/n)",
                  fmt6(s.log_max_mean).c_str(), fmt6(s.log_max_se).c_str(),
                  fmt6(s.edelman_max_reference).c_str());
    out << line;
    if (s.finite_size_warning)
      out << "warning: y at or near 1, asymptotic references carry large finite-size error\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"covariance-estimator risk laboratory"};
  app.require_subcommand(1);

  RiskTableOptions rt;
  CLI::App* rt_cmd = app.add_subcommand(
      "risk-table", "Monte Carlo and analytic risks for every estimator/loss pair");
  rt_cmd->add_option("--p", rt.p, "dimension")->required()->check(CLI::PositiveNumber);
  rt_cmd->add_option("--n", rt.n, "degrees of freedom (n >= p)")
      ->required()
      ->check(CLI::PositiveNumber);
  rt_cmd->add_option("--replicates", rt.replicates, "Monte Carlo replicates per cell")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  rt_cmd->add_option("--loss", rt.loss_filter, "restrict to one loss (stein|geodesic)");
  rt_cmd->add_option("--estimators", rt.estimator_names,
                     "comma-separated estimator subset (default: all)")
      ->delimiter(',');
  rt_cmd->add_option("--calibration", rt.calibration_path,
                     "calibration JSON produced by `covrisk calibrate` (skips recomputation)");
  rt_cmd->add_option("--calibration-replicates", rt.calibration_replicates,
                     "replicates for the internal calibration (default max(replicates, 10^4))");
  add_common(rt_cmd, &rt.common);

  VerifyOptions vf;
  CLI::App* vf_cmd =
      app.add_subcommand("verify", "run the full verification battery; exit 0 iff all pass");
  vf_cmd->add_option("--p", vf.p, "dimension")->capture_default_str();
  vf_cmd->add_option("--n", vf.n, "degrees of freedom")->capture_default_str();
  vf_cmd->add_option("--replicates", vf.replicates, "Monte Carlo replicates per check")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  vf_cmd->add_flag("--json", vf.json, "emit the machine-readable JSON verdict");
  add_common(vf_cmd, &vf.common);

  DecomposeOptions dc;
  CLI::App* dc_cmd = app.add_subcommand(
      "decompose", "print Cholesky factor, pivot diagonal and eigenvalues of a matrix file");
  dc_cmd->add_option("--input", dc.input_path, "matrix file (first line p, then p rows; - = stdin)")
      ->required();
  add_common(dc_cmd, &dc.common);

  SampleOptions sp;
  CLI::App* sp_cmd = app.add_subcommand("sample", "emit seeded Wishart draws");
  sp_cmd->add_option("--p", sp.p, "dimension")->required()->check(CLI::PositiveNumber);
  sp_cmd->add_option("--n", sp.n, "degrees of freedom")->required()->check(CLI::PositiveNumber);
  sp_cmd->add_option("--count", sp.count, "number of draws")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sp_cmd->add_option("--sigma", sp.sigma_path, "scale matrix file (default: identity)");
  add_common(sp_cmd, &sp.common);

  CalibrateOptions cb;
  CLI::App* cb_cmd = app.add_subcommand(
      "calibrate", "estimate E[l_i] and E[log l_i] for W(I, n) and write a calibration JSON");
  cb_cmd->add_option("--p", cb.p, "dimension")->required()->check(CLI::PositiveNumber);
  cb_cmd->add_option("--n", cb.n, "degrees of freedom")->required()->check(CLI::PositiveNumber);
  cb_cmd->add_option("--replicates", cb.replicates, "calibration replicates (>= 10^4)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  add_common(cb_cmd, &cb.common, /*with_format=*/false);

  SpectraOptions st;
  CLI::App* st_cmd = app.add_subcommand(
      "spectra", "empirical spectral statistics against their asymptotic references");
  st_cmd->add_option("--p", st.p, "dimension (>= 2)")->required()->check(CLI::PositiveNumber);
  st_cmd->add_option("--n", st.n, "degrees of freedom")->required()->check(CLI::PositiveNumber);
  st_cmd->add_option("--replicates", st.replicates, "Monte Carlo replicates")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  add_common(st_cmd, &st.common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (rt_cmd->parsed()) return run_risk_table(rt);
    if (vf_cmd->parsed()) return run_verify(vf);
    if (dc_cmd->parsed()) return run_decompose(dc);
    if (sp_cmd->parsed()) return run_sample(sp);
    if (cb_cmd->parsed()) return run_calibrate(cb);
    if (st_cmd->parsed()) return run_spectra(st);
  } catch (const covrisk::NotPositiveDefiniteError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const covrisk::NoConvergenceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const covrisk::Error& e) {
    // Domain, dimension, parse and calibration errors are usage errors.
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
