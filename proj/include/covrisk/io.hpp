#pragma once

#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "covrisk/errors.hpp"
#include "covrisk/estimators.hpp"
#include "covrisk/matrix.hpp"
#include "covrisk/version.hpp"

namespace covrisk {

// Matrix text format: first line is p, then p rows of p whitespace-separated
// decimals. Readers take the symmetric part (M + M')/2; max_asymmetry lets
// callers warn when the input was meaningfully asymmetric.
struct LoadedMatrix {
  Matrix matrix;
  double max_asymmetry = 0.0;
};

inline LoadedMatrix read_matrix(std::istream& in) {
  int p = 0;
  if (!(in >> p) || p < 1) throw ParseError("matrix file: expected a positive dimension");
  if (p > 10000) throw ParseError("matrix file: dimension implausibly large");
  Matrix m(p, p);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) {
      double x = 0.0;
      if (!(in >> x))
        throw ParseError("matrix file: expected " + std::to_string(p * p) +
                         " entries after the dimension");
      if (!std::isfinite(x)) throw ParseError("matrix file: non-finite entry");
      m(i, j) = x;
    }
  }
  LoadedMatrix loaded{std::move(m), 0.0};
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < i; ++j)
      loaded.max_asymmetry =
          std::max(loaded.max_asymmetry, std::abs(loaded.matrix(i, j) - loaded.matrix(j, i)));
  return loaded;
}

inline void write_matrix(std::ostream& out, const Matrix& m) {
  out << m.rows() << "\n";
  char buf[32];
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
      out << (j == 0 ? "" : " ") << buf;
    }
    out << "\n";
  }
}

inline constexpr int kCalibrationFormatVersion = 1;

inline nlohmann::json calibration_to_json(const SpectralCalibration& cal) {
  return nlohmann::json{{"format_version", kCalibrationFormatVersion},
                        {"tool_version", kVersion},
                        {"p", cal.p},
                        {"n", cal.n},
                        {"replicates", cal.replicates},
                        {"seed", cal.seed},
                        {"mean_eigs", cal.mean_eigs},
                        {"se_mean_eigs", cal.se_mean_eigs},
                        {"mean_log_eigs", cal.mean_log_eigs},
                        {"se_mean_log_eigs", cal.se_mean_log_eigs}};
}

inline SpectralCalibration calibration_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format_version").get<int>() != kCalibrationFormatVersion)
      throw ParseError("calibration file: unsupported format_version");
    SpectralCalibration cal;
    cal.p = j.at("p").get<int>();
    cal.n = j.at("n").get<int>();
    cal.replicates = j.at("replicates").get<std::int64_t>();
    cal.seed = j.at("seed").get<std::uint64_t>();
    cal.mean_eigs = j.at("mean_eigs").get<std::vector<double>>();
    cal.se_mean_eigs = j.at("se_mean_eigs").get<std::vector<double>>();
    cal.mean_log_eigs = j.at("mean_log_eigs").get<std::vector<double>>();
    cal.se_mean_log_eigs = j.at("se_mean_log_eigs").get<std::vector<double>>();
    if (static_cast<int>(cal.mean_eigs.size()) != cal.p ||
        static_cast<int>(cal.mean_log_eigs.size()) != cal.p)
      throw ParseError("calibration file: vector lengths do not match p");
    return cal;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("calibration file: ") + e.what());
  }
}

// Loads a calibration and refuses one computed for a different (p, n).
inline SpectralCalibration load_calibration(std::istream& in, int p, int n) {
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("calibration file: ") + e.what());
  }
  SpectralCalibration cal = calibration_from_json(j);
  if (cal.p != p || cal.n != n)
    throw DimensionMismatchError("calibration file is for (p=" + std::to_string(cal.p) +
                                 ", n=" + std::to_string(cal.n) + "), requested (p=" +
                                 std::to_string(p) + ", n=" + std::to_string(n) + ")");
  return cal;
}

}  // namespace covrisk
