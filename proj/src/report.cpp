#include "geq/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>

namespace geq::cli {

Ladder Ladder::from_env() {
  const char* env = std::getenv("GEQ_TOL_SCALE");
  if (env == nullptr || *env == '\0') return {};
  char* end = nullptr;
  const double f = std::strtod(env, &end);
  if (end == env || *end != '\0' || !(f > 0.0) || !std::isfinite(f))
    throw Error(ErrorCode::InvalidInput, std::string("GEQ_TOL_SCALE must be a positive number, got '") + env + "'");
  return Ladder{}.scaled(f);
}

Json stats(const std::vector<double>& values, double tolerance) {
  Json j;
  j["count"] = values.size();
  j["tolerance"] = tolerance;
  if (values.empty()) {
    j["max"] = 0.0;
    j["mean"] = 0.0;
    j["p50"] = 0.0;
    j["p90"] = 0.0;
    j["pass"] = true;
    return j;
  }
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  auto quantile = [&](double q) {
    const auto idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(sorted.size()))) - 1;
    return sorted[std::min(idx, sorted.size() - 1)];
  };
  const double max = sorted.back();
  j["max"] = max;
  j["mean"] = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  j["p50"] = quantile(0.5);
  j["p90"] = quantile(0.9);
  j["pass"] = std::isfinite(max) && max <= tolerance;
  return j;
}

Json to_json(const Mat& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(row);
  }
  return rows;
}

Json to_json(const Vec& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Json to_json(Complex z) { return Json::array({z.real(), z.imag()}); }

Json to_json(const Spectrum& s) {
  Json a = Json::array();
  for (const auto& e : s.values) {
    Json j;
    j["re"] = e.value.real();
    j["im"] = e.value.imag();
    j["multiplicity"] = e.multiplicity;
    a.push_back(j);
  }
  return a;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace geq::cli
