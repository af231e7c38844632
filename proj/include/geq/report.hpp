#pragma once

// JSON report building blocks: residual statistics, the tolerance ladder and
// deterministic serialisation (sorted keys, shortest round-trip floats).

#include <string>
#include <vector>

#include <json.hpp>

#include "geq/core.hpp"
#include "geq/fields.hpp"
#include "geq/smallmat.hpp"

namespace geq::cli {

using Json = nlohmann::json;

/// Tolerances for residuals with exact derivatives, pointwise algebraic
/// identities, Nijenhuis torsion with exact derivatives, and quantities with
/// one or two finite difference layers. GEQ_TOL_SCALE scales all of them.
struct Ladder {
  double exact = 1e-9;
  double algebraic = 1e-8;
  double nijenhuis = 1e-6;
  double fd1 = 1e-5;
  double fd2 = 1e-4;

  static Ladder from_env();
  Ladder scaled(double f) const { return {exact * f, algebraic * f, nijenhuis * f, fd1 * f, fd2 * f}; }
  double for_derivative(Derivative d) const { return d == Derivative::Exact ? exact : fd1; }
};

/// {count, max, mean, p50, p90, tolerance, pass}; pass when max <= tolerance.
Json stats(const std::vector<double>& values, double tolerance);

Json to_json(const Mat& m);
Json to_json(const Vec& v);
Json to_json(const Spectrum& s);
Json to_json(Complex z);

/// Two-space indented JSON with a trailing newline.
std::string dump(const Json& j);

}  // namespace geq::cli
