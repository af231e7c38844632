#pragma once

// First-order jets: a value together with its partial derivatives in every
// chart coordinate. Closed-form fields propagate exact jets through the
// algebra below (products, inverses, determinants, real roots, polynomial
// evaluation), so derived quantities such as L(g, gbar) stay dual-exact.

#include <vector>

#include "geq/core.hpp"
#include "geq/smallmat.hpp"

namespace geq {

struct ScalarJet {
  double v = 0.0;
  Vec d;  // d(k) = partial in coordinate k

  static ScalarJet constant(double v, int n) { return {v, Vec::Zero(n)}; }
};

ScalarJet operator+(const ScalarJet& a, const ScalarJet& b);
ScalarJet operator-(const ScalarJet& a, const ScalarJet& b);
ScalarJet operator*(const ScalarJet& a, const ScalarJet& b);
ScalarJet operator/(const ScalarJet& a, const ScalarJet& b);
ScalarJet operator*(double s, const ScalarJet& a);
/// sign(a) * |a|^e; a must be nonzero.
ScalarJet signed_pow(const ScalarJet& a, double e);

struct MatJet {
  Mat v;
  std::vector<Mat> d;  // d[k] = partial in coordinate k

  int dim() const { return static_cast<int>(d.size()); }
  static MatJet constant(const Mat& v, int n);
  static MatJet identity(int size, int n) { return constant(Mat::Identity(size, size), n); }
};

MatJet operator+(const MatJet& a, const MatJet& b);
MatJet operator-(const MatJet& a, const MatJet& b);
MatJet operator*(double s, const MatJet& a);
MatJet operator*(const ScalarJet& s, const MatJet& a);
MatJet operator*(const MatJet& a, const MatJet& b);
MatJet transpose(const MatJet& a);
/// Throws InvalidInput on a singular value; callers report domain errors first.
MatJet inverse(const MatJet& a);
ScalarJet det(const MatJet& a);
ScalarJet trace(const MatJet& a);
/// 0.5 * (a + a^T)
MatJet symmetrize(const MatJet& a);

/// Coefficients c_0..c_{d-1} of det(t Id - A) as jets (monic, leading term implicit).
std::vector<ScalarJet> char_poly_coeffs(const MatJet& a);
/// p(A) for the monic polynomial with jet coefficients.
MatJet poly_apply(const std::vector<ScalarJet>& coeffs, const MatJet& a);

/// Reinterprets a jet over k coordinates as one over n coordinates, the
/// original coordinates occupying [offset, offset + k).
MatJet embed(const MatJet& a, int n, int offset);
MatJet block_diag(const MatJet& a, const MatJet& b);

}  // namespace geq
