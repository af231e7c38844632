#include "geq/jet.hpp"

#include <cmath>

namespace geq {

using smallmat::matmul;

ScalarJet operator+(const ScalarJet& a, const ScalarJet& b) { return {a.v + b.v, a.d + b.d}; }
ScalarJet operator-(const ScalarJet& a, const ScalarJet& b) { return {a.v - b.v, a.d - b.d}; }
ScalarJet operator*(const ScalarJet& a, const ScalarJet& b) {
  return {a.v * b.v, b.v * a.d + a.v * b.d};
}
ScalarJet operator/(const ScalarJet& a, const ScalarJet& b) {
  const double q = a.v / b.v;
  return {q, (a.d - q * b.d) / b.v};
}
ScalarJet operator*(double s, const ScalarJet& a) { return {s * a.v, s * a.d}; }

ScalarJet signed_pow(const ScalarJet& a, double e) {
  const double m = std::pow(std::abs(a.v), e);
  const double v = a.v < 0 ? -m : m;
  // d(sign(a)|a|^e) = e |a|^(e-1) da
  return {v, (e * m / std::abs(a.v)) * a.d};
}

MatJet MatJet::constant(const Mat& v, int n) {
  MatJet j;
  j.v = v;
  j.d.assign(static_cast<std::size_t>(n), Mat::Zero(v.rows(), v.cols()));
  return j;
}

MatJet operator+(const MatJet& a, const MatJet& b) {
  MatJet r;
  r.v = a.v + b.v;
  r.d.resize(a.d.size());
  for (std::size_t k = 0; k < a.d.size(); ++k) r.d[k] = a.d[k] + b.d[k];
  return r;
}

MatJet operator-(const MatJet& a, const MatJet& b) {
  MatJet r;
  r.v = a.v - b.v;
  r.d.resize(a.d.size());
  for (std::size_t k = 0; k < a.d.size(); ++k) r.d[k] = a.d[k] - b.d[k];
  return r;
}

MatJet operator*(double s, const MatJet& a) {
  MatJet r;
  r.v = s * a.v;
  r.d.resize(a.d.size());
  for (std::size_t k = 0; k < a.d.size(); ++k) r.d[k] = s * a.d[k];
  return r;
}

MatJet operator*(const ScalarJet& s, const MatJet& a) {
  MatJet r;
  r.v = s.v * a.v;
  r.d.resize(a.d.size());
  for (std::size_t k = 0; k < a.d.size(); ++k)
    r.d[k] = s.d(static_cast<int>(k)) * a.v + s.v * a.d[k];
  return r;
}

MatJet operator*(const MatJet& a, const MatJet& b) {
  MatJet r;
  r.v = matmul(a.v, b.v);
  r.d.resize(a.d.size());
  for (std::size_t k = 0; k < a.d.size(); ++k) r.d[k] = matmul(a.d[k], b.v) + matmul(a.v, b.d[k]);
  return r;
}

MatJet transpose(const MatJet& a) {
  MatJet r;
  r.v = a.v.transpose();
  r.d.resize(a.d.size());
  for (std::size_t k = 0; k < a.d.size(); ++k) r.d[k] = a.d[k].transpose();
  return r;
}

MatJet inverse(const MatJet& a) {
  const Eigen::FullPivLU<Mat> lu(a.v);
  if (!lu.isInvertible()) throw Error(ErrorCode::InvalidInput, "inverse: singular matrix");
  MatJet r;
  r.v = lu.inverse();
  r.d.resize(a.d.size());
  for (std::size_t k = 0; k < a.d.size(); ++k) r.d[k] = -matmul(matmul(r.v, a.d[k]), r.v);
  return r;
}

ScalarJet det(const MatJet& a) {
  // Value by LU; derivative from det A = (-1)^n c_0, which stays valid for
  // singular A where Jacobi's formula would need the inverse.
  const auto coeffs = char_poly_coeffs(a);
  const double sign = (a.v.rows() % 2 == 0) ? 1.0 : -1.0;
  ScalarJet r = sign * coeffs.front();
  r.v = Eigen::FullPivLU<Mat>(a.v).determinant();
  return r;
}

ScalarJet trace(const MatJet& a) {
  ScalarJet r{a.v.trace(), Vec(a.dim())};
  for (int k = 0; k < a.dim(); ++k) r.d(k) = a.d[static_cast<std::size_t>(k)].trace();
  return r;
}

MatJet symmetrize(const MatJet& a) { return 0.5 * (a + transpose(a)); }

std::vector<ScalarJet> char_poly_coeffs(const MatJet& a) {
  const auto cp = smallmat::char_poly_jet(a.v, a.d);
  std::vector<ScalarJet> out(cp.poly.coeffs.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].v = cp.poly.coeffs[i];
    out[i].d = Vec(a.dim());
    for (int k = 0; k < a.dim(); ++k) out[i].d(k) = cp.dcoeffs[static_cast<std::size_t>(k)][i];
  }
  return out;
}

MatJet poly_apply(const std::vector<ScalarJet>& coeffs, const MatJet& a) {
  const int n = a.dim();
  const int size = static_cast<int>(a.v.rows());
  MatJet r = MatJet::identity(size, n);
  const MatJet id = MatJet::identity(size, n);
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) r = r * a + (*it) * id;
  return r;
}

MatJet embed(const MatJet& a, int n, int offset) {
  MatJet r = MatJet::constant(a.v, n);
  for (int k = 0; k < a.dim(); ++k) r.d[static_cast<std::size_t>(offset + k)] = a.d[static_cast<std::size_t>(k)];
  return r;
}

MatJet block_diag(const MatJet& a, const MatJet& b) {
  const auto r1 = a.v.rows(), c1 = a.v.cols(), r2 = b.v.rows(), c2 = b.v.cols();
  auto place = [&](const Mat& x, const Mat& y) {
    Mat m = Mat::Zero(r1 + r2, c1 + c2);
    m.topLeftCorner(r1, c1) = x;
    m.bottomRightCorner(r2, c2) = y;
    return m;
  };
  MatJet r;
  r.v = place(a.v, b.v);
  r.d.resize(a.d.size());
  for (std::size_t k = 0; k < a.d.size(); ++k) r.d[k] = place(a.d[k], b.d[k]);
  return r;
}

}  // namespace geq
