#include <cmath>

#include "geq/equiv.hpp"

namespace geq::equiv {
namespace {

double checked_det(const Mat& m, const char* what, const std::optional<Point>& where) {
  const double d = Eigen::FullPivLU<Mat>(m).determinant();
  if (!(std::abs(d) > 1e-10)) {
    throw Error(ErrorCode::DegenerateMetric, std::string(what) + ": degenerate metric", where);
  }
  return d;
}

void require_same_shape(const Mat& g, const Mat& gbar) {
  if (g.rows() != g.cols() || gbar.rows() != g.rows() || gbar.cols() != g.cols())
    throw Error(ErrorCode::InvalidInput, "compute_L: metrics of different shape");
}

void require_invertible_L(const Mat& L, const std::optional<Point>& where) {
  const double d = Eigen::FullPivLU<Mat>(L).determinant();
  if (!(std::abs(d) > 1e-12 * (1.0 + std::pow(L.norm(), static_cast<double>(L.rows()))))) {
    throw Error(ErrorCode::SingularL, "reconstruct_gbar: L is singular; shift it by c Id", where);
  }
}

}  // namespace

LValue compute_L(const Mat& g, const Mat& gbar, const std::optional<Point>& where) {
  require_same_shape(g, gbar);
  const int n = static_cast<int>(g.rows());
  double ratio = checked_det(gbar, "compute_L", where) / checked_det(g, "compute_L", where);
  LValue out;
  Mat ge = g;
  if (ratio < 0 && (n + 1) % 2 == 0) {
    ge = -g;
    ratio = -ratio;
    out.flipped = true;
  }
  const double root = std::pow(std::abs(ratio), 1.0 / (n + 1));
  const double rho = ratio < 0 ? -root : root;
  out.L = rho * Eigen::FullPivLU<Mat>(gbar).solve(ge);
  return out;
}

LJet compute_L(const MatJet& g, const MatJet& gbar, const std::optional<Point>& where) {
  require_same_shape(g.v, gbar.v);
  const int n = static_cast<int>(g.v.rows());
  checked_det(g.v, "compute_L", where);
  checked_det(gbar.v, "compute_L", where);
  LJet out;
  MatJet ge = g;
  ScalarJet ratio = det(gbar) / det(g);
  if (ratio.v < 0 && (n + 1) % 2 == 0) {
    ge = -1.0 * g;
    ratio = -1.0 * ratio;
    out.flipped = true;
  }
  const ScalarJet rho = signed_pow(ratio, 1.0 / (n + 1));
  out.L = rho * (inverse(gbar) * ge);
  return out;
}

OperatorField L_field(const MetricField& g, const MetricField& gbar) {
  if (g.derivative() == Derivative::Exact && gbar.derivative() == Derivative::Exact) {
    return OperatorField(MatrixField::from_jet(
        g.chart(), [g, gbar](const Point& p) { return compute_L(g.jet(p), gbar.jet(p), p).L; }));
  }
  return OperatorField(MatrixField::from_closure(
      g.chart(), [g, gbar](const Point& p) { return compute_L(g.value(p), gbar.value(p), p).L; }));
}


Mat reconstruct_gbar(const Mat& g, const Mat& L, const std::optional<Point>& where) {
  require_invertible_L(L, where);
  const Eigen::FullPivLU<Mat> lu(L);
  const Mat out = smallmat::matmul(g, lu.inverse()) / lu.determinant();
  return 0.5 * (out + out.transpose());
}

MetricField reconstruct_gbar(const MetricField& g, const OperatorField& L) {
  if (g.derivative() == Derivative::Exact && L.derivative() == Derivative::Exact) {
    return MetricField(MatrixField::from_jet(g.chart(), [g, L](const Point& p) {
      const MatJet lj = L.jet(p);
      require_invertible_L(lj.v, p);
      const ScalarJet one = ScalarJet::constant(1.0, lj.dim());
      return symmetrize((one / det(lj)) * (g.jet(p) * inverse(lj)));
    }));
  }
  return MetricField(MatrixField::from_closure(
      g.chart(), [g, L](const Point& p) { return reconstruct_gbar(g.value(p), L.value(p), p); }));
}

double nondegenerate_shift(const Mat& L) { return 1.0 + L.norm(); }

Residual compatibility_residual(const MatJet& g, const MatJet& L) {
  const int n = static_cast<int>(g.v.rows());
  Residual out;
  out.R = covariant_derivative_op(g, L);
  const Mat ginv = Eigen::FullPivLU<Mat>(g.v).inverse();
  Vec l(n);
  for (int k = 0; k < n; ++k) l(k) = L.d[static_cast<std::size_t>(k)].trace();
  const Vec gl = ginv * l;
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q)
      for (int r = 0; r < n; ++r) out.R(p, q, r) -= 0.5 * ((p == r ? l(q) : 0.0) + gl(p) * g.v(r, q));
  out.value = out.R.norm() / (1.0 + partials_norm(L));
  return out;
}

Residual compatibility_residual(const MetricField& g, const OperatorField& L, const Point& p) {
  return compatibility_residual(g.jet(p), L.jet(p));
}

double nijenhuis_residual(const MatJet& L) { return nijenhuis(L).norm() / (1.0 + partials_norm(L)); }

std::pair<Vec, double> charpoly_differential_residual(const OperatorField& L, double t, const Point& p) {
  const int n = static_cast<int>(p.size());
  const MatJet lj = L.jet(p);
  const double chi = smallmat::char_poly(lj.v)(t);
  Vec dchi(n), l(n);
  for (int k = 0; k < n; ++k) {
    const double h = fd_step(p(k));
    Point a = p, b = p;
    a(k) += h;
    b(k) -= h;
    dchi(k) = (smallmat::char_poly(L.value(a))(t) - smallmat::char_poly(L.value(b))(t)) / (a(k) - b(k));
    l(k) = lj.d[static_cast<std::size_t>(k)].trace();
  }
  const Vec r = lj.v.transpose() * dchi - t * dchi - chi * l;
  return {r, chi};
}

Mat projective_deformation(const VectorField& v, const MetricField& g, const Point& p) {
  const MatJet gj = g.jet(p);
  const int n = static_cast<int>(gj.v.rows());
  const Mat a = Eigen::FullPivLU<Mat>(gj.v).solve(lie_derivative_metric(v.value(p), v.jacobian(p), gj));
  return a - (a.trace() / (n + 1)) * Mat::Identity(n, n);
}

OperatorField projective_deformation(const VectorField& v, const MetricField& g) {
  return OperatorField(
      MatrixField::from_closure(g.chart(), [v, g](const Point& p) { return projective_deformation(v, g, p); }));
}

}  // namespace geq::equiv
