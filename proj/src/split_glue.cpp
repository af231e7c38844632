#include <cmath>

#include "geq/equiv.hpp"

namespace geq::equiv {
namespace {

using smallmat::matmul;

void require_nonzero_at_zero(const MonicPoly& chi, double scale, const Point& p) {
  if (!(std::abs(chi.at_zero()) > 1e-12 * (1.0 + scale))) {
    throw Error(ErrorCode::ZeroChiAtZero, "split: chi_i(0) = 0, L is singular; shift L by c Id", p);
  }
}

Mat checked_symmetric(const Mat& m, const char* what, const Point& p) {
  if ((m - m.transpose()).norm() > 1e-8 * (1.0 + m.norm())) {
    throw Error(ErrorCode::NonSymmetricResult, std::string(what) + ": result is not symmetric", p);
  }
  return 0.5 * (m + m.transpose());
}

// Sub-jet on rows/cols idx with partials only in the coordinates idx.
MatJet restrict(const MatJet& j, const std::vector<int>& idx) {
  const int k = static_cast<int>(idx.size());
  MatJet out;
  out.v = Mat(k, k);
  out.d.assign(static_cast<std::size_t>(k), Mat(k, k));
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b) {
      out.v(a, b) = j.v(idx[static_cast<std::size_t>(a)], idx[static_cast<std::size_t>(b)]);
      for (int c = 0; c < k; ++c)
        out.d[static_cast<std::size_t>(c)](a, b) =
            j.d[static_cast<std::size_t>(idx[static_cast<std::size_t>(c)])](idx[static_cast<std::size_t>(a)],
                                                                           idx[static_cast<std::size_t>(b)]);
    }
  return out;
}

std::vector<int> range(int from, int to) {
  std::vector<int> v;
  for (int i = from; i < to; ++i) v.push_back(i);
  return v;
}

}  // namespace

SplitResult split(const MetricField& g, const MetricField& gbar, const FactorizationResult& fact) {
  SplitResult out;
  out.factorization = fact;
  out.flipped = compute_L(g.value(g.chart().base), gbar.value(g.chart().base)).flipped;
  const Chart& chart = g.chart();
  out.h = MetricField(MatrixField::from_closure(chart, [g, gbar, fact](const Point& p) {
    const LValue lv = compute_L(g.value(p), gbar.value(p), p);
    const auto [chi1, chi2] = fact.chis_at(p);
    require_nonzero_at_zero(chi1, lv.L.norm(), p);
    require_nonzero_at_zero(chi2, lv.L.norm(), p);
    const Mat ge = lv.flipped ? Mat(-g.value(p)) : g.value(p);
    const Mat m = chi2(lv.L) + chi1(lv.L);
    return checked_symmetric(matmul(ge, Eigen::FullPivLU<Mat>(m).inverse()), "split h", p);
  }));
  out.hbar = MetricField(MatrixField::from_closure(chart, [g, gbar, fact](const Point& p) {
    const Mat gb = gbar.value(p);
    const LValue lv = compute_L(g.value(p), gb, p);
    const auto [chi1, chi2] = fact.chis_at(p);
    require_nonzero_at_zero(chi1, lv.L.norm(), p);
    require_nonzero_at_zero(chi2, lv.L.norm(), p);
    const Mat m = chi2(lv.L) / chi2.at_zero() + chi1(lv.L) / chi1.at_zero();
    return checked_symmetric(matmul(gb, Eigen::FullPivLU<Mat>(m).inverse()), "split hbar", p);
  }));
  std::tie(out.P1, out.P2) = projectors(fact);
  return out;
}

SplitDiagnostics split_diagnostics(const MetricField& g, const MetricField& gbar, const SplitResult& s,
                                   const Point& p) {
  SplitDiagnostics d;
  const int n = g.dim();
  const auto [p1, p2] = s.factorization.projectors_at(p);
  const Mat gv = g.value(p), gbv = gbar.value(p);
  d.orthogonality = std::max((p1.transpose() * gv * p2).norm() / gv.norm(),
                             (p1.transpose() * gbv * p2).norm() / gbv.norm());
  d.partition = (p1 + p2 - Mat::Identity(n, n)).norm();

  const MatJet pj = s.P1.jet(p);
  d.nabla_h_P1 = covariant_derivative_op(s.h.jet(p), pj).norm();
  d.nabla_hbar_P1 = covariant_derivative_op(s.hbar.jet(p), pj).norm();

  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      Vec br = Vec::Zero(n);
      for (int sidx = 0; sidx < n; ++sidx) {
        const Mat& ds = pj.d[static_cast<std::size_t>(sidx)];
        br += pj.v(sidx, i) * ds.col(j) - pj.v(sidx, j) * ds.col(i);
      }
      d.bracket = std::max(d.bracket, (p2 * br).norm());
    }

  const Mat lp = s.factorization.L().value(p);
  const auto [chi1, chi2] = s.factorization.chis_at(p);
  auto restricted_error = [&](const Mat& proj, const MonicPoly& chi) {
    const Eigen::ColPivHouseholderQR<Mat> qr(proj);
    const Mat q = Mat(qr.householderQ()).leftCols(chi.degree());
    const MonicPoly cp = smallmat::char_poly(q.transpose() * lp * q);
    double err = 0.0;
    for (int k = 0; k < chi.degree(); ++k)
      err = std::max(err, std::abs(cp.coeffs[static_cast<std::size_t>(k)] - chi.coeffs[static_cast<std::size_t>(k)]));
    return err;
  };
  d.charpoly1 = restricted_error(p1, chi1);
  d.charpoly2 = restricted_error(p2, chi2);
  return d;
}

int partner_sign(const Mat& h, const Mat& hbar, const Mat& L, const std::optional<Point>& where) {
  const int k = static_cast<int>(h.rows());
  const double dl = Eigen::FullPivLU<Mat>(L).determinant();
  const Mat m = dl * matmul(Eigen::FullPivLU<Mat>(h).solve(hbar), L);
  const int s = m.trace() >= 0 ? 1 : -1;
  if ((m - s * Mat::Identity(k, k)).norm() > 1e-6 * (1.0 + m.norm())) {
    throw Error(ErrorCode::NotAdapted, "glue: L_i is not the operator of the pair (h_i, hbar_i)", where);
  }
  return s;
}

namespace {

struct GlueParts {
  MatJet h1, hb1, L1, h2, hb2, L2;
};

std::pair<MatJet, MatJet> glue_jets(const GlueParts& in, const std::optional<Point>& where) {
  const int n = static_cast<int>(in.h1.v.rows() + in.h2.v.rows());
  const auto ev1 = smallmat::eigenvalues(in.L1.v);
  const auto ev2 = smallmat::eigenvalues(in.L2.v);
  const double scale = 1.0 + in.L1.v.norm() + in.L2.v.norm();
  for (const auto& a : ev1)
    for (const auto& b : ev2)
      if (std::abs(a - b) <= 1e-8 * scale)
        throw Error(ErrorCode::SpectraOverlap, "glue: spectra of L1 and L2 intersect", where);

  const auto chi1 = char_poly_coeffs(in.L1);
  const auto chi2 = char_poly_coeffs(in.L2);
  const ScalarJet& chi1_0 = chi1.front();
  const ScalarJet& chi2_0 = chi2.front();
  if (!(std::abs(chi1_0.v) > 1e-12 * scale) || !(std::abs(chi2_0.v) > 1e-12 * scale))
    throw Error(ErrorCode::ZeroChiAtZero, "glue: some L_i is singular; shift it by c Id", where);

  // Second block sign (-1)^n s1 s2, from the partner signs of the factors.
  const int eps = ((n % 2 == 0) ? 1 : -1) * partner_sign(in.h1.v, in.hb1.v, in.L1.v, where) *
                  partner_sign(in.h2.v, in.hb2.v, in.L2.v, where);

  const MatJet a = poly_apply(chi2, in.L1);
  const MatJet b = poly_apply(chi1, in.L2);
  const int dims = in.h1.dim();
  const ScalarJet one = ScalarJet::constant(1.0, dims);
  const MatJet g = block_diag(in.h1 * a, in.h2 * b);
  const MatJet gbar = block_diag((one / chi2_0) * (in.hb1 * a), (static_cast<double>(eps) * one / chi1_0) * (in.hb2 * b));
  return {symmetrize(g), symmetrize(gbar)};
}

}  // namespace

std::pair<Mat, Mat> glue_pointwise(const Mat& h1, const Mat& hbar1, const Mat& L1, const Mat& h2,
                                   const Mat& hbar2, const Mat& L2, const std::optional<Point>& where) {
  const GlueParts parts{MatJet::constant(h1, 0), MatJet::constant(hbar1, 0), MatJet::constant(L1, 0),
                        MatJet::constant(h2, 0), MatJet::constant(hbar2, 0), MatJet::constant(L2, 0)};
  const auto [g, gbar] = glue_jets(parts, where);
  return {g.v, gbar.v};
}

GlueResult glue(const GlueInput& in) {
  const Chart chart = Chart::product(in.h1.chart(), in.h2.chart());
  const int n1 = in.h1.dim();
  const int n = chart.dim;
  if (in.hbar1.dim() != n1 || in.hbar2.dim() != in.h2.dim())
    throw Error(ErrorCode::InvalidInput, "glue: factor metrics of different dimension");

  auto exact = [](const MatrixField& f) { return f.derivative() == Derivative::Exact; };
  const bool all_exact = exact(in.h1) && exact(in.hbar1) && exact(in.h2) && exact(in.hbar2) &&
                         (!in.L1 || exact(*in.L1)) && (!in.L2 || exact(*in.L2));

  auto parts = [in, n1, n](const Point& p, bool partials) {
    const Point x1 = p.head(n1), x2 = p.tail(n - n1);
    auto get = [&](const MatrixField& f, const Point& x, int offset) {
      return partials ? embed(f.jet(x), n, offset) : MatJet::constant(f.value(x), n);
    };
    GlueParts gp;
    gp.h1 = get(in.h1, x1, 0);
    gp.hb1 = get(in.hbar1, x1, 0);
    gp.h2 = get(in.h2, x2, n1);
    gp.hb2 = get(in.hbar2, x2, n1);
    gp.L1 = in.L1 ? get(*in.L1, x1, 0) : compute_L(gp.h1, gp.hb1, p).L;
    gp.L2 = in.L2 ? get(*in.L2, x2, n1) : compute_L(gp.h2, gp.hb2, p).L;
    return gp;
  };

  GlueResult out;
  out.chart = chart;
  if (all_exact) {
    out.g = MetricField(MatrixField::from_jet(chart, [parts](const Point& p) { return glue_jets(parts(p, true), p).first; }));
    out.gbar = MetricField(MatrixField::from_jet(chart, [parts](const Point& p) { return glue_jets(parts(p, true), p).second; }));
  } else {
    out.g = MetricField(MatrixField::from_closure(chart, [parts](const Point& p) { return glue_jets(parts(p, false), p).first.v; }));
    out.gbar = MetricField(MatrixField::from_closure(chart, [parts](const Point& p) { return glue_jets(parts(p, false), p).second.v; }));
  }
  return out;
}

BlockResiduals block_condition_residuals(const MatJet& g, const MatJet& L, int n1) {
  const int n = static_cast<int>(g.v.rows());
  const int n2 = n - n1;
  if (n1 < 1 || n2 < 1) throw Error(ErrorCode::InvalidInput, "block conditions: empty block");
  const double off = g.v.topRightCorner(n1, n2).norm() + L.v.topRightCorner(n1, n2).norm() +
                     L.v.bottomLeftCorner(n2, n1).norm();
  if (off > 1e-9 * (1.0 + g.v.norm() + L.v.norm()))
    throw Error(ErrorCode::NotAdapted, "block conditions: inputs are not block diagonal");

  BlockResiduals out;
  const auto x = range(0, n1);
  out.c1 = compatibility_residual(restrict(g, x), restrict(L, x)).value;

  const Mat g1 = g.v.topLeftCorner(n1, n1), g2 = g.v.bottomRightCorner(n2, n2);
  const Mat L1 = L.v.topLeftCorner(n1, n1), L2 = L.v.bottomRightCorner(n2, n2);
  const Eigen::FullPivLU<Mat> g1lu(g1), g2lu(g2);
  std::vector<Mat> a(static_cast<std::size_t>(n2));
  Vec dtr2(n2);
  for (int al = 0; al < n2; ++al) {
    const Mat& d = g.d[static_cast<std::size_t>(n1 + al)];
    a[static_cast<std::size_t>(al)] = g1lu.solve(Mat(d.topLeftCorner(n1, n1)));
    dtr2(al) = L.d[static_cast<std::size_t>(n1 + al)].bottomRightCorner(n2, n2).trace();
  }
  for (int k = 0; k < n1; ++k) {
    Mat xk(n1, n2);
    for (int j = 0; j < n1; ++j)
      for (int al = 0; al < n2; ++al) xk(j, al) = a[static_cast<std::size_t>(al)](j, k);
    Mat e = xk * L2 - L1 * xk;
    e.row(k) -= dtr2.transpose();
    out.c2 = std::max(out.c2, e.norm());
  }
  for (int k = 0; k < n1; ++k) {
    const Mat& d = g.d[static_cast<std::size_t>(k)];
    const Mat b = g2lu.solve(Mat(d.bottomRightCorner(n2, n2)));
    out.c3 = std::max(out.c3, (b * L2 - L2 * b).norm());
  }
  return out;
}

std::vector<Factor> full_decompose(const MetricField& g, const MetricField& gbar,
                                   const std::vector<Point>& samples) {
  const OperatorField L = L_field(g, gbar);
  const Spectrum spectrum = smallmat::eigen(L.value(g.chart().base));
  const auto clusters = eigenvalue_clusters(spectrum);
  std::vector<Factor> out;
  if (clusters.size() == 1) {
    Factor f;
    f.dim = g.dim();
    f.eigenvalues = spectrum.expanded();
    f.h = g;
    f.hbar = gbar;
    f.coordinates = range(0, g.dim());
    out.push_back(std::move(f));
    return out;
  }
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    Grouping grp;
    for (std::size_t o = 0; o < clusters.size(); ++o)
      for (int idx : clusters[o]) (o == c ? grp.group1 : grp.group2).push_back(idx);
    Factor f;
    for (int idx : clusters[c])
      for (int m = 0; m < spectrum.values[static_cast<std::size_t>(idx)].multiplicity; ++m)
        f.eigenvalues.push_back(spectrum.values[static_cast<std::size_t>(idx)].value);
    f.dim = static_cast<int>(f.eigenvalues.size());
    f.split = split(g, gbar, admissible_factorization(L, grp, samples));
    f.h = f.split->h;
    f.hbar = f.split->hbar;
    // Adapted when P1 is a constant coordinate projection at the base point.
    const Mat p1 = f.split->factorization.projectors_at(g.chart().base).first;
    Mat rounded = Mat::Zero(g.dim(), g.dim());
    for (int i = 0; i < g.dim(); ++i) rounded(i, i) = std::round(p1(i, i));
    if ((p1 - rounded).norm() <= 1e-8) {
      for (int i = 0; i < g.dim(); ++i)
        if (rounded(i, i) == 1.0) f.coordinates.push_back(i);
    }
    out.push_back(std::move(f));
  }
  return out;
}

double factor_residual(const Factor& f, const Point& p) {
  if (f.coordinates.empty()) throw Error(ErrorCode::NotAdapted, "factor: coordinates are not adapted", p);
  const MatJet h = restrict(f.h.jet(p), f.coordinates);
  const MatJet hb = restrict(f.hbar.jet(p), f.coordinates);
  return compatibility_residual(h, compute_L(h, hb, p).L).value;
}

}  // namespace geq::equiv
