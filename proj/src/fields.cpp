#include "geq/fields.hpp"

#include <cmath>

namespace geq {

Chart::Chart(Vec lo_, Vec hi_, Point base_) : lo(std::move(lo_)), hi(std::move(hi_)), base(std::move(base_)) {
  dim = static_cast<int>(lo.size());
  require_dim(dim, "chart");
  if (hi.size() != dim || base.size() != dim)
    throw Error(ErrorCode::InvalidInput, "chart: box and base point dimensions differ");
  for (int i = 0; i < dim; ++i) {
    if (!(lo(i) < hi(i)))
      throw Error(ErrorCode::InvalidInput, "chart: empty interval for x" + std::to_string(i));
  }
  if (!contains(base)) throw Error(ErrorCode::InvalidInput, "chart: base point outside the box", base);
}

bool Chart::contains(const Point& p) const {
  for (int i = 0; i < dim; ++i) {
    if (!(p(i) >= lo(i) && p(i) <= hi(i))) return false;
  }
  return true;
}

Chart Chart::product(const Chart& a, const Chart& b) {
  const int n = a.dim + b.dim;
  require_dim(n, "product chart");
  Vec lo(n), hi(n);
  Point base(n);
  lo << a.lo, b.lo;
  hi << a.hi, b.hi;
  base << a.base, b.base;
  return Chart(lo, hi, base);
}

std::uint64_t SplitMix64::next() {
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double SplitMix64::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

std::vector<Point> sample_points(const Chart& chart, int count, std::uint64_t seed, double inner) {
  SplitMix64 rng(seed);
  std::vector<Point> out;
  out.reserve(static_cast<std::size_t>(count));
  const Vec mid = 0.5 * (chart.lo + chart.hi);
  const Vec half = 0.5 * inner * (chart.hi - chart.lo);
  for (int s = 0; s < count; ++s) {
    Point p(chart.dim);
    for (int i = 0; i < chart.dim; ++i) p(i) = mid(i) + half(i) * (2.0 * rng.uniform() - 1.0);
    out.push_back(p);
  }
  return out;
}

MatrixField MatrixField::from_jet(Chart chart, JetFn jet) {
  MatrixField f;
  f.chart_ = std::move(chart);
  f.method_ = Derivative::Exact;
  f.jet_ = std::move(jet);
  return f;
}

MatrixField MatrixField::from_closure(Chart chart, ValueFn value) {
  MatrixField f;
  f.chart_ = std::move(chart);
  f.method_ = Derivative::FiniteDifference;
  f.value_ = std::move(value);
  return f;
}

MatrixField MatrixField::from_exprs(Chart chart, const std::vector<std::vector<expr::Expr>>& entries) {
  const int rows = static_cast<int>(entries.size());
  if (rows == 0) throw Error(ErrorCode::InvalidInput, "field: no entries");
  const int cols = static_cast<int>(entries.front().size());
  for (const auto& row : entries) {
    if (static_cast<int>(row.size()) != cols) throw Error(ErrorCode::InvalidInput, "field: ragged entries");
    for (const auto& e : row) {
      if (e.dim() != chart.dim) throw Error(ErrorCode::InvalidInput, "field: expression dimension mismatch");
    }
  }
  MatrixField f;
  f.chart_ = std::move(chart);
  f.method_ = Derivative::Exact;
  f.value_ = [entries, rows, cols](const Point& p) {
    Mat m(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) m(i, j) = expr::eval_dual(entries[i][j], p).value;
    return m;
  };
  f.jet_ = [entries, rows, cols](const Point& p) {
    const int n = static_cast<int>(p.size());
    MatJet jet = MatJet::constant(Mat::Zero(rows, cols), n);
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < cols; ++j) {
        const auto d = expr::eval_dual(entries[i][j], p);
        jet.v(i, j) = d.value;
        for (int k = 0; k < n; ++k) jet.d[static_cast<std::size_t>(k)](i, j) = d.grad[static_cast<std::size_t>(k)];
      }
    }
    return jet;
  };
  return f;
}

MatrixField MatrixField::constant(Chart chart, const Mat& m) {
  const int n = chart.dim;
  return from_jet(std::move(chart), [m, n](const Point&) { return MatJet::constant(m, n); });
}

Mat MatrixField::value(const Point& p) const {
  if (value_) return value_(p);
  return jet_(p).v;
}

MatJet MatrixField::jet(const Point& p) const {
  if (method_ == Derivative::Exact) return jet_(p);
  MatJet j;
  j.v = value_(p);
  j.d.resize(static_cast<std::size_t>(p.size()));
  for (int k = 0; k < p.size(); ++k) {
    const double h = fd_step(p(k));
    Point a = p, b = p;
    a(k) += h;
    b(k) -= h;
    j.d[static_cast<std::size_t>(k)] = (value_(a) - value_(b)) / (a(k) - b(k));
  }
  return j;
}

namespace {

void check_metric(const Mat& g, const Point& p) {
  if (g.rows() != g.cols()) throw Error(ErrorCode::InvalidInput, "metric: not square", p);
  const double d = Eigen::FullPivLU<Mat>(g).determinant();
  if (!(std::abs(d) > 1e-10)) {
    throw Error(ErrorCode::DegenerateMetric, "metric: |det| = " + std::to_string(std::abs(d)) + " <= 1e-10", p);
  }
}

}  // namespace

MetricField::MetricField(MatrixField f) : MatrixField(std::move(f)) {}

MetricField MetricField::from_exprs(Chart chart, const std::vector<std::vector<expr::Expr>>& upper) {
  const auto n = upper.size();
  std::vector<std::vector<expr::Expr>> full(n, std::vector<expr::Expr>(n));
  for (std::size_t i = 0; i < n; ++i) {
    if (upper[i].size() != n) throw Error(ErrorCode::InvalidInput, "metric: entries must be n x n");
    for (std::size_t j = i; j < n; ++j) full[i][j] = full[j][i] = upper[i][j];
  }
  return MetricField(MatrixField::from_exprs(std::move(chart), full));
}

Mat MetricField::value(const Point& p) const {
  Mat g = MatrixField::value(p);
  g = 0.5 * (g + g.transpose()).eval();
  check_metric(g, p);
  return g;
}

MatJet MetricField::jet(const Point& p) const {
  MatJet g = symmetrize(MatrixField::jet(p));
  check_metric(g.v, p);
  return g;
}

VectorField::VectorField(Chart chart, std::vector<expr::Expr> components)
    : chart_(std::move(chart)), comps_(std::move(components)) {
  if (static_cast<int>(comps_.size()) != chart_.dim)
    throw Error(ErrorCode::InvalidInput, "vector field: component count differs from chart dimension");
  for (const auto& e : comps_) {
    if (e.dim() != chart_.dim) throw Error(ErrorCode::InvalidInput, "vector field: expression dimension mismatch");
  }
}

Vec VectorField::value(const Point& p) const {
  Vec v(chart_.dim);
  for (int s = 0; s < chart_.dim; ++s) v(s) = expr::eval_dual(comps_[static_cast<std::size_t>(s)], p).value;
  return v;
}

Mat VectorField::jacobian(const Point& p) const {
  const int n = chart_.dim;
  Mat j(n, n);
  for (int s = 0; s < n; ++s) {
    const auto d = expr::eval_dual(comps_[static_cast<std::size_t>(s)], p);
    for (int i = 0; i < n; ++i) j(s, i) = d.grad[static_cast<std::size_t>(i)];
  }
  return j;
}

double Tensor3::norm() const {
  double s = 0.0;
  for (int i = 0; i < n_ * n_ * n_; ++i) s += data_[static_cast<std::size_t>(i)] * data_[static_cast<std::size_t>(i)];
  return std::sqrt(s);
}

Tensor3& Tensor3::operator-=(const Tensor3& o) {
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

namespace {

Mat inverse_metric(const Mat& g) { return Eigen::FullPivLU<Mat>(g).inverse(); }

}  // namespace

Tensor3 christoffel(const MatJet& g) {
  const int n = static_cast<int>(g.v.rows());
  const Mat ginv = inverse_metric(g.v);
  // first kind: c(l, j, k) = (d_j g_lk + d_k g_lj - d_l g_jk) / 2
  Tensor3 first(n);
  for (int l = 0; l < n; ++l)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        first(l, j, k) = 0.5 * (g.d[static_cast<std::size_t>(j)](l, k) + g.d[static_cast<std::size_t>(k)](l, j) -
                                g.d[static_cast<std::size_t>(l)](j, k));
  Tensor3 gamma(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = j; k < n; ++k) {
        double s = 0.0;
        for (int l = 0; l < n; ++l) s += ginv(i, l) * first(l, j, k);
        gamma(i, j, k) = gamma(i, k, j) = s;
      }
  return gamma;
}

Tensor3 christoffel(const MetricField& g, const Point& p) { return christoffel(g.jet(p)); }

Tensor3 covariant_derivative_op(const MatJet& g, const MatJet& l) {
  const int n = static_cast<int>(g.v.rows());
  const Tensor3 gam = christoffel(g);
  Tensor3 out(n);
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q)
      for (int r = 0; r < n; ++r) {
        double s = l.d[static_cast<std::size_t>(r)](p, q);
        for (int t = 0; t < n; ++t) s += gam(p, r, t) * l.v(t, q) - gam(t, r, q) * l.v(p, t);
        out(p, q, r) = s;
      }
  return out;
}

Tensor3 covariant_derivative_op(const MetricField& g, const OperatorField& l, const Point& p) {
  return covariant_derivative_op(g.jet(p), l.jet(p));
}

Tensor3 metric_covariant_derivative(const MatJet& g) {
  const int n = static_cast<int>(g.v.rows());
  const Tensor3 gam = christoffel(g);
  Tensor3 out(n);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double s = g.d[static_cast<std::size_t>(k)](i, j);
        for (int t = 0; t < n; ++t) s -= gam(t, k, i) * g.v(t, j) + gam(t, k, j) * g.v(i, t);
        out(k, i, j) = s;
      }
  return out;
}

Tensor3 nijenhuis(const MatJet& l) {
  const int n = static_cast<int>(l.v.rows());
  auto dl = [&](int s, int i, int k) { return l.d[static_cast<std::size_t>(s)](i, k); };
  Tensor3 raw(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double s = 0.0;
        for (int t = 0; t < n; ++t) {
          s += l.v(t, j) * dl(t, i, k) - l.v(t, k) * dl(t, i, j);
          s -= l.v(i, t) * (dl(j, t, k) - dl(k, t, j));
        }
        raw(i, j, k) = s;
      }
  Tensor3 out(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) out(i, j, k) = 0.5 * (raw(i, j, k) - raw(i, k, j));
  return out;
}

Tensor3 nijenhuis(const OperatorField& l, const Point& p) { return nijenhuis(l.jet(p)); }

double partials_norm(const MatJet& j) {
  double s = 0.0;
  for (const auto& m : j.d) s += m.squaredNorm();
  return std::sqrt(s);
}

Mat lie_derivative_metric(const Vec& v, const Mat& dv, const MatJet& g) {
  const int n = static_cast<int>(g.v.rows());
  Mat out = Mat::Zero(n, n);
  for (int s = 0; s < n; ++s) out += v(s) * g.d[static_cast<std::size_t>(s)];
  // g_sj d_i v^s + g_is d_j v^s
  const Mat t = smallmat::matmul(dv.transpose(), g.v);
  out += t + t.transpose();
  return out;
}

Mat lie_derivative_metric(const VectorField& v, const MetricField& g, const Point& p) {
  return lie_derivative_metric(v.value(p), v.jacobian(p), g.jet(p));
}

}  // namespace geq
