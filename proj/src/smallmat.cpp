#include "geq/smallmat.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "geq/simd.hpp"

namespace geq {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::DimensionTooLarge: return "DimensionTooLarge";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::SpectraOverlap: return "SpectraOverlap";
    case ErrorCode::DomainViolation: return "DomainViolation";
    case ErrorCode::SymmetryViolation: return "SymmetryViolation";
    case ErrorCode::ResidueTooLarge: return "ResidueTooLarge";
    case ErrorCode::GroupsNotDisjoint: return "GroupsNotDisjoint";
    case ErrorCode::NotConjugationClosed: return "NotConjugationClosed";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::UnknownSymbol: return "UnknownSymbol";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::DegenerateMetric: return "DegenerateMetric";
    case ErrorCode::AdmissibilityViolation: return "AdmissibilityViolation";
    case ErrorCode::ConjugationViolation: return "ConjugationViolation";
    case ErrorCode::ZeroChiAtZero: return "ZeroChiAtZero";
    case ErrorCode::NonSymmetricResult: return "NonSymmetricResult";
    case ErrorCode::SingularL: return "SingularL";
    case ErrorCode::ZeroInImage: return "ZeroInImage";
    case ErrorCode::EigenvalueCollision: return "EigenvalueCollision";
    case ErrorCode::NonPositiveWeight: return "NonPositiveWeight";
    case ErrorCode::NotAdapted: return "NotAdapted";
    case ErrorCode::StepFailure: return "StepFailure";
    case ErrorCode::LeftChart: return "LeftChart";
    case ErrorCode::ZeroVelocity: return "ZeroVelocity";
  }
  return "Unknown";
}

SymBilinear::SymBilinear(const Mat& m) : m_(m.rows(), m.cols()) {
  if (m.rows() != m.cols()) throw Error(ErrorCode::InvalidInput, "SymBilinear: matrix not square");
  require_dim(static_cast<int>(m.rows()), "SymBilinear");
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    m_(i, i) = m(i, i);
    for (Eigen::Index j = i + 1; j < m.cols(); ++j) {
      const double s = 0.5 * (m(i, j) + m(j, i));
      m_(i, j) = s;
      m_(j, i) = s;
    }
  }
  if (!m_.allFinite()) throw Error(ErrorCode::InvalidInput, "SymBilinear: non-finite entry");
}

// ---------------------------------------------------------------------------
// MonicPoly

double MonicPoly::operator()(double t) const {
  double acc = 1.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * t + *it;
  return acc;
}

Complex MonicPoly::operator()(Complex t) const {
  Complex acc = 1.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * t + *it;
  return acc;
}

Mat MonicPoly::operator()(const Mat& a) const {
  const int n = static_cast<int>(a.rows());
  Mat acc = identity(n);
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) {
    acc = smallmat::matmul(acc, a);
    acc.diagonal().array() += *it;
  }
  return acc;
}

MonicPoly MonicPoly::from_roots(const std::vector<Complex>& roots) {
  std::vector<Complex> c{1.0};  // ascending, leading last
  for (const Complex& r : roots) {
    std::vector<Complex> next(c.size() + 1, 0.0);
    for (std::size_t i = 0; i < c.size(); ++i) {
      next[i + 1] += c[i];
      next[i] -= r * c[i];
    }
    c = std::move(next);
  }
  MonicPoly p;
  double scale = 1.0;
  for (const Complex& v : c) scale = std::max(scale, std::abs(v));
  for (std::size_t i = 0; i + 1 < c.size(); ++i) {
    if (std::abs(c[i].imag()) > 1e-9 * scale) {
      throw Error(ErrorCode::NotConjugationClosed,
                  "MonicPoly::from_roots: roots are not closed under conjugation");
    }
    p.coeffs.push_back(c[i].real());
  }
  return p;
}

MonicPoly operator*(const MonicPoly& a, const MonicPoly& b) {
  const int da = a.degree();
  const int db = b.degree();
  std::vector<double> full(static_cast<std::size_t>(da + db + 1), 0.0);
  auto ca = [&](int i) { return i == da ? 1.0 : a.coeffs[static_cast<std::size_t>(i)]; };
  auto cb = [&](int i) { return i == db ? 1.0 : b.coeffs[static_cast<std::size_t>(i)]; };
  for (int i = 0; i <= da; ++i)
    for (int j = 0; j <= db; ++j) full[static_cast<std::size_t>(i + j)] += ca(i) * cb(j);
  full.pop_back();
  return MonicPoly{std::move(full)};
}

// ---------------------------------------------------------------------------
// Spectrum

int Spectrum::dim() const {
  int n = 0;
  for (const auto& e : values) n += e.multiplicity;
  return n;
}

std::vector<Complex> Spectrum::expanded() const {
  std::vector<Complex> out;
  for (const auto& e : values)
    for (int i = 0; i < e.multiplicity; ++i) out.push_back(e.value);
  return out;
}

double Spectrum::distance_to(Complex z) const {
  double d = std::numeric_limits<double>::infinity();
  for (const auto& e : values) d = std::min(d, std::abs(e.value - z));
  return d;
}

// ---------------------------------------------------------------------------
// ScalarFunction

ScalarFunction::ScalarFunction(std::string name, Derivatives derivs, Domain domain,
                               std::optional<double> constant)
    : name_(std::move(name)),
      derivs_(std::move(derivs)),
      domain_(std::move(domain)),
      constant_(constant) {}

std::vector<Complex> ScalarFunction::derivatives(Complex z, int order) const {
  std::vector<Complex> out(static_cast<std::size_t>(order + 1));
  derivs_(z, order, out.data());
  return out;
}

Complex ScalarFunction::operator()(Complex z) const { return derivatives(z, 0)[0]; }

ScalarFunction ScalarFunction::polynomial(std::vector<double> coeffs) {
  std::string name = "poly:";
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    if (i) name += ",";
    name += std::to_string(coeffs[i]);
  }
  std::optional<double> constant;
  if (coeffs.empty()) constant = 0.0;
  else if (std::all_of(coeffs.begin() + 1, coeffs.end(), [](double c) { return c == 0.0; }))
    constant = coeffs[0];
  auto derivs = [coeffs](Complex z, int order, Complex* out) {
    // Repeated synthetic division gives p^(k)(z) / k!.
    std::vector<Complex> c(coeffs.begin(), coeffs.end());
    double fact = 1.0;
    for (int k = 0; k <= order; ++k) {
      Complex acc = 0.0;
      const int deg = static_cast<int>(c.size()) - 1;
      std::vector<Complex> q(c.size() > 1 ? c.size() - 1 : 0);
      for (int i = deg; i >= 0; --i) {
        acc = acc * z + c[static_cast<std::size_t>(i)];
        if (i > 0) q[static_cast<std::size_t>(i - 1)] = acc;
      }
      if (k > 0) fact *= k;
      out[k] = c.empty() ? Complex(0.0) : acc * fact;
      c = std::move(q);
    }
  };
  return ScalarFunction(std::move(name), derivs, [](Complex) { return true; }, constant);
}

ScalarFunction ScalarFunction::constant_fn(double c) {
  auto derivs = [c](Complex, int order, Complex* out) {
    out[0] = c;
    for (int k = 1; k <= order; ++k) out[k] = 0.0;
  };
  return ScalarFunction("const:" + std::to_string(c), derivs, [](Complex) { return true; }, c);
}

ScalarFunction ScalarFunction::reciprocal(double c) {
  const double guard = 1e-8 * (1.0 + std::abs(c));
  auto derivs = [c](Complex z, int order, Complex* out) {
    const Complex w = 1.0 / (z - c);
    Complex pw = w;
    double sign_fact = 1.0;
    for (int k = 0; k <= order; ++k) {
      out[k] = sign_fact * pw;
      pw *= w;
      sign_fact *= -static_cast<double>(k + 1);
    }
  };
  return ScalarFunction("recip:" + std::to_string(c), derivs,
                        [c, guard](Complex z) { return std::abs(z - c) > guard; });
}

ScalarFunction ScalarFunction::exponential() {
  auto derivs = [](Complex z, int order, Complex* out) {
    const Complex e = std::exp(z);
    for (int k = 0; k <= order; ++k) out[k] = e;
  };
  return ScalarFunction("exp", derivs, [](Complex) { return true; });
}

ScalarFunction ScalarFunction::principal_sqrt() {
  auto derivs = [](Complex z, int order, Complex* out) {
    // d^k/dz^k z^(1/2) = (1/2)(1/2 - 1)...(1/2 - k + 1) z^(1/2 - k)
    const Complex root = std::sqrt(z);
    Complex pw = root;
    double coef = 1.0;
    for (int k = 0; k <= order; ++k) {
      out[k] = coef * pw;
      coef *= 0.5 - k;
      pw /= z;
    }
  };
  return ScalarFunction("sqrt", derivs, [](Complex z) {
    return !(z.imag() == 0.0 && z.real() <= 0.0) && std::abs(z) > 0.0;
  });
}

namespace smallmat {

Mat matmul(const Mat& a, const Mat& b) {
  if (a.cols() != b.rows()) throw Error(ErrorCode::InvalidInput, "matmul: shape mismatch");
  Mat c(a.rows(), b.cols());
  simd::gemm(static_cast<std::size_t>(a.rows()), static_cast<std::size_t>(a.cols()),
             static_cast<std::size_t>(b.cols()), a.data(), b.data(), c.data());
  return c;
}

namespace {

void require_square(const Mat& a, const char* what) {
  if (a.rows() != a.cols()) throw Error(ErrorCode::InvalidInput, std::string(what) + ": not square");
  require_dim(static_cast<int>(a.rows()), what);
  if (!a.allFinite()) throw Error(ErrorCode::InvalidInput, std::string(what) + ": non-finite entry");
}

double norm(const Mat& a) { return a.norm(); }

// Single-linkage clustering of points within radius; returns cluster ids.
std::vector<int> cluster(const std::vector<Complex>& pts, double radius) {
  const std::size_t n = pts.size();
  std::vector<int> id(n);
  std::iota(id.begin(), id.end(), 0);
  auto find = [&](int i) {
    while (id[static_cast<std::size_t>(i)] != i) i = id[static_cast<std::size_t>(i)];
    return i;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(pts[i] - pts[j]) <= radius) {
        const int a = find(static_cast<int>(i));
        const int b = find(static_cast<int>(j));
        if (a != b) id[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
      }
  for (std::size_t i = 0; i < n; ++i) id[i] = find(static_cast<int>(i));
  return id;
}

bool canonical_less(const Eigenvalue& a, const Eigenvalue& b) {
  if (a.value.real() != b.value.real()) return a.value.real() < b.value.real();
  if (a.value.imag() != b.value.imag()) return a.value.imag() < b.value.imag();
  return a.multiplicity < b.multiplicity;
}

Spectrum clustered_spectrum(const std::vector<Complex>& ev, double radius) {
  const std::vector<int> id = cluster(ev, radius);
  Spectrum s;
  std::vector<int> seen;
  for (std::size_t i = 0; i < ev.size(); ++i) {
    if (std::find(seen.begin(), seen.end(), id[i]) != seen.end()) continue;
    seen.push_back(id[i]);
    Complex sum = 0.0;
    int count = 0;
    for (std::size_t j = 0; j < ev.size(); ++j)
      if (id[j] == id[i]) {
        sum += ev[j];
        ++count;
      }
    Complex mean = sum / static_cast<double>(count);
    if (std::abs(mean.imag()) <= radius) mean = Complex(mean.real(), 0.0);
    s.values.push_back({mean, count});
  }
  std::sort(s.values.begin(), s.values.end(), canonical_less);
  return s;
}

}  // namespace

Spectrum cluster_spectrum(const std::vector<Complex>& ev, double radius) {
  return clustered_spectrum(ev, radius);
}

MonicPoly char_poly(const Mat& a) {
  require_square(a, "char_poly");
  const int n = static_cast<int>(a.rows());
  std::vector<double> c(static_cast<std::size_t>(n + 1), 0.0);
  c[static_cast<std::size_t>(n)] = 1.0;
  Mat m = Mat::Zero(n, n);
  for (int k = 1; k <= n; ++k) {
    m = matmul(a, m);
    m.diagonal().array() += c[static_cast<std::size_t>(n - k + 1)];
    c[static_cast<std::size_t>(n - k)] = -matmul(a, m).trace() / k;
  }
  c.pop_back();
  return MonicPoly{std::move(c)};
}

CharPolyJet char_poly_jet(const Mat& a, const std::vector<Mat>& da) {
  require_square(a, "char_poly_jet");
  const int n = static_cast<int>(a.rows());
  const std::size_t dirs = da.size();
  std::vector<double> c(static_cast<std::size_t>(n + 1), 0.0);
  std::vector<std::vector<double>> dc(dirs, std::vector<double>(static_cast<std::size_t>(n + 1), 0.0));
  c[static_cast<std::size_t>(n)] = 1.0;
  Mat m = Mat::Zero(n, n);
  std::vector<Mat> dm(dirs, Mat::Zero(n, n));
  for (int k = 1; k <= n; ++k) {
    const auto hi = static_cast<std::size_t>(n - k + 1);
    const auto lo = static_cast<std::size_t>(n - k);
    for (std::size_t d = 0; d < dirs; ++d) {
      dm[d] = matmul(da[d], m) + matmul(a, dm[d]);
      dm[d].diagonal().array() += dc[d][hi];
    }
    m = matmul(a, m);
    m.diagonal().array() += c[hi];
    c[lo] = -matmul(a, m).trace() / k;
    for (std::size_t d = 0; d < dirs; ++d)
      dc[d][lo] = -(matmul(da[d], m).trace() + matmul(a, dm[d]).trace()) / k;
  }
  c.pop_back();
  for (auto& v : dc) v.pop_back();
  return CharPolyJet{MonicPoly{std::move(c)}, std::move(dc)};
}

std::vector<Complex> eigenvalues(const Mat& a) {
  require_square(a, "eigen");
  const Eigen::MatrixXd dense = a;
  Eigen::EigenSolver<Eigen::MatrixXd> solver(dense, false);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::NoConvergence, "eigen: QR iteration did not converge");
  }
  std::vector<Complex> ev(solver.eigenvalues().begin(), solver.eigenvalues().end());
  // Pair each upper-half-plane value with its nearest lower partner and make
  // the pair exactly conjugate.
  const double tiny = 64 * std::numeric_limits<double>::epsilon() * (1.0 + norm(a));
  std::vector<bool> used(ev.size(), false);
  for (std::size_t i = 0; i < ev.size(); ++i) {
    if (used[i]) continue;
    if (std::abs(ev[i].imag()) <= tiny) {
      ev[i] = Complex(ev[i].real(), 0.0);
      used[i] = true;
      continue;
    }
    std::size_t best = ev.size();
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < ev.size(); ++j) {
      if (j == i || used[j]) continue;
      const double d = std::abs(ev[j] - std::conj(ev[i]));
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    if (best == ev.size()) throw Error(ErrorCode::NoConvergence, "eigen: unpaired complex eigenvalue");
    const double re = 0.5 * (ev[i].real() + ev[best].real());
    const double im = 0.5 * (std::abs(ev[i].imag()) + std::abs(ev[best].imag()));
    ev[i] = Complex(re, im);
    ev[best] = Complex(re, -im);
    used[i] = used[best] = true;
  }
  return ev;
}

Spectrum eigen(const Mat& a, double tol) {
  const std::vector<Complex> ev = eigenvalues(a);
  const double scale = 1.0 + norm(a);
  Spectrum s = clustered_spectrum(ev, tol * scale);
  const int n = static_cast<int>(a.rows());
  for (const auto& e : s.values) {
    CMat shifted = a.cast<Complex>();
    shifted.diagonal().array() -= e.value;
    const Eigen::MatrixXcd dense = shifted;
    const double smin = Eigen::JacobiSVD<Eigen::MatrixXcd>(dense).singularValues()(n - 1);
    if (smin > tol * scale) {
      throw Error(ErrorCode::NoConvergence, "eigen: backward error above tolerance");
    }
  }
  return s;
}

Mat sylvester_solve(const Mat& l1, const Mat& l2, const Mat& c, double gap_tol) {
  require_square(l1, "sylvester_solve(L1)");
  require_square(l2, "sylvester_solve(L2)");
  const int r = static_cast<int>(l1.rows());
  const int s = static_cast<int>(l2.rows());
  if (c.rows() != r || c.cols() != s) throw Error(ErrorCode::InvalidInput, "sylvester_solve: C shape");

  const std::vector<Complex> e1 = eigenvalues(l1);
  const std::vector<Complex> e2 = eigenvalues(l2);
  double gap = std::numeric_limits<double>::infinity();
  for (const Complex& a : e1)
    for (const Complex& b : e2) gap = std::min(gap, std::abs(a - b));
  if (gap <= gap_tol * (1.0 + norm(l1) + norm(l2))) {
    throw Error(ErrorCode::SpectraOverlap, "sylvester_solve: spectra of L1 and L2 overlap");
  }

  // Column-major vec: unknown (i, j) sits at i + r * j.
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(r * s, r * s);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < s; ++j) {
      const int row = i + r * j;
      for (int b = 0; b < s; ++b) k(row, i + r * b) += l2(b, j);
      for (int a = 0; a < r; ++a) k(row, a + r * j) -= l1(i, a);
    }
  Eigen::VectorXd rhs(r * s);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < s; ++j) rhs(i + r * j) = c(i, j);
  const Eigen::VectorXd sol = k.fullPivLu().solve(rhs);
  Mat x(r, s);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < s; ++j) x(i, j) = sol(i + r * j);
  return x;
}

Mat matrix_function(const Mat& a, const ScalarFunction& f, std::optional<double> cluster_tol) {
  require_square(a, "matrix_function");
  const int n = static_cast<int>(a.rows());
  if (f.constant()) return *f.constant() * identity(n);

  const double radius = cluster_tol.value_or(1e-8 * (1.0 + norm(a)));
  const Spectrum spectrum = clustered_spectrum(eigenvalues(a), radius);

  // Node sequence with repeats; divided differences in Newton form.
  std::vector<Complex> nodes;
  std::vector<int> owner;
  std::vector<std::vector<Complex>> derivs;
  for (std::size_t ci = 0; ci < spectrum.values.size(); ++ci) {
    const auto& e = spectrum.values[ci];
    if (!f.in_domain(e.value)) {
      throw Error(ErrorCode::DomainViolation,
                  "matrix_function: eigenvalue outside the domain of " + f.name());
    }
    const auto d = f.derivatives(e.value, e.multiplicity - 1);
    const Complex fc = f(std::conj(e.value));
    if (std::abs(fc - std::conj(d[0])) > 1e-12 * (1.0 + std::abs(d[0]))) {
      throw Error(ErrorCode::SymmetryViolation,
                  "matrix_function: f(conj z) != conj f(z) at a spectrum point");
    }
    derivs.push_back(d);
    for (int k = 0; k < e.multiplicity; ++k) {
      nodes.push_back(e.value);
      owner.push_back(static_cast<int>(ci));
    }
  }
  const std::size_t m = nodes.size();
  std::vector<Complex> dd(m);
  for (std::size_t i = 0; i < m; ++i) dd[i] = derivs[static_cast<std::size_t>(owner[i])][0];
  double fact = 1.0;
  for (std::size_t level = 1; level < m; ++level) {
    fact *= static_cast<double>(level);
    for (std::size_t i = m - 1; i >= level; --i) {
      if (owner[i] == owner[i - level]) {
        dd[i] = derivs[static_cast<std::size_t>(owner[i])][level] / fact;
      } else {
        dd[i] = (dd[i] - dd[i - 1]) / (nodes[i] - nodes[i - level]);
      }
    }
  }

  const CMat ac = a.cast<Complex>();
  CMat acc = CMat::Identity(n, n) * dd[m - 1];
  for (std::size_t k = m - 1; k-- > 0;) {
    CMat shifted = ac;
    shifted.diagonal().array() -= nodes[k];
    acc = acc * shifted;
    acc.diagonal().array() += dd[k];
  }
  const Mat re = acc.real();
  const double im = acc.imag().norm();
  if (im > 1e-10 * re.norm() + 1e-13) {
    throw Error(ErrorCode::ResidueTooLarge, "matrix_function: imaginary residue too large");
  }
  return re;
}

ScalarFunction indicator_function(const Spectrum& s1, const Spectrum& s2) {
  if (s1.values.empty() || s2.values.empty()) {
    throw Error(ErrorCode::InvalidInput, "indicator_function: empty group");
  }
  double scale = 1.0;
  for (const auto* s : {&s1, &s2})
    for (const auto& e : s->values) scale = std::max(scale, std::abs(e.value));
  auto closed = [&](const Spectrum& s) {
    for (const auto& e : s.values)
      if (s.distance_to(std::conj(e.value)) > 1e-9 * scale) return false;
    return true;
  };
  if (!closed(s1) || !closed(s2)) {
    throw Error(ErrorCode::NotConjugationClosed,
                "indicator_function: a complex-conjugate pair is split between groups");
  }
  double gap = std::numeric_limits<double>::infinity();
  for (const auto& e : s1.values) gap = std::min(gap, s2.distance_to(e.value));
  if (gap <= 1e-10 * scale) {
    throw Error(ErrorCode::GroupsNotDisjoint, "indicator_function: groups share an eigenvalue");
  }
  const double radius = 0.5 * gap;
  auto derivs = [s1, radius](Complex z, int order, Complex* out) {
    out[0] = s1.distance_to(z) < radius ? 1.0 : 0.0;
    for (int k = 1; k <= order; ++k) out[k] = 0.0;
  };
  auto domain = [s1, s2, radius](Complex z) {
    return s1.distance_to(z) < radius || s2.distance_to(z) < radius;
  };
  return ScalarFunction("indicator", derivs, domain);
}

}  // namespace smallmat
}  // namespace geq
