#pragma once

// Dense linear algebra on small real matrices (dim <= 8): characteristic
// polynomials, eigenvalues, Sylvester equations and holomorphic functional
// calculus by Hermite interpolation on the clustered spectrum.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "geq/core.hpp"

namespace geq {

/// Symmetric bilinear form. Symmetrised on construction so that
/// entries(i, j) == entries(j, i) holds bit for bit.
class SymBilinear {
 public:
  SymBilinear() = default;
  explicit SymBilinear(const Mat& m);

  const Mat& matrix() const { return m_; }
  int dim() const { return static_cast<int>(m_.rows()); }
  double operator()(int i, int j) const { return m_(i, j); }

 private:
  Mat m_;
};

/// Monic polynomial t^d + c_{d-1} t^{d-1} + ... + c_0; coeffs holds c_0..c_{d-1}.
struct MonicPoly {
  std::vector<double> coeffs;

  int degree() const { return static_cast<int>(coeffs.size()); }
  double operator()(double t) const;
  Complex operator()(Complex t) const;
  /// Horner evaluation p(A).
  Mat operator()(const Mat& a) const;
  /// Value at t = 0, i.e. c_0 (1 for the degree-0 polynomial).
  double at_zero() const { return coeffs.empty() ? 1.0 : coeffs.front(); }

  static MonicPoly from_roots(const std::vector<Complex>& roots);
};

MonicPoly operator*(const MonicPoly& a, const MonicPoly& b);

struct Eigenvalue {
  Complex value;
  int multiplicity = 1;
};

/// Eigenvalues with algebraic multiplicities, closed under conjugation and
/// sorted by (real part, imaginary part, multiplicity).
struct Spectrum {
  std::vector<Eigenvalue> values;

  int dim() const;
  /// Every eigenvalue repeated according to its multiplicity.
  std::vector<Complex> expanded() const;
  double distance_to(Complex z) const;
};

/// Complex-analytic scalar function with derivative access, used by the
/// functional calculus. Conjugation symmetry f(conj z) = conj f(z) is checked
/// at the spectrum when the function is applied.
class ScalarFunction {
 public:
  /// Writes f(z), f'(z), ..., f^(order)(z) to out[0..order].
  using Derivatives = std::function<void(Complex z, int order, Complex* out)>;
  using Domain = std::function<bool(Complex z)>;

  ScalarFunction(std::string name, Derivatives derivs, Domain domain,
                 std::optional<double> constant = std::nullopt);

  const std::string& name() const { return name_; }
  std::vector<Complex> derivatives(Complex z, int order) const;
  Complex operator()(Complex z) const;
  bool in_domain(Complex z) const { return domain_(z); }
  /// Set when f is a real constant; f(A) is then exactly c * Id.
  const std::optional<double>& constant() const { return constant_; }

  static ScalarFunction polynomial(std::vector<double> coeffs);
  static ScalarFunction constant_fn(double c);
  /// 1 / (z - c)
  static ScalarFunction reciprocal(double c);
  static ScalarFunction exponential();
  /// Principal branch; the closed negative real axis is outside the domain.
  static ScalarFunction principal_sqrt();

 private:
  std::string name_;
  Derivatives derivs_;
  Domain domain_;
  std::optional<double> constant_;
};

namespace smallmat {

Mat matmul(const Mat& a, const Mat& b);

/// det(t Id - A) by the Faddeev-LeVerrier recursion.
MonicPoly char_poly(const Mat& a);

/// Characteristic polynomial coefficients together with their directional
/// derivatives: dcoeffs[k] are the coefficients of d/dx_k det(t Id - A).
struct CharPolyJet {
  MonicPoly poly;
  std::vector<std::vector<double>> dcoeffs;
};
CharPolyJet char_poly_jet(const Mat& a, const std::vector<Mat>& da);

/// Raw eigenvalues, conjugate pairs made exactly conjugate.
std::vector<Complex> eigenvalues(const Mat& a);

/// Single-linkage clusters of radius into a canonically sorted Spectrum.
Spectrum cluster_spectrum(const std::vector<Complex>& ev, double radius);

/// Eigenvalues clustered within tol * (1 + |A|) into multiplicities. Throws
/// NoConvergence if the backward error of a cluster exceeds tol * (1 + |A|).
Spectrum eigen(const Mat& a, double tol = 1e-8);

/// Solves X * L2 - L1 * X = C for X (r x s) by Kronecker linearisation.
Mat sylvester_solve(const Mat& l1, const Mat& l2, const Mat& c, double gap_tol = 1e-8);

/// f(A) as p(A), p the Hermite interpolant of f on the eigenvalue clusters of A
/// (cluster radius cluster_tol, default 1e-8 * (1 + |A|)).
Mat matrix_function(const Mat& a, const ScalarFunction& f,
                    std::optional<double> cluster_tol = std::nullopt);

/// 1 near s1, 0 near s2 (all derivatives 0); undefined elsewhere.
ScalarFunction indicator_function(const Spectrum& s1, const Spectrum& s2);

}  // namespace smallmat
}  // namespace geq
