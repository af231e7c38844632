#pragma once

// Tensor fields on a single coordinate chart. A field is backed either by
// closed-form expressions or an exact jet function (derivatives exact), or by
// a plain value closure differentiated with central finite differences.

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "geq/core.hpp"
#include "geq/expr.hpp"
#include "geq/jet.hpp"

namespace geq {

struct Chart {
  int dim = 0;
  Vec lo, hi;
  Point base;

  Chart() = default;
  Chart(Vec lo, Vec hi, Point base);

  bool contains(const Point& p) const;
  double min_width() const { return (hi - lo).minCoeff(); }
  /// Product chart, coordinates of a followed by those of b.
  static Chart product(const Chart& a, const Chart& b);
};

/// splitmix64; the only randomness source of the library.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();

 private:
  std::uint64_t state_;
};

/// count points uniform in the box, or in the box shrunk about its centre by
/// the factor inner (1 = whole box).
std::vector<Point> sample_points(const Chart& chart, int count, std::uint64_t seed,
                                 double inner = 1.0);

enum class Derivative { Exact, FiniteDifference };

/// Central difference step for coordinate value x.
inline double fd_step(double x) { return 6e-6 * (1.0 + std::abs(x)); }

class MatrixField {
 public:
  using ValueFn = std::function<Mat(const Point&)>;
  using JetFn = std::function<MatJet(const Point&)>;

  MatrixField() = default;
  virtual ~MatrixField() = default;

  static MatrixField from_jet(Chart chart, JetFn jet);
  static MatrixField from_closure(Chart chart, ValueFn value);
  static MatrixField from_exprs(Chart chart, const std::vector<std::vector<expr::Expr>>& entries);
  static MatrixField constant(Chart chart, const Mat& m);

  const Chart& chart() const { return chart_; }
  int dim() const { return chart_.dim; }
  Derivative derivative() const { return method_; }

  virtual Mat value(const Point& p) const;
  virtual MatJet jet(const Point& p) const;

 protected:
  Chart chart_;
  Derivative method_ = Derivative::Exact;
  ValueFn value_;
  JetFn jet_;
};

/// Symmetric nondegenerate (|det| > 1e-10) bilinear form field. Values are
/// symmetrised; a degenerate value throws DegenerateMetric at the point.
class MetricField : public MatrixField {
 public:
  MetricField() = default;
  explicit MetricField(MatrixField f);

  /// Upper triangle of entries is used; entries below the diagonal are ignored.
  static MetricField from_exprs(Chart chart, const std::vector<std::vector<expr::Expr>>& upper);

  Mat value(const Point& p) const override;
  MatJet jet(const Point& p) const override;
};

class OperatorField : public MatrixField {
 public:
  OperatorField() = default;
  explicit OperatorField(MatrixField f) : MatrixField(std::move(f)) {}
};

class VectorField {
 public:
  VectorField() = default;
  VectorField(Chart chart, std::vector<expr::Expr> components);

  const Chart& chart() const { return chart_; }
  const std::vector<expr::Expr>& components() const { return comps_; }
  Vec value(const Point& p) const;
  /// jac(s, i) = d v^s / d x^i
  Mat jacobian(const Point& p) const;

 private:
  Chart chart_;
  std::vector<expr::Expr> comps_;
};

/// Dense n x n x n array, indexed (a, b, c).
class Tensor3 {
 public:
  Tensor3() = default;
  explicit Tensor3(int n) : n_(n) { data_.fill(0.0); }

  int dim() const { return n_; }
  double& operator()(int a, int b, int c) { return data_[static_cast<std::size_t>((a * n_ + b) * n_ + c)]; }
  double operator()(int a, int b, int c) const {
    return data_[static_cast<std::size_t>((a * n_ + b) * n_ + c)];
  }
  /// Frobenius norm.
  double norm() const;
  Tensor3& operator-=(const Tensor3& o);

 private:
  int n_ = 0;
  std::array<double, kMaxDim * kMaxDim * kMaxDim> data_{};
};

/// Gamma(i, j, k) = Gamma^i_{jk}.
Tensor3 christoffel(const MatJet& g);
Tensor3 christoffel(const MetricField& g, const Point& p);

/// out(p, q, r) = (nabla_r L)^p_q.
Tensor3 covariant_derivative_op(const MatJet& g, const MatJet& l);
Tensor3 covariant_derivative_op(const MetricField& g, const OperatorField& l, const Point& p);

/// out(k, i, j) = nabla_k g_ij; zero for a Levi-Civita connection.
Tensor3 metric_covariant_derivative(const MatJet& g);

/// out(i, j, k) = N^i_{jk}, antisymmetric in (j, k).
Tensor3 nijenhuis(const MatJet& l);
Tensor3 nijenhuis(const OperatorField& l, const Point& p);

/// Frobenius norm of all first partials of a jet.
double partials_norm(const MatJet& j);

Mat lie_derivative_metric(const Vec& v, const Mat& dv, const MatJet& g);
Mat lie_derivative_metric(const VectorField& v, const MetricField& g, const Point& p);

}  // namespace geq
