#include <cmath>

#include "geq/equiv.hpp"

namespace geq::equiv {

TransformResult topalov_sinjukov(const MetricField& g, const MetricField& gbar, const ScalarFunction& f) {
  if (f.constant() && *f.constant() == 1.0) return {g, gbar};
  auto fl = [g, gbar, f](const Point& p) {
    const Mat l = compute_L(g.value(p), gbar.value(p), p).L;
    for (const auto& z : smallmat::eigenvalues(l)) {
      if (!f.in_domain(z)) throw Error(ErrorCode::DomainViolation, "transform: spectrum outside the domain of " + f.name(), p);
      if (std::abs(f(z)) <= 1e-12) throw Error(ErrorCode::ZeroInImage, "transform: f vanishes on the spectrum of L", p);
    }
    return smallmat::matrix_function(l, f);
  };
  const Chart& c = g.chart();
  return {MetricField(MatrixField::from_closure(c, [g, fl](const Point& p) { return smallmat::matmul(g.value(p), fl(p)); })),
          MetricField(MatrixField::from_closure(c, [gbar, fl](const Point& p) { return smallmat::matmul(gbar.value(p), fl(p)); }))};
}

}  // namespace geq::equiv
