#include "geq/oracle.hpp"

#include <algorithm>
#include <cmath>

namespace geq::oracle {
namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

using State = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 2 * kMaxDim, 1>;

Vec quadratic(const Tensor3& gam, const Vec& v) {
  const int n = gam.dim();
  Vec out = Vec::Zero(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) out(i) += gam(i, j, k) * v(j) * v(k);
  return out;
}

Vec acceleration(const MetricField& g, const Point& x, const Vec& v) { return -quadratic(christoffel(g, x), v); }

State rhs(const MetricField& g, const State& y, int n) {
  State d(2 * n);
  d.head(n) = y.tail(n);
  d.tail(n) = acceleration(g, y.head(n), y.tail(n));
  return d;
}

double energy(const MetricField& g, const Point& x, const Vec& v) { return v.dot(g.value(x) * v); }

}  // namespace

GeodesicTrajectory integrate_geodesic(const MetricField& g, const Point& p0, const Vec& v0, double T,
                                      const IntegratorOptions& opts) {
  const int n = g.dim();
  if (!g.chart().contains(p0)) throw Error(ErrorCode::LeftChart, "geodesic: start point outside the box", p0);
  if (!(T > 0.0)) throw Error(ErrorCode::InvalidInput, "geodesic: T must be positive");
  GeodesicTrajectory out;
  State y(2 * n);
  y << p0, v0;
  const double e0 = energy(g, p0, v0);
  auto record = [&](double t) {
    TrajectorySample s{t, y.head(n), y.tail(n), acceleration(g, y.head(n), y.tail(n))};
    if (e0 != 0.0) out.energy_drift = std::max(out.energy_drift, std::abs(energy(g, s.x, s.v) - e0) / std::abs(e0));
    out.samples.push_back(std::move(s));
  };
  record(0.0);

  double t = 0.0;
  double h = T / (opts.samples - 1) / 4;
  State k1 = rhs(g, y, n);
  for (int idx = 1; idx < opts.samples; ++idx) {
    const double target = T * idx / (opts.samples - 1);
    while (t < target) {
      if (out.steps + out.rejected >= opts.max_steps)
        throw Error(ErrorCode::StepFailure, "geodesic: step budget exhausted", Point(y.head(n)));
      const bool last = t + h >= target;
      const double step = last ? target - t : h;
      const State k2 = rhs(g, y + step * a21 * k1, n);
      const State k3 = rhs(g, y + step * (a31 * k1 + a32 * k2), n);
      const State k4 = rhs(g, y + step * (a41 * k1 + a42 * k2 + a43 * k3), n);
      const State k5 = rhs(g, y + step * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4), n);
      const State k6 = rhs(g, y + step * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5), n);
      const State yn = y + step * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      const State k7 = rhs(g, yn, n);
      const State err = step * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
      double enorm = 0.0;
      for (int i = 0; i < 2 * n; ++i) {
        const double sc = opts.atol + opts.rtol * std::max(std::abs(y(i)), std::abs(yn(i)));
        enorm = std::max(enorm, std::abs(err(i)) / sc);
      }
      if (!std::isfinite(enorm)) enorm = 1e10;
      const double factor = std::clamp(0.9 * std::pow(std::max(enorm, 1e-10), -0.2), 0.2, 5.0);
      if (enorm <= 1.0) {
        y = yn;
        k1 = k7;
        t = last ? target : t + step;
        ++out.steps;
        out.max_error = std::max(out.max_error, enorm);
        if (!last) h = step * factor;
      } else {
        ++out.rejected;
        h = step * factor;
      }
      if (h < 1e-14 * T) throw Error(ErrorCode::StepFailure, "geodesic: step size underflow", Point(y.head(n)));
    }
    if (!g.chart().contains(y.head(n))) {
      out.truncated = true;
      break;
    }
    record(target);
  }
  return out;
}

double unparam_defect(const GeodesicTrajectory& traj, const MetricField& gbar) {
  double worst = 0.0;
  for (const auto& s : traj.samples) {
    const double vv = s.v.squaredNorm();
    if (vv == 0.0) throw Error(ErrorCode::ZeroVelocity, "defect: zero velocity", s.x);
    const Vec a = s.a + quadratic(christoffel(gbar, s.x), s.v);
    const Vec perp = a - (a.dot(s.v) / vv) * s.v;
    worst = std::max(worst, perp.norm() / (1.0 + a.norm()));
  }
  return worst;
}

DefectReport run_oracle(const MetricField& g, const MetricField& gbar, int k, std::uint64_t seed,
                        const IntegratorOptions& opts) {
  const Chart& chart = g.chart();
  const int n = chart.dim;
  SplitMix64 rng(seed);
  DefectReport rep;
  const double T = 0.2 * chart.min_width();
  const Vec mid = 0.5 * (chart.lo + chart.hi), half = 0.25 * (chart.hi - chart.lo);
  for (int traj = 0; traj < k; ++traj) {
    Point p0(n);
    for (int i = 0; i < n; ++i) p0(i) = mid(i) + half(i) * (2.0 * rng.uniform() - 1.0);
    const Mat gv = g.value(p0);
    Vec v0(n);
    for (int attempt = 0;; ++attempt) {
      // Box-Muller normals give a uniform direction on the sphere.
      for (int i = 0; i < n; ++i) {
        const double u1 = 1.0 - rng.uniform(), u2 = rng.uniform();
        v0(i) = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
      }
      v0.normalize();
      if (std::abs(v0.dot(gv * v0)) >= 1e-3) break;
      ++rep.skipped_null;
      if (attempt > 1000) throw Error(ErrorCode::DegenerateMetric, "oracle: only null directions found", p0);
    }
    const auto tr = integrate_geodesic(g, p0, v0, T, opts);
    rep.truncated += tr.truncated ? 1 : 0;
    rep.max_energy_drift = std::max(rep.max_energy_drift, tr.energy_drift);
    rep.defects.push_back(unparam_defect(tr, gbar));
  }
  for (double d : rep.defects) {
    rep.max = std::max(rep.max, d);
    rep.mean += d;
  }
  if (!rep.defects.empty()) rep.mean /= static_cast<double>(rep.defects.size());
  return rep;
}

}  // namespace geq::oracle
