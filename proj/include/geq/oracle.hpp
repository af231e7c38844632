#pragma once

// Dynamical cross-check of geodesic equivalence: integrate geodesics of g and
// measure how far each one is from an unparameterised geodesic of gbar.

#include <cstdint>
#include <vector>

#include "geq/fields.hpp"

namespace geq::oracle {

struct IntegratorOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  int samples = 64;
  int max_steps = 200000;
};

struct TrajectorySample {
  double t = 0.0;
  Point x;
  Vec v;
  Vec a;  // acceleration from the geodesic equation of g
};

struct GeodesicTrajectory {
  std::vector<TrajectorySample> samples;
  int steps = 0;
  int rejected = 0;
  double max_error = 0.0;   // largest accepted normalised local error
  double energy_drift = 0.0;  // max |g(v,v) - g(v0,v0)| / |g(v0,v0)|
  bool truncated = false;     // left the chart box before t = T
};

/// Embedded Dormand-Prince 5(4) with samples at uniform times in [0, T]. A
/// trajectory leaving the box is truncated at the last sample inside it.
/// Throws LeftChart if p0 is outside the box, StepFailure if the step size
/// collapses, DegenerateMetric from the metric.
GeodesicTrajectory integrate_geodesic(const MetricField& g, const Point& p0, const Vec& v0, double T,
                                      const IntegratorOptions& opts = {});

/// Max over samples of |a - (<a,v>/<v,v>) v| / (1 + |a|) (Euclidean), with
/// a = x'' + Gammabar(x', x'). Throws ZeroVelocity.
double unparam_defect(const GeodesicTrajectory& traj, const MetricField& gbar);

struct DefectReport {
  std::vector<double> defects;  // per trajectory, in order
  double max = 0.0;
  double mean = 0.0;
  double max_energy_drift = 0.0;
  int skipped_null = 0;  // rejected near-null initial directions
  int truncated = 0;
};

/// k trajectories from points in the central half of the box with unit
/// Euclidean initial velocity and T = 0.2 * shortest box width.
DefectReport run_oracle(const MetricField& g, const MetricField& gbar, int k, std::uint64_t seed,
                        const IntegratorOptions& opts = {});

}  // namespace geq::oracle
