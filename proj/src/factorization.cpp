#include <algorithm>
#include <cmath>
#include <numeric>

#include "geq/equiv.hpp"

namespace geq::equiv {
namespace {

double gap_tolerance(double scale) { return 1e-6 * (1.0 + scale); }

// Straight-line sub-steps so that consecutive eigenvalue sets stay close.
int substeps(const Chart& chart, const Point& a, const Point& b) {
  const double len = 0.05 * chart.min_width();
  return std::max(1, static_cast<int>(std::ceil((b - a).norm() / len)));
}

GroupValues track_path(const OperatorField& L, GroupValues state, const Point& from, const Point& to) {
  const int steps = substeps(L.chart(), from, to);
  for (int s = 1; s <= steps; ++s) {
    const Point q = from + (static_cast<double>(s) / steps) * (to - from);
    const Mat lq = L.value(q);
    state = track_step(state, smallmat::eigenvalues(lq), lq.norm(), q);
  }
  return state;
}

std::size_t nearest(const std::vector<std::pair<Point, GroupValues>>& path, const Point& p) {
  std::size_t best = 0;
  double bd = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < path.size(); ++i) {
    const double d = (path[i].first - p).norm();
    if (d < bd) {
      bd = d;
      best = i;
    }
  }
  return best;
}

bool conjugation_closed(const std::vector<Complex>& own, const std::vector<Complex>& other, double tol) {
  for (const auto& z : own) {
    if (std::abs(z.imag()) <= tol) continue;
    double d_own = std::numeric_limits<double>::infinity(), d_other = d_own;
    for (const auto& w : own) d_own = std::min(d_own, std::abs(w - std::conj(z)));
    for (const auto& w : other) d_other = std::min(d_other, std::abs(w - std::conj(z)));
    if (d_other < d_own) return false;
  }
  return true;
}

}  // namespace

GroupValues track_step(const GroupValues& prev, const std::vector<Complex>& cur, double scale,
                       const std::optional<Point>& where) {
  std::vector<Complex> old = prev.group1;
  old.insert(old.end(), prev.group2.begin(), prev.group2.end());
  const std::size_t r = prev.group1.size();
  if (old.size() != cur.size()) throw Error(ErrorCode::InvalidInput, "track: dimension changed", where);

  struct Pair {
    double d;
    std::size_t i, j;
  };
  std::vector<Pair> pairs;
  pairs.reserve(old.size() * cur.size());
  for (std::size_t i = 0; i < old.size(); ++i)
    for (std::size_t j = 0; j < cur.size(); ++j) pairs.push_back({std::abs(old[i] - cur[j]), i, j});
  std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) { return a.d < b.d; });

  std::vector<int> label(cur.size(), -1);
  std::vector<std::size_t> match(old.size(), 0);
  std::vector<bool> used(old.size(), false);
  std::size_t assigned = 0;
  for (const auto& pr : pairs) {
    if (used[pr.i] || label[pr.j] >= 0) continue;
    used[pr.i] = true;
    match[pr.i] = pr.j;
    label[pr.j] = pr.i < r ? 1 : 2;
    if (++assigned == cur.size()) break;
  }

  // Real eigenvalues of different groups that swap order met in between.
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t k = r; k < old.size(); ++k) {
      const Complex a0 = old[i], b0 = old[k], a1 = cur[match[i]], b1 = cur[match[k]];
      if (a0.imag() != 0.0 || b0.imag() != 0.0 || a1.imag() != 0.0 || b1.imag() != 0.0) continue;
      if ((a0.real() - b0.real()) * (a1.real() - b1.real()) < 0.0) {
        throw Error(ErrorCode::AdmissibilityViolation, "factorization: eigenvalues of different groups cross",
                    where);
      }
    }

  GroupValues out;
  for (std::size_t j = 0; j < cur.size(); ++j) (label[j] == 1 ? out.group1 : out.group2).push_back(cur[j]);

  double gap = std::numeric_limits<double>::infinity();
  for (const auto& a : out.group1)
    for (const auto& b : out.group2) gap = std::min(gap, std::abs(a - b));
  if (gap < gap_tolerance(scale)) {
    throw Error(ErrorCode::AdmissibilityViolation,
                "factorization: eigenvalue groups meet (gap " + std::to_string(gap) + ")", where);
  }
  const double tol = 1e-9 * (1.0 + scale);
  if (!conjugation_closed(out.group1, out.group2, tol) || !conjugation_closed(out.group2, out.group1, tol)) {
    throw Error(ErrorCode::ConjugationViolation, "factorization: a conjugate pair is split between groups",
                where);
  }
  return out;
}

FactorizationResult::FactorizationResult(OperatorField L, Spectrum base,
                                         std::vector<std::pair<Point, GroupValues>> path)
    : L_(std::move(L)), base_(std::move(base)), path_(std::move(path)) {}

GroupValues FactorizationResult::groups_at(const Point& p) const {
  const auto& start = path_[nearest(path_, p)];
  if (start.first == p) return start.second;
  return track_path(L_, start.second, start.first, p);
}

std::pair<MonicPoly, MonicPoly> FactorizationResult::chis_at(const Point& p) const {
  const GroupValues gv = groups_at(p);
  return {MonicPoly::from_roots(gv.group1), MonicPoly::from_roots(gv.group2)};
}

std::pair<Mat, Mat> FactorizationResult::projectors_at(const Point& p) const {
  const GroupValues gv = groups_at(p);
  const Mat lp = L_.value(p);
  const double radius = 1e-8 * (1.0 + lp.norm());
  const Spectrum s1 = smallmat::cluster_spectrum(gv.group1, radius);
  const Spectrum s2 = smallmat::cluster_spectrum(gv.group2, radius);
  return {smallmat::matrix_function(lp, smallmat::indicator_function(s1, s2)),
          smallmat::matrix_function(lp, smallmat::indicator_function(s2, s1))};
}

FactorizationResult admissible_factorization(const OperatorField& L, const Grouping& grouping,
                                             const std::vector<Point>& samples) {
  const Point& base = L.chart().base;
  const Mat lb = L.value(base);
  const Spectrum spectrum = smallmat::eigen(lb);
  const int m = static_cast<int>(spectrum.values.size());
  if (m < 2) {
    throw Error(ErrorCode::AdmissibilityViolation,
                "factorization: L has a single eigenvalue at the base point, no admissible factorization", base);
  }

  std::vector<int> owner(static_cast<std::size_t>(m), 0);
  for (const auto* grp : {&grouping.group1, &grouping.group2}) {
    if (grp->empty()) throw Error(ErrorCode::InvalidInput, "factorization: empty group");
    for (int idx : *grp) {
      if (idx < 0 || idx >= m)
        throw Error(ErrorCode::InvalidInput, "factorization: eigenvalue index " + std::to_string(idx) +
                                                 " outside 0.." + std::to_string(m - 1));
      if (owner[static_cast<std::size_t>(idx)] != 0)
        throw Error(ErrorCode::InvalidInput, "factorization: eigenvalue index listed twice");
      owner[static_cast<std::size_t>(idx)] = grp == &grouping.group1 ? 1 : 2;
    }
  }
  if (std::find(owner.begin(), owner.end(), 0) != owner.end())
    throw Error(ErrorCode::InvalidInput, "factorization: grouping does not cover the spectrum");

  // Raw eigenvalues take the group of the nearest clustered value.
  GroupValues state;
  for (const auto& z : smallmat::eigenvalues(lb)) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < spectrum.values.size(); ++c)
      if (std::abs(spectrum.values[c].value - z) < std::abs(spectrum.values[best].value - z)) best = c;
    (owner[best] == 1 ? state.group1 : state.group2).push_back(z);
  }
  state = track_step(state, smallmat::eigenvalues(lb), lb.norm(), base);

  std::vector<std::pair<Point, GroupValues>> path{{base, state}};
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return (samples[a] - base).norm() < (samples[b] - base).norm();
  });
  for (std::size_t idx : order) {
    const Point& q = samples[idx];
    const auto& from = path[nearest(path, q)];
    path.emplace_back(q, track_path(L, from.second, from.first, q));
  }
  return FactorizationResult(L, spectrum, std::move(path));
}

std::pair<OperatorField, OperatorField> projectors(const FactorizationResult& fact) {
  const Chart& c = fact.L().chart();
  return {OperatorField(MatrixField::from_closure(c, [fact](const Point& p) { return fact.projectors_at(p).first; })),
          OperatorField(MatrixField::from_closure(c, [fact](const Point& p) { return fact.projectors_at(p).second; }))};
}

std::vector<std::vector<int>> eigenvalue_clusters(const Spectrum& s) {
  std::vector<std::vector<int>> out;
  std::vector<bool> taken(s.values.size(), false);
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    if (taken[i]) continue;
    taken[i] = true;
    std::vector<int> c{static_cast<int>(i)};
    const Complex z = s.values[i].value;
    if (z.imag() != 0.0) {
      for (std::size_t j = i + 1; j < s.values.size(); ++j)
        if (!taken[j] && s.values[j].value == std::conj(z)) {
          taken[j] = true;
          c.push_back(static_cast<int>(j));
          break;
        }
    }
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace geq::equiv
