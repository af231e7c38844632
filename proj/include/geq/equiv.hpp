#pragma once

// Geodesic equivalence of metric pairs: the operator L(g, gbar), the
// compatibility equation, admissible factorisations of the characteristic
// polynomial with the induced splitting and gluing of metric pairs, the
// Topalov-Sinjukov family, Levi-Civita normal forms and projective
// deformations.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "geq/fields.hpp"
#include "geq/smallmat.hpp"

namespace geq::equiv {

// ---------------------------------------------------------------- L tensor

struct LValue {
  Mat L;
  /// g was replaced by -g (even n+1, negative determinant ratio).
  bool flipped = false;
};

/// L = rho * gbar^{-1} g, rho the real (n+1)-th root of det gbar / det g.
LValue compute_L(const Mat& g, const Mat& gbar, const std::optional<Point>& where = std::nullopt);

struct LJet {
  MatJet L;
  bool flipped = false;
};
LJet compute_L(const MatJet& g, const MatJet& gbar, const std::optional<Point>& where = std::nullopt);

/// L as a field; exact when both metrics are.
OperatorField L_field(const MetricField& g, const MetricField& gbar);

/// gbar = g L^{-1} / det L. Throws SingularL.
Mat reconstruct_gbar(const Mat& g, const Mat& L, const std::optional<Point>& where = std::nullopt);
MetricField reconstruct_gbar(const MetricField& g, const OperatorField& L);

/// Shift c = 1 + |L| making L + c Id invertible.
double nondegenerate_shift(const Mat& L);

// ------------------------------------------------------- compatibility

struct Residual {
  double value = 0.0;  // |R| / (1 + |dL|)
  Tensor3 R;
};

Residual compatibility_residual(const MatJet& g, const MatJet& L);
Residual compatibility_residual(const MetricField& g, const OperatorField& L, const Point& p);

/// |N_L| / (1 + |dL|)
double nijenhuis_residual(const MatJet& L);

// ----------------------------------------------------- factorisation

/// Indices into the distinct eigenvalues of the base-point spectrum (canonical
/// order), one list per group.
struct Grouping {
  std::vector<int> group1, group2;
};

/// Labelled eigenvalues at one point.
struct GroupValues {
  std::vector<Complex> group1, group2;
};

class FactorizationResult {
 public:
  FactorizationResult() = default;
  FactorizationResult(OperatorField L, Spectrum base, std::vector<std::pair<Point, GroupValues>> path);

  const OperatorField& L() const { return L_; }
  const Spectrum& base_spectrum() const { return base_; }
  int r() const { return static_cast<int>(path_.front().second.group1.size()); }
  const std::vector<std::pair<Point, GroupValues>>& path() const { return path_; }

  /// Groups at p, tracked from the nearest point of the path.
  GroupValues groups_at(const Point& p) const;
  std::pair<MonicPoly, MonicPoly> chis_at(const Point& p) const;
  /// Projectors onto D1 = ker chi1(L) and D2 = ker chi2(L).
  std::pair<Mat, Mat> projectors_at(const Point& p) const;

 private:
  OperatorField L_;
  Spectrum base_;
  std::vector<std::pair<Point, GroupValues>> path_;
};

/// Tracks the base grouping over the sample points (base point first, then in
/// order of distance from it). Throws ConjugationViolation,
/// AdmissibilityViolation, InvalidInput for malformed groupings.
FactorizationResult admissible_factorization(const OperatorField& L, const Grouping& grouping,
                                             const std::vector<Point>& samples);

/// Matches cur to the labelled prev by greedy minimal distance and checks the
/// gap and conjugation closure of the result.
GroupValues track_step(const GroupValues& prev, const std::vector<Complex>& cur, double scale,
                       const std::optional<Point>& where);

std::pair<OperatorField, OperatorField> projectors(const FactorizationResult& fact);

// ------------------------------------------------------ split and glue

struct SplitResult {
  MetricField h, hbar;
  OperatorField P1, P2;
  FactorizationResult factorization;
  bool flipped = false;
};

/// Throws ZeroChiAtZero (at evaluation) if some chi_i(0) vanishes.
SplitResult split(const MetricField& g, const MetricField& gbar, const FactorizationResult& fact);

struct SplitDiagnostics {
  double orthogonality = 0.0;    // max of |P1^T g P2|, |P1^T gbar P2| relative to |g|, |gbar|
  double partition = 0.0;        // |P1 + P2 - Id|
  double nabla_h_P1 = 0.0;       // |nabla^h P1|
  double nabla_hbar_P1 = 0.0;    // |nabla^hbar P1|
  double bracket = 0.0;          // max |P2 [P1 e_i, P1 e_j]|
  double charpoly1 = 0.0;        // coefficient error of char poly of L on range P1 vs chi1
  double charpoly2 = 0.0;
};
SplitDiagnostics split_diagnostics(const MetricField& g, const MetricField& gbar, const SplitResult& s,
                                   const Point& p);

struct GlueInput {
  MetricField h1, hbar1, h2, hbar2;
  std::optional<OperatorField> L1, L2;
};

struct GlueResult {
  MetricField g, gbar;
  Chart chart;
};

/// Block-diagonal glued pair on the product chart. Spectra overlap and zero
/// chi_i(0) are reported at evaluation (SpectraOverlap, ZeroChiAtZero).
GlueResult glue(const GlueInput& in);

/// Pointwise glue algebra with explicit L_i.
std::pair<Mat, Mat> glue_pointwise(const Mat& h1, const Mat& hbar1, const Mat& L1, const Mat& h2,
                                   const Mat& hbar2, const Mat& L2,
                                   const std::optional<Point>& where = std::nullopt);

/// Sign s with hbar = s * h L^{-1} / det L; NotAdapted when no sign fits.
int partner_sign(const Mat& h, const Mat& hbar, const Mat& L, const std::optional<Point>& where);

struct BlockResiduals {
  double c1 = 0.0, c2 = 0.0, c3 = 0.0;
};

/// Conditions of the product decomposition in adapted coordinates: the first
/// n1 coordinates span D1. g, L are jets over all n coordinates.
BlockResiduals block_condition_residuals(const MatJet& g, const MatJet& L, int n1);

// --------------------------------------------------- further constructions

struct TransformResult {
  MetricField g, gbar;
};

/// (g f(L), gbar f(L)); the constant-1 function returns the inputs unchanged.
TransformResult topalov_sinjukov(const MetricField& g, const MetricField& gbar, const ScalarFunction& f);

struct LeviCivitaBlock {
  double lambda = 0.0;
  int k = 0;
  /// k x k expression strings in global coordinate names (upper triangle used).
  std::vector<std::vector<std::string>> metric;
};

struct LeviCivitaParams {
  Chart chart;
  std::vector<std::string> simple;  // lambda_i, depending on x_i only
  std::vector<LeviCivitaBlock> blocks;
  std::vector<int> signs;  // optional, one +-1 per block (simple first)
};

struct LeviCivitaPair {
  MetricField g, gbar;
  /// Upper-triangle expression text of g and gbar ("0" off the blocks).
  std::vector<std::vector<std::string>> g_text, gbar_text;
  /// Eigenvalues of L with multiplicity, as expression text.
  std::vector<std::string> eigenvalues;
};

LeviCivitaPair levi_civita_pair(const LeviCivitaParams& params);

/// L~ = g^{-1} L_v g - tr(g^{-1} L_v g) / (n + 1) Id (finite-difference field).
OperatorField projective_deformation(const VectorField& v, const MetricField& g);
Mat projective_deformation(const VectorField& v, const MetricField& g, const Point& p);

/// Covector r_k of dchi(t) L - t dchi(t) - chi(t) l, with dchi by central
/// differences of the characteristic polynomial coefficients. Also returns chi(t).
std::pair<Vec, double> charpoly_differential_residual(const OperatorField& L, double t, const Point& p);

struct Factor {
  int dim = 0;
  std::vector<Complex> eigenvalues;  // base-point cluster, with multiplicity
  /// Pair whose restriction to D_i is the factor: the split with this cluster
  /// as group 1, or (g, gbar) itself when there is a single cluster.
  MetricField h, hbar;
  std::optional<SplitResult> split;
  std::vector<int> coordinates;  // adapted coordinates spanning D_i, empty if not adapted
};

/// Splits off every eigenvalue cluster (real value or conjugate pair) of L at
/// the base point. A single cluster yields one factor and no split.
std::vector<Factor> full_decompose(const MetricField& g, const MetricField& gbar,
                                   const std::vector<Point>& samples);

/// Compatibility residual of factor (h_i, hbar_i) restricted to its adapted
/// coordinates, at p. Throws NotAdapted when the factor has no coordinates.
double factor_residual(const Factor& f, const Point& p);

/// Distinct eigenvalues grouped into clusters: real values and conjugate pairs.
std::vector<std::vector<int>> eigenvalue_clusters(const Spectrum& s);

}  // namespace geq::equiv
