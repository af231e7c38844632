// Acceptance criteria 1-9. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "geq/commands.hpp"
#include "geq/oracle.hpp"

namespace {

using namespace geq;
using namespace geq::equiv;
namespace fs = std::filesystem;

const std::string kData = GEQ_DATA_DIR;
constexpr int kPoints = 100;
constexpr int kTrajectories = 20;
constexpr std::uint64_t kSeed = 42;

struct Named {
  std::string name;
  MetricField g, gbar;
};

struct Criterion {
  bool pass = true;
  std::vector<std::string> notes;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      notes.push_back(what);
    }
  }
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

std::vector<std::string> files_in(const std::string& dir) {
  std::vector<std::string> out;
  for (const auto& e : fs::directory_iterator(kData + "/" + dir)) out.push_back(e.path().string());
  std::sort(out.begin(), out.end());
  return out;
}

std::string stem(const std::string& path) { return fs::path(path).stem().string(); }

struct Corpus {
  std::vector<Named> pairs;
  std::vector<LeviCivitaParams> param_sets;
};

Corpus load_corpus() {
  Corpus c;
  for (const auto& f : files_in("lc")) {
    const auto params = cli::load_lc_params(f);
    const auto pair = levi_civita_pair(params);
    c.param_sets.push_back(params);
    c.pairs.push_back({stem(f), pair.g, pair.gbar});
  }
  return c;
}

Named load_named(const std::string& path) {
  const auto s = cli::load_scene(path);
  return {stem(path), s.g, s.gbar};
}

double max_compatibility(const MetricField& g, const MetricField& gbar) {
  const OperatorField l = L_field(g, gbar);
  double worst = 0.0;
  for (const auto& p : sample_points(g.chart(), kPoints, kSeed))
    worst = std::max(worst, compatibility_residual(g.jet(p), l.jet(p)).value);
  return worst;
}

double max_defect(const MetricField& g, const MetricField& gbar) {
  return oracle::run_oracle(g, gbar, kTrajectories, kSeed).max;
}

// The pole of 1/(z - c) sits 0.5 below the smallest real eigenvalue part of L
// over the sample points.
std::vector<std::pair<std::string, ScalarFunction>> function_family(const Named& pair) {
  const OperatorField l = L_field(pair.g, pair.gbar);
  double lowest = INFINITY;
  for (const auto& p : sample_points(pair.g.chart(), kPoints, kSeed))
    for (const Complex z : smallmat::eigenvalues(l.value(p))) lowest = std::min(lowest, z.real());
  const double c = lowest - 0.5;
  return {{"z", ScalarFunction::polynomial({0, 1})},
          {"z^2", ScalarFunction::polynomial({0, 0, 1})},
          {"1/(z-c)", ScalarFunction::reciprocal(c)},
          {"exp", ScalarFunction::exponential()}};
}

// Splits of a pair: each eigenvalue cluster at the base point against the rest.
struct NamedSplit {
  std::string name;
  const Named* pair;
  SplitResult split;
  std::vector<Point> samples;
};

std::vector<NamedSplit> corpus_splits(const Corpus& corpus) {
  std::vector<NamedSplit> out;
  for (const auto& pr : corpus.pairs) {
    const OperatorField l = L_field(pr.g, pr.gbar);
    const Chart& c = pr.g.chart();
    const Spectrum base = smallmat::eigen(l.value(c.base));
    const auto clusters = eigenvalue_clusters(base);
    if (clusters.size() < 2) continue;
    const auto samples = sample_points(c, kPoints, kSeed);
    for (const auto& cl : clusters) {
      Grouping grouping;
      grouping.group1 = cl;
      for (int i = 0; i < static_cast<int>(base.values.size()); ++i)
        if (std::find(cl.begin(), cl.end(), i) == cl.end()) grouping.group2.push_back(i);
      std::string name = pr.name + " [";
      for (int i : cl) name += std::to_string(i);
      name += "]";
      out.push_back({name, &pr, split(pr.g, pr.gbar, admissible_factorization(l, grouping, samples)), samples});
    }
  }
  return out;
}

Criterion corpus_soundness(const Corpus& corpus) {
  Criterion c;
  std::set<int> dims;
  bool simple = false, multiple = false;
  for (const auto& s : corpus.param_sets) {
    dims.insert(s.chart.dim);
    simple = simple || !s.simple.empty();
    multiple = multiple || !s.blocks.empty();
  }
  c.require(corpus.pairs.size() >= 10, "fewer than 10 corpus param_sets");
  c.require(dims == std::set<int>{2, 3, 4}, "corpus dimensions must cover 2..4");
  c.require(simple && multiple, "corpus needs simple and multiple eigenvalues");
  double worst_res = 0.0, worst_def = 0.0;
  for (const auto& p : corpus.pairs) {
    const double r = max_compatibility(p.g, p.gbar), d = max_defect(p.g, p.gbar);
    worst_res = std::max(worst_res, r);
    worst_def = std::max(worst_def, d);
    c.require(r <= 1e-9, p.name + " residual " + sci(r));
    c.require(d <= 1e-5, p.name + " defect " + sci(d));
  }
  double least_res = INFINITY, least_def = INFINITY;
  for (const auto& f : files_in("negative")) {
    const auto n = load_named(f);
    const double r = max_compatibility(n.g, n.gbar), d = max_defect(n.g, n.gbar);
    least_res = std::min(least_res, r);
    least_def = std::min(least_def, d);
    c.require(r >= 1e3 * 1e-9, n.name + " residual only " + sci(r));
    c.require(d >= 1e3 * 1e-5, n.name + " defect only " + sci(d));
  }
  c.notes.insert(c.notes.begin(), std::to_string(corpus.pairs.size()) + " pairs, max residual " + sci(worst_res) +
                                      ", max defect " + sci(worst_def) + "; negatives min residual " +
                                      sci(least_res) + ", min defect " + sci(least_def));
  return c;
}

Criterion nijenhuis_vanishes(const Corpus& corpus) {
  Criterion c;
  double worst_l = 0.0, worst_f = 0.0;
  for (const auto& p : corpus.pairs) {
    const OperatorField l = L_field(p.g, p.gbar);
    const auto samples = sample_points(p.g.chart(), kPoints, kSeed);
    for (const auto& q : samples) worst_l = std::max(worst_l, nijenhuis_residual(l.jet(q)));
    for (const auto& [fname, f] : function_family(p)) {
      // The torsion is quadratic in the operator; f(L) is rescaled to unit
      // norm at the base point so that the bound does not depend on |f(L)|.
      const double scale = smallmat::matrix_function(l.value(p.g.chart().base), f).norm();
      const OperatorField fl(MatrixField::from_closure(p.g.chart(), [l, f = f, scale](const Point& x) {
        return Mat(smallmat::matrix_function(l.value(x), f) / scale);
      }));
      double worst = 0.0;
      for (const auto& q : samples) worst = std::max(worst, nijenhuis_residual(fl.jet(q)));
      worst_f = std::max(worst_f, worst);
      c.require(worst <= 1e-4, p.name + " f=" + fname + " " + sci(worst));
    }
  }
  c.require(worst_l <= 1e-6, "Nijenhuis of L " + sci(worst_l));
  c.notes.insert(c.notes.begin(), "max |N_L|/(1+|dL|) " + sci(worst_l) + ", max over f(L) " + sci(worst_f));
  return c;
}

Criterion split_structure(const std::vector<NamedSplit>& splits) {
  Criterion c;
  double orth = 0, nh = 0, nhb = 0, cp = 0;
  for (const auto& s : splits) {
    for (const auto& p : s.samples) {
      SplitDiagnostics d;
      try {
        d = split_diagnostics(s.pair->g, s.pair->gbar, s.split, p);
        const Mat h = s.split.h.value(p), hb = s.split.hbar.value(p);
        c.require(h == h.transpose() && hb == hb.transpose(), s.name + " asymmetric h");
      } catch (const Error& e) {
        c.require(false, s.name + " " + to_string(e.code()));
        break;
      }
      orth = std::max(orth, d.orthogonality);
      nh = std::max(nh, d.nabla_h_P1);
      nhb = std::max(nhb, d.nabla_hbar_P1);
      cp = std::max({cp, d.charpoly1, d.charpoly2});
    }
  }
  c.require(!splits.empty(), "no splittable pairs");
  c.require(orth <= 1e-8, "orthogonality " + sci(orth));
  c.require(nh <= 1e-4, "nabla^h P1 " + sci(nh));
  c.require(nhb <= 1e-4, "nabla^hbar P1 " + sci(nhb));
  c.require(cp <= 1e-8, "char poly " + sci(cp));
  c.notes.insert(c.notes.begin(), std::to_string(splits.size()) + " splits; orthogonality " + sci(orth) +
                                      ", nabla P1 " + sci(std::max(nh, nhb)) + ", char poly " + sci(cp));
  return c;
}

Criterion bracket_defect(const std::vector<NamedSplit>& splits) {
  Criterion c;
  double worst = 0.0;
  for (const auto& s : splits)
    for (const auto& p : s.samples) worst = std::max(worst, split_diagnostics(s.pair->g, s.pair->gbar, s.split, p).bracket);
  c.require(!splits.empty(), "no splittable pairs");
  c.require(worst <= 1e-5, "bracket " + sci(worst));
  c.notes.insert(c.notes.begin(), std::to_string(splits.size()) + " splits; max bracket " + sci(worst));
  return c;
}

Mat permuted(const Mat& m, const std::vector<int>& perm) {
  const int n = static_cast<int>(perm.size());
  Mat out(n, n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) out(i, k) = m(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(k)]);
  return out;
}

Criterion gluing(const Corpus& corpus, const std::vector<NamedSplit>& splits) {
  Criterion c;
  auto find = [&](const std::string& name) {
    for (const auto& p : corpus.pairs)
      if (p.name == name) return p;
    throw Error(ErrorCode::InvalidInput, "missing corpus pair " + name);
  };
  const std::vector<std::pair<Named, Named>> inputs = {
      {load_named(kData + "/scenes/line_a.json"), load_named(kData + "/scenes/line_b.json")},
      {load_named(kData + "/scenes/line_varying.json"), load_named(kData + "/scenes/line_b.json")},
      {load_named(kData + "/scenes/line_varying.json"), find("lc2_weyl")},
      {load_named(kData + "/scenes/line_varying.json"), find("lc2_varying")},
      {find("lc2_varying"), find("lc2_weyl")},
      {find("lc2_lorentzian"), find("lc2_weyl")},
  };
  double res = 0, cond = 0, def = 0;
  bool indefinite = false;
  for (const auto& [a, b] : inputs) {
    const std::string name = a.name + "+" + b.name;
    const auto glued = glue({a.g, a.gbar, b.g, b.gbar, L_field(a.g, a.gbar), L_field(b.g, b.gbar)});
    const OperatorField l = L_field(glued.g, glued.gbar);
    const int n1 = a.g.dim();
    double r = 0, cc = 0;
    for (const auto& p : sample_points(glued.chart, kPoints, kSeed)) {
      const MatJet gj = glued.g.jet(p), lj = l.jet(p);
      r = std::max(r, compatibility_residual(gj, lj).value);
      const auto br = block_condition_residuals(gj, lj, n1);
      cc = std::max({cc, br.c1, br.c2, br.c3});
    }
    const double d = max_defect(glued.g, glued.gbar);
    const Eigen::SelfAdjointEigenSolver<Mat> es(glued.g.value(glued.chart.base));
    indefinite = indefinite || (es.eigenvalues().minCoeff() < 0 && es.eigenvalues().maxCoeff() > 0);
    c.require(r <= 1e-5, name + " residual " + sci(r));
    c.require(cc <= 1e-5, name + " conditions " + sci(cc));
    c.require(d <= 1e-5, name + " defect " + sci(d));
    res = std::max(res, r);
    cond = std::max(cond, cc);
    def = std::max(def, d);
  }
  c.require(indefinite, "no indefinite glued pair");

  // split followed by glue with the restricted operators.
  double round_trip = 0.0;
  for (const auto& s : splits) {
    const auto& pr = *s.pair;
    const int n = pr.g.dim();
    const Mat p1 = s.split.P1.value(pr.g.chart().base);
    std::vector<int> d1, d2;
    for (int i = 0; i < n; ++i) (p1(i, i) > 0.5 ? d1 : d2).push_back(i);
    std::vector<int> perm = d1;
    perm.insert(perm.end(), d2.begin(), d2.end());
    const int r = static_cast<int>(d1.size());
    const OperatorField l = L_field(pr.g, pr.gbar);
    for (const auto& p : s.samples) {
      const Mat h = permuted(s.split.h.value(p), perm), hb = permuted(s.split.hbar.value(p), perm);
      const Mat lv = permuted(l.value(p), perm);
      const auto [g, gb] = glue_pointwise(h.topLeftCorner(r, r), hb.topLeftCorner(r, r), lv.topLeftCorner(r, r),
                                          h.bottomRightCorner(n - r, n - r), hb.bottomRightCorner(n - r, n - r),
                                          lv.bottomRightCorner(n - r, n - r), p);
      const Mat g0 = permuted(pr.g.value(p), perm), gb0 = permuted(pr.gbar.value(p), perm);
      round_trip = std::max({round_trip, (g - g0).cwiseAbs().maxCoeff() / (1 + g0.cwiseAbs().maxCoeff()),
                             (gb - gb0).cwiseAbs().maxCoeff() / (1 + gb0.cwiseAbs().maxCoeff())});
    }
  }
  c.require(round_trip <= 1e-12, "split/glue round trip " + sci(round_trip));
  c.notes.insert(c.notes.begin(), std::to_string(inputs.size()) + " glued pairs; residual " + sci(res) +
                                      ", conditions " + sci(cond) + ", defect " + sci(def) + "; round trip " +
                                      sci(round_trip));
  return c;
}

Criterion topalov_sinjukov_family(const Corpus& corpus) {
  Criterion c;
  double worst = 0.0;
  for (const auto& p : corpus.pairs) {
    for (const auto& [fname, f] : function_family(p)) {
      const auto t = topalov_sinjukov(p.g, p.gbar, f);
      const double r = max_compatibility(t.g, t.gbar);
      worst = std::max(worst, r);
      c.require(r <= 1e-5, p.name + " f=" + fname + " " + sci(r));
    }
    const auto id = topalov_sinjukov(p.g, p.gbar, cli::parse_function("id"));
    for (const auto& q : sample_points(p.g.chart(), kPoints, kSeed)) {
      const bool same = id.g.value(q) == p.g.value(q) && id.gbar.value(q) == p.gbar.value(q);
      c.require(same, p.name + " f=id changed the metrics");
      if (!same) break;
    }
  }
  c.notes.insert(c.notes.begin(), "max residual over 4 functions " + sci(worst) + "; f=id bit-identical");
  return c;
}

Criterion charpoly_identity(const Corpus& corpus) {
  Criterion c;
  double worst = 0.0;
  SplitMix64 rng(kSeed);
  for (const auto& p : corpus.pairs) {
    const OperatorField l = L_field(p.g, p.gbar);
    const auto samples = sample_points(p.g.chart(), 20, kSeed);
    for (int k = 0; k < 5; ++k) {
      const double t = -8.0 + 16.0 * rng.uniform();
      for (const auto& q : samples) {
        const auto [r, chi] = charpoly_differential_residual(l, t, q);
        worst = std::max(worst, r.norm() / (1 + std::abs(chi)));
      }
    }
  }
  c.require(worst <= 1e-5, "residual " + sci(worst));
  c.notes.insert(c.notes.begin(), "5 values of t per field, max residual " + sci(worst));
  return c;
}

VectorField vfield(const Chart& c, const std::vector<std::string>& comps) {
  std::vector<expr::Expr> e;
  for (const auto& s : comps) e.push_back(expr::parse(s, c.dim));
  return VectorField(c, e);
}

Criterion projective_fields() {
  Criterion c;
  const Chart box(Vec::Constant(2, -0.5), Vec::Constant(2, 0.5), Vec::Zero(2));
  auto metric = [&](const Chart& ch, const std::string& a, const std::string& b, const std::string& d) {
    return MetricField::from_exprs(ch, {{expr::parse(a, 2), expr::parse(b, 2)}, {expr::Expr(), expr::parse(d, 2)}});
  };
  const auto flat = metric(box, "1", "0", "1");
  const std::string w = "(1 + x0^2 + x1^2)";
  const auto sphere = metric(box, "1/" + w + " - x0^2/" + w + "^2", "-x0*x1/" + w + "^2", "1/" + w + " - x1^2/" + w + "^2");
  const std::vector<std::tuple<std::string, MetricField, VectorField>> projective = {
      {"flat x(c.x)", flat, vfield(box, {"x0*(x0 + 2*x1)", "x1*(x0 + 2*x1)"})},
      {"flat Euler", flat, vfield(box, {"x0", "x1"})},
      {"sphere d0", sphere, vfield(box, {"1", "0"})},
  };
  double worst = 0.0;
  for (const auto& [name, g, v] : projective) {
    const OperatorField lt = projective_deformation(v, g);
    const double shift = nondegenerate_shift(lt.value(box.base));
    const OperatorField shifted(MatrixField::from_closure(
        box, [lt, shift](const Point& p) { return Mat(lt.value(p) + shift * Mat::Identity(p.size(), p.size())); }));
    for (const auto& p : sample_points(box, kPoints, kSeed)) {
      const double r = compatibility_residual(g, shifted, p).value;
      worst = std::max(worst, r);
      c.require(r <= 1e-5, name + " residual " + sci(r));
      try {
        reconstruct_gbar(g.value(p), shifted.value(p), p);
      } catch (const Error& e) {
        c.require(false, name + " shifted operator " + to_string(e.code()));
      }
    }
  }
  const Chart polar(Vec::Constant(2, 0.5), Vec::Constant(2, 1.5), Vec::Constant(2, 1.0));
  const std::vector<std::tuple<std::string, MetricField, VectorField>> killing = {
      {"flat rotation", flat, vfield(box, {"-x1", "x0"})},
      {"flat translation", flat, vfield(box, {"1", "0"})},
      {"polar rotation", metric(polar, "1", "0", "x0^2"), vfield(polar, {"0", "1"})},
  };
  double worst_k = 0.0;
  for (const auto& [name, g, v] : killing)
    for (const auto& p : sample_points(g.chart(), kPoints, kSeed))
      worst_k = std::max(worst_k, projective_deformation(v, g, p).cwiseAbs().maxCoeff());
  c.require(worst_k <= 1e-12, "Killing deformation " + sci(worst_k));
  c.notes.insert(c.notes.begin(), "3 projective/affine fields, residual " + sci(worst) + "; Killing max " + sci(worst_k));
  return c;
}

std::string run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv = {"geq"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return out.str();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Criterion determinism() {
  Criterion c;
  const std::string lc3 = kData + "/corpus/lc3_simple.json";
  const std::vector<std::vector<std::string>> commands = {
      {"check", lc3},
      {"split", lc3, "--groups", "0|1,2"},
      {"glue", kData + "/scenes/line_varying.json", kData + "/corpus/lc2_weyl.json"},
      {"ts", kData + "/corpus/lc2_varying.json", "--f", "exp"},
      {"oracle", kData + "/corpus/lc4_mixed.json"},
      {"generate", kData + "/lc/lc4_mixed.json"},
  };
  for (const auto& cmd : commands) {
    const std::string a = run_cli(cmd), b = run_cli(cmd);
    c.require(!a.empty() && a == b, cmd[0] + " differs between runs");
  }
  // Separate processes with each kernel variant.
  const std::string bin = GEQ_BINARY;
  const auto tmp = fs::temp_directory_path();
  std::vector<std::string> outputs;
  for (const char* variant : {"", "GEQ_SIMD=scalar "}) {
    for (int rep = 0; rep < 2; ++rep) {
      const auto path = (tmp / ("geq_acceptance_" + std::to_string(outputs.size()) + ".json")).string();
      const std::string cmd = std::string(variant) + bin + " split " + lc3 + " --groups '0|1,2' > " + path;
      c.require(std::system(cmd.c_str()) == 0, "process run failed");
      outputs.push_back(slurp(path));
    }
  }
  for (const auto& o : outputs) c.require(o == outputs.front() && !o.empty(), "process reports differ");
  c.notes.insert(c.notes.begin(), std::to_string(commands.size()) + " commands in process, 4 process runs");
  return c;
}

}  // namespace

int main() {
  const auto start = std::chrono::steady_clock::now();
  bool all = true;
  auto report = [&](int id, const char* title, const std::function<Criterion()>& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    Criterion c;
    try {
      c = fn();
    } catch (const std::exception& e) {
      c.pass = false;
      c.notes.push_back(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    all = all && c.pass;
    std::printf("%s %d %s (%.1fs)", c.pass ? "PASS" : "FAIL", id, title, secs);
    for (std::size_t i = 0; i < c.notes.size(); ++i) std::printf("%s%s", i == 0 ? ": " : "; ", c.notes[i].c_str());
    std::printf("\n");
    std::fflush(stdout);
  };

  const Corpus corpus = load_corpus();
  std::vector<NamedSplit> splits;
  try {
    splits = corpus_splits(corpus);
  } catch (const std::exception& e) {
    std::printf("corpus splits failed: %s\n", e.what());
  }

  report(1, "corpus soundness", [&] { return corpus_soundness(corpus); });
  report(2, "Nijenhuis torsion of L and f(L)", [&] { return nijenhuis_vanishes(corpus); });
  report(3, "split metrics and parallel projectors", [&] { return split_structure(splits); });
  report(4, "integrability bracket", [&] { return bracket_defect(splits); });
  report(5, "gluing", [&] { return gluing(corpus, splits); });
  report(6, "function family transform", [&] { return topalov_sinjukov_family(corpus); });
  report(7, "characteristic polynomial identity", [&] { return charpoly_identity(corpus); });
  report(8, "projective deformations", projective_fields);
  report(9, "determinism", determinism);

  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("%s (%.1fs)\n", all ? "ALL PASS" : "SOME FAILED", secs);
  return all ? 0 : 1;
}
