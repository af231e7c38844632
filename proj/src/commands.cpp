#include "geq/commands.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "geq/oracle.hpp"

namespace geq::cli {
namespace {

using equiv::L_field;

Derivative combined(const MatrixField& a, const MatrixField& b) {
  return a.derivative() == Derivative::Exact && b.derivative() == Derivative::Exact ? Derivative::Exact
                                                                                     : Derivative::FiniteDifference;
}

const char* derivative_name(Derivative d) { return d == Derivative::Exact ? "exact" : "finite_difference"; }

double parse_number(std::string_view text, const std::string& what) {
  double v = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last || text.empty())
    throw Error(ErrorCode::InvalidInput, what + ": '" + std::string(text) + "' is not a number");
  return v;
}

std::vector<std::string> split_on(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos == std::string::npos ? std::string::npos : pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return parts;
}

bool all_pass(const Json& checks) {
  for (const auto& [name, c] : checks.items())
    if (!c["pass"].get<bool>()) return false;
  return true;
}

Json header(const std::string& command, const Options& opts) {
  Json j;
  j["command"] = command;
  j["seed"] = opts.seed;
  j["points"] = opts.points;
  return j;
}

Outcome finish(Json report) {
  const bool pass = all_pass(report["checks"]);
  report["pass"] = pass;
  return {std::move(report), pass ? kExitPass : kExitCheckFailed};
}

// Compatibility residual, Nijenhuis torsion and self-adjointness of L over
// the sample points, plus L and its spectrum at the base point.
void check_pair(const MetricField& g, const MetricField& gbar, const Options& opts, Json& report) {
  const Chart& chart = g.chart();
  const Derivative method = combined(g, gbar);
  const OperatorField l = L_field(g, gbar);

  const auto base = equiv::compute_L(g.value(chart.base), gbar.value(chart.base), chart.base);
  Json jb;
  jb["point"] = to_json(chart.base);
  jb["L"] = to_json(base.L);
  jb["spectrum"] = to_json(smallmat::eigen(base.L));
  report["base"] = jb;

  std::vector<double> compat, nij, adjoint;
  int flips = 0;
  for (const auto& p : sample_points(chart, opts.points, opts.seed)) {
    const MatJet gj = g.jet(p);
    const MatJet lj = l.jet(p);
    compat.push_back(equiv::compatibility_residual(gj, lj).value);
    nij.push_back(equiv::nijenhuis_residual(lj));
    const Mat gl = gj.v * lj.v;
    adjoint.push_back((gl - gl.transpose()).norm() / (1.0 + gl.norm()));
    if (equiv::compute_L(gj.v, gbar.value(p), p).flipped) ++flips;
  }
  const Ladder& t = opts.ladder;
  const bool exact = method == Derivative::Exact;
  report["derivatives"] = derivative_name(method);
  report["flags"]["sign_flip_at_base"] = base.flipped;
  report["flags"]["sign_flip_points"] = flips;
  report["checks"]["compatibility"] = stats(compat, t.for_derivative(method));
  report["checks"]["nijenhuis"] = stats(nij, exact ? t.nijenhuis : t.fd2);
  report["checks"]["self_adjoint"] = stats(adjoint, t.exact);
}

std::vector<std::vector<double>> lattice_axes(const Chart& chart, int k) {
  std::vector<std::vector<double>> axes(static_cast<std::size_t>(chart.dim));
  for (int i = 0; i < chart.dim; ++i)
    for (int a = 0; a < k; ++a)
      axes[static_cast<std::size_t>(i)].push_back(chart.lo(i) + (chart.hi(i) - chart.lo(i)) * a / (k - 1));
  return axes;
}

}  // namespace

equiv::Grouping parse_groups(const std::string& text) {
  const auto halves = split_on(text, '|');
  if (halves.size() != 2) throw Error(ErrorCode::InvalidInput, "groups '" + text + "': expected two groups separated by '|'");
  equiv::Grouping g;
  for (int h = 0; h < 2; ++h) {
    auto& out = h == 0 ? g.group1 : g.group2;
    for (const auto& item : split_on(halves[static_cast<std::size_t>(h)], ',')) {
      int v = 0;
      const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
      if (item.empty() || res.ec != std::errc() || res.ptr != item.data() + item.size() || v < 0)
        throw Error(ErrorCode::InvalidInput, "groups '" + text + "': '" + item + "' is not an eigenvalue index");
      out.push_back(v);
    }
  }
  return g;
}

ScalarFunction parse_function(const std::string& text) {
  if (text == "id") return ScalarFunction::constant_fn(1.0);
  if (text == "exp") return ScalarFunction::exponential();
  if (text.rfind("poly:", 0) == 0) {
    std::vector<double> coeffs;
    for (const auto& c : split_on(text.substr(5), ',')) coeffs.push_back(parse_number(c, "--f poly"));
    return ScalarFunction::polynomial(std::move(coeffs));
  }
  if (text.rfind("recip:", 0) == 0) return ScalarFunction::reciprocal(parse_number(text.substr(6), "--f recip"));
  throw Error(ErrorCode::InvalidInput, "--f '" + text + "': expected poly:c0,c1,..., recip:c, exp or id");
}

Outcome error_outcome(const std::string& command, const Error& e) {
  Json j;
  j["command"] = command;
  j["error"]["code"] = to_string(e.code());
  j["error"]["message"] = e.what();
  j["error"]["point"] = e.where() ? to_json(*e.where()) : Json(nullptr);
  j["pass"] = false;
  return {j, kExitInputError};
}

void export_grid(const std::string& path, const Chart& chart, int k,
                 const std::vector<std::pair<std::string, const MatrixField*>>& fields) {
  if (k < 2) throw Error(ErrorCode::InvalidInput, "--grid must be at least 2");
  const double nodes = std::pow(static_cast<double>(k), chart.dim);
  if (nodes > 1e6) throw Error(ErrorCode::InvalidInput, "--grid " + std::to_string(k) + " gives more than 1e6 lattice nodes");
  const auto axes = lattice_axes(chart, k);

  Json j;
  j["dim"] = chart.dim;
  j["shape"] = std::vector<int>(static_cast<std::size_t>(chart.dim), k);
  j["axes"] = axes;
  j["order"] = "row-major nodes, last coordinate fastest; row-major matrices";
  for (const auto& [name, f] : fields) j["fields"][name] = Json::array();

  std::vector<int> idx(static_cast<std::size_t>(chart.dim), 0);
  const auto total = static_cast<long>(nodes);
  for (long node = 0; node < total; ++node) {
    Point p(chart.dim);
    for (int i = 0; i < chart.dim; ++i) p(i) = axes[static_cast<std::size_t>(i)][static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
    for (const auto& [name, f] : fields) {
      const Mat m = f->value(p);
      Json flat = Json::array();
      for (int r = 0; r < m.rows(); ++r)
        for (int c = 0; c < m.cols(); ++c) flat.push_back(m(r, c));
      j["fields"][name].push_back(flat);
    }
    for (int i = chart.dim - 1; i >= 0; --i) {
      if (++idx[static_cast<std::size_t>(i)] < k) break;
      idx[static_cast<std::size_t>(i)] = 0;
    }
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidInput, "cannot write " + path);
  out << j.dump() << "\n";
}

Outcome cmd_check(const Scene& scene, const Options& opts) {
  Json r = header("check", opts);
  check_pair(scene.g, scene.gbar, opts, r);
  return finish(std::move(r));
}

Outcome cmd_split(const Scene& scene, const std::string& groups, const Options& opts) {
  const equiv::Grouping grouping = parse_groups(groups);
  Json r = header("split", opts);
  r["groups"] = {grouping.group1, grouping.group2};
  const Chart& chart = scene.chart;
  const auto samples = sample_points(chart, opts.points, opts.seed);
  const OperatorField l = L_field(scene.g, scene.gbar);
  const auto fact = equiv::admissible_factorization(l, grouping, samples);
  const auto s = equiv::split(scene.g, scene.gbar, fact);

  const auto [chi1, chi2] = fact.chis_at(chart.base);
  Json jb;
  jb["point"] = to_json(chart.base);
  jb["spectrum"] = to_json(fact.base_spectrum());
  jb["chi1"] = chi1.coeffs;
  jb["chi2"] = chi2.coeffs;
  jb["h"] = to_json(s.h.value(chart.base));
  jb["hbar"] = to_json(s.hbar.value(chart.base));
  jb["P1"] = to_json(s.P1.value(chart.base));
  r["base"] = jb;
  r["derivatives"] = derivative_name(Derivative::FiniteDifference);
  r["flags"]["sign_flip"] = s.flipped;

  std::vector<double> orth, part, nh, nhb, bracket, cp1, cp2, sym;
  for (const auto& p : samples) {
    const auto d = equiv::split_diagnostics(scene.g, scene.gbar, s, p);
    orth.push_back(d.orthogonality);
    part.push_back(d.partition);
    nh.push_back(d.nabla_h_P1);
    nhb.push_back(d.nabla_hbar_P1);
    bracket.push_back(d.bracket);
    cp1.push_back(d.charpoly1);
    cp2.push_back(d.charpoly2);
    const Mat h = s.h.value(p), hb = s.hbar.value(p);
    sym.push_back(std::max((h - h.transpose()).norm(), (hb - hb.transpose()).norm()));
  }
  const Ladder& t = opts.ladder;
  r["checks"]["orthogonality"] = stats(orth, t.algebraic);
  r["checks"]["partition"] = stats(part, t.exact);
  r["checks"]["nabla_h_P1"] = stats(nh, t.fd2);
  r["checks"]["nabla_hbar_P1"] = stats(nhb, t.fd2);
  r["checks"]["bracket"] = stats(bracket, t.fd1);
  r["checks"]["charpoly1"] = stats(cp1, t.algebraic);
  r["checks"]["charpoly2"] = stats(cp2, t.algebraic);
  r["checks"]["symmetry"] = stats(sym, 0.0);

  if (opts.export_path) {
    const MatrixField& p1 = s.P1;
    export_grid(*opts.export_path, chart, opts.grid, {{"h", &s.h}, {"hbar", &s.hbar}, {"P1", &p1}});
    r["export"] = *opts.export_path;
  }
  return finish(std::move(r));
}

Outcome cmd_glue(const Scene& first, const Scene& second, const Options& opts) {
  const OperatorField l1 = L_field(first.g, first.gbar);
  const OperatorField l2 = L_field(second.g, second.gbar);
  const auto glued = equiv::glue({first.g, first.gbar, second.g, second.gbar, l1, l2});
  const Chart& chart = glued.chart;
  const int n1 = first.chart.dim;

  Json r = header("glue", opts);
  r["trajectories"] = opts.trajectories;
  check_pair(glued.g, glued.gbar, opts, r);
  r["base"]["g"] = to_json(glued.g.value(chart.base));
  r["base"]["gbar"] = to_json(glued.gbar.value(chart.base));

  const OperatorField l = L_field(glued.g, glued.gbar);
  const Point& b = chart.base;
  auto direct_sum = [&](const Point& p) {
    Mat d = Mat::Zero(chart.dim, chart.dim);
    d.topLeftCorner(n1, n1) = l1.value(p.head(n1));
    d.bottomRightCorner(chart.dim - n1, chart.dim - n1) = l2.value(p.tail(chart.dim - n1));
    return d;
  };
  // L(glued) = sigma (L1 + L2) with one overall sign.
  const Mat lb = l.value(b), db = direct_sum(b);
  const double sigma = (lb.cwiseProduct(db)).sum() >= 0.0 ? 1.0 : -1.0;
  r["base"]["sigma"] = sigma;

  std::vector<double> c1, c2, c3, sum_err;
  for (const auto& p : sample_points(chart, opts.points, opts.seed)) {
    const MatJet lj = l.jet(p);
    const auto br = equiv::block_condition_residuals(glued.g.jet(p), lj, n1);
    c1.push_back(br.c1);
    c2.push_back(br.c2);
    c3.push_back(br.c3);
    sum_err.push_back((sigma * lj.v - direct_sum(p)).norm() / (1.0 + lj.v.norm()));
  }
  const Ladder& t = opts.ladder;
  r["checks"]["condition1"] = stats(c1, t.fd1);
  r["checks"]["condition2"] = stats(c2, t.fd1);
  r["checks"]["condition3"] = stats(c3, t.fd1);
  r["checks"]["direct_sum"] = stats(sum_err, t.algebraic);

  const auto od = oracle::run_oracle(glued.g, glued.gbar, opts.trajectories, opts.seed);
  r["checks"]["oracle_defect"] = stats(od.defects, t.fd1);
  r["flags"]["oracle_skipped_null"] = od.skipped_null;
  r["flags"]["oracle_truncated"] = od.truncated;

  if (opts.export_path) {
    export_grid(*opts.export_path, chart, opts.grid, {{"g", &glued.g}, {"gbar", &glued.gbar}});
    r["export"] = *opts.export_path;
  }
  return finish(std::move(r));
}

Outcome cmd_ts(const Scene& scene, const std::string& function, const Options& opts) {
  const ScalarFunction f = parse_function(function);
  const auto tr = equiv::topalov_sinjukov(scene.g, scene.gbar, f);
  Json r = header("ts", opts);
  r["function"] = function;
  check_pair(tr.g, tr.gbar, opts, r);
  return finish(std::move(r));
}

Outcome cmd_oracle(const Scene& scene, const Options& opts) {
  Json r;
  r["command"] = "oracle";
  r["seed"] = opts.seed;
  r["trajectories"] = opts.trajectories;
  const auto od = oracle::run_oracle(scene.g, scene.gbar, opts.trajectories, opts.seed);
  r["defects"] = od.defects;
  r["flags"]["skipped_null"] = od.skipped_null;
  r["flags"]["truncated"] = od.truncated;
  r["max_energy_drift"] = od.max_energy_drift;
  r["checks"]["defect"] = stats(od.defects, opts.ladder.fd1);
  r["checks"]["energy_drift"] = stats({od.max_energy_drift}, opts.ladder.algebraic);
  return finish(std::move(r));
}

Json cmd_generate(const equiv::LeviCivitaParams& params) {
  const auto pair = equiv::levi_civita_pair(params);
  Json j = scene_to_json(params.chart, pair.g_text, pair.gbar_text);
  j["eigenvalues"] = pair.eigenvalues;
  return j;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Numerical checks for geodesically equivalent metric pairs"};
  app.require_subcommand(1);
  Options opts;
  std::string scene_path, scene2_path, groups, function, lc_path, output_path, export_path;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--points", opts.points, "Sample points")->check(CLI::Range(1, 100000));
    sub->add_option("--seed", opts.seed, "Sampling seed");
  };
  auto* check = app.add_subcommand("check", "Compatibility, Nijenhuis and self-adjointness checks");
  check->add_option("scene", scene_path)->required();
  add_common(check);

  auto* split = app.add_subcommand("split", "Split a pair along a grouping of base eigenvalues");
  split->add_option("scene", scene_path)->required();
  split->add_option("--groups", groups, "Eigenvalue indices, e.g. 0,1|2")->required();
  split->add_option("--export", export_path, "Write h, hbar, P1 on a lattice");
  split->add_option("--grid", opts.grid, "Lattice nodes per axis")->check(CLI::Range(2, 1000));
  add_common(split);

  auto* glue = app.add_subcommand("glue", "Glue two pairs on the product chart");
  glue->add_option("scene1", scene_path)->required();
  glue->add_option("scene2", scene2_path)->required();
  glue->add_option("--export", export_path, "Write g, gbar on a lattice");
  glue->add_option("--grid", opts.grid, "Lattice nodes per axis")->check(CLI::Range(2, 1000));
  glue->add_option("--trajectories", opts.trajectories, "Oracle trajectories")->check(CLI::Range(1, 10000));
  add_common(glue);

  auto* ts = app.add_subcommand("ts", "Check (g f(L), gbar f(L))");
  ts->add_option("scene", scene_path)->required();
  ts->add_option("--f", function, "poly:c0,c1,... | recip:c | exp | id")->required();
  add_common(ts);

  auto* generate = app.add_subcommand("generate", "Scene of a Levi-Civita normal form");
  generate->add_option("params", lc_path)->required();
  generate->add_option("-o,--output", output_path, "Write the scene here instead of stdout");

  auto* orc = app.add_subcommand("oracle", "Geodesic defect of g-geodesics with respect to gbar");
  orc->add_option("scene", scene_path)->required();
  orc->add_option("--trajectories", opts.trajectories, "Trajectories")->check(CLI::Range(1, 10000));
  orc->add_option("--seed", opts.seed, "Sampling seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitInputError;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  if (!export_path.empty()) opts.export_path = export_path;
  Outcome result;
  try {
    opts.ladder = Ladder::from_env();
    if (name == "generate") {
      const Json scene = cmd_generate(load_lc_params(lc_path));
      if (output_path.empty()) {
        out << dump(scene);
      } else {
        std::ofstream f(output_path);
        if (!f) throw Error(ErrorCode::InvalidInput, "cannot write " + output_path);
        f << dump(scene);
      }
      return kExitPass;
    }
    const Scene scene = load_scene(scene_path);
    if (name == "check") result = cmd_check(scene, opts);
    else if (name == "split") result = cmd_split(scene, groups, opts);
    else if (name == "glue") result = cmd_glue(scene, load_scene(scene2_path), opts);
    else if (name == "ts") result = cmd_ts(scene, function, opts);
    else result = cmd_oracle(scene, opts);
  } catch (const Error& e) {
    result = error_outcome(name, e);
    err << "geq " << name << ": " << to_string(e.code()) << ": " << e.what() << "\n";
  }
  out << dump(result.report);
  return result.exit_code;
}

}  // namespace geq::cli
