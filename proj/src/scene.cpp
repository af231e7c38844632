#include "geq/scene.hpp"

#include <charconv>
#include <fstream>

namespace geq::cli {
namespace {

[[noreturn]] void bad(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::InvalidInput, "scene " + path + ": " + what);
}

double number_at(const Json& j, const std::string& path) {
  if (!j.is_number()) bad(path, "expected a number");
  return j.get<double>();
}

std::string shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string expr_text(const Json& j, const std::string& path) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number()) return shortest(j.get<double>());
  bad(path, "expected an expression string");
}

Chart parse_chart(const Json& j, int dim) {
  if (!j.contains("box") || !j["box"].is_array()) bad("/box", "missing or not an array");
  const Json& box = j["box"];
  if (dim < 0) dim = static_cast<int>(box.size());
  if (dim < 1 || dim > kMaxDim) bad("/dim", "dimension must be in [1, 8]");
  if (static_cast<int>(box.size()) != dim) bad("/box", "expected " + std::to_string(dim) + " intervals");
  Vec lo(dim), hi(dim);
  for (int i = 0; i < dim; ++i) {
    const std::string p = "/box/" + std::to_string(i);
    if (!box[static_cast<std::size_t>(i)].is_array() || box[static_cast<std::size_t>(i)].size() != 2)
      bad(p, "expected [lo, hi]");
    lo(i) = number_at(box[static_cast<std::size_t>(i)][0], p + "/0");
    hi(i) = number_at(box[static_cast<std::size_t>(i)][1], p + "/1");
    if (!(lo(i) < hi(i))) bad(p, "lo must be below hi");
  }
  Point base = 0.5 * (lo + hi);
  if (j.contains("base_point")) {
    const Json& b = j["base_point"];
    if (!b.is_array() || static_cast<int>(b.size()) != dim) bad("/base_point", "expected " + std::to_string(dim) + " numbers");
    for (int i = 0; i < dim; ++i) base(i) = number_at(b[static_cast<std::size_t>(i)], "/base_point/" + std::to_string(i));
  }
  for (int i = 0; i < dim; ++i)
    if (!(base(i) >= lo(i) && base(i) <= hi(i))) bad("/base_point", "outside the box");
  return Chart(lo, hi, base);
}

expr::Expr parse_at(const std::string& text, int dim, const std::string& path) {
  try {
    return expr::parse(text, dim);
  } catch (const Error& e) {
    throw Error(e.code(), "scene " + path + ": " + e.what());
  }
}

// Upper triangle of an n x n matrix; rows may be full (entries below the
// diagonal ignored, null allowed) or hold only the n - i upper entries.
std::vector<std::vector<std::string>> parse_matrix(const Json& j, const std::string& key, int n) {
  const std::string path = "/" + key;
  if (!j.contains(key) || !j[key].is_array() || static_cast<int>(j[key].size()) != n)
    bad(path, "expected " + std::to_string(n) + " rows");
  std::vector<std::vector<std::string>> out(static_cast<std::size_t>(n), std::vector<std::string>(static_cast<std::size_t>(n), "0"));
  for (int i = 0; i < n; ++i) {
    const Json& row = j[key][static_cast<std::size_t>(i)];
    const std::string rp = path + "/" + std::to_string(i);
    if (!row.is_array()) bad(rp, "expected an array");
    const int len = static_cast<int>(row.size());
    int offset = 0;
    if (len == n) offset = 0;
    else if (len == n - i) offset = i;
    else bad(rp, "expected " + std::to_string(n) + " or " + std::to_string(n - i) + " entries");
    for (int c = 0; c < len; ++c) {
      const int col = c + offset;
      if (col < i) continue;
      const std::string ep = rp + "/" + std::to_string(c);
      out[static_cast<std::size_t>(i)][static_cast<std::size_t>(col)] = expr_text(row[static_cast<std::size_t>(c)], ep);
      parse_at(out[static_cast<std::size_t>(i)][static_cast<std::size_t>(col)], n, ep);
    }
  }
  return out;
}

MetricField build_metric(const Chart& chart, const std::vector<std::vector<std::string>>& text) {
  const int n = chart.dim;
  std::vector<std::vector<expr::Expr>> e(static_cast<std::size_t>(n), std::vector<expr::Expr>(static_cast<std::size_t>(n)));
  for (int i = 0; i < n; ++i)
    for (int k = i; k < n; ++k)
      e[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] =
          expr::parse(text[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)], n);
  return MetricField::from_exprs(chart, e);
}

}  // namespace

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidInput, "cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::InvalidInput, path + ": " + e.what());
  }
}

Scene parse_scene(const Json& j) {
  if (!j.is_object()) bad("/", "expected an object");
  if (!j.contains("dim") || !j["dim"].is_number_integer()) bad("/dim", "missing integer");
  const int dim = j["dim"].get<int>();
  if (dim < 1 || dim > kMaxDim) bad("/dim", "dimension must be in [1, 8]");
  Scene s;
  s.chart = parse_chart(j, dim);
  s.g_text = parse_matrix(j, "g", dim);
  s.gbar_text = parse_matrix(j, "gbar", dim);
  s.g = build_metric(s.chart, s.g_text);
  s.gbar = build_metric(s.chart, s.gbar_text);
  if (j.contains("vector_field") && !j["vector_field"].is_null()) {
    const Json& v = j["vector_field"];
    if (!v.is_array() || static_cast<int>(v.size()) != dim) bad("/vector_field", "expected " + std::to_string(dim) + " expressions");
    std::vector<expr::Expr> comps;
    for (int i = 0; i < dim; ++i) {
      const std::string p = "/vector_field/" + std::to_string(i);
      comps.push_back(parse_at(expr_text(v[static_cast<std::size_t>(i)], p), dim, p));
    }
    s.vector_field = VectorField(s.chart, comps);
  }
  for (const auto* m : {&s.g, &s.gbar}) {
    try {
      m->value(s.chart.base);
    } catch (const Error& e) {
      throw Error(e.code(), std::string("scene ") + (m == &s.g ? "/g" : "/gbar") + ": " + e.what(), e.where());
    }
  }
  return s;
}

Scene load_scene(const std::string& path) { return parse_scene(read_json_file(path)); }

Json scene_to_json(const Chart& chart, const std::vector<std::vector<std::string>>& g,
                   const std::vector<std::vector<std::string>>& gbar) {
  Json j;
  j["dim"] = chart.dim;
  j["box"] = Json::array();
  for (int i = 0; i < chart.dim; ++i) j["box"].push_back({chart.lo(i), chart.hi(i)});
  j["base_point"] = std::vector<double>(chart.base.data(), chart.base.data() + chart.dim);
  auto upper = [&](const std::vector<std::vector<std::string>>& m) {
    Json rows = Json::array();
    for (int i = 0; i < chart.dim; ++i) {
      Json row = Json::array();
      for (int k = 0; k < chart.dim; ++k) {
        if (k < i) row.push_back(nullptr);
        else row.push_back(m[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)]);
      }
      rows.push_back(row);
    }
    return rows;
  };
  j["g"] = upper(g);
  j["gbar"] = upper(gbar);
  return j;
}

equiv::LeviCivitaParams parse_lc_params(const Json& j) {
  if (!j.is_object()) bad("/", "expected an object");
  equiv::LeviCivitaParams s;
  s.chart = parse_chart(j, j.contains("dim") ? j["dim"].get<int>() : -1);
  const int n = s.chart.dim;
  if (j.contains("simple")) {
    if (!j["simple"].is_array()) bad("/simple", "expected an array");
    for (std::size_t i = 0; i < j["simple"].size(); ++i) {
      const std::string p = "/simple/" + std::to_string(i);
      s.simple.push_back(expr_text(j["simple"][i], p));
      parse_at(s.simple.back(), n, p);
    }
  }
  if (j.contains("blocks")) {
    if (!j["blocks"].is_array()) bad("/blocks", "expected an array");
    for (std::size_t b = 0; b < j["blocks"].size(); ++b) {
      const Json& jb = j["blocks"][b];
      const std::string p = "/blocks/" + std::to_string(b);
      if (!jb.is_object() || !jb.contains("lambda") || !jb.contains("k") || !jb.contains("metric"))
        bad(p, "expected {lambda, k, metric}");
      equiv::LeviCivitaBlock blk;
      blk.lambda = number_at(jb["lambda"], p + "/lambda");
      if (!jb["k"].is_number_integer()) bad(p + "/k", "expected an integer");
      blk.k = jb["k"].get<int>();
      if (blk.k < 2 || blk.k > n) bad(p + "/k", "block size must be in [2, dim]");
      const Json& m = jb["metric"];
      if (!m.is_array() || static_cast<int>(m.size()) != blk.k) bad(p + "/metric", "expected k rows");
      blk.metric.assign(static_cast<std::size_t>(blk.k), std::vector<std::string>(static_cast<std::size_t>(blk.k), "0"));
      for (int r = 0; r < blk.k; ++r) {
        const Json& row = m[static_cast<std::size_t>(r)];
        const std::string rp = p + "/metric/" + std::to_string(r);
        if (!row.is_array() || static_cast<int>(row.size()) != blk.k) bad(rp, "expected k entries");
        for (int c = r; c < blk.k; ++c) {
          const std::string ep = rp + "/" + std::to_string(c);
          blk.metric[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = expr_text(row[static_cast<std::size_t>(c)], ep);
          parse_at(blk.metric[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)], n, ep);
        }
      }
      s.blocks.push_back(std::move(blk));
    }
  }
  if (j.contains("signs")) {
    if (!j["signs"].is_array()) bad("/signs", "expected an array");
    for (std::size_t i = 0; i < j["signs"].size(); ++i) {
      const std::string p = "/signs/" + std::to_string(i);
      if (!j["signs"][i].is_number_integer()) bad(p, "expected +1 or -1");
      const int v = j["signs"][i].get<int>();
      if (v != 1 && v != -1) bad(p, "expected +1 or -1");
      s.signs.push_back(v);
    }
  }
  return s;
}

equiv::LeviCivitaParams load_lc_params(const std::string& path) { return parse_lc_params(read_json_file(path)); }

}  // namespace geq::cli
