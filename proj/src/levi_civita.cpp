#include <algorithm>
#include <charconv>
#include <cmath>

#include "geq/equiv.hpp"

namespace geq::equiv {
namespace {

std::string number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return "(" + std::string(buf, res.ptr) + ")";
}

struct Eig {
  std::string text;  // parenthesised
  int k = 1;
  std::vector<int> coords;
  double lo = 0.0, hi = 0.0;  // range over the box
  double base = 0.0;
};

void require_coords(const expr::Expr& e, const std::vector<int>& allowed, const std::string& what) {
  for (int s : e.symbols()) {
    if (std::find(allowed.begin(), allowed.end(), s) == allowed.end())
      throw Error(ErrorCode::InvalidInput, "levi_civita: " + what + " depends on x" + std::to_string(s));
  }
}

}  // namespace

LeviCivitaPair levi_civita_pair(const LeviCivitaParams& params) {
  const Chart& chart = params.chart;
  const int n = chart.dim;
  std::vector<Eig> eig;
  int next = 0;
  for (const auto& s : params.simple) {
    if (next >= n) throw Error(ErrorCode::InvalidInput, "levi_civita: more coordinates than the chart has");
    const expr::Expr e = expr::parse(s, n);
    Eig ev{"(" + s + ")", 1, {next}, 0, 0, 0};
    require_coords(e, ev.coords, "eigenvalue " + s);
    // Range along the eigenvalue's own coordinate.
    ev.lo = std::numeric_limits<double>::infinity();
    ev.hi = -ev.lo;
    Point p = chart.base;
    constexpr int kGrid = 257;
    for (int t = 0; t < kGrid; ++t) {
      p(next) = chart.lo(next) + (chart.hi(next) - chart.lo(next)) * t / (kGrid - 1);
      const double v = expr::eval(e, p);
      if (!std::isfinite(v)) throw Error(ErrorCode::DomainError, "levi_civita: eigenvalue not finite on the box", p);
      ev.lo = std::min(ev.lo, v);
      ev.hi = std::max(ev.hi, v);
    }
    ev.base = expr::eval(e, chart.base);
    eig.push_back(ev);
    ++next;
  }
  for (const auto& b : params.blocks) {
    if (b.k < 2 || static_cast<int>(b.metric.size()) != b.k)
      throw Error(ErrorCode::InvalidInput, "levi_civita: block needs k >= 2 and a k x k metric");
    Eig ev{number(b.lambda), b.k, {}, b.lambda, b.lambda, b.lambda};
    for (int i = 0; i < b.k; ++i) ev.coords.push_back(next + i);
    next += b.k;
    if (next > n) throw Error(ErrorCode::InvalidInput, "levi_civita: more coordinates than the chart has");
    eig.push_back(ev);
  }
  if (next != n) throw Error(ErrorCode::InvalidInput, "levi_civita: blocks do not cover the chart");
  if (!params.signs.empty() && params.signs.size() != eig.size())
    throw Error(ErrorCode::InvalidInput, "levi_civita: one sign per block expected");

  for (std::size_t i = 0; i < eig.size(); ++i) {
    if (eig[i].lo <= 0.0 && eig[i].hi >= 0.0)
      throw Error(ErrorCode::NonPositiveWeight, "levi_civita: eigenvalue " + eig[i].text + " vanishes on the box");
    for (std::size_t j = i + 1; j < eig.size(); ++j) {
      const double gap = std::max(eig[i].lo - eig[j].hi, eig[j].lo - eig[i].hi);
      if (gap <= 1e-9 * (1.0 + std::abs(eig[i].base)))
        throw Error(ErrorCode::EigenvalueCollision,
                    "levi_civita: eigenvalues " + eig[i].text + " and " + eig[j].text + " meet on the box");
    }
  }

  // Product of all eigenvalues with multiplicity, for rho_i.
  std::string all = "1";
  double all_base = 1.0;
  for (const auto& e : eig) {
    all += "*" + e.text + "^" + std::to_string(e.k);
    all_base *= std::pow(e.base, e.k);
  }
  std::vector<int> rho_sign(eig.size());
  for (std::size_t i = 0; i < eig.size(); ++i) rho_sign[i] = eig[i].base * all_base > 0 ? 1 : -1;
  const bool all_neg = std::all_of(rho_sign.begin(), rho_sign.end(), [](int s) { return s < 0; });
  const bool all_pos = std::all_of(rho_sign.begin(), rho_sign.end(), [](int s) { return s > 0; });
  if (!all_neg && !all_pos)
    throw Error(ErrorCode::NonPositiveWeight, "levi_civita: the weights rho_i have mixed signs on the box");
  const std::string rho_prefix = all_neg ? "-1" : "1";

  LeviCivitaPair out;
  out.g_text.assign(static_cast<std::size_t>(n), std::vector<std::string>(static_cast<std::size_t>(n), "0"));
  out.gbar_text = out.g_text;
  std::size_t block = 0;
  for (std::size_t i = 0; i < eig.size(); ++i) {
    std::string p = "1";
    double p_base = 1.0;
    for (std::size_t j = 0; j < eig.size(); ++j) {
      if (j == i) continue;
      p += "*(" + eig[i].text + " - " + eig[j].text + ")^" + std::to_string(eig[j].k);
      p_base *= std::pow(eig[i].base - eig[j].base, eig[j].k);
    }
    int sign = p_base > 0 ? 1 : -1;
    if (!params.signs.empty()) sign *= params.signs[i] < 0 ? -1 : 1;
    const std::string coef = (sign < 0 ? "-1" : "1") + std::string("*(") + p + ")";
    const std::string rho = rho_prefix + "/(" + eig[i].text + "*" + all + ")";
    for (int e = 0; e < eig[i].k; ++e) out.eigenvalues.push_back(eig[i].text);

    const auto& c = eig[i].coords;
    if (eig[i].k == 1) {
      const auto ci = static_cast<std::size_t>(c[0]);
      out.g_text[ci][ci] = coef;
      out.gbar_text[ci][ci] = coef + "*" + rho;
    } else {
      const auto& b = params.blocks[block++];
      for (int a = 0; a < b.k; ++a) {
        if (static_cast<int>(b.metric[static_cast<std::size_t>(a)].size()) != b.k)
          throw Error(ErrorCode::InvalidInput, "levi_civita: block metric must be k x k");
        for (int d = a; d < b.k; ++d) {
          const std::string& h = b.metric[static_cast<std::size_t>(a)][static_cast<std::size_t>(d)];
          require_coords(expr::parse(h, n), c, "block metric entry " + h);
          const auto ra = static_cast<std::size_t>(c[static_cast<std::size_t>(a)]);
          const auto rd = static_cast<std::size_t>(c[static_cast<std::size_t>(d)]);
          out.g_text[ra][rd] = coef + "*(" + h + ")";
          out.gbar_text[ra][rd] = coef + "*" + rho + "*(" + h + ")";
        }
      }
    }
  }

  auto build = [&](const std::vector<std::vector<std::string>>& text) {
    std::vector<std::vector<expr::Expr>> e(static_cast<std::size_t>(n), std::vector<expr::Expr>(static_cast<std::size_t>(n)));
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j)
        e[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
            expr::parse(text[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)], n);
    return MetricField::from_exprs(chart, e);
  };
  out.g = build(out.g_text);
  out.gbar = build(out.gbar_text);
  return out;
}

}  // namespace geq::equiv
