#include "benchirt/curves.hpp"

#include <algorithm>
#include <ostream>

#include "benchirt/csv.hpp"
#include "benchirt/errors.hpp"
#include "benchirt/logistic.hpp"

namespace benchirt {

std::string_view to_string(CurveKind k) {
  switch (k) {
    case CurveKind::icc: return "ICC";
    case CurveKind::acc_theoretical: return "ACC_theoretical";
    case CurveKind::acc_empirical: return "ACC_empirical";
    case CurveKind::variance_envelope: return "variance_envelope";
  }
  return "ICC";
}

namespace {

std::vector<double> linspace(double lo, double hi, int points) {
  std::vector<double> out(static_cast<std::size_t>(points));
  for (int k = 0; k < points; ++k)
    out[static_cast<std::size_t>(k)] = points == 1 ? lo : lo + (hi - lo) * k / (points - 1);
  return out;
}

}  // namespace

std::vector<double> icc_grid(const std::vector<ItemParams>& items, int points, double pad) {
  if (items.empty()) throw InputError("no items to build a curve grid from");
  if (points < 2) throw InputError("curve grid needs at least two points");
  const auto [lo, hi] = std::minmax_element(items.begin(), items.end(),
                                            [](const ItemParams& l, const ItemParams& r) { return l.b < r.b; });
  return linspace(lo->b - pad, hi->b + pad, points);
}

CurveSeries icc_curve(const ItemParams& item, const std::vector<double>& grid) {
  CurveSeries s{CurveKind::icc, item.id, grid, {}, {}};
  s.y.reserve(grid.size());
  for (double t : grid) s.y.push_back(icc_prob(t, item.a, item.b, item.c));
  return s;
}

CurveSeries theoretical_acc(const std::string& agent, double theta, double discrimination,
                            const std::vector<double>& difficulty_grid) {
  CurveSeries s{CurveKind::acc_theoretical, agent, difficulty_grid, {}, {}};
  s.y.reserve(difficulty_grid.size());
  for (double d : difficulty_grid) s.y.push_back(icc_prob(theta, discrimination, d));
  return s;
}

CurveSeries empirical_acc_curve(const std::string& agent, const std::vector<AccPoint>& acc) {
  CurveSeries s{CurveKind::acc_empirical, agent, {}, {}, {}};
  for (const auto& p : acc) {
    // equal bin means can only come from tied difficulties; keep the first
    if (!s.x.empty() && p.difficulty <= s.x.back()) continue;
    s.x.push_back(p.difficulty);
    s.y.push_back(p.mean_score);
    s.ribbon.push_back(p.variance / 2.0);
  }
  return s;
}

CurveSeries variance_envelope(int points) {
  CurveSeries s{CurveKind::variance_envelope, "bernoulli", linspace(0.0, 1.0, points), {}, {}};
  for (double x : s.x) s.y.push_back(bernoulli_variance(x));
  return s;
}

double median_positive_discrimination(const std::vector<ItemParams>& items) {
  std::vector<double> a;
  for (const auto& it : items)
    if (it.a > 0.0) a.push_back(it.a);
  if (a.empty()) return 1.0;
  std::sort(a.begin(), a.end());
  const std::size_t h = a.size() / 2;
  return a.size() % 2 ? a[h] : 0.5 * (a[h - 1] + a[h]);
}

std::vector<ItemParams> select_items(const std::vector<ItemParams>& items, const ItemSelection& sel) {
  std::vector<ItemParams> out;
  if (sel.negative_only) {
    for (const auto& it : items)
      if (it.abstruse()) out.push_back(it);
    return out;
  }
  if (!sel.top_k_by) return items;
  if (sel.k < 1) throw InputError("--k must be at least 1");
  for (const auto& it : items)
    if (it.a > 0.0) out.push_back(it);
  const auto key = [&](const ItemParams& it) { return *sel.top_k_by == RankBy::difficulty ? it.b : it.a; };
  std::stable_sort(out.begin(), out.end(), [&](const ItemParams& l, const ItemParams& r) {
    return key(l) != key(r) ? key(l) > key(r) : l.id < r.id;
  });
  if (out.size() > static_cast<std::size_t>(sel.k)) out.resize(static_cast<std::size_t>(sel.k));
  return out;
}

void write_curves_csv(std::ostream& out, const std::vector<CurveSeries>& series) {
  out << "kind,subject,x,y,ribbon\n";
  for (const auto& s : series)
    for (std::size_t k = 0; k < s.x.size(); ++k)
      out << to_string(s.kind) << ',' << csv::quote(s.subject) << ',' << csv::format_number(s.x[k]) << ','
          << csv::format_number(s.y[k]) << ',' << (s.ribbon.empty() ? "" : csv::format_number(s.ribbon[k]))
          << '\n';
}

nlohmann::json to_json(const std::vector<CurveSeries>& series) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& s : series) {
    nlohmann::json j = {{"kind", std::string(to_string(s.kind))}, {"subject", s.subject}, {"x", s.x}, {"y", s.y}};
    if (!s.ribbon.empty()) j["ribbon"] = s.ribbon;
    out.push_back(std::move(j));
  }
  return out;
}

}  // namespace benchirt
