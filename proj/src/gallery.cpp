#include "hmcheck/gallery.hpp"

#include <cctype>
#include <functional>
#include <map>
#include <sstream>

namespace hmc {

using nlohmann::json;

namespace {

std::vector<std::string> xs(int m, const std::string& prefix = "x") {
  std::vector<std::string> c;
  for (int i = 1; i <= m; ++i) c.push_back(prefix + std::to_string(i));
  return c;
}

std::vector<std::string> tx(int n) {
  std::vector<std::string> c{"t"};
  for (const auto& x : xs(n)) c.push_back(x);
  return c;
}

std::vector<Interval> cube(int m, double r) { return std::vector<Interval>(static_cast<std::size_t>(m), {-r, r}); }

std::string sum_sq(const std::vector<std::string>& names) {
  std::string s;
  for (std::size_t i = 0; i < names.size(); ++i) s += (i ? "+" : "") + names[i] + "^2";
  return "(" + s + ")";
}

std::string canonical(const std::string& name, const std::vector<int>& params) {
  if (params.empty()) return name;
  std::string s = name + "(";
  for (std::size_t i = 0; i < params.size(); ++i) s += (i ? "," : "") + std::to_string(params[i]);
  return s + ")";
}

void need(bool ok, const std::string& what) {
  if (!ok) throw GalleryError(what);
}

int param(const std::vector<int>& p, std::size_t i, const std::string& name) {
  need(p.size() > i, "builtin '" + name + "' needs more parameters");
  return p[i];
}

MetricChart euclidean(int m, std::vector<std::string> coords = {}) {
  if (coords.empty()) coords = xs(m);
  return MetricChart::conformal(canonical("euclidean", {m}), std::move(coords), "1", cube(m, 1.0));
}

MetricChart example32_metric(int n) {
  const std::vector<std::string> c = tx(n);
  const std::vector<std::string> x(c.begin() + 1, c.end());
  const std::string s = "(1-t^2*" + sum_sq(x) + ")";
  std::vector<std::string> upper;
  for (int i = 0; i <= n; ++i)
    for (int j = i; j <= n; ++j) {
      if (i != j) upper.push_back("0");
      else if (i == 0) upper.push_back(s + "^(" + std::to_string(2 * (n - 2)) + "/" + std::to_string(n - 1) + ")");
      else upper.push_back(s + "^(-2/" + std::to_string(n - 1) + ")");
    }
  return MetricChart::from_strings(canonical("example32_metric", {n}), c, upper, cube(n + 1, 0.9),
                                   "0.7225-t^2*" + sum_sq(x));
}

MetricChart control_nonflat(int m) {
  std::vector<std::string> upper;
  for (int i = 1; i <= m; ++i)
    for (int j = i; j <= m; ++j) {
      const std::string s = "0.1*sin(x" + std::to_string(i) + "*x" + std::to_string(j) + "+" + std::to_string(i + 2 * j) + ")";
      upper.push_back(i == j ? "1+" + s : s);
    }
  return MetricChart::from_strings(canonical("control_nonflat", {m}), xs(m), upper, cube(m, 1.0));
}

GalleryEntry metric_entry(std::string name, std::string description, MetricChart chart, json expected) {
  GalleryEntry e;
  e.name = std::move(name);
  e.kind = EntryKind::kMetric;
  e.description = std::move(description);
  chart.set_name(e.name);
  e.metric = std::move(chart);
  e.expected = std::move(expected);
  return e;
}

GalleryEntry map_entry(std::string name, std::string description, SubmersionSpec spec, json expected) {
  GalleryEntry e;
  e.name = std::move(name);
  e.kind = EntryKind::kMap;
  e.description = std::move(description);
  spec.name = e.name;
  e.map = std::move(spec);
  e.expected = std::move(expected);
  return e;
}

json flat_expectation(int m, bool flat) { return m >= 4 ? json(flat) : json(nullptr); }

using Builder = std::function<GalleryEntry(const std::vector<int>&)>;

const std::map<std::string, Builder>& builders() {
  static const std::map<std::string, Builder> table = {
      {"euclidean",
       [](const std::vector<int>& p) {
         const int m = param(p, 0, "euclidean");
         need(m >= 2 && m <= 8, "euclidean(m) needs 2 <= m <= 8");
         return metric_entry(canonical("euclidean", {m}), "flat R^m", euclidean(m),
                             {{"conformally_flat", flat_expectation(m, true)}, {"constant_curvature", 0.0}});
       }},
      {"punctured_euclidean",
       [](const std::vector<int>& p) {
         const int m = param(p, 0, "punctured_euclidean");
         need(m >= 2 && m <= 8, "punctured_euclidean(m) needs 2 <= m <= 8");
         return metric_entry(canonical("punctured_euclidean", {m}), "flat R^m sampled away from the origin",
                             MetricChart::conformal("", xs(m), "1", cube(m, 1.0), sum_sq(xs(m)) + "-0.25"),
                             {{"conformally_flat", flat_expectation(m, true)}, {"constant_curvature", 0.0}});
       }},
      {"sphere_stereo",
       [](const std::vector<int>& p) {
         const int m = param(p, 0, "sphere_stereo");
         need(m >= 2 && m <= 8, "sphere_stereo(m) needs 2 <= m <= 8");
         return metric_entry(canonical("sphere_stereo", {m}), "unit sphere in a stereographic chart",
                             MetricChart::conformal("", xs(m), "4*(1+" + sum_sq(xs(m)) + ")^-2", cube(m, 2.0)),
                             {{"conformally_flat", flat_expectation(m, true)}, {"constant_curvature", 1.0}});
       }},
      {"hyperbolic_ball",
       [](const std::vector<int>& p) {
         const int m = param(p, 0, "hyperbolic_ball");
         need(m >= 2 && m <= 8, "hyperbolic_ball(m) needs 2 <= m <= 8");
         return metric_entry(canonical("hyperbolic_ball", {m}), "Poincare ball of curvature -1",
                             MetricChart::conformal("", xs(m), "4*(1-" + sum_sq(xs(m)) + ")^-2", cube(m, 0.9),
                                                    "0.81-" + sum_sq(xs(m))),
                             {{"conformally_flat", flat_expectation(m, true)}, {"constant_curvature", -1.0}});
       }},
      {"rescaled_euclidean",
       [](const std::vector<int>& p) {
         const int m = param(p, 0, "rescaled_euclidean");
         need(m >= 2 && m <= 8, "rescaled_euclidean(m) needs 2 <= m <= 8");
         const MetricChart e = euclidean(m);
         return metric_entry(canonical("rescaled_euclidean", {m}), "flat metric times exp(2 x1 + x2^2)",
                             conformal_rescale(e, parse("exp(2*x1+x2^2)", e.coords())),
                             {{"conformally_flat", flat_expectation(m, true)}, {"constant_curvature", nullptr}});
       }},
      {"control_nonflat",
       [](const std::vector<int>& p) {
         const int m = param(p, 0, "control_nonflat");
         need(m >= 4 && m <= 8, "control_nonflat(m) needs 4 <= m <= 8");
         return metric_entry(canonical("control_nonflat", {m}), "delta plus 0.1 sin(x_i x_j + i + 2j), generic",
                             control_nonflat(m),
                             {{"conformally_flat", false}, {"constant_curvature", nullptr}, {"weyl_floor", 1e-3}});
       }},
      {"example32_metric",
       [](const std::vector<int>& p) {
         const int n = param(p, 0, "example32_metric");
         need(n >= 3 && n <= 5, "example32_metric(n) needs n in {3, 4, 5}");
         return metric_entry(canonical("example32_metric", {n}),
                             "lambda^-2 dx^2 + lambda^(2n-4) dt^2, lambda = (1 - |tx|^2)^(1/(n-1))",
                             example32_metric(n),
                             {{"conformally_flat", true}, {"constant_curvature", nullptr}});
       }},
      {"example32",
       [](const std::vector<int>& p) {
         const int n = param(p, 0, "example32");
         need(n >= 3 && n <= 5, "example32(n) needs n in {3, 4, 5}");
         SubmersionSpec s = SubmersionSpec::from_strings("", example32_metric(n), euclidean(n), xs(n), 0);
         return map_entry(canonical("example32", {n}), "(t, x) -> x on the warped domain", std::move(s),
                          {{"harmonic", true},
                           {"horizontally_conformal", true},
                           {"domain_conformally_flat", true},
                           {"classification", "integrable_horizontal"},
                           {"leaf_curvature", {{"formula", "-4*t^2"}, {"leaves", {0.0, 0.3, 0.5, 0.7}}}},
                           {"lemma15", true},
                           {"oneill", true},
                           {"prop23", n >= 4 ? json("zero") : json("vacuous")},
                           {"cor34", nullptr}});
       }},
      {"hopf",
       [](const std::vector<int>& p) {
         need(p.empty(), "hopf takes no parameters");
         MetricChart dom = MetricChart::conformal("punctured_euclidean(4)", xs(4), "1", cube(4, 1.0),
                                                  sum_sq(xs(4)) + "-0.25");
         SubmersionSpec s = SubmersionSpec::from_strings(
             "", std::move(dom), euclidean(3), {"x1^2+x2^2-x3^2-x4^2", "2*(x1*x3+x2*x4)", "2*(x2*x3-x1*x4)"});
         return map_entry("hopf", "Hopf polynomial map R^4 \\ 0 -> R^3", std::move(s),
                          {{"harmonic", true},
                           {"horizontally_conformal", true},
                           {"domain_conformally_flat", true},
                           {"classification", "killing_type"},
                           {"leaf_curvature", nullptr},
                           {"lemma15", true},
                           {"oneill", true},
                           {"prop23", "vacuous"},
                           {"cor34", "pass"}});
       }},
      {"product_projection",
       [](const std::vector<int>& p) {
         const int n = param(p, 0, "product_projection");
         need(n >= 2 && n <= 7, "product_projection(n) needs 2 <= n <= 7");
         SubmersionSpec s = SubmersionSpec::from_strings("", euclidean(n + 1, tx(n)), euclidean(n), xs(n), 0);
         return map_entry(canonical("product_projection", {n}), "(t, x) -> x, flat product", std::move(s),
                          {{"harmonic", true},
                           {"horizontally_conformal", true},
                           {"domain_conformally_flat", n + 1 >= 4 ? json(true) : json(nullptr)},
                           {"classification", "both"},
                           {"leaf_curvature", {{"formula", "0"}, {"leaves", {0.0, 0.5}}}},
                           {"lemma15", n >= 3 ? json(true) : json(nullptr)},
                           {"oneill", true},
                           {"prop23", n >= 4 ? json("zero") : json("vacuous")},
                           {"cor34", n == 3 ? json("degenerate") : json(nullptr)}});
       }},
      {"flat_projection",
       [](const std::vector<int>& p) {
         const int m = param(p, 0, "flat_projection");
         const int n = param(p, 1, "flat_projection");
         need(n >= 2 && n < m && m <= 8, "flat_projection(m, n) needs 2 <= n < m <= 8");
         std::vector<std::string> comps = xs(n);
         SubmersionSpec s = SubmersionSpec::from_strings("", euclidean(m), euclidean(n), comps);
         return map_entry(canonical("flat_projection", {m, n}), "orthogonal projection R^m -> R^n", std::move(s),
                          {{"harmonic", true},
                           {"horizontally_conformal", true},
                           {"domain_conformally_flat", m >= 4 ? json(true) : json(nullptr)},
                           {"classification", m == n + 1 ? json("both") : json(nullptr)},
                           {"leaf_curvature", nullptr},
                           {"lemma15", m == n + 1 && n >= 3 ? json(true) : json(nullptr)},
                           {"oneill", true},
                           {"prop23", n >= 4 ? json("zero") : json("vacuous")},
                           {"cor34", nullptr}});
       }},
      {"nonharmonic_warp",
       [](const std::vector<int>& p) {
         const int n = param(p, 0, "nonharmonic_warp");
         need(n >= 2 && n <= 7, "nonharmonic_warp(n) needs 2 <= n <= 7");
         const std::vector<std::string> c = tx(n);
         std::vector<std::string> upper;
         for (int i = 0; i <= n; ++i)
           for (int j = i; j <= n; ++j)
             upper.push_back(i != j ? "0" : (i == 0 ? "exp(x1+0.3*sin(t*x2))" : "1"));
         MetricChart dom = MetricChart::from_strings("", c, upper, cube(n + 1, 1.0));
         SubmersionSpec s = SubmersionSpec::from_strings("", std::move(dom), euclidean(n), xs(n), 0);
         return map_entry(canonical("nonharmonic_warp", {n}),
                          "(t, x) -> x with a warped fibre metric: a Riemannian submersion that is not harmonic",
                          std::move(s),
                          {{"harmonic", false},
                           {"horizontally_conformal", true},
                           {"domain_conformally_flat", nullptr},
                           {"classification", nullptr},
                           {"leaf_curvature", nullptr},
                           {"lemma15", nullptr},
                           {"oneill", true},
                           {"prop23", nullptr},
                           {"cor34", nullptr}});
       }},
  };
  return table;
}

}  // namespace

GalleryEntry builtin(const std::string& name, const std::vector<int>& params) {
  const auto& table = builders();
  const auto it = table.find(name);
  if (it == table.end()) throw GalleryError("unknown builtin '" + name + "'");
  return it->second(params);
}

GalleryEntry builtin(const std::string& text) {
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  const auto open = s.find('(');
  if (open == std::string::npos) return builtin(s, {});
  if (s.back() != ')') throw GalleryError("malformed builtin '" + text + "'");
  std::vector<int> params;
  std::stringstream body(s.substr(open + 1, s.size() - open - 2));
  std::string item;
  while (std::getline(body, item, ',')) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (item.empty() || used != item.size()) throw GalleryError("builtin parameter '" + item + "' is not an integer");
    params.push_back(v);
  }
  return builtin(s.substr(0, open), params);
}

std::vector<std::string> catalog() {
  return {"euclidean(4)",        "punctured_euclidean(4)", "sphere_stereo(3)",     "sphere_stereo(4)",
          "hyperbolic_ball(4)",  "rescaled_euclidean(4)",  "control_nonflat(4)",   "example32_metric(3)",
          "example32(3)",        "example32(4)",           "example32(5)",         "hopf",
          "product_projection(3)", "flat_projection(6,4)", "nonharmonic_warp(3)"};
}

// -- JSON ------------------------------------------------------------------

json to_json(const MetricChart& chart) {
  const int m = chart.dim();
  json rows = json::array();
  for (int i = 0; i < m; ++i) {
    json row = json::array();
    for (int j = i; j < m; ++j) row.push_back(chart.component(i, j).source());
    rows.push_back(row);
  }
  json box = json::array();
  for (const auto& iv : chart.box()) box.push_back({iv.lo, iv.hi});
  json j = {{"name", chart.name()}, {"dimension", m}, {"coordinates", chart.coords()}, {"metric", rows}, {"box", box}};
  if (chart.constraint()) j["constraint"] = chart.constraint()->source();
  return j;
}

json to_json(const SubmersionSpec& spec) {
  json comps = json::array();
  for (const auto& c : spec.components) comps.push_back(c.source());
  json j = {{"name", spec.name}, {"domain", to_json(spec.domain)}, {"codomain", to_json(spec.codomain)},
            {"components", comps}};
  if (spec.leaf_coordinate) j["leaf_coordinate"] = *spec.leaf_coordinate;
  return j;
}

namespace {

const json& field(const json& j, const char* key, const std::string& where) {
  if (!j.is_object()) throw std::invalid_argument(where + ": expected an object");
  const auto it = j.find(key);
  if (it == j.end()) throw std::invalid_argument(where + ": missing field \"" + key + "\"");
  return *it;
}

std::string as_string(const json& j, const std::string& where) {
  if (!j.is_string()) throw std::invalid_argument(where + ": expected a string");
  return j.get<std::string>();
}

MetricChart chart_from(const json& j, const std::string& where) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    const std::string prefix = "builtin:";
    if (s.rfind(prefix, 0) != 0) throw std::invalid_argument(where + ": chart string must start with \"builtin:\"");
    GalleryEntry e = builtin(s.substr(prefix.size()));
    if (e.kind != EntryKind::kMetric) throw std::invalid_argument(where + ": builtin '" + e.name + "' is not a metric");
    return *e.metric;
  }
  return metric_from_json(j);
}

}  // namespace

MetricChart metric_from_json(const json& j) {
  const std::string name = j.is_object() && j.contains("name") ? as_string(j["name"], "metric.name") : "metric";
  const std::string where = "metric '" + name + "'";
  const json& coords_j = field(j, "coordinates", where);
  if (!coords_j.is_array()) throw std::invalid_argument(where + ": \"coordinates\" must be an array");
  std::vector<std::string> coords;
  for (const auto& c : coords_j) coords.push_back(as_string(c, where + ".coordinates"));
  const int m = static_cast<int>(coords.size());
  if (j.contains("dimension")) {
    if (!j["dimension"].is_number_integer() || j["dimension"].get<int>() != m)
      throw std::invalid_argument(where + ": \"dimension\" disagrees with the coordinate list");
  }
  const json& rows = field(j, "metric", where);
  if (!rows.is_array() || static_cast<int>(rows.size()) != m)
    throw std::invalid_argument(where + ": \"metric\" must have one row per coordinate");
  bool upper = true, full = true;
  for (int i = 0; i < m; ++i) {
    if (!rows[static_cast<std::size_t>(i)].is_array()) throw std::invalid_argument(where + ": metric rows must be arrays");
    const int len = static_cast<int>(rows[static_cast<std::size_t>(i)].size());
    upper = upper && len == m - i;
    full = full && len == m;
  }
  if (!upper && !full) throw std::invalid_argument(where + ": metric must be the upper triangle or the full matrix");
  std::vector<std::string> comps;
  for (const auto& row : rows)
    for (const auto& c : row) comps.push_back(as_string(c, where + ".metric"));
  const json& box_j = field(j, "box", where);
  if (!box_j.is_array() || static_cast<int>(box_j.size()) != m)
    throw std::invalid_argument(where + ": \"box\" needs one [lo, hi] per coordinate");
  std::vector<Interval> box;
  for (const auto& iv : box_j) {
    if (!iv.is_array() || iv.size() != 2 || !iv[0].is_number() || !iv[1].is_number())
      throw std::invalid_argument(where + ": box entries must be [lo, hi] numbers");
    box.push_back({iv[0].get<double>(), iv[1].get<double>()});
  }
  std::string constraint;
  if (j.contains("constraint")) constraint = as_string(j["constraint"], where + ".constraint");
  // With m == 1 both layouts coincide; from_strings decides by count.
  return MetricChart::from_strings(name, coords, comps, box, constraint);
}

SubmersionSpec map_from_json(const json& j) {
  const std::string name = j.is_object() && j.contains("name") ? as_string(j["name"], "map.name") : "map";
  const std::string where = "map '" + name + "'";
  MetricChart dom = chart_from(field(j, "domain", where), where + ".domain");
  MetricChart cod = chart_from(field(j, "codomain", where), where + ".codomain");
  const json& comps_j = field(j, "components", where);
  if (!comps_j.is_array()) throw std::invalid_argument(where + ": \"components\" must be an array");
  std::vector<std::string> comps;
  for (const auto& c : comps_j) comps.push_back(as_string(c, where + ".components"));
  std::optional<int> leaf;
  if (j.contains("leaf_coordinate")) {
    if (!j["leaf_coordinate"].is_number_integer()) throw std::invalid_argument(where + ": leaf_coordinate must be an integer");
    leaf = j["leaf_coordinate"].get<int>();
  }
  return SubmersionSpec::from_strings(name, std::move(dom), std::move(cod), comps, leaf);
}

}  // namespace hmc
