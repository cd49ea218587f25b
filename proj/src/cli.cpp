#include "hmcheck/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "hmcheck/gallery.hpp"
#include "hmcheck/parallel.hpp"
#include "hmcheck/verify.hpp"

namespace hmc::cli {

using nlohmann::json;

namespace {

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

json vec_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

// FNV-1a over the canonical serialization; identifies inputs, not a hash
// for integrity.
std::string digest(const json& j) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : j.dump()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct Outcome {
  std::vector<Record> records;
  json facts = json::object();
};

void append(Outcome& into, Outcome&& from) {
  for (auto& r : from.records) into.records.push_back(std::move(r));
  for (auto& [k, v] : from.facts.items()) into.facts[k] = std::move(v);
}

Record make(const std::string& subject, const std::string& check, const std::string& anchor, double tol) {
  Record r;
  r.subject = subject;
  r.check = check;
  r.anchor = anchor;
  r.tolerance = tol;
  return r;
}

Record error_record(const std::string& subject, const std::string& check, const std::string& anchor,
                    const std::exception& e) {
  Record r = make(subject, check, anchor, 0.0);
  r.pass = false;
  r.detail["error"] = e.what();
  if (const auto* s = dynamic_cast<const SamplingError*>(&e)) r.detail["point"] = vec_json(s->point());
  if (const auto* c = dynamic_cast<const CriticalPoint*>(&e)) r.detail["point"] = vec_json(c->point());
  return r;
}

// Runs `body`; evaluation failures become a failing record.
Outcome guarded(const std::string& subject, const std::string& check, const std::string& anchor,
                const std::function<Outcome()>& body) {
  try {
    return body();
  } catch (const GeometryError& e) {
    Outcome o;
    o.records.push_back(error_record(subject, check, anchor, e));
    return o;
  } catch (const VerificationError& e) {
    Outcome o;
    o.records.push_back(error_record(subject, check, anchor, e));
    return o;
  } catch (const DomainError& e) {
    Outcome o;
    o.records.push_back(error_record(subject, check, anchor, e));
    return o;
  }
}

// -- metric checks -------------------------------------------------------------

Outcome check_metric(const MetricChart& chart, const RunConfig& cfg) {
  const std::string& s = chart.name();
  return guarded(s, "conformal_flatness", "conformal flatness", [&] {
    Outcome o;
    const double tol = cfg.tol.at("flat");
    const ConformalFlatnessReport f = conformal_flatness_report(chart, cfg.samples, cfg.seed, tol);
    json facts = {{"supported", f.supported}, {"weyl_sup", f.weyl_sup}, {"isotropic_sup", f.isotropic_sup},
                  {"conformally_flat", f.conformally_flat}, {"weyl_flat", f.weyl_flat},
                  {"isotropic_flat", f.isotropic_flat}};
    if (!f.supported) {
      Record r = make(s, "conformal_flatness", "conformal flatness needs dimension at least 4", tol);
      r.pass = false;
      r.detail["reason"] = "dimension " + std::to_string(chart.dim()) + " < 4 is not supported";
      o.records.push_back(r);
    } else {
      Record w = make(s, "weyl_criterion", "conformal flatness: Weyl tensor vanishes", tol);
      w.residuals["weyl_sup"] = f.weyl_sup;
      w.pass = f.weyl_flat;
      Record i = make(s, "isotropic_criterion", "conformal flatness: curvature vanishes on isotropic planes", tol);
      i.residuals["isotropic_sup"] = f.isotropic_sup;
      i.pass = f.isotropic_flat;
      if (!f.conformally_flat) {
        w.detail["worst_point"] = vec_json(f.worst_point);
        i.detail["worst_point"] = vec_json(f.worst_point);
      }
      Record a = make(s, "criteria_agree", "Weyl and isotropic-plane criteria agree", 0.0);
      a.pass = f.weyl_flat == f.isotropic_flat;
      o.records.push_back(w);
      o.records.push_back(i);
      o.records.push_back(a);
    }
    const ConstantCurvatureReport c = constant_curvature_check(chart, std::min(cfg.samples, 20), cfg.seed, tol);
    facts["constant_curvature"] = {{"is_constant", c.is_constant}, {"estimate", c.c_estimate}, {"spread", c.spread}};
    o.facts[s] = facts;
    return o;
  });
}

// -- morphism checks -----------------------------------------------------------

struct Sup {
  double value = 0.0;
  int sample = -1;
  void take(double v, int k) {
    if (sample < 0 || v > value) {
      value = v;
      sample = k;
    }
  }
};

struct MorphismFacts {
  Sup hconf, harmonic, kernel, v_norm, theta_v, theta_h, lift_system, omega_vertical, omega_lie, commutator,
      reconstruction;
  bool one_fibre = false;
  bool equivalence = true;
  int equivalence_sample = -1;
};

MorphismFacts morphism_facts(const SubmersionSpec& spec, const RunConfig& cfg) {
  struct Point {
    double hconf, harmonic;
    FiberInvariants inv;
  };
  const bool one = spec.m() == spec.n() + 1;
  const auto pts = parallel_map<Point>(cfg.samples, [&](int k) {
    LocalMorphism lm(spec, sample_point(spec.domain, cfg.seed, k));
    Point p{lm.hconf_residual(), lm.tension().harmonic_residual, {}};
    if (one) p.inv = fiber_invariants(lm);
    return p;
  });
  MorphismFacts f;
  f.one_fibre = one;
  const double htol = cfg.tol.at("harmonic");
  for (int k = 0; k < cfg.samples; ++k) {
    const Point& p = pts[static_cast<std::size_t>(k)];
    f.hconf.take(p.hconf, k);
    f.harmonic.take(p.harmonic, k);
    if (!one) continue;
    f.kernel.take(p.inv.kernel, k);
    f.v_norm.take(p.inv.v_norm, k);
    f.theta_v.take(p.inv.theta_v, k);
    f.theta_h.take(p.inv.theta_h, k);
    f.lift_system.take(p.inv.lift_system, k);
    f.omega_vertical.take(p.inv.omega_vertical, k);
    f.omega_lie.take(p.inv.omega_lie, k);
    f.commutator.take(p.inv.lift_bracket, k);
    f.reconstruction.take(p.inv.reconstruction, k);
    const bool harmonic = p.harmonic <= htol;
    const bool commuting = p.inv.lift_bracket <= 10.0 * htol;
    if (harmonic != commuting && f.equivalence) {
      f.equivalence = false;
      f.equivalence_sample = k;
    }
  }
  return f;
}

void locate(Record& r, const SubmersionSpec& spec, const RunConfig& cfg, int sample) {
  if (r.pass || sample < 0) return;
  r.detail["sample"] = sample;
  r.detail["point"] = vec_json(sample_point(spec.domain, cfg.seed, sample));
}

Outcome check_morphism(const SubmersionSpec& spec, const RunConfig& cfg) {
  const std::string& s = spec.name;
  return guarded(s, "morphism", "harmonic morphism apparatus", [&] {
    Outcome o;
    const MorphismFacts f = morphism_facts(spec, cfg);
    const double hc = cfg.tol.at("hconf"), ht = cfg.tol.at("harmonic"), ft = cfg.tol.at("fiber"),
                 it = cfg.tol.at("invariant");
    Record r1 = make(s, "horizontal_conformality", "horizontal weak conformality of d phi", hc);
    r1.residuals["hconf_sup"] = f.hconf.value;
    r1.pass = f.hconf.value <= hc;
    locate(r1, spec, cfg, f.hconf.sample);
    Record r2 = make(s, "harmonicity", "tension field vanishes", ht);
    r2.residuals["harmonic_sup"] = f.harmonic.value;
    r2.pass = f.harmonic.value <= ht;
    locate(r2, spec, cfg, f.harmonic.sample);
    o.records.push_back(r1);
    o.records.push_back(r2);
    json facts = {{"hconf_sup", f.hconf.value}, {"harmonic_sup", f.harmonic.value}};
    if (f.one_fibre) {
      Record r3 = make(s, "fiber_data", "fundamental vector field V and its dual form theta", ft);
      const std::vector<std::pair<const char*, const Sup*>> parts = {{"kernel", &f.kernel},
                                                                     {"v_norm", &f.v_norm},
                                                                     {"theta_v", &f.theta_v},
                                                                     {"theta_h", &f.theta_h},
                                                                     {"lift_system", &f.lift_system}};
      r3.pass = true;
      int worst = -1;
      double wv = -1.0;
      for (const auto& [name, sup] : parts) {
        r3.residuals[name] = sup->value;
        r3.pass = r3.pass && sup->value <= ft;
        if (sup->value > wv) {
          wv = sup->value;
          worst = sup->sample;
        }
      }
      locate(r3, spec, cfg, worst);

      const bool harmonic = r2.pass;
      Record r4 = make(s, "omega_basic", "Omega = d theta is basic for harmonic morphisms", it);
      r4.residuals["omega_vertical"] = f.omega_vertical.value;
      r4.residuals["omega_lie"] = f.omega_lie.value;
      r4.detail["asserted"] = harmonic;
      r4.pass = !harmonic || (f.omega_vertical.value <= it && f.omega_lie.value <= 10.0 * it);
      locate(r4, spec, cfg, std::max(f.omega_vertical.sample, f.omega_lie.sample));

      Record r5 = make(s, "metric_reconstruction", "g = lambda^-2 phi*h + lambda^(2n-4) theta^2", it);
      r5.residuals["reconstruction"] = f.reconstruction.value;
      r5.pass = f.reconstruction.value <= it;
      locate(r5, spec, cfg, f.reconstruction.sample);

      Record r6 = make(s, "commutator_equivalence", "harmonic iff [V, X] = 0 for basic X", it);
      r6.residuals["commutator_sup"] = f.commutator.value;
      r6.residuals["harmonic_sup"] = f.harmonic.value;
      r6.pass = f.equivalence && (!harmonic || f.commutator.value <= it);
      locate(r6, spec, cfg, f.equivalence ? f.commutator.sample : f.equivalence_sample);
      for (Record* r : {&r3, &r4, &r5, &r6}) o.records.push_back(*r);
      facts["commutator_sup"] = f.commutator.value;
    }
    o.facts[s] = {{"morphism", facts}};
    return o;
  });
}

// -- identities ----------------------------------------------------------------

bool lemma15_applicable(const SubmersionSpec& spec) { return spec.m() == spec.n() + 1 && spec.n() >= 3; }

Outcome check_lemma15(const SubmersionSpec& spec, const RunConfig& cfg) {
  const std::string& s = spec.name;
  return guarded(s, "lemma15", "curvature relations for one-dimensional fibres", [&] {
    Outcome o;
    const double tol = cfg.tol.at("identity");
    const Lemma15Sweep w = lemma15_sweep(spec, cfg.samples, cfg.seed, cfg.tol.at("harmonic"));
    const std::vector<std::tuple<const char*, const char*, double>> eqs = {
        {"lemma15_xvyv", "curvature relation R(X,V,Y,V)", w.r11},
        {"lemma15_xyzv", "curvature relation R(X,Y,Z,V)", w.r12},
        {"lemma15_xyzh", "curvature relation R(X,Y,Z,H)", w.r13}};
    for (const auto& [check, anchor, value] : eqs) {
      Record r = make(s, check, anchor, tol);
      r.residuals["sup"] = value;
      r.pass = value <= tol;
      r.detail["frames"] = w.frames;
      if (!r.pass) {
        r.detail["sample"] = w.worst_sample;
        r.detail["point"] = vec_json(w.worst_point);
        r.detail["frame"] = w.worst_frame;
      }
      o.records.push_back(r);
    }
    o.facts[s] = {{"lemma15", {{"r11", w.r11}, {"r12", w.r12}, {"r13", w.r13}}}};
    return o;
  });
}

Outcome check_oneill(const SubmersionSpec& spec, const RunConfig& cfg) {
  const std::string& s = spec.name;
  return guarded(s, "oneill", "O'Neill relation for the rescaled submersion", [&] {
    struct Worst {
      double value = 0.0;
      int a = 0, b = 0;
    };
    const int n = spec.n();
    const auto pts = parallel_map<Worst>(cfg.samples, [&](int k) {
      LocalMorphism lm(spec, sample_point(spec.domain, cfg.seed, k));
      const Eigen::MatrixXd y = values(lm.lifts());
      Worst w;
      for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
          const double r = oneill_terms(lm, y.col(a), y.col(b)).residual;
          if (r > w.value) w = {r, a, b};
        }
      return w;
    });
    Sup sup;
    for (int k = 0; k < cfg.samples; ++k) sup.take(pts[static_cast<std::size_t>(k)].value, k);
    const double tol = cfg.tol.at("curvature");
    Record r = make(s, "oneill", "O'Neill relation R~(X,Y,X,Y) = R^N - 3/4 |V[X,Y]|^2 for lambda^2 g", tol);
    r.residuals["sup"] = sup.value;
    r.pass = sup.value <= tol;
    locate(r, spec, cfg, sup.sample);
    if (!r.pass) {
      const Worst& w = pts[static_cast<std::size_t>(sup.sample)];
      r.detail["frame"] = {w.a, w.b};
    }
    Outcome o;
    o.records.push_back(r);
    o.facts[s] = {{"oneill_sup", sup.value}};
    return o;
  });
}

Outcome check_prop23(const SubmersionSpec& spec, const RunConfig& cfg) {
  const std::string& s = spec.name;
  return guarded(s, "isotropic_integrability", "integrability tensor on isotropic horizontal planes", [&] {
    const double tol = cfg.tol.at("curvature");
    const Prop23Report p = prop23_residual(spec, cfg.samples, cfg.seed, cfg.tol.at("flat"));
    Record r = make(s, "isotropic_integrability",
                    "g(I(X,Y), I(X,Y)) = 0 on isotropic horizontal planes, conformally flat charts", tol);
    r.residuals["sup"] = p.sup;
    r.detail["vacuous"] = p.vacuous;
    r.detail["domain_conformally_flat"] = p.domain_conformally_flat;
    r.detail["codomain_conformally_flat"] = p.codomain_conformally_flat;
    const bool hypotheses = p.domain_conformally_flat && p.codomain_conformally_flat;
    r.pass = p.vacuous || (hypotheses && p.sup <= tol);
    if (!p.vacuous && !hypotheses) r.detail["reason"] = "a chart is not conformally flat";
    Outcome o;
    o.records.push_back(r);
    o.facts[s] = {{"prop23", {{"sup", p.sup}, {"vacuous", p.vacuous}}}};
    return o;
  });
}

Outcome check_identities(const SubmersionSpec& spec, const RunConfig& cfg) {
  Outcome o;
  const std::string& suite = cfg.suite;
  if (suite == "lemma15" || (suite == "all" && lemma15_applicable(spec))) append(o, check_lemma15(spec, cfg));
  if (suite == "oneill" || suite == "all") append(o, check_oneill(spec, cfg));
  if (suite == "prop23" || suite == "all") append(o, check_prop23(spec, cfg));
  return o;
}

// -- classification and the descended form ---------------------------------------

Outcome check_classify(const SubmersionSpec& spec, const RunConfig& cfg) {
  const std::string& s = spec.name;
  return guarded(s, "dichotomy", "Killing type or integrable horizontal distribution", [&] {
    Outcome o;
    const double it = cfg.tol.at("invariant");
    const ClassificationVerdict v = classify_thm31(spec, cfg.samples, cfg.seed, it);
    Record r = make(s, "dichotomy", "conformally flat domain: Killing type or integrable horizontal distribution", it);
    r.residuals["branch_sup"] = std::min(v.killing_sup, v.omega_sup);
    r.detail["killing_sup"] = v.killing_sup;
    r.detail["omega_sup"] = v.omega_sup;
    r.detail["harmonic_sup"] = v.harmonic_sup;
    r.detail["verdict"] = to_string(v.verdict);
    r.detail["hypotheses_met"] = v.hypotheses_met;
    r.detail["domain_conformally_flat"] = v.domain_conformally_flat;
    r.pass = v.hypotheses_met && v.verdict != Verdict::kNeither;
    if (!v.hypotheses_met) r.detail["reason"] = "map not harmonic or domain not conformally flat";
    o.records.push_back(r);
    json facts = {{"verdict", to_string(v.verdict)}, {"hypotheses_met", v.hypotheses_met}};
    if (v.leaf_curvature) {
      const double tol = cfg.tol.at("identity");
      Record l = make(s, "leaf_curvature", "leaves of lambda^(-2n+4) g have constant curvature", tol);
      l.residuals["spread"] = v.leaf_curvature->spread;
      json leaves = json::array();
      for (const LeafSample& ls : v.leaf_curvature->leaves)
        leaves.push_back({{"leaf", ls.leaf}, {"curvature", ls.value}, {"spread", ls.spread}, {"planes", ls.planes}});
      l.detail["leaves"] = leaves;
      l.pass = v.leaf_curvature->spread <= tol;
      o.records.push_back(l);
      facts["leaves"] = leaves;
    }
    o.facts[s] = {{"classification", facts}};
    return o;
  });
}

Outcome check_cor34(const SubmersionSpec& spec, const RunConfig& cfg, CodomainMetric metric = CodomainMetric::kRescaled) {
  const std::string& s = spec.name;
  return guarded(s, "descended_form", "descended form on (N^3, lambda^-4 h)", [&] {
    Outcome o;
    const double tol = cfg.tol.at("identity");
    const Cor34Data d = cor34_iia_check(spec, cfg.samples, cfg.seed, metric, cfg.tol.at("invariant"));
    const std::vector<std::tuple<const char*, const char*, double>> parts = {
        {"descended_closed", "alpha = *Omega-hat is closed on (N^3, lambda^-4 h)", d.closed_residual},
        {"descended_parallel", "alpha is parallel on (N^3, lambda^-4 h)", d.parallel_residual},
        {"descended_leaf_curvature", "planes of ker alpha have sectional curvature |alpha|^2", d.leafcurv_residual}};
    for (const auto& [check, anchor, value] : parts) {
      Record r = make(s, check, anchor, tol);
      r.residuals["sup"] = value;
      r.detail["degenerate"] = d.degenerate;
      r.pass = value <= tol;
      locate(r, spec, cfg, d.worst_sample);
      o.records.push_back(r);
    }
    o.facts[s] = {{"cor34",
                   {{"closed", d.closed_residual},
                    {"parallel", d.parallel_residual},
                    {"leafcurv", d.leafcurv_residual},
                    {"degenerate", d.degenerate},
                    {"alpha_norm_sq", d.alpha_norm_sq}}}};
    return o;
  });
}

// -- gallery expectations -----------------------------------------------------------

Record expectation(const std::string& subject, const std::string& key, const json& want) {
  Record r = make(subject, "expected." + key, "gallery expectation: " + key, 0.0);
  r.detail["expected"] = want;
  return r;
}

bool all_pass(const Outcome& o) {
  return std::all_of(o.records.begin(), o.records.end(), [](const Record& r) { return r.pass; });
}

std::string first_error(const Outcome& o) {
  for (const auto& r : o.records)
    if (r.detail.contains("error")) return r.detail["error"].get<std::string>();
  return "";
}

Outcome run_metric_entry(const GalleryEntry& e, const RunConfig& cfg) {
  Outcome o;
  const std::string& s = e.name;
  Outcome m = check_metric(*e.metric, cfg);
  const std::string err = first_error(m);
  const json facts = m.facts.contains(s) ? m.facts[s] : json::object();
  for (const auto& [key, want] : e.expected.items()) {
    if (want.is_null() && key != "conformally_flat") continue;
    Record r = expectation(s, key, want);
    r.tolerance = cfg.tol.at("flat");
    if (!err.empty()) {
      r.detail["error"] = err;
      r.pass = false;
    } else if (key == "conformally_flat") {
      r.residuals = {{"weyl_sup", facts["weyl_sup"]}, {"isotropic_sup", facts["isotropic_sup"]}};
      if (want.is_null()) {
        r.pass = !facts["supported"].get<bool>();
      } else {
        const bool got = facts["conformally_flat"].get<bool>();
        const bool agree = facts["weyl_flat"] == facts["isotropic_flat"];
        r.pass = facts["supported"].get<bool>() && got == want.get<bool>() && agree;
      }
    } else if (key == "constant_curvature") {
      const json& c = facts["constant_curvature"];
      const double est = c["estimate"].get<double>();
      const double miss = std::abs(est - want.get<double>()) / std::max(1.0, std::abs(est));
      r.residuals = {{"spread", c["spread"]}, {"error", miss}};
      r.detail["estimate"] = est;
      r.pass = c["is_constant"].get<bool>() && miss <= r.tolerance;
    } else if (key == "weyl_floor") {
      const double floor = want.get<double>();
      r.residuals = {{"weyl_sup", facts["weyl_sup"]}, {"isotropic_sup", facts["isotropic_sup"]}};
      r.tolerance = floor;
      r.pass = facts["weyl_sup"].get<double>() >= floor && facts["isotropic_sup"].get<double>() >= floor;
    } else {
      r.detail["error"] = "unknown expectation";
      r.pass = false;
    }
    o.records.push_back(r);
  }
  o.facts = std::move(m.facts);
  return o;
}

// Expectation `key` compared against `got`, which is computed only when needed.
Outcome run_map_entry(const GalleryEntry& e, const RunConfig& cfg) {
  Outcome o;
  const SubmersionSpec& spec = *e.map;
  const std::string& s = e.name;
  std::optional<Outcome> morph, classify, lemma, oneill, prop, cor;
  auto fold = [&](std::optional<Outcome>& slot, const std::function<Outcome()>& f) -> const Outcome& {
    if (!slot) {
      slot = f();
      for (const auto& [k, v] : slot->facts.items())
        for (const auto& [k2, v2] : v.items()) o.facts[k][k2] = v2;
    }
    return *slot;
  };
  auto sub_facts = [&](const Outcome& out, const char* key) {
    return out.facts.contains(s) && out.facts[s].contains(key) ? out.facts[s][key] : json();
  };

  for (const auto& [key, want] : e.expected.items()) {
    if (want.is_null()) continue;
    Record r = expectation(s, key, want);
    const Outcome* src = nullptr;
    if (key == "harmonic" || key == "horizontally_conformal") {
      src = &fold(morph, [&] { return check_morphism(spec, cfg); });
      const json f = sub_facts(*src, "morphism");
      if (!f.is_null()) {
        const bool harmonic_key = key == "harmonic";
        r.tolerance = cfg.tol.at(harmonic_key ? "harmonic" : "hconf");
        const double v = f[harmonic_key ? "harmonic_sup" : "hconf_sup"].get<double>();
        r.residuals["sup"] = v;
        r.pass = (v <= r.tolerance) == want.get<bool>();
      }
    } else if (key == "domain_conformally_flat") {
      Outcome m = check_metric(spec.domain, cfg);
      const std::string dn = spec.domain.name();
      if (m.facts.contains(dn)) {
        r.tolerance = cfg.tol.at("flat");
        r.residuals = {{"weyl_sup", m.facts[dn]["weyl_sup"]}, {"isotropic_sup", m.facts[dn]["isotropic_sup"]}};
        r.pass = m.facts[dn]["conformally_flat"].get<bool>() == want.get<bool>();
      } else {
        r.detail["error"] = first_error(m);
      }
    } else if (key == "classification" || key == "leaf_curvature") {
      src = &fold(classify, [&] { return check_classify(spec, cfg); });
      const json f = sub_facts(*src, "classification");
      if (!f.is_null() && key == "classification") {
        r.detail["got"] = f["verdict"];
        r.pass = f["verdict"] == want;
      } else if (!f.is_null()) {
        r.tolerance = cfg.tol.at("identity");
        const std::vector<std::string> vars{spec.domain.coords()[static_cast<std::size_t>(*spec.leaf_coordinate)]};
        const ExprAst formula = parse(want["formula"].get<std::string>(), vars);
        double worst = 0.0;
        bool covered = f.contains("leaves");
        if (covered) {
          for (const json& leaf : want["leaves"]) {
            bool found = false;
            for (const json& got : f["leaves"])
              if (got["leaf"] == leaf) {
                found = true;
                const double expect = eval<double>(formula, {leaf.get<double>()});
                worst = std::max(worst, std::abs(got["curvature"].get<double>() - expect));
              }
            covered = covered && found;
          }
        }
        r.residuals["max_error"] = worst;
        r.pass = covered && worst <= r.tolerance;
      }
    } else if (key == "lemma15") {
      src = &fold(lemma, [&] { return check_lemma15(spec, cfg); });
      r.tolerance = cfg.tol.at("identity");
      const json f = sub_facts(*src, "lemma15");
      if (!f.is_null()) {
        r.residuals = f;
        r.pass = all_pass(*src) == want.get<bool>();
      }
    } else if (key == "oneill") {
      src = &fold(oneill, [&] { return check_oneill(spec, cfg); });
      r.tolerance = cfg.tol.at("curvature");
      const json f = sub_facts(*src, "oneill_sup");
      if (!f.is_null()) {
        r.residuals["sup"] = f;
        r.pass = all_pass(*src) == want.get<bool>();
      }
    } else if (key == "prop23") {
      src = &fold(prop, [&] { return check_prop23(spec, cfg); });
      r.tolerance = cfg.tol.at("curvature");
      const json f = sub_facts(*src, "prop23");
      if (!f.is_null()) {
        r.residuals["sup"] = f["sup"];
        r.detail["vacuous"] = f["vacuous"];
        r.pass = want == "vacuous" ? f["vacuous"].get<bool>() : (!f["vacuous"].get<bool>() && all_pass(*src));
      }
    } else if (key == "cor34") {
      src = &fold(cor, [&] { return check_cor34(spec, cfg); });
      r.tolerance = cfg.tol.at("identity");
      const json f = sub_facts(*src, "cor34");
      if (!f.is_null()) {
        r.residuals = {{"closed", f["closed"]}, {"parallel", f["parallel"]}, {"leafcurv", f["leafcurv"]}};
        r.pass = want == "degenerate" ? f["degenerate"].get<bool>() : (!f["degenerate"].get<bool>() && all_pass(*src));
      }
    } else {
      r.detail["error"] = "unknown expectation";
    }
    if (src && !r.pass) {
      const std::string err = first_error(*src);
      if (!err.empty()) r.detail["error"] = err;
    }
    o.records.push_back(r);
  }
  return o;
}

Outcome run_entry(const GalleryEntry& e, const RunConfig& cfg) {
  return e.kind == EntryKind::kMetric ? run_metric_entry(e, cfg) : run_map_entry(e, cfg);
}

// -- inputs ------------------------------------------------------------------------

GalleryEntry resolve(const std::string& input) {
  const std::string prefix = "builtin:";
  if (input.rfind(prefix, 0) == 0) return builtin(input.substr(prefix.size()));
  if (!std::filesystem::exists(input)) {
    try {
      return builtin(input);
    } catch (const GalleryError&) {
      throw InputError("input '" + input + "': no such file and not a builtin name");
    }
  }
  std::ifstream in(input);
  if (!in) throw InputError("cannot read '" + input + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError("malformed JSON in '" + input + "' at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  GalleryEntry e;
  e.expected = json::object();
  if (j.is_object() && j.contains("components")) {
    e.kind = EntryKind::kMap;
    e.map = map_from_json(j);
    e.name = e.map->name;
  } else {
    e.kind = EntryKind::kMetric;
    e.metric = metric_from_json(j);
    e.name = e.metric->name();
  }
  return e;
}

const MetricChart& need_metric(const GalleryEntry& e) {
  if (e.kind != EntryKind::kMetric) throw InputError("'" + e.name + "' is a map; expected a metric");
  return *e.metric;
}

const SubmersionSpec& need_map(const GalleryEntry& e) {
  if (e.kind != EntryKind::kMap) throw InputError("'" + e.name + "' is a metric; expected a map");
  return *e.map;
}

json input_json(const GalleryEntry& e) {
  const json body = e.kind == EntryKind::kMetric ? to_json(*e.metric) : to_json(*e.map);
  return {{"name", e.name}, {"kind", e.kind == EntryKind::kMetric ? "metric" : "map"}, {"digest", digest(body)}};
}

}  // namespace

std::map<std::string, double> default_tolerances() {
  return {{"identity", 1e-6}, {"curvature", 1e-8}, {"flat", 1e-8}, {"harmonic", 1e-8},
          {"hconf", 1e-10},   {"fiber", 1e-10},    {"invariant", 1e-9}};
}

json to_json(const Record& r) {
  return {{"subject", r.subject}, {"check", r.check},         {"anchor", r.anchor}, {"residuals", r.residuals},
          {"tolerance", r.tolerance}, {"pass", r.pass}, {"detail", r.detail}};
}

json make_report(const RunConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  json report = {{"tool", "hmcheck"},
                 {"version", kVersion},
                 {"command", cfg.subcommand},
                 {"config", {{"samples", cfg.samples}, {"seed", cfg.seed}, {"tolerances", cfg.tol}}}};
  if (cfg.subcommand == "identities") report["config"]["suite"] = cfg.suite;

  Outcome all;
  json inputs = json::array();
  std::vector<GalleryEntry> entries;
  const std::string& cmd = cfg.subcommand;

  if (cmd == "gallery-list") {
    json list = json::array();
    for (const auto& name : catalog()) {
      const GalleryEntry e = builtin(name);
      list.push_back({{"name", e.name},
                      {"kind", e.kind == EntryKind::kMetric ? "metric" : "map"},
                      {"description", e.description},
                      {"expected", e.expected}});
    }
    report["entries"] = list;
  } else if (cmd == "gallery-run" || cmd == "all") {
    const std::vector<std::string> names = cfg.inputs.empty() ? catalog() : cfg.inputs;
    for (const auto& n : names) entries.push_back(n.rfind("builtin:", 0) == 0 ? resolve(n) : builtin(n));
    for (const auto& e : entries) append(all, run_entry(e, cfg));
  } else {
    for (const auto& in : cfg.inputs) entries.push_back(resolve(in));
    for (const auto& e : entries) {
      if (cmd == "check-flat") {
        append(all, check_metric(need_metric(e), cfg));
      } else if (cmd == "check-morphism") {
        append(all, check_morphism(need_map(e), cfg));
      } else if (cmd == "identities") {
        append(all, check_identities(need_map(e), cfg));
      } else if (cmd == "classify") {
        append(all, check_classify(need_map(e), cfg));
      } else if (cmd == "cor34") {
        append(all, check_cor34(need_map(e), cfg));
      } else {
        throw InputError("unknown subcommand '" + cmd + "'");
      }
    }
  }
  for (const auto& e : entries) inputs.push_back(input_json(e));

  std::stable_sort(all.records.begin(), all.records.end(), [](const Record& a, const Record& b) {
    return std::tie(a.subject, a.check) < std::tie(b.subject, b.check);
  });
  json records = json::array();
  int failed = 0;
  for (const auto& r : all.records) {
    records.push_back(to_json(r));
    failed += r.pass ? 0 : 1;
  }
  report["inputs"] = inputs;
  report["records"] = records;
  report["facts"] = all.facts;
  report["summary"] = {{"records", records.size()}, {"failed", failed}, {"pass", failed == 0}};
  report["wall_time_s"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

std::string render_text(const json& report) {
  std::ostringstream os;
  char line[256];
  os << "hmcheck " << report["version"].get<std::string>() << "  " << report["command"].get<std::string>() << "\n";
  if (report.contains("entries")) {
    for (const auto& e : report["entries"]) {
      std::snprintf(line, sizeof line, "%-24s %-7s %s\n", e["name"].get<std::string>().c_str(),
                    e["kind"].get<std::string>().c_str(), e["description"].get<std::string>().c_str());
      os << line;
    }
    return os.str();
  }
  std::snprintf(line, sizeof line, "%-24s %-34s %12s %10s  %s\n", "subject", "check", "residual", "tol", "result");
  os << line;
  for (const auto& r : report["records"]) {
    double worst = 0.0;
    for (const auto& [k, v] : r["residuals"].items())
      if (v.is_number()) worst = std::max(worst, v.get<double>());
    std::snprintf(line, sizeof line, "%-24s %-34s %12.3e %10.1e  %s\n", r["subject"].get<std::string>().c_str(),
                  r["check"].get<std::string>().c_str(), worst, r["tolerance"].get<double>(),
                  r["pass"].get<bool>() ? "pass" : "FAIL");
    os << line;
  }
  const json& s = report["summary"];
  os << s["records"].get<int>() - s["failed"].get<int>() << "/" << s["records"].get<int>() << " checks passed\n";
  return os.str();
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Numerical checks for harmonic morphisms with one-dimensional fibres", "hmcheck"};
  app.require_subcommand(1);
  std::vector<std::string> tol_overrides;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--samples", cfg.samples, "sample points per check")->check(CLI::PositiveNumber);
    sub->add_option("--seed", cfg.seed, "seed of the sampling stream");
    sub->add_option("--tol", tol_overrides, "override a tolerance class, e.g. identity=1e-7");
    sub->add_option("--format", cfg.format, "report format")->check(CLI::IsMember({"json", "text"}));
    sub->add_option("--out", cfg.out, "write the report to this path");
    sub->add_option("--threads", cfg.threads, "worker threads (default: HMCHECK_THREADS or all cores)")
        ->check(CLI::NonNegativeNumber);
  };
  auto with_input = [&](const char* name, const char* help) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("input", cfg.inputs, "builtin:<name> or a JSON file")->required();
    common(sub);
    return sub;
  };
  with_input("check-flat", "conformal flatness of a metric, by both criteria");
  with_input("check-morphism", "dilation, tension and fibre data of a map");
  CLI::App* ids = with_input("identities", "curvature identities of a map");
  ids->add_option("--suite", cfg.suite, "which identities")->check(CLI::IsMember({"lemma15", "oneill", "prop23", "all"}));
  with_input("classify", "Killing type versus integrable horizontal distribution");
  with_input("cor34", "descended form on a three-dimensional codomain");
  CLI::App* gal = app.add_subcommand("gallery", "built-in examples");
  gal->require_subcommand(1);
  CLI::App* gl = gal->add_subcommand("list", "list catalog entries");
  common(gl);
  CLI::App* gr = gal->add_subcommand("run", "check entries against their expectations");
  gr->add_option("name", cfg.inputs, "entries (default: whole catalog)");
  common(gr);
  CLI::App* al = app.add_subcommand("all", "run every catalog entry");
  common(al);

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  for (CLI::App* sub : app.get_subcommands()) {
    cfg.subcommand = sub->get_name();
    if (sub == gal) cfg.subcommand = gl->parsed() ? "gallery-list" : "gallery-run";
  }
  for (const auto& t : tol_overrides) {
    const auto eq = t.find('=');
    const std::string key = eq == std::string::npos ? "" : t.substr(0, eq);
    if (!cfg.tol.count(key)) {
      err << "error: --tol expects class=value with class one of identity, curvature, flat, harmonic, hconf, "
             "fiber, invariant; got '"
          << t << "'\n";
      return 2;
    }
    try {
      const double v = std::stod(t.substr(eq + 1));
      if (!(v > 0.0)) throw std::invalid_argument("non-positive");
      cfg.tol[key] = v;
    } catch (const std::exception&) {
      err << "error: tolerance '" << t << "' must be a positive number\n";
      return 2;
    }
  }
  if (cfg.threads > 0) set_thread_count(cfg.threads);

  json report;
  try {
    report = make_report(cfg);
  } catch (const ExprError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  const std::string text = cfg.format == "json" ? report.dump(2) + "\n" : render_text(report);
  if (!cfg.out.empty()) {
    std::ofstream f(cfg.out);
    if (!f) {
      err << "error: cannot write '" << cfg.out << "'\n";
      return 2;
    }
    f << text;
  } else {
    out << text;
  }
  const bool pass = !report.contains("summary") || report["summary"]["pass"].get<bool>();
  return pass ? 0 : 1;
}

}  // namespace hmc::cli
