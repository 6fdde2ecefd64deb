#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "awlab/angle.hpp"
#include "awlab/equivalence.hpp"
#include "awlab/factor_model.hpp"
#include "awlab/odometer.hpp"
#include "awlab/param_sequence.hpp"
#include "awlab/series.hpp"
#include "awlab/tset.hpp"
#include "awlab/turbulence.hpp"

namespace awlab {

using ordered_json = nlohmann::ordered_json;

// Every reported numeric value carries its error bound.
inline ordered_json json_of(const PrecReal& v, int digits = 36) {
  ordered_json o;
  o["value"] = v.to_string(digits);
  o["err"] = v.is_exact() ? "0" : v.err_string();
  return o;
}

inline ordered_json json_of(const Angle& a, int digits = 36) {
  ordered_json o = json_of(a.value, digits);
  if (a.boundary_ambiguous) o["boundary_ambiguous"] = true;
  return o;
}

inline ordered_json json_of(const LogReal& v) {
  ordered_json o;
  if (v.exact_zero()) {
    o["sign"] = 0;
    o["log2"] = "-inf";
    return o;
  }
  o["sign"] = v.sign();
  o["log2"] = v.log2_abs().to_string(30);
  o["log2_err"] = v.log2_abs().is_exact() ? "0" : v.log2_abs().err_string();
  return o;
}

// ---- parameter sequences ----

inline ordered_json json_of(const ParamSequence& x) {
  ordered_json arr = ordered_json::array();
  for (const auto& e : x.support()) {
    ordered_json o;
    o["j"] = e.j;
    o["value"] = rational_to_string(e.value);
    arr.push_back(o);
  }
  return arr;
}

inline ParamSequence param_sequence_from_json(const ordered_json& doc) {
  const ordered_json* arr = &doc;
  if (doc.is_object() && doc.contains("entries")) arr = &doc["entries"];
  if (!arr->is_array())
    throw std::invalid_argument("parameter sequence: expected an array");
  std::vector<ParamSequence::Entry> es;
  for (const auto& item : *arr) {
    unsigned long j = item.at("j").get<unsigned long>();
    mpq_class v = parse_rational(item.at("value").get<std::string>());
    es.push_back({j, v});
  }
  return ParamSequence(std::move(es));
}

// ---- G vectors ----

inline ordered_json json_of(const GVector& g) {
  ordered_json arr = ordered_json::array();
  for (const auto& e : g.entries()) {
    ordered_json o;
    o["j"] = e.j;
    o["sign"] = e.sign;
    o["log2_magnitude"] = e.log2_magnitude.to_string(30);
    if (e.exact) o["value"] = rational_to_string(*e.exact);
    arr.push_back(o);
  }
  return arr;
}

inline GVector gvector_from_json(const ordered_json& doc) {
  const ordered_json* arr = &doc;
  if (doc.is_object() && doc.contains("entries")) arr = &doc["entries"];
  if (!arr->is_array())
    throw std::invalid_argument("G vector: expected an array");
  std::vector<GVector::Entry> es;
  for (const auto& item : *arr) {
    unsigned long j = item.at("j").get<unsigned long>();
    if (item.contains("value")) {
      mpq_class v = parse_rational(item.at("value").get<std::string>());
      if (v != 0) es.push_back(GVector::entry_from_rational(j, v));
      continue;
    }
    int sign = item.at("sign").get<int>();
    mpq_class lm = parse_rational(item.at("log2_magnitude").get<std::string>());
    es.push_back(
        GVector::Entry{j, sign, PrecReal::from_rational(lm, 128), std::nullopt});
  }
  return GVector(std::move(es));
}

// ---- series diagnostics ----

inline ordered_json json_of(const LogLogFit& f) {
  ordered_json o;
  o["alpha"] = f.alpha;
  o["log_c"] = f.log_c;
  o["window_from"] = f.window_from;
  o["window_to"] = f.window_to;
  o["points"] = f.points;
  return o;
}

inline ordered_json json_of(const SeriesDiagnostics& d, bool equivalence_names = false) {
  ordered_json o;
  o["horizon"] = d.horizon;
  o["verdict"] = equivalence_names ? equiv_verdict_name(d.verdict)
                                   : verdict_name(d.verdict);
  o["heuristic"] = d.heuristic;
  o["note"] = d.note;
  o["all_identities_ok"] = d.all_identities_ok;
  if (d.fit) o["fit"] = json_of(*d.fit);
  ordered_json terms = ordered_json::array();
  for (const auto& rec : d.terms) {
    ordered_json t;
    t["j"] = rec.j;
    t["delta"] = json_of(rec.delta);
    t["log2_w"] = json_of(rec.log2_w, 30);
    t["term"] = json_of(rec.term, 30);
    t["term_cos_form"] = json_of(rec.term_cos_form, 30);
    t["identity_ok"] = rec.identity_ok;
    if (rec.weight_below_floor) t["weight_below_floor"] = true;
    t["partial_sum"] = json_of(rec.partial_sum, 30);
    terms.push_back(t);
  }
  o["terms"] = terms;
  return o;
}

inline std::string csv_of(const SeriesDiagnostics& d) {
  std::ostringstream out;
  out << "j,delta,delta_err,log2_w,term,partial_sum\n";
  for (const auto& rec : d.terms) {
    out << rec.j << ',' << rec.delta.value.to_string(30) << ','
        << (rec.delta.value.is_exact() ? "0" : rec.delta.value.err_string())
        << ',' << rec.log2_w.to_string(30) << ',' << rec.term.to_string(30)
        << ',' << rec.partial_sum.to_string(30) << '\n';
  }
  return out.str();
}

// ---- equivalence reports ----

inline ordered_json json_of(const EquivalenceReport& r) {
  ordered_json o;
  o["horizon"] = r.horizon;
  o["verdict"] = equiv_verdict_name(r.verdict);
  o["note"] = r.note;
  o["all_dominated"] = r.all_dominated;
  o["aw_sum"] = json_of(r.partial_sums.back(), 30);
  if (r.bound_constant) {
    o["majorant_sum"] = json_of(r.majorant_sum, 30);
    o["g_norm_sq"] = json_of(r.g_norm_sq_value, 30);
    o["measured_k_tilde"] = json_of(*r.bound_constant, 30);
  }
  ordered_json blocks = ordered_json::array();
  for (std::size_t i = 0; i < r.blocks.size(); ++i) {
    const auto& blk = r.blocks[i];
    ordered_json b;
    b["j"] = blk.j;
    b["aw_term"] = json_of(blk.aw);
    b["majorant_term"] = json_of(blk.majorant);
    if (!blk.g.exact_zero()) b["g_term"] = json_of(blk.g);
    b["dominated"] = blk.dominated;
    b["increment"] = json_of(r.cauchy_increments[i], 30);
    if (r.increment_below_floor[i]) b["below_floor"] = true;
    b["partial_sum"] = json_of(r.partial_sums[i], 30);
    blocks.push_back(b);
  }
  o["blocks"] = blocks;
  return o;
}

inline std::string csv_of(const EquivalenceReport& r) {
  std::ostringstream out;
  out << "j,aw_term_log2,majorant_term_log2,g_term_log2\n";
  auto log2_or_blank = [](const LogReal& v) -> std::string {
    if (v.exact_zero()) return "-inf";
    return v.log2_abs().to_string(30);
  };
  for (const auto& blk : r.blocks) {
    out << blk.j << ',' << log2_or_blank(blk.aw) << ','
        << log2_or_blank(blk.majorant) << ',' << log2_or_blank(blk.g) << '\n';
  }
  return out.str();
}

// ---- construction traces ----

inline ordered_json json_of(const ConstructionTrace& tr,
                            const std::vector<ConstructionCheck>& checks) {
  ordered_json o;
  o["horizon"] = tr.horizon;
  o["work_bits"] = static_cast<long>(tr.work_bits);
  o["tail_bound_threshold"] = tr.tail_bound_threshold;
  o["t"] = json_of(tr.t);
  ordered_json a = ordered_json::array();
  for (std::size_t i = 0; i < tr.a.size(); ++i) {
    ordered_json e;
    e["j"] = i + 1;
    e["a"] = json_of(tr.a[i], 30);
    a.push_back(e);
  }
  o["a"] = a;
  ordered_json cs = ordered_json::array();
  for (const auto& chk : checks) {
    ordered_json c;
    c["j"] = chk.j;
    c["delta"] = json_of(chk.delta_direct, 30);
    c["tail"] = json_of(chk.tail, 30);
    c["agree"] = chk.agree;
    c["tail_bound_ok"] = chk.bound_ok;
    c["delta_positive"] = chk.delta_positive;
    cs.push_back(c);
  }
  o["checks"] = cs;
  return o;
}

// ---- perturbed sequences ----

inline ordered_json json_of(const PerturbedSequence& p,
                            const std::vector<PerturbCheck>& checks) {
  ordered_json o;
  o["kind"] = "perturbed";
  o["base"] = json_of(p.base);
  o["j0"] = p.j0;
  o["horizon"] = p.horizon;
  o["eps"] = rational_to_string(p.eps);
  o["t"] = p.t.describe();
  if (p.negated_t) o["negated_t"] = true;
  ordered_json rules = ordered_json::array();
  for (const auto& r : p.rules) {
    ordered_json e;
    e["j"] = r.j;
    e["a"] = r.a;
    if (r.boundary_tie) e["boundary_tie"] = true;
    rules.push_back(e);
  }
  o["rules"] = rules;
  ordered_json entries = ordered_json::array();
  for (const auto& r : p.rules) {
    if (r.a == 0) continue;
    ordered_json e;
    e["j"] = r.j;
    e["value_approx"] = json_of(p.value_at(r.j), 30);
    entries.push_back(e);
  }
  o["entries_approx"] = entries;
  if (!checks.empty()) {
    ordered_json cs = ordered_json::array();
    for (const auto& chk : checks) {
      ordered_json c;
      c["j"] = chk.j;
      c["delta"] = json_of(chk.delta, 30);
      c["lower_bound_ok"] = chk.lower_bound_ok;
      c["err_ok"] = chk.err_ok;
      cs.push_back(c);
    }
    o["checks"] = cs;
  }
  return o;
}

inline PerturbedSequence perturbed_from_json(const ordered_json& doc) {
  if (!doc.is_object() || doc.value("kind", "") != "perturbed")
    throw std::invalid_argument("not a perturbed-sequence document");
  PerturbedSequence p;
  p.base = param_sequence_from_json(doc.at("base"));
  p.j0 = doc.at("j0").get<unsigned long>();
  p.horizon = doc.at("horizon").get<unsigned long>();
  p.eps = parse_rational(doc.at("eps").get<std::string>());
  p.t = ScalarExpr::parse(doc.at("t").get<std::string>());
  p.negated_t = doc.value("negated_t", false);
  for (const auto& item : doc.at("rules")) {
    PerturbRule r;
    r.j = item.at("j").get<unsigned long>();
    r.a = item.at("a").get<int>();
    r.boundary_tie = item.value("boundary_tie", false);
    p.rules.push_back(r);
  }
  if (p.rules.size() != p.horizon - p.j0)
    throw std::invalid_argument("perturbed document: rule count mismatch");
  return p;
}

// ---- chains ----

inline ordered_json json_of(const ChainWitness& w) {
  ordered_json o;
  o["n"] = w.n;
  o["x"] = json_of(w.x);
  o["g"] = json_of(w.g);
  o["ball_U"] = {{"center", json_of(w.ball_U.center)},
                 {"radius_sup", rational_to_string(w.ball_U.radius)}};
  o["radius_V"] = rational_to_string(w.radius_V);
  o["exact_arithmetic"] = w.exact_arithmetic;
  ordered_json pts = ordered_json::array();
  for (const auto& pt : w.points) {
    ordered_json p;
    p["coeff"] = rational_to_string(pt.coeff);
    ordered_json coords = ordered_json::object();
    for (const auto& [j, v] : pt.coords)
      coords[std::to_string(j)] = json_of(v, 30);
    p["coords"] = coords;
    pts.push_back(p);
  }
  o["points"] = pts;
  o["checks"] = {{"steps_equal", w.steps_equal},
                 {"step_in_V", w.step_in_V},
                 {"all_in_U", w.all_in_U},
                 {"endpoint_exact", w.endpoint_exact},
                 {"verified", w.verified()}};
  return o;
}

// ---- type III evidence ----

inline ordered_json json_of(const TypeIIIReport& r) {
  ordered_json o;
  o["horizon"] = r.horizon;
  o["divergence_evidence"] = r.divergence_evidence;
  o["weight_floor_log2"] = rational_to_string(r.weight_floor);
  o["min_l"] = json_of(r.min_l, 30);
  o["weight_partial_sum"] = json_of(r.partial_sums.back(), 30);
  ordered_json ws = ordered_json::array();
  for (std::size_t i = 0; i < r.weights.size(); ++i) {
    ordered_json e;
    e["j"] = i + 1;
    e["w"] = json_of(r.weights[i], 30);
    e["partial_sum"] = json_of(r.partial_sums[i], 30);
    ws.push_back(e);
  }
  o["weights"] = ws;
  return o;
}

// ---- product measures ----

inline ordered_json json_of(const ProductMeasure& m) {
  ordered_json arr = ordered_json::array();
  if (m.is_exact()) {
    for (const auto& q : m.rationals()) arr.push_back(rational_to_string(q));
  } else {
    for (const auto& v : m.ball_values()) arr.push_back(json_of(v, 30));
  }
  ordered_json o;
  o["exact"] = m.is_exact();
  o["z"] = arr;
  return o;
}

inline std::vector<mpq_class> rational_measure_from_json(const ordered_json& doc) {
  const ordered_json* arr = &doc;
  if (doc.is_object() && doc.contains("z")) arr = &doc["z"];
  std::vector<mpq_class> z;
  for (const auto& item : *arr) {
    mpq_class v = parse_rational(item.is_string()
                                     ? item.get<std::string>()
                                     : item.at("value").get<std::string>());
    z.push_back(v);
  }
  return z;
}

}  // namespace awlab
