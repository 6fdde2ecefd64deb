#pragma once

#include <stdexcept>
#include <string>

#include <json.hpp>

#include "awlab/equivalence.hpp"
#include "awlab/series.hpp"
#include "awlab/tset.hpp"

namespace awlab {

// Process-wide knobs: precision policy, verdict policy, output selection.
// A config file provides defaults; command-line flags override field by
// field.
struct RunConfig {
  long precision_ceiling_bits = 1L << 20;
  double target_err = 1e-24;
  DiagnosePolicy policy;
  long term_floor_log2 = -65536;
  unsigned workers = 1;
  std::string format = "json";
  std::string out;  // empty: stdout
  unsigned long nmax_cap = 1ul << 20;

  void validate() const {
    if (precision_ceiling_bits < 256)
      throw std::invalid_argument("precision ceiling must be at least 256 bits");
    if (!(target_err > 0.0 && target_err < 1.0))
      throw std::invalid_argument("target_err must lie in (0, 1)");
    if (format != "json" && format != "csv")
      throw std::invalid_argument("format must be json or csv");
    if (workers < 1) throw std::invalid_argument("workers must be >= 1");
    if (!(policy.window_fraction > 0.0 && policy.window_fraction <= 1.0))
      throw std::invalid_argument("window_fraction must lie in (0, 1]");
  }

  TsetOptions tset_options() const {
    TsetOptions o;
    o.target_err = target_err;
    o.prec.ceiling_bits = static_cast<mpfr_prec_t>(precision_ceiling_bits);
    o.workers = workers;
    o.term_floor_log2 = term_floor_log2;
    return o;
  }

  EquivPolicy equiv_policy() const {
    EquivPolicy p;
    p.term_floor_log2 = term_floor_log2;
    return p;
  }

  void apply_json(const nlohmann::ordered_json& doc) {
    if (doc.contains("precision_ceiling_bits"))
      precision_ceiling_bits = doc["precision_ceiling_bits"].get<long>();
    if (doc.contains("target_err")) target_err = doc["target_err"].get<double>();
    if (doc.contains("term_floor_log2"))
      term_floor_log2 = doc["term_floor_log2"].get<long>();
    if (doc.contains("workers")) workers = doc["workers"].get<unsigned>();
    if (doc.contains("format")) format = doc["format"].get<std::string>();
    if (doc.contains("out")) out = doc["out"].get<std::string>();
    if (doc.contains("nmax_cap")) nmax_cap = doc["nmax_cap"].get<unsigned long>();
    if (doc.contains("policy")) {
      const auto& p = doc["policy"];
      if (p.contains("window_fraction"))
        policy.window_fraction = p["window_fraction"].get<double>();
      if (p.contains("alpha_margin"))
        policy.alpha_margin = p["alpha_margin"].get<double>();
      if (p.contains("divergence_c"))
        policy.divergence_c = p["divergence_c"].get<double>();
      if (p.contains("divergence_density"))
        policy.divergence_density = p["divergence_density"].get<double>();
    }
  }
};

}  // namespace awlab
