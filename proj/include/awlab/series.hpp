#pragma once

#include <optional>
#include <string>
#include <vector>

#include "awlab/angle.hpp"
#include "awlab/prec_real.hpp"

namespace awlab {

// Verdicts are evidence from finitely many terms, never proofs; the policy
// that produced one travels with the diagnostics.
enum class Verdict { ConvergenceEvidence, DivergenceEvidence, Inconclusive };

inline std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::ConvergenceEvidence:
      return "ConvergenceEvidence";
    case Verdict::DivergenceEvidence:
      return "DivergenceEvidence";
    case Verdict::Inconclusive:
      return "Inconclusive";
  }
  return "?";
}

// Least-squares fit of |delta_j| ~ c / j^alpha over a tail window.
struct LogLogFit {
  double alpha = 0.0;
  double log_c = 0.0;  // natural log of c
  unsigned long window_from = 0;
  unsigned long window_to = 0;
  std::size_t points = 0;
};

struct TermRecord {
  unsigned long j = 0;
  Angle delta;
  PrecReal log2_w;
  PrecReal term;           // w_j * delta_j^2
  PrecReal term_cos_form;  // w_j * 2(1 - cos delta_j)
  bool identity_ok = true; // |d^2 - 2(1-cos d)| <= d^4/12 within err
  bool weight_below_floor = false;
  PrecReal partial_sum;    // running sum through this term
};

struct SeriesDiagnostics {
  unsigned long horizon = 0;
  std::vector<TermRecord> terms;
  std::vector<PrecReal> partial_sums;
  std::optional<LogLogFit> fit;
  Verdict verdict = Verdict::Inconclusive;
  bool heuristic = true;
  bool all_identities_ok = true;
  std::string note;
};

// Tail-window policy for the heuristic verdict.
struct DiagnosePolicy {
  double window_fraction = 0.5;    // last half by default
  double alpha_margin = 0.1;       // convergence needs alpha > 0.5 + margin
  double divergence_c = 0.25;      // divergence needs |delta| sqrt(j) >= c
  double divergence_density = 0.9; // on this fraction of the window
  std::size_t min_fit_points = 2;
};

}  // namespace awlab
