#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "awlab/factor_model.hpp"
#include "awlab/log_real.hpp"
#include "awlab/parallel.hpp"
#include "awlab/param_sequence.hpp"
#include "awlab/prec_real.hpp"
#include "awlab/series.hpp"

namespace awlab {

// Per-block record of the Araki-Woods sum and its quadratic majorant. All
// magnitudes live in log2 space; 2^{j!} only ever enters as an exponent.
struct AwBlockTerm {
  unsigned long j = 0;
  LogReal aw;        // 2^{j!} [(sqrt l1 - sqrt l2)^2 + (sqrt(1-l1) - sqrt(1-l2))^2]
  LogReal majorant;  // 2 * 2^{j!} (l_j - l_j')^2
  LogReal g;         // 2^{j!} a(j)^2, orbit checks only
  bool dominated = true;  // aw <= majorant, certain
};

struct EquivPolicy {
  double window_fraction = 0.5;
  long increment_tol_log2 = -32;   // finiteness: increments below 2^tol
  long increment_floor_log2 = -8;  // divergence: increments above 2^floor
  long term_floor_log2 = -65536;   // reporting floor for materialized terms
  mpfr_prec_t prec = 256;
};

// The equivalence reports reuse the three-way Verdict; convergence evidence
// is reported under the criterion's name.
inline std::string equiv_verdict_name(Verdict v) {
  return v == Verdict::ConvergenceEvidence ? "FinitenessEvidence"
                                           : verdict_name(v);
}

struct EquivalenceReport {
  unsigned long horizon = 0;
  std::vector<AwBlockTerm> blocks;
  std::vector<PrecReal> partial_sums;       // materialized AW partial sums
  std::vector<PrecReal> cauchy_increments;  // materialized per-block terms
  std::vector<bool> increment_below_floor;
  std::optional<PrecReal> bound_constant;   // measured K~ = majorant / g-norm
  PrecReal majorant_sum;
  PrecReal g_norm_sq_value;
  Verdict verdict = Verdict::Inconclusive;
  bool all_dominated = true;
  std::string note;
};

namespace detail {

// Canonical AW block: inputs are ordered so E1 <= E2 (i.e. l1 <= l2), making
// the result bit-identical under argument swap. dl_log = l2 - l1 >= 0.
//   u  = e^{-l1}: log2 u  = -j! E1
//   u2 = e^{-l2} = u e^{-dl}
//   sqrt(l1 side) - sqrt(l2 side) via cancellation-free log-space forms.
inline AwBlockTerm aw_block(unsigned long j, const PrecReal& E1,
                            const LogReal& dl_log, mpfr_prec_t prec) {
  AwBlockTerm out;
  out.j = j;
  mpz_class f = factorial(j);

  PrecReal log2u = -(PrecReal::from_integer(f, prec) * E1);
  LogReal u_log = LogReal::from_log2(1, log2u);

  // log2 u2 = log2 u - dl/ln2
  LogReal dl_over_ln2 = dl_log / LogReal::from_prec(PrecReal::ln2(prec));
  auto shift = dl_over_ln2.to_prec(prec, mpfr_get_emin() + 128);
  PrecReal log2u2 = log2u - shift.value;
  LogReal u2_log = LogReal::from_log2(1, log2u2);

  long deep_floor = mpfr_get_emin() + 128;
  auto u_m = u_log.to_prec(prec, deep_floor);
  auto u2_m = u2_log.to_prec(prec, deep_floor);

  PrecReal one_plus_u = u_m.value.add_q(1);
  PrecReal one_plus_u2 = u2_m.value.add_q(1);
  PrecReal A = PrecReal::sqrt(one_plus_u);
  PrecReal B = PrecReal::sqrt(one_plus_u2);
  PrecReal D = A * B * (A + B);

  // term1 = (u2 - u)/D = u expm1(-dl) / D   (dl >= 0 so this is <= 0)
  LogReal term1 =
      u_log * LogReal::expm1_log(-dl_log, prec) / LogReal::from_prec(D);

  // term2 = sqrt(u/(1+u)) (1 - e^w), 2w = -dl + log1p u - log1p u2.
  // (ln u2 - ln u = -dl.)
  LogReal l1pu = LogReal::log1p_log(u_log, prec);
  LogReal l1pu2 = LogReal::log1p_log(u2_log, prec);
  LogReal w_log = (-dl_log + l1pu - l1pu2).scale_q(mpq_class(1, 2));
  PrecReal log2_1pu = PrecReal::log1p(u_m.value) / PrecReal::ln2(prec);
  LogReal sqrt_factor =
      LogReal::from_log2(1, (log2u - log2_1pu).mul_2exp(-1));
  LogReal term2 = sqrt_factor * (-LogReal::expm1_log(w_log, prec));

  out.aw = (term1.sqr() + term2.sqr()).mul_pow2_z(f);
  out.majorant = dl_log.sqr().mul_pow2_z(f).scale_q(mpq_class(2));

  // domination: certain when both magnitudes resolve
  if (out.aw.exact_zero()) {
    out.dominated = true;
  } else if (out.aw.sign() == 0 || out.majorant.sign() == 0) {
    out.dominated =
        !PrecReal::certainly_greater(out.aw.log2_abs(), out.majorant.log2_abs());
  } else {
    out.dominated = PrecReal::certainly_less(out.aw.log2_abs(),
                                             out.majorant.log2_abs());
  }
  return out;
}

inline PrecReal exp_ball_of_entry(const mpq_class& xj, const mpz_class& f,
                                  mpfr_prec_t prec) {
  if (xj == 0) return PrecReal::from_long(1, prec);
  return PrecReal::exp(PrecReal::from_rational(xj / mpq_class(f), prec));
}

// Materialize a log-space term, honoring the reporting floor.
inline PrecReal materialize(const LogReal& v, mpfr_prec_t prec, long floor,
                            bool* below) {
  auto m = v.to_prec(prec, floor);
  if (below) *below = m.below_floor;
  return m.value;
}

inline void attach_verdict(EquivalenceReport& rep, const EquivPolicy& pol) {
  unsigned long J = rep.horizon;
  unsigned long window_from =
      J - static_cast<unsigned long>(J * pol.window_fraction) + 1;
  if (window_from > J) window_from = J;
  bool all_small = true, all_large = true;
  std::size_t counted = 0;
  for (unsigned long j = window_from; j <= J; ++j) {
    const LogReal& inc = rep.blocks[j - 1].aw;
    ++counted;
    if (inc.exact_zero()) {
      all_large = false;
      continue;
    }
    auto below_tol =
        inc.abs_certainly_below_pow2(mpq_class(pol.increment_tol_log2));
    if (!(below_tol.has_value() && *below_tol)) all_small = false;
    auto below_floor =
        inc.abs_certainly_below_pow2(mpq_class(pol.increment_floor_log2));
    if (below_floor.has_value() && *below_floor) all_large = false;
  }
  if (counted == 0) {
    rep.verdict = Verdict::Inconclusive;
    return;
  }
  if (all_small) {
    rep.verdict = Verdict::ConvergenceEvidence;
    rep.note = "Cauchy increments decay below tolerance on the tail window";
  } else if (all_large) {
    rep.verdict = Verdict::DivergenceEvidence;
    rep.note = "Cauchy increments stay above the floor on the tail window";
  } else {
    rep.verdict = Verdict::Inconclusive;
    rep.note = "mixed increment behaviour on the tail window";
  }
}

}  // namespace detail

// Araki-Woods criterion partial sums between two eigenvalue lists. Blocks
// where x and x' agree contribute exactly zero; the rest are computed in
// canonical argument order so the result is symmetric under swapping x, x'.
inline EquivalenceReport aw_partial_sum(const ParamSequence& x,
                                        const ParamSequence& x2,
                                        unsigned long J,
                                        const EquivPolicy& pol = {},
                                        unsigned workers = 1) {
  if (J == 0) throw std::invalid_argument("J must be positive");
  EquivalenceReport rep;
  rep.horizon = J;
  rep.blocks.resize(J);

  parallel_for(J, workers, [&](unsigned long idx) {
    unsigned long j = idx + 1;
    mpq_class p = x.at(j), p2 = x2.at(j);
    if (p == p2) {
      AwBlockTerm zero_term;
      zero_term.j = j;
      rep.blocks[idx] = zero_term;  // exact zero block
      return;
    }
    mpq_class q1 = std::min(p, p2), q2 = std::max(p, p2);
    mpz_class f = factorial(j);
    mpfr_prec_t prec = pol.prec;
    PrecReal E1 = detail::exp_ball_of_entry(q1, f, prec);
    // dl = l2 - l1 = ln2 j! E1 expm1((q2-q1)/j!) >= 0
    PrecReal em = PrecReal::expm1(
        PrecReal::from_rational((q2 - q1) / mpq_class(f), prec));
    PrecReal dl = (PrecReal::ln2(prec) * E1 * em).mul_z(f);
    rep.blocks[idx] = detail::aw_block(j, E1, LogReal::from_prec(dl), prec);
  });

  PrecReal acc(pol.prec);
  rep.increment_below_floor.resize(J, false);
  for (unsigned long j = 1; j <= J; ++j) {
    bool below = false;
    PrecReal inc = detail::materialize(rep.blocks[j - 1].aw, pol.prec,
                                       pol.term_floor_log2, &below);
    rep.increment_below_floor[j - 1] = below;
    rep.cauchy_increments.push_back(inc);
    acc = acc + inc;
    rep.partial_sums.push_back(acc);
    rep.all_dominated = rep.all_dominated && rep.blocks[j - 1].dominated;
  }
  detail::attach_verdict(rep, pol);
  return rep;
}

// Partial sums of the G inner product norm: sum 2^{j!} a(j)^2, carried in
// log2 space (per-term log2 = j! + 2 log2|a(j)|).
inline PrecReal g_norm_sq(const GVector& a, unsigned long J,
                          const EquivPolicy& pol = {},
                          std::vector<LogReal>* terms_out = nullptr) {
  if (J == 0) throw std::invalid_argument("J must be positive");
  LogReal acc = LogReal::zero();
  for (const auto& e : a.entries()) {
    if (e.j > J) break;
    LogReal term = LogReal::from_log2(1, e.log2_magnitude.mul_2exp(1))
                       .mul_pow2_z(factorial(e.j));
    if (terms_out) terms_out->push_back(term);
    acc = acc + term;
  }
  auto m = acc.to_prec(pol.prec, pol.term_floor_log2);
  return m.value;
}

// The orbit-preservation bound: the AW sum between x and a + x, its
// term-by-term quadratic majorant with the difference evaluated through
// expm1, and the measured ratio K~ = majorant / ||a||_G^2.
inline EquivalenceReport orbit_bound_check(const ParamSequence& x,
                                           const GVector& a, unsigned long J,
                                           const EquivPolicy& pol = {},
                                           unsigned workers = 1) {
  if (J == 0) throw std::invalid_argument("J must be positive");
  EquivalenceReport rep;
  rep.horizon = J;
  rep.blocks.resize(J);

  parallel_for(J, workers, [&](unsigned long idx) {
    unsigned long j = idx + 1;
    const GVector::Entry* ge = a.find(j);
    if (!ge) {
      AwBlockTerm zero_term;
      zero_term.j = j;
      rep.blocks[idx] = zero_term;
      return;
    }
    mpz_class f = factorial(j);
    mpfr_prec_t prec = pol.prec;
    mpq_class p = x.at(j);
    PrecReal E = detail::exp_ball_of_entry(p, f, prec);
    LogReal a_log = LogReal::from_log2(ge->sign, ge->log2_magnitude);

    // dl = l^{a+x} - l^x = ln2 E (j! expm1(a(j)/j!)), sign follows a(j)
    LogReal em = LogReal::expm1_log(a_log.scale_q(mpq_class(1, f)), prec);
    LogReal dl_signed =
        LogReal::from_prec(PrecReal::ln2(prec) * E) * em.scale_q(mpq_class(f));

    // canonical order: E1 belongs to the smaller of l^x, l^{a+x}
    PrecReal E1 = E;
    LogReal dl = dl_signed;
    if (dl_signed.sign() < 0) {
      // a(j) < 0: l^{a+x} < l^x, so the base becomes a+x
      auto em_m = em.to_prec(prec, mpfr_get_emin() + 128);
      E1 = E * em_m.value.add_q(1);  // E e^{a/j!}
      dl = -dl_signed;
    }
    AwBlockTerm term = detail::aw_block(j, E1, dl, prec);
    term.g = LogReal::from_log2(1, ge->log2_magnitude.mul_2exp(1))
                 .mul_pow2_z(f);
    rep.blocks[idx] = term;
  });

  PrecReal acc(pol.prec);
  LogReal maj_acc = LogReal::zero();
  LogReal g_acc = LogReal::zero();
  rep.increment_below_floor.resize(J, false);
  for (unsigned long j = 1; j <= J; ++j) {
    const auto& blk = rep.blocks[j - 1];
    bool below = false;
    PrecReal inc =
        detail::materialize(blk.aw, pol.prec, pol.term_floor_log2, &below);
    rep.increment_below_floor[j - 1] = below;
    rep.cauchy_increments.push_back(inc);
    acc = acc + inc;
    rep.partial_sums.push_back(acc);
    if (!blk.majorant.exact_zero()) maj_acc = maj_acc + blk.majorant;
    if (!blk.g.exact_zero()) g_acc = g_acc + blk.g;
    rep.all_dominated = rep.all_dominated && blk.dominated;
  }
  rep.majorant_sum =
      detail::materialize(maj_acc, pol.prec, pol.term_floor_log2, nullptr);
  rep.g_norm_sq_value =
      detail::materialize(g_acc, pol.prec, pol.term_floor_log2, nullptr);
  if (!g_acc.exact_zero() && rep.g_norm_sq_value.certainly_positive())
    rep.bound_constant = rep.majorant_sum / rep.g_norm_sq_value;
  detail::attach_verdict(rep, pol);
  return rep;
}

}  // namespace awlab
