#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "awlab/angle.hpp"
#include "awlab/factor_model.hpp"
#include "awlab/parallel.hpp"
#include "awlab/param_sequence.hpp"
#include "awlab/prec_real.hpp"
#include "awlab/series.hpp"

namespace awlab {

struct TsetOptions {
  double target_err = 1e-24;  // per-residue error target
  PrecPolicy prec;
  unsigned workers = 1;
  long term_floor_log2 = -65536;  // weights below 2^floor report as zero
};

// delta_j^x(t) = (t l_j^x) mod 2pi, with the e^{x(j)/j!} factor folded into
// the factorial-scaled reduction.
inline Angle tset_delta(const ParamSequence& x, const ScalarProvider& t,
                        unsigned long j, double target_err,
                        const PrecPolicy& policy = {}) {
  return factorial_scaled_angle(t, j, x.at(j), target_err, policy);
}

inline Angle tset_delta(const ParamSequence& x, const PrecReal& t,
                        unsigned long j, double target_err,
                        const PrecPolicy& policy = {}) {
  return factorial_scaled_angle(fixed_provider(t), j, x.at(j), target_err,
                                policy);
}

namespace detail {

struct TermInputs {
  Angle delta;
  PrecReal log2_w;
};

inline PrecReal weight_from_log2(const PrecReal& log2w, long floor_log2,
                                 bool* below_floor) {
  *below_floor = false;
  mpfr_t hi;
  mpfr_init2(hi, 64);
  log2w.bound_hi(hi);
  if (mpfr_cmp_si(hi, floor_log2) < 0) {
    long e = mpfr_fits_slong_p(hi, MPFR_RNDU) ? mpfr_get_si(hi, MPFR_RNDU)
                                              : mpfr_get_emin() + 4;
    mpfr_clear(hi);
    *below_floor = true;
    PrecReal z(64);
    z.add_error_2exp(std::max(e, mpfr_get_emin() + 2) + 1);
    return z;
  }
  mpfr_clear(hi);
  return PrecReal::exp2(log2w);
}

// Shared summation engine: materializes weights, forms both term variants,
// asserts the quartic identity per term, and folds partial sums in index
// order. Per-term evaluation may run on several workers; the fold is
// sequential so output is identical for any worker count.
template <typename Source>
SeriesDiagnostics sum_series(Source&& src, unsigned long J,
                             const TsetOptions& opt) {
  if (J == 0) throw std::invalid_argument("J must be positive");
  std::vector<TermInputs> inputs(J);
  parallel_for(J, opt.workers,
               [&](unsigned long i) { inputs[i] = src(i + 1); });

  SeriesDiagnostics d;
  d.horizon = J;
  d.terms.reserve(J);
  PrecReal acc(256);
  for (unsigned long j = 1; j <= J; ++j) {
    TermRecord rec;
    rec.j = j;
    rec.delta = inputs[j - 1].delta;
    rec.log2_w = inputs[j - 1].log2_w;
    PrecReal w = weight_from_log2(rec.log2_w, opt.term_floor_log2,
                                  &rec.weight_below_floor);
    PrecReal d2 = PrecReal::sqr(rec.delta.value);
    PrecReal one_minus_cos = (-PrecReal::cos(rec.delta.value)).add_q(1);
    PrecReal two_omc = one_minus_cos.mul_2exp(1);
    rec.term = w * d2;
    rec.term_cos_form = w * two_omc;
    // |d^2 - 2(1 - cos d)| <= d^4 / 12 for |d| <= pi
    PrecReal diff = (d2 - two_omc).abs();
    PrecReal bound = PrecReal::sqr(d2).div_ui(12);
    rec.identity_ok = !(diff - bound).certainly_positive();
    d.all_identities_ok = d.all_identities_ok && rec.identity_ok;

    acc = acc + rec.term;
    rec.partial_sum = acc;
    d.partial_sums.push_back(acc);
    d.terms.push_back(std::move(rec));
  }
  return d;
}

inline bool delta_is_zero(const Angle& a) { return a.value.contains_zero(); }

}  // namespace detail

// Partial sums of sum_j N_j e^{-l_j^x} (delta_j^x(t))^2 through horizon J.
inline SeriesDiagnostics tset_partial_sums(const ParamSequence& x,
                                           const ScalarProvider& t,
                                           unsigned long J,
                                           const TsetOptions& opt = {}) {
  return detail::sum_series(
      [&](unsigned long j) {
        return detail::TermInputs{
            tset_delta(x, t, j, opt.target_err, opt.prec),
            log2_weight(j, x.at(j))};
      },
      J, opt);
}

inline SeriesDiagnostics tset_partial_sums(const ParamSequence& x,
                                           const PrecReal& t, unsigned long J,
                                           const TsetOptions& opt = {}) {
  return tset_partial_sums(x, fixed_provider(t), J, opt);
}

// Attaches the heuristic verdict. sup_norm_bound bounds sup_j |x(j)| and
// fixes the weight floor w_min = 2^{-(bound+1)}.
inline void apply_verdict(SeriesDiagnostics& d, const DiagnosePolicy& pol,
                          const mpq_class& sup_norm_bound) {
  d.heuristic = true;
  unsigned long J = d.horizon;
  unsigned long window_from =
      J - static_cast<unsigned long>(std::floor(J * pol.window_fraction)) + 1;
  if (window_from > J) window_from = J;
  mpq_class w_min_log2 = -(sup_norm_bound + 1);
  mpq_class w_max_log2 = sup_norm_bound + 1;

  std::size_t window_size = 0, zeros = 0, divergent = 0;
  std::vector<std::pair<double, double>> fit_pts;
  for (const auto& rec : d.terms) {
    if (rec.j < window_from) continue;
    ++window_size;
    if (detail::delta_is_zero(rec.delta)) {
      ++zeros;
      continue;
    }
    double lj = std::log(static_cast<double>(rec.j));
    double ld = std::log(std::fabs(rec.delta.value.mid_double()));
    if (std::isfinite(lj) && std::isfinite(ld)) fit_pts.emplace_back(lj, ld);

    // divergence marker: |delta| sqrt(j) >= c and w_j >= w_min, both certain
    PrecReal mag =
        rec.delta.value.abs() *
        PrecReal::sqrt(PrecReal::from_long(static_cast<long>(rec.j), 96));
    auto c_ok = mag.cmp_q(mpq_class(pol.divergence_c));
    auto w_ok = rec.log2_w.cmp_q(w_min_log2);
    bool w_is_min = rec.log2_w.is_exact() && mpfr_zero_p(rec.log2_w.mid());
    if (c_ok.has_value() && *c_ok > 0 &&
        (w_is_min || (w_ok.has_value() && *w_ok > 0)))
      ++divergent;
  }

  if (window_size > 0 && zeros == window_size) {
    d.verdict = Verdict::ConvergenceEvidence;
    d.note = "all residues in the tail window vanish within error bounds";
    return;
  }

  if (fit_pts.size() >= pol.min_fit_points) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (auto& [px, py] : fit_pts) {
      sx += px;
      sy += py;
      sxx += px * px;
      sxy += px * py;
    }
    double n = static_cast<double>(fit_pts.size());
    double denom = n * sxx - sx * sx;
    if (denom > 0) {
      double slope = (n * sxy - sx * sy) / denom;
      LogLogFit fit;
      fit.alpha = -slope;
      fit.log_c = (sy - slope * sx) / n;
      fit.window_from = window_from;
      fit.window_to = J;
      fit.points = fit_pts.size();
      d.fit = fit;
    }
  }

  // convergence: fitted decay faster than 1/sqrt(j) with bounded weights
  if (d.fit && d.fit->alpha > 0.5 + pol.alpha_margin) {
    bool w_bounded = true;
    for (const auto& rec : d.terms) {
      if (rec.j < window_from) continue;
      if (rec.log2_w.is_exact() && mpfr_zero_p(rec.log2_w.mid())) continue;
      auto c = rec.log2_w.cmp_q(w_max_log2);
      if (!c.has_value() || *c > 0) {
        w_bounded = false;
        break;
      }
    }
    if (w_bounded) {
      d.verdict = Verdict::ConvergenceEvidence;
      d.note = "fitted |delta_j| ~ c/j^alpha with alpha above threshold";
      return;
    }
  }

  if (window_size > 0 &&
      static_cast<double>(divergent) >=
          pol.divergence_density * static_cast<double>(window_size)) {
    d.verdict = Verdict::DivergenceEvidence;
    d.note = "residues bounded below by c/sqrt(j) on the tail window";
    return;
  }

  d.verdict = Verdict::Inconclusive;
  d.note = "no decisive pattern on the tail window";
}

inline SeriesDiagnostics tset_diagnose(const ParamSequence& x,
                                       const ScalarProvider& t, unsigned long J,
                                       const DiagnosePolicy& pol = {},
                                       const TsetOptions& opt = {}) {
  SeriesDiagnostics d = tset_partial_sums(x, t, J, opt);
  apply_verdict(d, pol, x.sup_norm());
  return d;
}

// ---------------------------------------------------------------------------
// Construction of t with T(M_x) membership evidence: a(1) = 1 and
// a(j) = [-S_j] mod 2pi + 2pi for the factorial-scaled running sum S_j, so
// every head of the series telescopes to a multiple of 2pi and the residues
// reduce to explicit tails.
// ---------------------------------------------------------------------------

struct ConstructionTrace {
  unsigned long horizon = 0;
  std::vector<PrecReal> a;        // a(1..J)
  std::vector<PrecReal> running;  // R_j = sum_{k<=j} a(k) / (k! e^{x(k)/k!})
  PrecReal t;                     // R_J / ln2
  mpfr_prec_t work_bits = 0;
  unsigned long tail_bound_threshold = 1;  // (dagger) valid for j >= this
};

namespace detail {

inline PrecReal factorial_scale_ball(const ParamSequence& x, unsigned long j,
                                     mpfr_prec_t prec) {
  // j! e^{x(j)/j!}
  mpz_class f = factorial(j);
  mpq_class xj = x.at(j);
  PrecReal v = PrecReal::from_integer(f, prec);
  if (xj != 0) {
    mpq_class xf = xj / mpq_class(f);
    v = v * PrecReal::exp(PrecReal::from_rational(xf, prec));
  }
  return v;
}

}  // namespace detail

inline ConstructionTrace construct_t(const ParamSequence& x, unsigned long J,
                                     const TsetOptions& opt = {}) {
  if (J < 2) throw std::invalid_argument("construct_t requires J >= 2");
  mpz_class fJ = factorial(J);
  long bits = static_cast<long>(mpz_sizeinbase(fJ.get_mpz_t(), 2)) +
              detail::target_bits(opt.target_err) + 64;
  if (bits > static_cast<long>(opt.prec.ceiling_bits))
    throw PrecisionExhausted("construct_t: horizon exceeds precision ceiling");
  mpfr_prec_t prec = static_cast<mpfr_prec_t>(bits);

  ConstructionTrace trace;
  trace.horizon = J;
  trace.work_bits = prec;

  PrecReal two_pi = PrecReal::two_pi(prec);
  trace.a.push_back(PrecReal::from_long(1, prec));
  PrecReal running = PrecReal::from_long(1, prec) /
                     detail::factorial_scale_ball(x, 1, prec);
  trace.running.push_back(running);

  for (unsigned long j = 2; j <= J; ++j) {
    PrecReal Fj = detail::factorial_scale_ball(x, j, prec);
    PrecReal Sj = Fj * running;
    Angle m = signed_mod_2pi(-Sj);
    PrecReal aj = m.value + two_pi;  // lands in (pi, 3pi]
    running = running + aj / Fj;
    trace.a.push_back(aj);
    trace.running.push_back(running);
  }
  trace.t = running / PrecReal::ln2(prec);

  // (dagger) needs e^{x(k)/k!} in [1/2, 2] for all k >= j
  unsigned long threshold = 1;
  for (const auto& e : x.support()) {
    mpq_class a = ::abs(e.value);
    // |x(k)| <= k! ln 2 certainly?
    PrecReal lim = PrecReal::ln2(96).mul_z(factorial(e.j));
    auto c = lim.cmp_q(a);
    if (!c.has_value() || *c < 0) threshold = std::max(threshold, e.j + 1);
  }
  trace.tail_bound_threshold = threshold;
  return trace;
}

// Per-index check data for a construction: the tail identity value, the
// independently recomputed residue, their agreement, and the 12pi/j bound.
// The head telescopes to a multiple of 2pi only from j = 2 on (a(1) = 1 is
// not built to cancel), so checks cover 2 <= j < J.
struct ConstructionCheck {
  unsigned long j = 0;
  PrecReal tail;
  Angle delta_tail;
  Angle delta_direct;
  bool agree = false;
  bool bound_ok = false;       // 0 <= tail <= 12pi/j within certainty
  bool delta_positive = false; // residue certainly > 0
};

inline std::vector<ConstructionCheck> verify_construction(
    const ParamSequence& x, const ConstructionTrace& trace,
    const TsetOptions& opt = {}) {
  std::vector<ConstructionCheck> out;
  unsigned long J = trace.horizon;
  const PrecReal& RJ = trace.running.back();
  mpfr_prec_t prec = trace.work_bits;
  PrecReal pi_ball = PrecReal::pi(prec);

  out.resize(J - 2);
  parallel_for(J - 2, opt.workers, [&](unsigned long idx) {
    unsigned long j = idx + 2;
    ConstructionCheck chk;
    chk.j = j;
    PrecReal Fj = detail::factorial_scale_ball(x, j, prec);
    chk.tail = Fj * (RJ - trace.running[j - 1]);
    chk.delta_tail = signed_mod_2pi(chk.tail);
    chk.delta_direct =
        tset_delta(x, fixed_provider(trace.t), j, opt.target_err, opt.prec);
    mpfr_t tol;
    mpfr_init2(tol, PrecReal::kErrPrec);
    mpfr_add(tol, chk.delta_tail.value.err(), chk.delta_direct.value.err(),
             MPFR_RNDU);
    chk.agree = PrecReal::mids_within(chk.delta_tail.value,
                                      chk.delta_direct.value, tol);
    mpfr_clear(tol);

    PrecReal bound = pi_ball.mul_z(mpz_class(12)).div_ui(j);
    chk.bound_ok = !chk.tail.certainly_negative() &&
                   !(chk.tail - bound).certainly_positive();
    chk.delta_positive = chk.delta_direct.value.certainly_positive();
    out[idx] = std::move(chk);
  });
  return out;
}

// ---------------------------------------------------------------------------
// Divergence-forcing perturbation: past a cutoff j0, nudge x(j) so the
// residue of t l_j^x sits at least 1/(2 sqrt j) away from zero. The defining
// data (j, a(j), t) is retained so downstream residues use the exact identity
// t l_j^x = t ln2 j! + a(j)/sqrt(j) instead of re-exponentiating.
// ---------------------------------------------------------------------------

struct PerturbRule {
  unsigned long j = 0;
  int a = 0;              // the {0,1} selector
  bool boundary_tie = false;
};

struct PerturbCheck {
  unsigned long j = 0;
  Angle delta;
  bool lower_bound_ok = false;  // |delta| >= 1/(2 sqrt j), certain
  bool err_ok = false;          // delta error < 1/(8 sqrt j)
};

class PerturbedSequence {
 public:
  ParamSequence base;  // equals the output for j <= j0
  unsigned long j0 = 0;
  unsigned long horizon = 0;
  mpq_class eps;
  ScalarExpr t;
  std::vector<PerturbRule> rules;  // one per j in (j0, horizon], a = 0 or 1
  bool negated_t = false;          // group reduction T(M) ∋ -t was applied

  const PerturbRule* rule_at(unsigned long j) const {
    if (j <= j0 || j > horizon) return nullptr;
    return &rules[j - j0 - 1];
  }

  // High-precision evaluation of the stored formula
  // x(j) = j! ln(1 + a(j)/(t ln2 j! sqrt j)).
  PrecReal value_at(unsigned long j, mpfr_prec_t prec = 192) const {
    if (j <= j0) return PrecReal::from_rational(base.at(j), prec);
    const PerturbRule* r = rule_at(j);
    if (!r || r->a == 0) return PrecReal(64);
    mpz_class f = factorial(j);
    PrecReal denom = t.eval(prec) * PrecReal::ln2(prec) *
                     PrecReal::sqrt(PrecReal::from_long(
                         static_cast<long>(j), prec)).mul_z(f);
    PrecReal arg = PrecReal::from_long(1, prec) / denom;
    return PrecReal::log1p(arg).mul_z(f);
  }

  // sup_j |x(j)| is bounded by max(sup|y|, eps/2).
  mpq_class sup_norm_bound() const {
    mpq_class b = eps / 2;
    mpq_class s = base.sup_norm();
    return s > b ? s : b;
  }
};

namespace detail {

inline PrecReal half_inv_sqrt(unsigned long j, mpfr_prec_t prec) {
  // 1/(2 sqrt j), as a ball
  return PrecReal::sqrt(
      PrecReal::from_rational(mpq_class(1, mpz_class(4) * mpz_class(j)), prec));
}

inline PrecReal inv_sqrt(unsigned long j, mpfr_prec_t prec) {
  return PrecReal::sqrt(
      PrecReal::from_rational(mpq_class(1, j), prec));
}

}  // namespace detail

inline PerturbedSequence perturb_for_divergence(const ParamSequence& y,
                                                const ScalarExpr& t_in,
                                                const mpq_class& eps,
                                                unsigned long J,
                                                const TsetOptions& opt = {},
                                                std::vector<PerturbCheck>*
                                                    checks = nullptr) {
  if (eps <= 0) throw std::invalid_argument("eps must be positive");
  if (t_in.is_zero()) throw std::invalid_argument("t must be nonzero");
  ScalarExpr t = t_in;
  bool negated = false;
  if (t.is_negative()) {
    t = t.negated();  // T(M) is a group: -t membership is equivalent
    negated = true;
  }

  // j0: all support beyond it is below eps/2, and 1/(t ln2 sqrt j0) < eps/2
  unsigned long j_support = 0;
  for (const auto& e : y.support()) {
    mpq_class a = ::abs(e.value);
    if (a >= eps / 2) j_support = std::max(j_support, e.j);
  }
  mpq_class half_eps = eps / 2;
  PrecReal t_ln2 = t.eval(256) * PrecReal::ln2(256);
  unsigned long j0 = std::max<unsigned long>(j_support, 1);
  for (;; ++j0) {
    if (j0 > 100000000ul)
      throw PrecisionExhausted("perturb: cutoff search exceeded 1e8");
    // 1/(t ln2 sqrt j0) < eps/2  <=>  (t ln2)^2 j0 > 4/eps^2
    PrecReal lhs = PrecReal::sqr(t_ln2).mul_q(mpq_class(j0));
    auto c = lhs.cmp_q(4 / (eps * eps));
    if (c.has_value() && *c > 0) break;
  }
  if (J <= j0)
    throw WindowTooSmall("perturb: J = " + std::to_string(J) +
                         " does not exceed j0 = " + std::to_string(j0));

  PerturbedSequence out;
  out.base = y;
  out.j0 = j0;
  out.horizon = J;
  out.eps = eps;
  out.t = t;
  out.negated_t = negated;
  out.rules.resize(J - j0);
  if (checks) checks->resize(J - j0);

  parallel_for(J - j0, opt.workers, [&](unsigned long idx) {
    unsigned long j = j0 + 1 + idx;
    mpfr_prec_t prec = 256;
    PrecReal threshold = detail::half_inv_sqrt(j, prec);
    PerturbRule rule;
    rule.j = j;

    double target = std::min(opt.target_err, 1.0 / (64.0 * std::sqrt(double(j))));
    Angle theta = factorial_scaled_angle(t.provider(), j, mpq_class(0), target,
                                         opt.prec);
    PrecReal mag = theta.value.abs();
    if (PrecReal::certainly_less(mag, threshold)) {
      rule.a = 1;
    } else if (PrecReal::certainly_greater(mag, threshold)) {
      rule.a = 0;
    } else {
      // retry the residue sharper before declaring a tie
      Angle theta2 = factorial_scaled_angle(t.provider(), j, mpq_class(0),
                                            target * 1e-12, opt.prec);
      PrecReal mag2 = theta2.value.abs();
      if (PrecReal::certainly_less(mag2, threshold)) {
        rule.a = 1;
      } else if (PrecReal::certainly_greater(mag2, threshold)) {
        rule.a = 0;
      } else {
        rule.a = 1;  // divergence-forcing branch, flagged
        rule.boundary_tie = true;
      }
      theta = theta2;
    }
    out.rules[idx] = rule;

    if (checks) {
      PerturbCheck chk;
      chk.j = j;
      PrecReal s = theta.value;
      if (rule.a == 1) s = s + detail::inv_sqrt(j, prec);
      chk.delta = signed_mod_2pi(s);
      chk.lower_bound_ok =
          PrecReal::certainly_greater(chk.delta.value.abs(), threshold);
      // err < 1/(8 sqrt j): compare err^2 against 1/(64 j) exactly
      mpq_class bound_sq(1, mpz_class(64) * mpz_class(j));
      PrecReal errball = PrecReal::from_mpfr(chk.delta.value.err(), 64);
      auto cmp = PrecReal::sqr(errball).cmp_q(bound_sq);
      chk.err_ok = cmp.has_value() && *cmp < 0;
      (*checks)[idx] = chk;
    }
  });
  return out;
}

// Residue for a perturbed sequence through the exact identity
// t l_j^x = t ln2 j! + a(j)/sqrt(j) for j > j0.
inline Angle perturbed_delta(const PerturbedSequence& p, unsigned long j,
                             const TsetOptions& opt = {}) {
  if (j <= p.j0)
    return tset_delta(p.base, p.t.provider(), j, opt.target_err, opt.prec);
  const PerturbRule* r = p.rule_at(j);
  if (!r) throw std::invalid_argument("j beyond perturbation horizon");
  double target =
      std::min(opt.target_err, 1.0 / (64.0 * std::sqrt(double(j))));
  Angle theta =
      factorial_scaled_angle(p.t.provider(), j, mpq_class(0), target, opt.prec);
  if (r->a == 0) return theta;
  PrecReal s = theta.value + detail::inv_sqrt(j, 256);
  return signed_mod_2pi(s);
}

// log2 w_j for a perturbed sequence: exactly -a(j)/(t ln2 sqrt j) past j0.
inline PrecReal perturbed_log2_weight(const PerturbedSequence& p,
                                      unsigned long j, mpfr_prec_t prec = 192) {
  if (j <= p.j0) return log2_weight(j, p.base.at(j), prec);
  const PerturbRule* r = p.rule_at(j);
  if (!r) throw std::invalid_argument("j beyond perturbation horizon");
  if (r->a == 0) return PrecReal(64);
  PrecReal denom = p.t.eval(prec) * PrecReal::ln2(prec) *
                   PrecReal::sqrt(PrecReal::from_long(static_cast<long>(j),
                                                      prec));
  return -(PrecReal::from_long(1, prec) / denom);
}

inline SeriesDiagnostics tset_partial_sums(const PerturbedSequence& p,
                                           unsigned long J,
                                           const TsetOptions& opt = {}) {
  if (J > p.horizon)
    throw std::invalid_argument("J exceeds the perturbation horizon");
  return detail::sum_series(
      [&](unsigned long j) {
        return detail::TermInputs{perturbed_delta(p, j, opt),
                                  perturbed_log2_weight(p, j)};
      },
      J, opt);
}

inline SeriesDiagnostics tset_diagnose(const PerturbedSequence& p,
                                       unsigned long J,
                                       const DiagnosePolicy& pol = {},
                                       const TsetOptions& opt = {}) {
  SeriesDiagnostics d = tset_partial_sums(p, J, opt);
  apply_verdict(d, pol, p.sup_norm_bound());
  return d;
}

}  // namespace awlab
