#pragma once

#include <gmpxx.h>
#include <mpfr.h>

#include <algorithm>
#include <cmath>
#include <string>

#include "awlab/errors.hpp"
#include "awlab/prec_real.hpp"
#include "awlab/rational.hpp"
#include "awlab/scalar_expr.hpp"

namespace awlab {

// Adaptive working-precision policy: start from the formula-derived bound,
// verify at +64 bits, double the guard on disagreement, give up at the
// ceiling.
struct PrecPolicy {
  mpfr_prec_t ceiling_bits = mpfr_prec_t{1} << 20;
  mpfr_prec_t initial_guard = 32;
};

// A signed residue mod 2pi, normalized to (-pi, pi]. When the ball overlaps
// the boundary +-pi the representative is still reported but flagged, never
// silently snapped.
struct Angle {
  PrecReal value;
  bool boundary_ambiguous = false;
};

namespace detail {

inline bool near_boundary(const PrecReal& r, const PrecReal& pi_ball) {
  mpfr_t tot;
  mpfr_init2(tot, PrecReal::kErrPrec);
  mpfr_add(tot, r.err(), pi_ball.err(), MPFR_RNDU);
  bool hit = PrecReal::mids_within(r, pi_ball, tot) ||
             PrecReal::mids_within(r, -pi_ball, tot);
  mpfr_clear(tot);
  return hit;
}

}  // namespace detail

// The unique representative of {s + 2pi p : p integer} in (-pi, pi].
// The input ball must be narrower than pi or the residue is undetermined.
inline Angle signed_mod_2pi(const PrecReal& s) {
  if (mpfr_cmp_d(s.err(), 3.14159265) >= 0)
    throw PrecisionExhausted(
        "signed_mod_2pi: input error exceeds pi; resupply at higher precision");

  long exp_s = mpfr_zero_p(s.mid()) ? 0
                                    : std::max<long>(0, mpfr_get_exp(s.mid()));
  mpfr_prec_t work =
      std::max<mpfr_prec_t>(s.precision(), 128) + static_cast<mpfr_prec_t>(exp_s) + 32;

  PrecReal two_pi = PrecReal::two_pi(work);

  // nearest multiple
  mpfr_t ratio;
  mpfr_init2(ratio, work);
  mpfr_div(ratio, s.mid(), two_pi.mid(), MPFR_RNDN);
  mpfr_rint(ratio, ratio, MPFR_RNDN);
  mpz_class q;
  mpfr_get_z(q.get_mpz_t(), ratio, MPFR_RNDN);
  mpfr_clear(ratio);

  PrecReal r = s - two_pi.mul_z(q);

  // mid-canonicalize into (-pi, pi]
  PrecReal pi_ball = PrecReal::pi(work);
  while (mpfr_cmp(r.mid(), pi_ball.mid()) > 0) r = r - two_pi;
  mpfr_t neg_pi;
  mpfr_init2(neg_pi, work);
  mpfr_neg(neg_pi, pi_ball.mid(), MPFR_RNDN);
  while (mpfr_cmp(r.mid(), neg_pi) <= 0) r = r + two_pi;
  mpfr_clear(neg_pi);

  if (mpfr_cmp_d(r.err(), 3.14159265) >= 0)
    throw PrecisionExhausted("signed_mod_2pi: residue undetermined after reduction");

  return Angle{r, detail::near_boundary(r, pi_ball)};
}

namespace detail {

inline long target_bits(double target_err) {
  if (!(target_err > 0.0) || !(target_err < 1.0))
    throw std::invalid_argument("target_err must lie in (0, 1)");
  return std::max<long>(8, static_cast<long>(std::ceil(-std::log2(target_err))));
}

// One evaluation of (t * ln2 * j! * e^{x_j/j!}) mod 2pi at a set precision.
inline Angle factorial_angle_eval(const ScalarProvider& t, unsigned long j,
                                  const mpq_class& x_j, mpfr_prec_t prec) {
  mpz_class f = factorial(j);
  PrecReal l = PrecReal::ln2(prec);
  if (x_j != 0) {
    mpq_class xf = x_j / mpq_class(f);
    l = l * PrecReal::exp(PrecReal::from_rational(xf, prec));
  }
  l = l.mul_z(f);
  PrecReal s = t(prec) * l;
  return signed_mod_2pi(s);
}

}  // namespace detail

// delta = (t * l_j^x) mod 2pi with l_j^x = ln2 * j! * e^{x_j/j!}, delivered
// with error at most target_err. Working precision starts at
// ceil(log2(j!)) + ceil(log2(1/target_err)) + guard bits; every result is
// verified by recomputation at +64 bits and the guard doubles until the two
// runs agree within target_err or the ceiling is hit.
inline Angle factorial_scaled_angle(const ScalarProvider& t, unsigned long j,
                                    const mpq_class& x_j, double target_err,
                                    const PrecPolicy& policy = {}) {
  if (j == 0) throw std::invalid_argument("j must be positive");
  mpz_class f = factorial(j);
  long base_bits = static_cast<long>(mpz_sizeinbase(f.get_mpz_t(), 2));
  long tbits = detail::target_bits(target_err);

  mpfr_t target;
  mpfr_init2(target, 64);
  mpfr_set_d(target, target_err, MPFR_RNDD);

  mpfr_prec_t guard = policy.initial_guard;
  while (true) {
    mpfr_prec_t prec = static_cast<mpfr_prec_t>(base_bits + tbits) + guard;
    if (prec + 64 > policy.ceiling_bits) {
      mpfr_clear(target);
      throw PrecisionExhausted("factorial_scaled_angle: precision ceiling at j=" +
                               std::to_string(j));
    }
    Angle a1 = detail::factorial_angle_eval(t, j, x_j, prec);
    Angle a2 = detail::factorial_angle_eval(t, j, x_j, prec + 64);
    bool agree = PrecReal::mids_within(a1.value, a2.value, target) ||
                 // representatives may legitimately sit on opposite sides of
                 // the boundary when the residue is at +-pi
                 (a1.boundary_ambiguous && a2.boundary_ambiguous);
    bool tight = mpfr_cmp(a2.value.err(), target) <= 0;
    if (agree && tight) {
      mpfr_clear(target);
      a2.boundary_ambiguous |= a1.boundary_ambiguous;
      return a2;
    }
    guard *= 2;
  }
}

inline Angle factorial_scaled_angle(const PrecReal& t, unsigned long j,
                                    const mpq_class& x_j, double target_err,
                                    const PrecPolicy& policy = {}) {
  return factorial_scaled_angle(fixed_provider(t), j, x_j, target_err, policy);
}

// log2 of the weight N_j e^{-l_j^x}: j! (1 - e^{x_j/j!}), evaluated through
// expm1 so the near-cancellation at small x_j costs no digits. Exact zero
// when x_j = 0.
inline PrecReal log2_weight(unsigned long j, const mpq_class& x_j,
                            mpfr_prec_t prec = 160) {
  if (j == 0) throw std::invalid_argument("j must be positive");
  if (x_j == 0) return PrecReal(64);
  mpz_class f = factorial(j);
  mpfr_prec_t work =
      prec + static_cast<mpfr_prec_t>(mpz_sizeinbase(f.get_mpz_t(), 2));
  mpq_class xf = x_j / mpq_class(f);
  PrecReal em = PrecReal::expm1(PrecReal::from_rational(xf, work));
  return -em.mul_z(f);
}

}  // namespace awlab
