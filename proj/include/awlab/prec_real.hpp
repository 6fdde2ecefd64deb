#pragma once

#include <gmpxx.h>
#include <mpfr.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>

#include "awlab/errors.hpp"

namespace awlab {

// An arbitrary-precision real carried as a ball: a midpoint at a stated
// working precision plus a nonnegative absolute error bound. The true value
// is guaranteed to lie within [mid - err, mid + err]. Every operation
// propagates input error and accounts for its own rounding, with all error
// bookkeeping rounded upward.
class PrecReal {
 public:
  static constexpr mpfr_prec_t kErrPrec = 32;
  static constexpr mpfr_prec_t kMinPrec = 64;

  explicit PrecReal(mpfr_prec_t prec = kMinPrec) : prec_(clamp_prec(prec)) {
    mpfr_init2(mid_, prec_);
    mpfr_set_zero(mid_, 1);
    mpfr_init2(err_, kErrPrec);
    mpfr_set_zero(err_, 1);
  }

  PrecReal(const PrecReal& o) : prec_(o.prec_) {
    mpfr_init2(mid_, prec_);
    mpfr_set(mid_, o.mid_, MPFR_RNDN);
    mpfr_init2(err_, kErrPrec);
    mpfr_set(err_, o.err_, MPFR_RNDU);
  }

  PrecReal(PrecReal&& o) noexcept : prec_(o.prec_) {
    mpfr_init2(mid_, kMinPrec);
    mpfr_init2(err_, kErrPrec);
    mpfr_swap(mid_, o.mid_);
    mpfr_swap(err_, o.err_);
  }

  PrecReal& operator=(const PrecReal& o) {
    if (this != &o) {
      prec_ = o.prec_;
      mpfr_set_prec(mid_, prec_);
      mpfr_set(mid_, o.mid_, MPFR_RNDN);
      mpfr_set(err_, o.err_, MPFR_RNDU);
    }
    return *this;
  }

  PrecReal& operator=(PrecReal&& o) noexcept {
    if (this != &o) {
      prec_ = o.prec_;
      mpfr_swap(mid_, o.mid_);
      mpfr_swap(err_, o.err_);
    }
    return *this;
  }

  ~PrecReal() {
    mpfr_clear(mid_);
    mpfr_clear(err_);
  }

  // ---- constructors for exact and rounded inputs ----

  static PrecReal from_long(long v, mpfr_prec_t prec = kMinPrec) {
    PrecReal r(prec);
    mpfr_set_si(r.mid_, v, MPFR_RNDN);  // exact: |v| < 2^63 <= prec range
    return r;
  }

  static PrecReal from_integer(const mpz_class& v, mpfr_prec_t prec) {
    mpfr_prec_t need = std::max<mpfr_prec_t>(
        prec, static_cast<mpfr_prec_t>(mpz_sizeinbase(v.get_mpz_t(), 2)));
    PrecReal r(need);
    mpfr_set_z(r.mid_, v.get_mpz_t(), MPFR_RNDN);  // exact by construction
    return r;
  }

  static PrecReal from_rational(const mpq_class& q, mpfr_prec_t prec) {
    PrecReal r(prec);
    int t = mpfr_set_q(r.mid_, q.get_mpq_t(), MPFR_RNDN);
    r.bump_rounding(t);
    return r;
  }

  static PrecReal from_double(double v, mpfr_prec_t prec = kMinPrec) {
    PrecReal r(std::max<mpfr_prec_t>(prec, 64));
    mpfr_set_d(r.mid_, v, MPFR_RNDN);  // exact: doubles embed at >= 53 bits
    return r;
  }

  static PrecReal from_mpfr(mpfr_srcptr v, mpfr_prec_t prec) {
    PrecReal r(prec);
    int t = mpfr_set(r.mid_, v, MPFR_RNDN);
    r.bump_rounding(t);
    return r;
  }

  // 2^e, exact.
  static PrecReal pow2(long e, mpfr_prec_t prec = kMinPrec) {
    PrecReal r(prec);
    mpfr_set_ui_2exp(r.mid_, 1, e, MPFR_RNDN);
    return r;
  }

  // ---- constants (correctly rounded; 1 ulp error bound) ----

  static PrecReal pi(mpfr_prec_t prec) {
    PrecReal r(prec);
    int t = mpfr_const_pi(r.mid_, MPFR_RNDN);
    r.bump_rounding(t ? t : 1);
    return r;
  }

  static PrecReal two_pi(mpfr_prec_t prec) {
    PrecReal r(prec);
    int t = mpfr_const_pi(r.mid_, MPFR_RNDN);
    mpfr_mul_2ui(r.mid_, r.mid_, 1, MPFR_RNDN);  // exact scaling
    r.bump_rounding(t ? t : 1);
    return r;
  }

  static PrecReal ln2(mpfr_prec_t prec) {
    PrecReal r(prec);
    int t = mpfr_const_log2(r.mid_, MPFR_RNDN);
    r.bump_rounding(t ? t : 1);
    return r;
  }

  static PrecReal euler_e(mpfr_prec_t prec) {
    PrecReal r(prec);
    mpfr_t one;
    mpfr_init2(one, 8);
    mpfr_set_ui(one, 1, MPFR_RNDN);
    int t = mpfr_exp(r.mid_, one, MPFR_RNDN);
    mpfr_clear(one);
    r.bump_rounding(t ? t : 1);
    return r;
  }

  // ---- accessors ----

  mpfr_prec_t precision() const { return prec_; }
  mpfr_srcptr mid() const { return mid_; }
  mpfr_srcptr err() const { return err_; }
  bool is_exact() const { return mpfr_zero_p(err_); }
  double mid_double() const { return mpfr_get_d(mid_, MPFR_RNDN); }

  // log2 of the error bound; -inf when exact. Safe at any magnitude.
  double err_log2() const {
    if (mpfr_zero_p(err_)) return -std::numeric_limits<double>::infinity();
    long exp = mpfr_get_exp(err_);
    mpfr_t m;
    mpfr_init2(m, 53);
    mpfr_div_2si(m, err_, exp, MPFR_RNDU);
    double frac = std::log2(mpfr_get_d(m, MPFR_RNDU));
    mpfr_clear(m);
    return static_cast<double>(exp) + frac;
  }

  // Inflates the error bound by an externally derived amount.
  void add_error(mpfr_srcptr extra) { mpfr_add(err_, err_, extra, MPFR_RNDU); }

  void add_error_2exp(long log2_bound) {
    mpfr_t t;
    mpfr_init2(t, kErrPrec);
    mpfr_set_ui_2exp(t, 1, log2_bound, MPFR_RNDU);
    mpfr_add(err_, err_, t, MPFR_RNDU);
    mpfr_clear(t);
  }

  // Upper/lower bounds of the ball, written to an initialized target.
  void bound_hi(mpfr_ptr out) const { mpfr_add(out, mid_, err_, MPFR_RNDU); }
  void bound_lo(mpfr_ptr out) const { mpfr_sub(out, mid_, err_, MPFR_RNDD); }

  // ---- arithmetic ----

  friend PrecReal operator+(const PrecReal& a, const PrecReal& b) {
    PrecReal r(std::max(a.prec_, b.prec_));
    int t = mpfr_add(r.mid_, a.mid_, b.mid_, MPFR_RNDN);
    r.combine_errs(a, b);
    r.bump_rounding(t);
    return r;
  }

  friend PrecReal operator-(const PrecReal& a, const PrecReal& b) {
    PrecReal r(std::max(a.prec_, b.prec_));
    int t = mpfr_sub(r.mid_, a.mid_, b.mid_, MPFR_RNDN);
    r.combine_errs(a, b);
    r.bump_rounding(t);
    return r;
  }

  friend PrecReal operator*(const PrecReal& a, const PrecReal& b) {
    PrecReal r(std::max(a.prec_, b.prec_));
    int t = mpfr_mul(r.mid_, a.mid_, b.mid_, MPFR_RNDN);
    // |a||eb| + |b||ea| + ea*eb
    mpfr_t u, v;
    mpfr_init2(u, kErrPrec);
    mpfr_init2(v, kErrPrec);
    mpfr_abs(u, a.mid_, MPFR_RNDU);
    mpfr_mul(u, u, b.err_, MPFR_RNDU);
    mpfr_abs(v, b.mid_, MPFR_RNDU);
    mpfr_mul(v, v, a.err_, MPFR_RNDU);
    mpfr_add(r.err_, u, v, MPFR_RNDU);
    mpfr_mul(u, a.err_, b.err_, MPFR_RNDU);
    mpfr_add(r.err_, r.err_, u, MPFR_RNDU);
    mpfr_clear(u);
    mpfr_clear(v);
    r.bump_rounding(t);
    return r;
  }

  // a / b. The divisor ball must exclude zero.
  friend PrecReal operator/(const PrecReal& a, const PrecReal& b) {
    mpfr_t bmin;
    mpfr_init2(bmin, kErrPrec);
    mpfr_abs(bmin, b.mid_, MPFR_RNDD);
    mpfr_sub(bmin, bmin, b.err_, MPFR_RNDD);
    if (mpfr_sgn(bmin) <= 0) {
      mpfr_clear(bmin);
      throw PrecisionExhausted("division by a ball containing zero");
    }
    PrecReal r(std::max(a.prec_, b.prec_));
    int t = mpfr_div(r.mid_, a.mid_, b.mid_, MPFR_RNDN);
    // (ea + |a/b| eb) / (|b| - eb)
    mpfr_t u;
    mpfr_init2(u, kErrPrec);
    mpfr_abs(u, r.mid_, MPFR_RNDU);
    mpfr_mul(u, u, b.err_, MPFR_RNDU);
    mpfr_add(u, u, a.err_, MPFR_RNDU);
    mpfr_div(r.err_, u, bmin, MPFR_RNDU);
    mpfr_clear(u);
    mpfr_clear(bmin);
    r.bump_rounding(t);
    return r;
  }

  PrecReal operator-() const {
    PrecReal r(*this);
    mpfr_neg(r.mid_, r.mid_, MPFR_RNDN);  // exact
    return r;
  }

  PrecReal abs() const {
    PrecReal r(*this);
    mpfr_abs(r.mid_, r.mid_, MPFR_RNDN);  // exact
    return r;
  }

  // Exact scaling by 2^k.
  PrecReal mul_2exp(long k) const {
    PrecReal r(*this);
    mpfr_mul_2si(r.mid_, r.mid_, k, MPFR_RNDN);
    mpfr_mul_2si(r.err_, r.err_, k, MPFR_RNDU);
    return r;
  }

  // ---- exact mixed-type operations (second operand has no error) ----

  PrecReal mul_z(const mpz_class& z) const {
    PrecReal r(prec_);
    int t = mpfr_mul_z(r.mid_, mid_, z.get_mpz_t(), MPFR_RNDN);
    mpfr_t za;
    mpfr_init2(za, kErrPrec);
    mpfr_set_z(za, z.get_mpz_t(), MPFR_RNDU);
    mpfr_abs(za, za, MPFR_RNDU);
    mpfr_mul(r.err_, err_, za, MPFR_RNDU);
    mpfr_clear(za);
    r.bump_rounding(t);
    return r;
  }

  PrecReal mul_q(const mpq_class& q) const {
    PrecReal r(prec_);
    int t = mpfr_mul_q(r.mid_, mid_, q.get_mpq_t(), MPFR_RNDN);
    mpfr_t qa;
    mpfr_init2(qa, kErrPrec);
    mpfr_set_q(qa, q.get_mpq_t(), MPFR_RNDU);
    mpfr_abs(qa, qa, MPFR_RNDU);
    mpfr_mul(r.err_, err_, qa, MPFR_RNDU);
    mpfr_clear(qa);
    r.bump_rounding(t);
    return r;
  }

  PrecReal add_q(const mpq_class& q) const {
    PrecReal r(prec_);
    int t = mpfr_add_q(r.mid_, mid_, q.get_mpq_t(), MPFR_RNDN);
    mpfr_set(r.err_, err_, MPFR_RNDU);
    r.bump_rounding(t);
    return r;
  }

  PrecReal add_z(const mpz_class& z) const {
    PrecReal r(prec_);
    int t = mpfr_add_z(r.mid_, mid_, z.get_mpz_t(), MPFR_RNDN);
    mpfr_set(r.err_, err_, MPFR_RNDU);
    r.bump_rounding(t);
    return r;
  }

  // Smallest long k with value <= 2^k, derived from the upper ball bound.
  long mag_log2_ceil() const {
    mpfr_t hi;
    mpfr_init2(hi, kErrPrec + 8);
    bound_hi(hi);
    long res;
    if (mpfr_zero_p(hi) || mpfr_sgn(hi) < 0) {
      res = mpfr_get_emin();  // value <= 0: any tiny exponent works
    } else {
      res = static_cast<long>(mpfr_get_exp(hi));  // 2^(e-1) <= |hi| < 2^e
    }
    mpfr_clear(hi);
    return res;
  }

  // Integer ceiling of the upper ball bound, clamped; the right tool for
  // range checks on values that are themselves base-2 exponents.
  long hi_ceil_long(long clamp = (1L << 40)) const {
    mpfr_t hi;
    mpfr_init2(hi, kErrPrec + 32);
    bound_hi(hi);
    mpfr_ceil(hi, hi);
    long res;
    if (!mpfr_fits_slong_p(hi, MPFR_RNDU)) {
      res = mpfr_sgn(hi) > 0 ? clamp : -clamp;
    } else {
      res = mpfr_get_si(hi, MPFR_RNDU);
      res = std::max(-clamp, std::min(clamp, res));
    }
    mpfr_clear(hi);
    return res;
  }

  PrecReal sub_q(const mpq_class& q) const { return add_q(mpq_class(-q)); }

  PrecReal div_ui(unsigned long n) const {
    PrecReal r(prec_);
    int t = mpfr_div_ui(r.mid_, mid_, n, MPFR_RNDN);
    mpfr_div_ui(r.err_, err_, n, MPFR_RNDU);
    r.bump_rounding(t);
    return r;
  }

  // Rounds to a new working precision, accounting for the rounding step.
  PrecReal rounded_to(mpfr_prec_t prec) const {
    PrecReal r(prec);
    int t = mpfr_set(r.mid_, mid_, MPFR_RNDN);
    mpfr_set(r.err_, err_, MPFR_RNDU);
    r.bump_rounding(t);
    return r;
  }

  // ---- elementary functions ----

  static PrecReal sqr(const PrecReal& a) { return a * a; }

  static PrecReal sqrt(const PrecReal& a) {
    mpfr_t lo, hi;
    mpfr_init2(lo, kErrPrec);
    mpfr_init2(hi, kErrPrec);
    a.bound_lo(lo);
    a.bound_hi(hi);
    if (mpfr_sgn(hi) < 0) {
      mpfr_clear(lo);
      mpfr_clear(hi);
      throw PrecisionExhausted("sqrt of a negative ball");
    }
    if (mpfr_sgn(lo) < 0) mpfr_set_zero(lo, 1);
    PrecReal r(a.prec_);
    if (mpfr_sgn(a.mid_) >= 0) {
      int t = mpfr_sqrt(r.mid_, a.mid_, MPFR_RNDN);
      r.bump_rounding(t);
    } else {
      mpfr_set_zero(r.mid_, 1);
    }
    // err from the image of the interval endpoints
    mpfr_t slo, shi, d;
    mpfr_init2(slo, kErrPrec);
    mpfr_init2(shi, kErrPrec);
    mpfr_init2(d, kErrPrec);
    mpfr_sqrt(slo, lo, MPFR_RNDD);
    mpfr_sqrt(shi, hi, MPFR_RNDU);
    mpfr_sub(d, shi, r.mid_, MPFR_RNDU);
    if (mpfr_sgn(d) > 0) mpfr_add(r.err_, r.err_, d, MPFR_RNDU);
    mpfr_sub(d, r.mid_, slo, MPFR_RNDU);
    if (mpfr_sgn(d) > 0) {
      mpfr_t cur;
      mpfr_init2(cur, kErrPrec);
      mpfr_set(cur, r.err_, MPFR_RNDU);
      mpfr_max(r.err_, cur, d, MPFR_RNDU);
      mpfr_clear(cur);
    }
    mpfr_clear(lo);
    mpfr_clear(hi);
    mpfr_clear(slo);
    mpfr_clear(shi);
    mpfr_clear(d);
    return r;
  }

  // exp and expm1 share the derivative bound exp(hi).
  static PrecReal exp(const PrecReal& a) { return exp_like(a, false); }
  static PrecReal expm1(const PrecReal& a) { return exp_like(a, true); }

  // 2^a; derivative bound ln2 * 2^hi.
  static PrecReal exp2(const PrecReal& a) {
    PrecReal r(a.prec_);
    int t = mpfr_exp2(r.mid_, a.mid_, MPFR_RNDN);
    if (mpfr_inf_p(r.mid_))
      throw PrecisionExhausted("exp2 overflow: exponent too large");
    if (!mpfr_zero_p(a.err_)) {
      mpfr_t hi, d;
      mpfr_init2(hi, kErrPrec);
      mpfr_init2(d, kErrPrec);
      a.bound_hi(hi);
      mpfr_exp2(d, hi, MPFR_RNDU);
      mpfr_mul(d, d, a.err_, MPFR_RNDU);
      mpfr_mul_d(d, d, 0.6931471805599454, MPFR_RNDU);
      mpfr_add(r.err_, r.err_, d, MPFR_RNDU);
      mpfr_clear(hi);
      mpfr_clear(d);
    }
    r.bump_rounding(t);
    return r;
  }

  // Natural log; the ball must be strictly positive.
  static PrecReal log(const PrecReal& a) {
    mpfr_t lo;
    mpfr_init2(lo, kErrPrec);
    a.bound_lo(lo);
    if (mpfr_sgn(lo) <= 0) {
      mpfr_clear(lo);
      throw PrecisionExhausted("log of a ball touching zero");
    }
    PrecReal r(a.prec_);
    int t = mpfr_log(r.mid_, a.mid_, MPFR_RNDN);
    mpfr_div(lo, a.err_, lo, MPFR_RNDU);  // err / lo
    mpfr_add(r.err_, r.err_, lo, MPFR_RNDU);
    mpfr_clear(lo);
    r.bump_rounding(t);
    return r;
  }

  static PrecReal log1p(const PrecReal& a) {
    mpfr_t lo;
    mpfr_init2(lo, kErrPrec);
    a.bound_lo(lo);
    mpfr_add_ui(lo, lo, 1, MPFR_RNDD);
    if (mpfr_sgn(lo) <= 0) {
      mpfr_clear(lo);
      throw PrecisionExhausted("log1p of a ball touching -1");
    }
    PrecReal r(a.prec_);
    int t = mpfr_log1p(r.mid_, a.mid_, MPFR_RNDN);
    mpfr_div(lo, a.err_, lo, MPFR_RNDU);
    mpfr_add(r.err_, r.err_, lo, MPFR_RNDU);
    mpfr_clear(lo);
    r.bump_rounding(t);
    return r;
  }

  // log base 2; the ball must be strictly positive.
  static PrecReal log2(const PrecReal& a) {
    mpfr_t lo;
    mpfr_init2(lo, kErrPrec);
    a.bound_lo(lo);
    if (mpfr_sgn(lo) <= 0) {
      mpfr_clear(lo);
      throw PrecisionExhausted("log2 of a ball touching zero");
    }
    PrecReal r(a.prec_);
    int t = mpfr_log2(r.mid_, a.mid_, MPFR_RNDN);
    mpfr_div(lo, a.err_, lo, MPFR_RNDU);
    mpfr_mul_d(lo, lo, 1.4426950408889635, MPFR_RNDU);  // 1/ln2, rounded up
    mpfr_add(r.err_, r.err_, lo, MPFR_RNDU);
    mpfr_clear(lo);
    r.bump_rounding(t);
    return r;
  }

  // cos/sin have derivative bounded by 1.
  static PrecReal cos(const PrecReal& a) {
    PrecReal r(a.prec_);
    int t = mpfr_cos(r.mid_, a.mid_, MPFR_RNDN);
    mpfr_add(r.err_, r.err_, a.err_, MPFR_RNDU);
    r.bump_rounding(t);
    return r;
  }

  static PrecReal sin(const PrecReal& a) {
    PrecReal r(a.prec_);
    int t = mpfr_sin(r.mid_, a.mid_, MPFR_RNDN);
    mpfr_add(r.err_, r.err_, a.err_, MPFR_RNDU);
    r.bump_rounding(t);
    return r;
  }

  // ---- ball-aware comparisons ----

  // True when every point of a is strictly below every point of b.
  static bool certainly_less(const PrecReal& a, const PrecReal& b) {
    mpfr_t ahi, blo;
    mpfr_init2(ahi, kErrPrec + 64);
    mpfr_init2(blo, kErrPrec + 64);
    a.bound_hi(ahi);
    b.bound_lo(blo);
    bool res = mpfr_cmp(ahi, blo) < 0;
    mpfr_clear(ahi);
    mpfr_clear(blo);
    return res;
  }

  static bool certainly_greater(const PrecReal& a, const PrecReal& b) {
    return certainly_less(b, a);
  }

  bool certainly_positive() const {
    mpfr_t lo;
    mpfr_init2(lo, kErrPrec + 64);
    bound_lo(lo);
    bool res = mpfr_sgn(lo) > 0;
    mpfr_clear(lo);
    return res;
  }

  bool certainly_negative() const {
    mpfr_t hi;
    mpfr_init2(hi, kErrPrec + 64);
    bound_hi(hi);
    bool res = mpfr_sgn(hi) < 0;
    mpfr_clear(hi);
    return res;
  }

  bool contains_zero() const {
    return !certainly_positive() && !certainly_negative();
  }

  // Whether the exact rational q lies inside the ball.
  bool contains_q(const mpq_class& q) const {
    mpfr_t v, d;
    mpfr_init2(v, std::max<mpfr_prec_t>(prec_ + 64, 128));
    mpfr_init2(d, std::max<mpfr_prec_t>(prec_ + 64, 128));
    mpfr_set_q(v, q.get_mpq_t(), MPFR_RNDN);
    mpfr_sub(d, mid_, v, MPFR_RNDA);
    mpfr_abs(d, d, MPFR_RNDU);
    bool res = mpfr_cmp(d, err_) <= 0;
    mpfr_clear(v);
    mpfr_clear(d);
    return res;
  }

  // Certain three-way comparison against an exact rational; nullopt when the
  // ball straddles q.
  std::optional<int> cmp_q(const mpq_class& q) const {
    mpfr_t lo, hi;
    mpfr_init2(lo, prec_ + 64);
    mpfr_init2(hi, prec_ + 64);
    bound_lo(lo);
    bound_hi(hi);
    std::optional<int> res;
    if (mpfr_cmp_q(lo, q.get_mpq_t()) > 0)
      res = 1;
    else if (mpfr_cmp_q(hi, q.get_mpq_t()) < 0)
      res = -1;
    mpfr_clear(lo);
    mpfr_clear(hi);
    return res;
  }

  // |mid(a) - mid(b)| <= bound?
  static bool mids_within(const PrecReal& a, const PrecReal& b,
                          mpfr_srcptr bound) {
    mpfr_t d;
    mpfr_init2(d, std::max(a.prec_, b.prec_) + 8);
    mpfr_sub(d, a.mid_, b.mid_, MPFR_RNDA);
    mpfr_abs(d, d, MPFR_RNDU);
    bool res = mpfr_cmp(d, bound) <= 0;
    mpfr_clear(d);
    return res;
  }

  // Do the two balls overlap (agree within the sum of error bounds)?
  static bool overlap(const PrecReal& a, const PrecReal& b) {
    mpfr_t tot;
    mpfr_init2(tot, kErrPrec);
    mpfr_add(tot, a.err_, b.err_, MPFR_RNDU);
    bool res = mids_within(a, b, tot);
    mpfr_clear(tot);
    return res;
  }

  // ---- deterministic text output ----

  // Scientific notation with a fixed significant-digit count, built from
  // mpfr_get_str so the result is locale-independent.
  std::string to_string(int sig_digits = 36) const {
    return format_mpfr(mid_, sig_digits);
  }

  std::string err_string(int sig_digits = 6) const {
    return format_mpfr(err_, sig_digits);
  }

  static std::string format_mpfr(mpfr_srcptr v, int sig_digits) {
    if (mpfr_nan_p(v)) return "nan";
    if (mpfr_inf_p(v)) return mpfr_sgn(v) > 0 ? "inf" : "-inf";
    if (mpfr_zero_p(v)) return "0";
    mpfr_exp_t e;
    char* s = mpfr_get_str(nullptr, &e, 10, static_cast<size_t>(sig_digits), v,
                           MPFR_RNDN);
    std::string digits(s);
    mpfr_free_str(s);
    bool neg = !digits.empty() && digits[0] == '-';
    std::string mant = neg ? digits.substr(1) : digits;
    // strip trailing zeros but keep at least one digit
    size_t last = mant.find_last_not_of('0');
    mant = mant.substr(0, std::max<size_t>(last + 1, 1));
    std::string out = neg ? "-" : "";
    out += mant.substr(0, 1);
    if (mant.size() > 1) out += "." + mant.substr(1);
    out += "e" + std::to_string(static_cast<long long>(e) - 1);
    return out;
  }

 private:
  static mpfr_prec_t clamp_prec(mpfr_prec_t p) {
    return std::max<mpfr_prec_t>(p, MPFR_PREC_MIN + 8);
  }

  void combine_errs(const PrecReal& a, const PrecReal& b) {
    mpfr_add(err_, a.err_, b.err_, MPFR_RNDU);
  }

  // Adds one ulp of the midpoint when the preceding operation was inexact.
  void bump_rounding(int ternary) {
    if (ternary == 0) return;
    long e;
    if (mpfr_zero_p(mid_)) {
      e = mpfr_get_emin() + 2;  // result underflowed; bound by the range edge
    } else {
      e = static_cast<long>(mpfr_get_exp(mid_)) - static_cast<long>(prec_);
    }
    mpfr_t u;
    mpfr_init2(u, kErrPrec);
    mpfr_set_ui_2exp(u, 1, e, MPFR_RNDU);
    mpfr_add(err_, err_, u, MPFR_RNDU);
    mpfr_clear(u);
  }

  static PrecReal exp_like(const PrecReal& a, bool minus_one) {
    PrecReal r(a.prec_);
    int t = minus_one ? mpfr_expm1(r.mid_, a.mid_, MPFR_RNDN)
                      : mpfr_exp(r.mid_, a.mid_, MPFR_RNDN);
    if (mpfr_inf_p(r.mid_))
      throw PrecisionExhausted("exp overflow: argument too large");
    if (!mpfr_zero_p(a.err_)) {
      mpfr_t hi, d;
      mpfr_init2(hi, kErrPrec);
      mpfr_init2(d, kErrPrec);
      a.bound_hi(hi);
      mpfr_exp(d, hi, MPFR_RNDU);
      mpfr_mul(d, d, a.err_, MPFR_RNDU);
      mpfr_add(r.err_, r.err_, d, MPFR_RNDU);
      mpfr_clear(hi);
      mpfr_clear(d);
    }
    r.bump_rounding(t);
    return r;
  }

  mpfr_prec_t prec_;
  mpfr_t mid_;
  mpfr_t err_;
};

}  // namespace awlab
