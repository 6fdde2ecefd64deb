#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <optional>
#include <string>

#include "awlab/errors.hpp"
#include "awlab/prec_real.hpp"

namespace awlab {

// A real number carried in signed base-2 log space: value = sign * 2^L with L
// a PrecReal ball. Magnitudes like 2^{j!} or 2^{-j!/2} that overflow any
// fixed exponent range stay exactly representable here.
//
// A sign of 0 means "zero or too close to zero to resolve": the value is only
// known to satisfy |value| <= 2^{zero_bound}. An exact zero has sign 0 and no
// bound.
class LogReal {
 public:
  LogReal() : sign_(0), log2_abs_(64), has_bound_(false) {}

  static LogReal zero() { return LogReal(); }

  static LogReal near_zero(const PrecReal& magnitude_bound_log2) {
    LogReal r;
    r.has_bound_ = true;
    r.log2_abs_ = magnitude_bound_log2;
    return r;
  }

  static LogReal from_log2(int sign, PrecReal log2_abs) {
    LogReal r;
    if (sign == 0) return zero();
    r.sign_ = sign > 0 ? 1 : -1;
    r.log2_abs_ = std::move(log2_abs);
    r.has_bound_ = true;
    return r;
  }

  // Exact conversion of a sign-definite ball; near-zero balls become bounded
  // zeros.
  static LogReal from_prec(const PrecReal& v, mpfr_prec_t log_prec = 96) {
    mpfr_t hi, lo;
    mpfr_init2(hi, log_prec);
    mpfr_init2(lo, log_prec);
    v.bound_hi(hi);
    v.bound_lo(lo);
    LogReal r;
    if (mpfr_sgn(lo) > 0 || mpfr_sgn(hi) < 0) {
      r.sign_ = mpfr_sgn(lo) > 0 ? 1 : -1;
      r.log2_abs_ = PrecReal::log2(v.abs().rounded_to(
          std::max<mpfr_prec_t>(v.precision(), log_prec)));
      r.has_bound_ = true;
    } else if (mpfr_zero_p(hi) && mpfr_zero_p(lo)) {
      // exact zero
    } else {
      mpfr_abs(hi, hi, MPFR_RNDU);
      mpfr_abs(lo, lo, MPFR_RNDU);
      mpfr_max(hi, hi, lo, MPFR_RNDU);
      long e = mpfr_zero_p(hi) ? mpfr_get_emin() : mpfr_get_exp(hi);
      r.has_bound_ = true;
      r.log2_abs_ = PrecReal::from_long(e, log_prec);
    }
    mpfr_clear(hi);
    mpfr_clear(lo);
    return r;
  }

  static LogReal from_rational(const mpq_class& q, mpfr_prec_t log_prec = 96) {
    if (q == 0) return zero();
    mpq_class a = q >= 0 ? q : mpq_class(-q);
    return from_log2(sgn(q),
                     PrecReal::log2(PrecReal::from_rational(a, log_prec)));
  }

  int sign() const { return sign_; }
  bool exact_zero() const { return sign_ == 0 && !has_bound_; }
  const PrecReal& log2_abs() const { return log2_abs_; }
  bool has_bound() const { return has_bound_; }

  LogReal operator-() const {
    LogReal r(*this);
    r.sign_ = -r.sign_;
    return r;
  }

  LogReal abs() const {
    LogReal r(*this);
    if (r.sign_ != 0) r.sign_ = 1;
    return r;
  }

  friend LogReal operator*(const LogReal& a, const LogReal& b) {
    if (a.exact_zero() || b.exact_zero()) return zero();
    LogReal r;
    r.has_bound_ = true;
    r.log2_abs_ = a.log2_abs_ + b.log2_abs_;  // bound adds in log space
    r.sign_ = a.sign_ * b.sign_;
    return r;
  }

  friend LogReal operator/(const LogReal& a, const LogReal& b) {
    if (b.sign_ == 0)
      throw PrecisionExhausted("log-space division by unresolved zero");
    if (a.exact_zero()) return zero();
    LogReal r;
    r.has_bound_ = true;
    r.log2_abs_ = a.log2_abs_ - b.log2_abs_;
    r.sign_ = a.sign_ * b.sign_;
    return r;
  }

  LogReal sqr() const {
    if (exact_zero()) return zero();
    LogReal r;
    r.has_bound_ = true;
    r.log2_abs_ = log2_abs_.mul_2exp(1);
    r.sign_ = sign_ == 0 ? 0 : 1;
    return r;
  }

  LogReal sqrt() const {
    if (sign_ < 0) throw PrecisionExhausted("log-space sqrt of a negative");
    if (exact_zero()) return zero();
    LogReal r;
    r.has_bound_ = true;
    r.log2_abs_ = log2_abs_.mul_2exp(-1);
    r.sign_ = sign_;
    return r;
  }

  // Exact multiplication by 2^z for a big integer z.
  LogReal mul_pow2_z(const mpz_class& z) const {
    if (exact_zero()) return zero();
    LogReal r(*this);
    r.log2_abs_ = r.log2_abs_.add_z(z);
    return r;
  }

  // Multiplication by an exact nonzero rational.
  LogReal scale_q(const mpq_class& c) const {
    if (c == 0 || exact_zero()) return zero();
    mpq_class a = c >= 0 ? c : mpq_class(-c);
    LogReal r(*this);
    r.sign_ *= sgn(c);
    r.log2_abs_ =
        r.log2_abs_ +
        PrecReal::log2(PrecReal::from_rational(a, r.log2_abs_.precision()));
    return r;
  }

  // Log-space addition. Same-sign adds are cancellation-free; opposite signs
  // go through 1 - 2^d and may yield a bounded zero when the difference
  // cannot be resolved at the current precision. Bounded-zero operands fall
  // back to a conservative magnitude bound.
  friend LogReal operator+(const LogReal& a, const LogReal& b) {
    if (a.exact_zero()) return b;
    if (b.exact_zero()) return a;

    if (a.sign_ == 0 || b.sign_ == 0) {
      // |a + b| <= 2^(max bound + 1)
      mpfr_t x, y;
      mpfr_init2(x, 64);
      mpfr_init2(y, 64);
      a.log2_abs_.bound_hi(x);
      b.log2_abs_.bound_hi(y);
      mpfr_max(x, x, y, MPFR_RNDU);
      PrecReal top = PrecReal::from_mpfr(x, 64);
      mpfr_clear(x);
      mpfr_clear(y);
      return near_zero(top.add_q(1));
    }

    // order so the base has the larger midpoint
    const bool a_base = mpfr_cmp(a.log2_abs_.mid(), b.log2_abs_.mid()) >= 0;
    const LogReal& big = a_base ? a : b;
    const LogReal& small = a_base ? b : a;

    PrecReal d = small.log2_abs_ - big.log2_abs_;
    long d_hi = d.hi_ceil_long();
    if (d_hi < -(static_cast<long>(big.log2_abs_.precision()) + 64)) {
      // the small term is far below resolution: absorb into the log error
      LogReal r(big);
      r.log2_abs_.add_error_2exp(d_hi + 2);
      return r;
    }

    PrecReal y = PrecReal::exp2(d);
    if (big.sign_ == small.sign_) {
      PrecReal f = PrecReal::log2(y.add_q(1));
      return from_log2(big.sign_, big.log2_abs_ + f);
    }
    PrecReal om = (-y).add_q(1);  // 1 - 2^d
    if (om.contains_zero()) {
      mpfr_t hi;
      mpfr_init2(hi, 64);
      om.bound_hi(hi);
      mpfr_abs(hi, hi, MPFR_RNDU);
      long e = mpfr_zero_p(hi) ? mpfr_get_emin() : mpfr_get_exp(hi);
      mpfr_clear(hi);
      return near_zero(big.log2_abs_.add_q(mpq_class(e)));
    }
    int s = om.certainly_positive() ? big.sign_ : -big.sign_;
    return from_log2(s, big.log2_abs_ + PrecReal::log2(om.abs()));
  }

  friend LogReal operator-(const LogReal& a, const LogReal& b) {
    return a + (-b);
  }

  // Materializes the value as a ball. Values whose magnitude falls below
  // 2^floor_log2 come back as exact-zero-below-floor (flag set, error bound
  // still accounted). Magnitudes beyond the float exponent range throw.
  struct Materialized {
    PrecReal value;
    bool below_floor = false;
  };

  Materialized to_prec(mpfr_prec_t prec, long floor_log2 = -65536) const {
    Materialized m{PrecReal(prec), false};
    if (exact_zero()) return m;
    long hi_exp = log2_abs_.hi_ceil_long();
    mpfr_t lo;
    mpfr_init2(lo, 64);
    log2_abs_.bound_lo(lo);
    bool lo_below_floor = mpfr_cmp_si(lo, floor_log2) < 0;
    mpfr_clear(lo);

    if (sign_ == 0 || lo_below_floor) {
      // report as zero, carrying the magnitude bound as error
      m.below_floor = true;
      long e = std::min(hi_exp, static_cast<long>(mpfr_get_emax()) - 8);
      m.value.add_error_2exp(std::max(e, mpfr_get_emin() + 2) + 1);
      return m;
    }
    if (hi_exp > mpfr_get_emax() - 64)
      throw PrecisionExhausted("log-space value exceeds exponent range");
    PrecReal v = PrecReal::exp2(log2_abs_.rounded_to(prec));
    m.value = sign_ > 0 ? v : -v;
    return m;
  }

  // Certain comparison of |value| against 2^(q). nullopt when unresolved.
  std::optional<bool> abs_certainly_below_pow2(const mpq_class& q) const {
    if (exact_zero()) return true;
    auto c = log2_abs_.cmp_q(q);
    if (sign_ == 0) {
      // only an upper bound: can confirm "below", never "not below"
      if (c.has_value() && *c < 0) return true;
      return std::nullopt;
    }
    if (!c.has_value()) return std::nullopt;
    return *c < 0;
  }

  std::string to_string() const {
    if (exact_zero()) return "0";
    std::string s = sign_ > 0 ? "+" : (sign_ < 0 ? "-" : "0~");
    return s + "2^(" + log2_abs_.to_string(24) + ")";
  }

  // expm1 in log space. Arguments far below 1 keep their log representation
  // (expm1(y) = y (1 + theta), |theta| <= |y|); moderate arguments round-trip
  // through a ball.
  static LogReal expm1_log(const LogReal& y, mpfr_prec_t prec = 256) {
    return pert_of_identity(y, prec, /*is_log1p=*/false);
  }

  // log1p in log space, same shape: ln(1+y) = y (1 + theta), |theta| <= |y|
  // for |y| <= 1/2.
  static LogReal log1p_log(const LogReal& y, mpfr_prec_t prec = 256) {
    return pert_of_identity(y, prec, /*is_log1p=*/true);
  }

 private:
  static int sgn(const mpq_class& q) { return q > 0 ? 1 : (q < 0 ? -1 : 0); }

  static LogReal pert_of_identity(const LogReal& y, mpfr_prec_t prec,
                                  bool is_log1p) {
    if (y.exact_zero()) return zero();
    long hi = 0;
    {
      mpfr_t h;
      mpfr_init2(h, 64);
      y.log2_abs_.bound_hi(h);
      hi = mpfr_fits_slong_p(h, MPFR_RNDU) ? mpfr_get_si(h, MPFR_RNDU)
                                           : (mpfr_sgn(h) > 0 ? 1 << 30 : -(1L << 30));
      mpfr_clear(h);
    }
    if (hi < -64) {
      // f(y) = y (1 + theta) with |theta| <= |y| <= 2^-64: widen the log ball
      if (y.sign_ == 0) {
        LogReal r = y;
        r.log2_abs_ = r.log2_abs_.add_q(1);
        return r;
      }
      LogReal r = y;
      r.log2_abs_.add_error_2exp(hi + 1);
      return r;
    }
    if (y.sign_ == 0)
      throw PrecisionExhausted("log-space expm1/log1p of an unresolved value");
    auto m = y.to_prec(prec, mpfr_get_emin() + 128);
    if (m.below_floor)
      throw PrecisionExhausted("log-space expm1/log1p out of range");
    PrecReal v =
        is_log1p ? PrecReal::log1p(m.value) : PrecReal::expm1(m.value);
    return from_prec(v, prec);
  }

  int sign_;
  PrecReal log2_abs_;
  bool has_bound_;
};

}  // namespace awlab
