#pragma once

#include <gmpxx.h>
#include <mpfr.h>

#include <functional>
#include <string>

#include "awlab/prec_real.hpp"
#include "awlab/rational.hpp"

namespace awlab {

// Evaluates a scalar at a requested working precision. Analyses that must
// escalate precision internally (factorial-scaled reductions) pull their
// inputs through this instead of a fixed ball.
using ScalarProvider = std::function<PrecReal(mpfr_prec_t)>;

// A scalar given exactly: either a rational or one of the named constants the
// analyses care about. Evaluable at any precision, so reductions against
// huge factorials stay sharp.
class ScalarExpr {
 public:
  enum class Kind { Rational, Pi, Ln2, TwoPiOverLn2, E };

  ScalarExpr() : kind_(Kind::Rational), q_(0) {}
  explicit ScalarExpr(mpq_class q) : kind_(Kind::Rational), q_(std::move(q)) {}
  explicit ScalarExpr(Kind k) : kind_(k), q_(0) {}

  static ScalarExpr parse(const std::string& text) {
    if (text == "pi") return ScalarExpr(Kind::Pi);
    if (text == "ln2") return ScalarExpr(Kind::Ln2);
    if (text == "2pi/ln2") return ScalarExpr(Kind::TwoPiOverLn2);
    if (text == "e") return ScalarExpr(Kind::E);
    return ScalarExpr(parse_rational(text));
  }

  Kind kind() const { return kind_; }
  const mpq_class& rational() const { return q_; }

  bool is_zero() const { return kind_ == Kind::Rational && q_ == 0; }
  bool is_negative() const { return kind_ == Kind::Rational && q_ < 0; }

  ScalarExpr negated() const {
    if (kind_ != Kind::Rational)
      throw std::invalid_argument("cannot negate a named constant");
    return ScalarExpr(mpq_class(-q_));
  }

  PrecReal eval(mpfr_prec_t prec) const {
    switch (kind_) {
      case Kind::Rational:
        return PrecReal::from_rational(q_, prec);
      case Kind::Pi:
        return PrecReal::pi(prec);
      case Kind::Ln2:
        return PrecReal::ln2(prec);
      case Kind::TwoPiOverLn2:
        return PrecReal::two_pi(prec + 8) / PrecReal::ln2(prec + 8);
      case Kind::E:
        return PrecReal::euler_e(prec);
    }
    return PrecReal();
  }

  ScalarProvider provider() const {
    ScalarExpr self = *this;
    return [self](mpfr_prec_t p) { return self.eval(p); };
  }

  std::string describe() const {
    switch (kind_) {
      case Kind::Rational:
        return rational_to_string(q_);
      case Kind::Pi:
        return "pi";
      case Kind::Ln2:
        return "ln2";
      case Kind::TwoPiOverLn2:
        return "2pi/ln2";
      case Kind::E:
        return "e";
    }
    return "?";
  }

 private:
  Kind kind_;
  mpq_class q_;
};

// Wraps a fixed ball. Escalating callers get the same value back, so they
// fail over to PrecisionExhausted when the ball itself is too coarse.
inline ScalarProvider fixed_provider(const PrecReal& v) {
  PrecReal copy = v;
  return [copy](mpfr_prec_t) { return copy; };
}

}  // namespace awlab
