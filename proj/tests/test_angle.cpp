#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "awlab/angle.hpp"
#include "oracles.hpp"

using awlab::Angle;
using awlab::PrecReal;
using awlab::ScalarExpr;

namespace {

bool agrees_with_oracle(const PrecReal& impl, mpfr_srcptr oracle_val,
                        double slack_log2 = -3900) {
  mpfr_t d, bound;
  mpfr_init2(d, 4200);
  mpfr_init2(bound, 64);
  mpfr_sub(d, impl.mid(), oracle_val, MPFR_RNDA);
  mpfr_abs(d, d, MPFR_RNDU);
  mpfr_set_ui_2exp(bound, 1, static_cast<long>(slack_log2), MPFR_RNDU);
  mpfr_add(bound, bound, impl.err(), MPFR_RNDU);
  bool ok = mpfr_cmp(d, bound) <= 0;
  mpfr_clear(d);
  mpfr_clear(bound);
  return ok;
}

}  // namespace

TEST_CASE("signed_mod_2pi fixed points") {
  auto zero = awlab::signed_mod_2pi(PrecReal::from_long(0, 128));
  CHECK(mpfr_zero_p(zero.value.mid()));
  CHECK_FALSE(zero.boundary_ambiguous);

  auto period = awlab::signed_mod_2pi(PrecReal::two_pi(256));
  CHECK(period.value.contains_q(mpq_class(0)));
  CHECK(period.value.err_log2() < -200);
}

TEST_CASE("signed_mod_2pi of 6 ln2") {
  // 6*ln2 = 4.158... lands at -2.1243022238199146204 after one period.
  auto v = PrecReal::ln2(256).mul_z(mpz_class(6));
  auto a = awlab::signed_mod_2pi(v);
  CHECK(a.value.to_string(20) == "-2.1243022238199146204e0");
  mpfr_t ov, sv;
  mpfr_init2(ov, 4096);
  mpfr_init2(sv, 4096);
  mpfr_const_log2(sv, MPFR_RNDN);
  mpfr_mul_ui(sv, sv, 6, MPFR_RNDN);
  oracle::mod_2pi(ov, sv);
  CHECK(agrees_with_oracle(a.value, ov));
  mpfr_clear(ov);
  mpfr_clear(sv);
}

TEST_CASE("period invariance under huge integer shifts") {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<long> num(-6283, 6283);
  std::uniform_int_distribution<long> shift(-1000000, 1000000);
  for (int iter = 0; iter < 40; ++iter) {
    mpq_class s(num(rng), 1000);
    long k = shift(rng);
    auto base = awlab::signed_mod_2pi(PrecReal::from_rational(s, 320));
    auto shifted = awlab::signed_mod_2pi(
        PrecReal::from_rational(s, 320) +
        PrecReal::two_pi(320).mul_z(mpz_class(k)));
    if (base.boundary_ambiguous || shifted.boundary_ambiguous) continue;
    mpfr_t tol;
    mpfr_init2(tol, 64);
    mpfr_add(tol, base.value.err(), shifted.value.err(), MPFR_RNDU);
    CHECK(PrecReal::mids_within(base.value, shifted.value, tol));
    mpfr_clear(tol);
  }
}

TEST_CASE("reduction of an enormous exact power of two") {
  // 2^1000 needs the internal working precision to track the full exponent
  mpz_class big;
  mpz_ui_pow_ui(big.get_mpz_t(), 2, 1000);
  auto a = awlab::signed_mod_2pi(PrecReal::from_integer(big, 1100));
  mpfr_t sv, ov;
  mpfr_init2(sv, 4096);
  mpfr_init2(ov, 4096);
  mpfr_set_z(sv, big.get_mpz_t(), MPFR_RNDN);
  oracle::mod_2pi(ov, sv);
  CHECK(agrees_with_oracle(a.value, ov, -900));
  CHECK(a.value.err_log2() < -900);
  mpfr_clear(sv);
  mpfr_clear(ov);
}

TEST_CASE("reduction rejects a ball wider than pi") {
  auto s = PrecReal::from_long(5, 128);
  s.add_error_2exp(2);  // err = 4 > pi
  CHECK_THROWS_AS(awlab::signed_mod_2pi(s), awlab::PrecisionExhausted);
}

TEST_CASE("boundary hits are flagged, not snapped") {
  auto at_pi = awlab::signed_mod_2pi(PrecReal::pi(256));
  CHECK(at_pi.boundary_ambiguous);
  auto at_3pi = awlab::signed_mod_2pi(PrecReal::pi(256).mul_z(mpz_class(3)));
  CHECK(at_3pi.boundary_ambiguous);
  // representatives sit at +-pi (the side is within one ulp of the boundary)
  CHECK(mpfr_cmp_d(at_pi.value.abs().mid(), 3.14) > 0);
  CHECK(mpfr_cmp_d(at_3pi.value.abs().mid(), 3.14) > 0);
}

TEST_CASE("factorial_scaled_angle at an exact multiple of 2pi") {
  // t = 2pi/ln2 makes t * ln2 * j! = 2pi * j!.
  auto t = ScalarExpr(ScalarExpr::Kind::TwoPiOverLn2);
  auto a = awlab::factorial_scaled_angle(t.provider(), 5, mpq_class(0), 1e-30);
  CHECK(a.value.contains_q(mpq_class(0)));
  CHECK(a.value.err_log2() < -99.0);
}

TEST_CASE("factorial_scaled_angle matches the direct 6 ln2 reduction") {
  auto t = ScalarExpr(mpq_class(1));
  auto a = awlab::factorial_scaled_angle(t.provider(), 3, mpq_class(0), 1e-25);
  CHECK(a.value.to_string(20) == "-2.1243022238199146204e0");
}

TEST_CASE("factorial_scaled_angle against the integer-factorial oracle") {
  auto t = ScalarExpr(mpq_class(1));
  for (unsigned long j : {20ul, 35ul, 50ul}) {
    auto a = awlab::factorial_scaled_angle(t.provider(), j, mpq_class(0), 1e-30);
    mpfr_t ov;
    mpfr_init2(ov, 4096);
    oracle::factorial_ln2_delta(ov, j);
    INFO("j=" << j << " impl=" << a.value.to_string(25));
    CHECK(agrees_with_oracle(a.value, ov, -3500));
    mpfr_clear(ov);
  }
}

TEST_CASE("frozen value for the j=20 reduction") {
  auto t = ScalarExpr(mpq_class(1));
  auto a = awlab::factorial_scaled_angle(t.provider(), 20, mpq_class(0), 1e-30);
  CHECK(a.value.to_string(20) == "1.600964322382686008e0");
}

TEST_CASE("x_j shifts the scale factor") {
  // e^{x(2)/2!} = 2 at x(2) = 2 ln2 would need a transcendental entry; use
  // a rational x and compare with a straight-line evaluation instead.
  mpq_class x3(1, 4);
  auto t = ScalarExpr(mpq_class(1));
  auto a = awlab::factorial_scaled_angle(t.provider(), 3, x3, 1e-30);
  mpfr_t s, ov;
  mpfr_init2(s, 4096);
  mpfr_init2(ov, 4096);
  mpfr_set_q(s, mpq_class(1, 24).get_mpq_t(), MPFR_RNDN);  // x3/3! = 1/24
  mpfr_exp(s, s, MPFR_RNDN);
  mpfr_mul_ui(s, s, 6, MPFR_RNDN);
  mpfr_t l2;
  mpfr_init2(l2, 4096);
  mpfr_const_log2(l2, MPFR_RNDN);
  mpfr_mul(s, s, l2, MPFR_RNDN);
  oracle::mod_2pi(ov, s);
  CHECK(agrees_with_oracle(a.value, ov, -3500));
  mpfr_clear(s);
  mpfr_clear(ov);
  mpfr_clear(l2);
}

TEST_CASE("precision escalation vs a fixed coarse t") {
  // A fixed 64-bit ball for t cannot support a j=30 reduction at 1e-30.
  auto coarse = ScalarExpr(ScalarExpr::Kind::TwoPiOverLn2).eval(64);
  awlab::PrecPolicy tight;
  tight.ceiling_bits = 2048;
  CHECK_THROWS_AS(
      awlab::factorial_scaled_angle(coarse, 30, mpq_class(0), 1e-30, tight),
      awlab::PrecisionExhausted);
}

TEST_CASE("reduced angles always land in (-pi, pi] up to err") {
  std::mt19937_64 rng(314);
  std::uniform_int_distribution<long> num(-100000, 100000);
  auto pi_hi = PrecReal::pi(128);
  for (int iter = 0; iter < 60; ++iter) {
    mpq_class s(num(rng), 97);
    auto a = awlab::signed_mod_2pi(PrecReal::from_rational(s, 256));
    // |value| <= pi + err on both sides
    CHECK_FALSE((a.value.abs() - pi_hi).certainly_positive());
  }
  for (unsigned long j : {4ul, 9ul, 17ul}) {
    auto a = awlab::factorial_scaled_angle(
        ScalarExpr(ScalarExpr::Kind::E).provider(), j, mpq_class(1, 6), 1e-20);
    CHECK_FALSE((a.value.abs() - pi_hi).certainly_positive());
  }
}

TEST_CASE("doubled working precision stays inside the first ball") {
  auto t = ScalarExpr(ScalarExpr::Kind::Pi);
  auto first = awlab::factorial_scaled_angle(t.provider(), 12, mpq_class(1, 3),
                                             1e-20);
  auto second = awlab::factorial_scaled_angle(t.provider(), 12, mpq_class(1, 3),
                                              1e-45);
  CHECK(PrecReal::mids_within(first.value, second.value, first.value.err()));
}

TEST_CASE("log2_weight") {
  SECTION("exact zero at x_j = 0") {
    for (unsigned long j : {1ul, 7ul, 40ul}) {
      CHECK(awlab::log2_weight(j, mpq_class(0)).is_exact());
      CHECK(mpfr_zero_p(awlab::log2_weight(j, mpq_class(0)).mid()));
    }
  }
  SECTION("frozen anchors") {
    auto w1 = awlab::log2_weight(1, mpq_class(1, 10));
    CHECK(w1.to_string(20) == "-1.0517091807564762481e-1");
    auto w10 = awlab::log2_weight(10, mpq_class(1, 10));
    CHECK(w10.to_string(20) == "-1.0000000137786597386e-1");
  }
  SECTION("agrees with the expm1 oracle") {
    for (unsigned long j : {2ul, 5ul, 10ul, 15ul}) {
      mpq_class x(-3, 7);
      auto w = awlab::log2_weight(j, x);
      mpz_class f = awlab::factorial(j);
      mpfr_t ov;
      mpfr_init2(ov, 4096);
      oracle::expm1_q(ov, x / mpq_class(f));
      mpfr_mul_z(ov, ov, f.get_mpz_t(), MPFR_RNDN);
      mpfr_neg(ov, ov, MPFR_RNDN);
      CHECK(agrees_with_oracle(w, ov, -3500));
      mpfr_clear(ov);
    }
  }
  SECTION("tail limit: log2_weight -> -x_j with quadratic error") {
    for (unsigned long j : {10ul, 11ul, 13ul}) {
      for (mpq_class x : {mpq_class(1), mpq_class(-1), mpq_class(1, 2)}) {
        auto w = awlab::log2_weight(j, x);
        mpq_class bound = 2 * x * x / mpq_class(awlab::factorial(j));
        auto dev = w.add_q(x).abs();
        auto cmp = dev.cmp_q(bound);
        REQUIRE(cmp.has_value());
        CHECK(*cmp < 0);
      }
    }
  }
}
