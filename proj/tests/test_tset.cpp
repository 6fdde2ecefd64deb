#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "awlab/tset.hpp"
#include "oracles.hpp"

using awlab::Angle;
using awlab::ParamSequence;
using awlab::PrecReal;
using awlab::ScalarExpr;
using awlab::Verdict;

namespace {
const ScalarExpr kTwoPiOverLn2(ScalarExpr::Kind::TwoPiOverLn2);
}

TEST_CASE("delta anchors") {
  auto x0 = ParamSequence::zero();
  SECTION("exact multiple of 2pi") {
    auto d = awlab::tset_delta(x0, kTwoPiOverLn2.provider(), 7, 1e-24);
    CHECK(d.value.contains_q(mpq_class(0)));
  }
  SECTION("j = 3, t = 1") {
    auto d = awlab::tset_delta(x0, ScalarExpr(mpq_class(1)).provider(), 3, 1e-24);
    CHECK(d.value.to_string(18) == "-2.12430222381991462e0");
  }
  SECTION("j = 1, t = 1 is ln2 itself") {
    auto d = awlab::tset_delta(x0, ScalarExpr(mpq_class(1)).provider(), 1, 1e-24);
    CHECK(PrecReal::overlap(d.value, PrecReal::ln2(128)));
  }
}

TEST_CASE("partial sums vanish on the trivial member") {
  auto d = awlab::tset_partial_sums(ParamSequence::zero(),
                                    kTwoPiOverLn2.provider(), 100);
  REQUIRE(d.terms.size() == 100);
  for (const auto& rec : d.terms) {
    CHECK(rec.delta.value.contains_q(mpq_class(0)));
    CHECK(rec.term.contains_q(mpq_class(0)));
    CHECK(rec.identity_ok);
  }
  CHECK(d.partial_sums.back().contains_q(mpq_class(0)));
  CHECK(d.all_identities_ok);
}

TEST_CASE("partial sums are nondecreasing and identities hold") {
  auto trace = awlab::construct_t(ParamSequence::zero(), 20);
  auto d = awlab::tset_partial_sums(ParamSequence::zero(),
                                    awlab::fixed_provider(trace.t), 18);
  for (size_t i = 1; i < d.partial_sums.size(); ++i) {
    CHECK_FALSE((d.partial_sums[i] - d.partial_sums[i - 1]).certainly_negative());
  }
  CHECK(d.all_identities_ok);
}

TEST_CASE("group law: t and -t give mirrored residues, equal terms") {
  ParamSequence x({{1, mpq_class(1, 3)}, {2, mpq_class(-1, 5)}});
  ScalarExpr t(mpq_class(5, 3));
  ScalarExpr neg_t(mpq_class(-5, 3));
  auto dp = awlab::tset_partial_sums(x, t.provider(), 12);
  auto dn = awlab::tset_partial_sums(x, neg_t.provider(), 12);
  for (size_t i = 0; i < 12; ++i) {
    const auto& a = dp.terms[i];
    const auto& b = dn.terms[i];
    if (a.delta.boundary_ambiguous || b.delta.boundary_ambiguous) continue;
    CHECK(PrecReal::overlap(a.delta.value, -b.delta.value));
    CHECK(PrecReal::overlap(a.term, b.term));
  }
  CHECK(PrecReal::overlap(dp.partial_sums.back(), dn.partial_sums.back()));
}

TEST_CASE("construct_t reproduces the x = 0 pattern") {
  auto trace = awlab::construct_t(ParamSequence::zero(), 40);
  REQUIRE(trace.a.size() == 40);

  SECTION("a(1) = 1 exactly, a(2) = 2pi - 2") {
    CHECK(trace.a[0].contains_q(mpq_class(1)));
    auto expect = PrecReal::two_pi(320).sub_q(mpq_class(2));
    CHECK(PrecReal::overlap(trace.a[1], expect));
    CHECK(trace.a[1].err_log2() < -60);
  }
  SECTION("a(j) = 2pi for 3 <= j <= 40") {
    auto two_pi = PrecReal::two_pi(320);
    for (size_t i = 2; i < trace.a.size(); ++i) {
      CHECK(PrecReal::overlap(trace.a[i], two_pi));
    }
  }
  SECTION("a(j) lies in (pi, 3pi] for j >= 2") {
    auto pi = PrecReal::pi(320);
    for (size_t i = 1; i < trace.a.size(); ++i) {
      CHECK_FALSE((trace.a[i] - pi).certainly_negative());
      CHECK_FALSE((trace.a[i] - pi.mul_z(mpz_class(3))).certainly_positive());
    }
  }
  SECTION("t approaches (pi + 2pi(e - 5/2))/ln2") {
    auto closed = (PrecReal::pi(512) +
                   PrecReal::two_pi(512) *
                       PrecReal::euler_e(512).sub_q(mpq_class(5, 2))) /
                  PrecReal::ln2(512);
    // truncation tail is ~2pi/(ln2 * 41 * 40!), far below 1e-6
    mpfr_t tol;
    mpfr_init2(tol, 64);
    mpfr_set_ui_2exp(tol, 1, -120, MPFR_RNDN);
    CHECK(PrecReal::mids_within(trace.t, closed, tol));
    mpfr_clear(tol);
    CHECK(std::fabs(trace.t.mid_double() - 6.511023859813069) < 1e-12);
  }
}

TEST_CASE("construct_t term anchor at j = 5") {
  auto trace = awlab::construct_t(ParamSequence::zero(), 40);
  auto d = awlab::tset_partial_sums(ParamSequence::zero(),
                                    awlab::fixed_provider(trace.t), 10);
  // delta_5 = 2pi * 120 * (e - 163/60), term = delta^2 (w = 1)
  CHECK(std::fabs(d.terms[4].delta.value.mid_double() - 1.2178033011109042) <
        1e-10);
  CHECK(std::fabs(d.terms[4].term.mid_double() - 1.4830448801966157) < 1e-10);
  // cross-check against a cold evaluation of the closed form; the truncation
  // gap between t_40 and the full series is ~2e-47
  auto closed = PrecReal::two_pi(512).mul_z(mpz_class(120)) *
                awlab::PrecReal::euler_e(512).sub_q(mpq_class(163, 60));
  mpfr_t tol;
  mpfr_init2(tol, 64);
  mpfr_set_ui_2exp(tol, 1, -133, MPFR_RNDN);
  CHECK(PrecReal::mids_within(d.terms[4].delta.value, closed, tol));
  mpfr_clear(tol);
}

TEST_CASE("verify_construction: tails agree with independent residues") {
  auto x0 = ParamSequence::zero();
  auto trace = awlab::construct_t(x0, 40);
  auto checks = awlab::verify_construction(x0, trace);
  REQUIRE(checks.size() == 38);
  CHECK(trace.tail_bound_threshold == 1);
  for (const auto& chk : checks) {
    CAPTURE(chk.j);
    CHECK(chk.agree);
    if (chk.j >= 2) CHECK(chk.bound_ok);
    if (chk.j >= 3) CHECK(chk.delta_positive);
  }
}

TEST_CASE("construct_t with nonzero x keeps the tail identity") {
  ParamSequence x({{1, mpq_class(1, 2)}, {4, mpq_class(-2, 3)}});
  auto trace = awlab::construct_t(x, 25);
  auto checks = awlab::verify_construction(x, trace);
  for (const auto& chk : checks) {
    CAPTURE(chk.j);
    CHECK(chk.agree);
    if (chk.j >= trace.tail_bound_threshold && chk.j >= 2) CHECK(chk.bound_ok);
  }
}

TEST_CASE("construct_t precondition") {
  CHECK_THROWS_AS(awlab::construct_t(ParamSequence::zero(), 1),
                  std::invalid_argument);
}

TEST_CASE("diagnose: trivial membership is convergence evidence") {
  auto d = awlab::tset_diagnose(ParamSequence::zero(),
                                kTwoPiOverLn2.provider(), 100);
  CHECK(d.verdict == Verdict::ConvergenceEvidence);
  CHECK(d.heuristic);
}

TEST_CASE("diagnose: constructed t shows ~1/j decay") {
  auto trace = awlab::construct_t(ParamSequence::zero(), 60);
  auto d = awlab::tset_diagnose(ParamSequence::zero(),
                                awlab::fixed_provider(trace.t), 50);
  CHECK(d.verdict == Verdict::ConvergenceEvidence);
  REQUIRE(d.fit.has_value());
  CHECK(d.fit->alpha > 0.85);
  CHECK(d.fit->alpha < 1.15);
}

TEST_CASE("perturbation: cutoff, rules, and guarantees") {
  std::vector<awlab::PerturbCheck> checks;
  auto p = awlab::perturb_for_divergence(ParamSequence::zero(), kTwoPiOverLn2,
                                         mpq_class(1, 10), 60, {}, &checks);
  CHECK(p.j0 == 11);
  CHECK(p.rules.size() == 49);
  for (const auto& r : p.rules) {
    CHECK(r.a == 1);  // residue of 2pi j! is exactly zero: below threshold
    CHECK_FALSE(r.boundary_tie);
  }
  REQUIRE(checks.size() == 49);
  for (const auto& chk : checks) {
    CAPTURE(chk.j);
    CHECK(chk.lower_bound_ok);
    CHECK(chk.err_ok);
  }

  SECTION("sup-norm distance stays below eps") {
    mpq_class half_eps(1, 20);
    for (unsigned long j : {12ul, 13ul, 30ul, 60ul}) {
      auto v = p.value_at(j);
      CHECK_FALSE(v.certainly_negative());
      CHECK(v.cmp_q(half_eps) == -1);
    }
  }
  SECTION("residues hit 1/sqrt(j) exactly") {
    auto d30 = awlab::perturbed_delta(p, 30);
    auto inv = PrecReal::sqrt(PrecReal::from_rational(mpq_class(1, 30), 256));
    CHECK(PrecReal::overlap(d30.value, inv));
  }
}

TEST_CASE("perturbation anchor: x(3) at a wide epsilon") {
  // eps = 1 drops the cutoff to j0 = 1, exposing the j = 3 rule value.
  auto p = awlab::perturb_for_divergence(ParamSequence::zero(), kTwoPiOverLn2,
                                         mpq_class(1), 10);
  CHECK(p.j0 == 1);
  REQUIRE(p.rule_at(3) != nullptr);
  CHECK(p.rule_at(3)->a == 1);
  auto v = p.value_at(3);
  CHECK(std::fabs(v.mid_double() - 0.09119163219962945) < 1e-14);
  auto d = awlab::perturbed_delta(p, 3);
  auto third = PrecReal::sqrt(PrecReal::from_rational(mpq_class(1, 3), 256));
  CHECK(PrecReal::overlap(d.value, third));
}

TEST_CASE("perturbation window errors") {
  CHECK_THROWS_AS(
      awlab::perturb_for_divergence(ParamSequence::zero(), kTwoPiOverLn2,
                                    mpq_class(1, 10), 11),
      awlab::WindowTooSmall);
  CHECK_THROWS_AS(
      awlab::perturb_for_divergence(ParamSequence::zero(), kTwoPiOverLn2,
                                    mpq_class(0), 50),
      std::invalid_argument);
  CHECK_THROWS_AS(
      awlab::perturb_for_divergence(ParamSequence::zero(),
                                    ScalarExpr(mpq_class(0)), mpq_class(1), 50),
      std::invalid_argument);
}

TEST_CASE("perturbation respects the base head and negative t") {
  ParamSequence y({{2, mpq_class(7, 10)}, {5, mpq_class(1, 100)}});
  auto p = awlab::perturb_for_divergence(y, ScalarExpr(mpq_class(-3)),
                                         mpq_class(1, 2), 40);
  CHECK(p.negated_t);
  // |y(2)| = 7/10 >= eps/2 forces j0 >= 2
  CHECK(p.j0 >= 2);
  CHECK(p.base.at(2) == mpq_class(7, 10));
  // below the cutoff the sequence is untouched
  auto v2 = p.value_at(2);
  CHECK(v2.contains_q(mpq_class(7, 10)));
}

TEST_CASE("perturbation discards base entries past the cutoff") {
  // y(5) = 1/100 lies below eps/2, so it does not push j0 up; past the
  // cutoff the output follows the rule formula, not y.
  ParamSequence y({{5, mpq_class(1, 100)}});
  auto p = awlab::perturb_for_divergence(y, kTwoPiOverLn2, mpq_class(1), 12);
  REQUIRE(p.j0 < 5);
  REQUIRE(p.rule_at(5) != nullptr);
  CHECK(p.rule_at(5)->a == 1);
  auto v5 = p.value_at(5);
  // rule value is 5! ln(1 + 1/(2pi 5! sqrt 5)), nowhere near 1/100
  CHECK_FALSE(v5.contains_q(mpq_class(1, 100)));
  auto expect = PrecReal::log1p(
                    PrecReal::from_long(1, 256) /
                    (PrecReal::two_pi(256) *
                     PrecReal::sqrt(PrecReal::from_long(5, 256))
                         .mul_z(awlab::factorial(5))))
                    .mul_z(awlab::factorial(5));
  CHECK(PrecReal::overlap(v5, expect));
  // and the sup-norm budget still holds coordinate-wise
  CHECK((v5 - PrecReal::from_rational(mpq_class(1, 100), 256))
            .abs()
            .cmp_q(mpq_class(1)) == -1);
}

TEST_CASE("perturbed diagnostics show divergence with harmonic growth") {
  auto p = awlab::perturb_for_divergence(ParamSequence::zero(), kTwoPiOverLn2,
                                         mpq_class(1, 10), 60);
  auto d = awlab::tset_diagnose(p, 60);
  CHECK(d.verdict == Verdict::DivergenceEvidence);

  // lower bound: sum over (j0, 60] of w_j/j with w_j >= 2^{-1/(2pi)}
  mpq_class hsum = oracle::harmonic(60) - oracle::harmonic(p.j0);
  double expect_min = 0.85 * hsum.get_d();
  CHECK(d.partial_sums.back().mid_double() > expect_min);
  // and monotone growth past the cutoff
  auto drop = d.partial_sums[p.j0 - 1];
  CHECK(drop.contains_q(mpq_class(0)));
}

TEST_CASE("worker count does not change results") {
  awlab::TsetOptions one;
  one.workers = 1;
  awlab::TsetOptions four;
  four.workers = 4;
  auto trace = awlab::construct_t(ParamSequence::zero(), 24);
  auto a = awlab::tset_partial_sums(ParamSequence::zero(),
                                    awlab::fixed_provider(trace.t), 20, one);
  auto b = awlab::tset_partial_sums(ParamSequence::zero(),
                                    awlab::fixed_provider(trace.t), 20, four);
  REQUIRE(a.terms.size() == b.terms.size());
  for (size_t i = 0; i < a.terms.size(); ++i) {
    CHECK(mpfr_equal_p(a.terms[i].term.mid(), b.terms[i].term.mid()));
    CHECK(mpfr_equal_p(a.partial_sums[i].mid(), b.partial_sums[i].mid()));
  }
}
