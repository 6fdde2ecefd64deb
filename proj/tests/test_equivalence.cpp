#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "awlab/equivalence.hpp"

using awlab::GVector;
using awlab::LogReal;
using awlab::ParamSequence;
using awlab::PrecReal;

TEST_CASE("aw_partial_sum of identical lists is exactly zero") {
  ParamSequence x({{1, mpq_class(1, 3)}, {4, mpq_class(-2, 7)}});
  auto rep = awlab::aw_partial_sum(x, x, 8);
  for (const auto& blk : rep.blocks) CHECK(blk.aw.exact_zero());
  CHECK(rep.partial_sums.back().is_exact());
  CHECK(mpfr_zero_p(rep.partial_sums.back().mid()));
  CHECK(rep.verdict == awlab::Verdict::ConvergenceEvidence);
  CHECK(awlab::equiv_verdict_name(rep.verdict) == "FinitenessEvidence");
}

TEST_CASE("aw_partial_sum is exactly symmetric") {
  ParamSequence x({{1, mpq_class(1, 5)}});
  ParamSequence y({{1, mpq_class(-1, 2)}, {3, mpq_class(2, 3)}});
  auto ab = awlab::aw_partial_sum(x, y, 6);
  auto ba = awlab::aw_partial_sum(y, x, 6);
  REQUIRE(ab.partial_sums.size() == ba.partial_sums.size());
  for (size_t i = 0; i < ab.partial_sums.size(); ++i) {
    CHECK(mpfr_equal_p(ab.partial_sums[i].mid(), ba.partial_sums[i].mid()));
    CHECK(mpfr_equal_p(ab.partial_sums[i].err(), ba.partial_sums[i].err()));
  }
}

TEST_CASE("aw anchor: a single 0.1 entry at j = 1") {
  // lambda' = 1/(1 + 2^{-e^{0.1}}); only block 1 contributes.
  auto rep = awlab::aw_partial_sum(ParamSequence::zero(),
                                   ParamSequence::single(1, mpq_class(1, 10)),
                                   5);
  CHECK(std::fabs(rep.partial_sums.back().mid_double() - 5.831074036253221e-4) <
        1e-15);
  // blocks 2..5 are exactly zero
  for (size_t i = 1; i < rep.blocks.size(); ++i)
    CHECK(rep.blocks[i].aw.exact_zero());
  CHECK(rep.all_dominated);
}

TEST_CASE("aw blocks are dominated by the quadratic majorant") {
  ParamSequence x({{1, mpq_class(1, 4)}, {2, mpq_class(-1, 8)}});
  ParamSequence y({{1, mpq_class(-1, 4)}, {2, mpq_class(1, 9)}, {5, mpq_class(1, 50)}});
  auto rep = awlab::aw_partial_sum(x, y, 9);
  CHECK(rep.all_dominated);
  for (const auto& blk : rep.blocks) {
    if (blk.aw.exact_zero()) continue;
    CHECK(blk.dominated);
  }
}

TEST_CASE("g_norm_sq anchors") {
  SECTION("zero vector") {
    auto n = awlab::g_norm_sq(GVector::zero(), 5);
    CHECK(mpfr_zero_p(n.mid()));
  }
  SECTION("a(1) = 2^{-1/2} gives exactly 1") {
    // stored in log form: log2|a(1)| = -1/2 exactly
    GVector g({GVector::Entry{
        1, 1, PrecReal::from_rational(mpq_class(-1, 2), 96), std::nullopt}});
    auto n = awlab::g_norm_sq(g, 5);
    CHECK(n.contains_q(mpq_class(1)));
    CHECK(n.err_log2() < -80);
  }
  SECTION("log2|a(j)| = -j!/2 - log2 j sums to sum 1/j^2") {
    std::vector<GVector::Entry> es;
    for (unsigned long j = 1; j <= 5; ++j) {
      PrecReal lm =
          PrecReal::from_rational(mpq_class(awlab::factorial(j)), 128)
              .mul_2exp(-1);
      PrecReal l2j = PrecReal::log2(PrecReal::from_long(j, 128));
      es.push_back(GVector::Entry{j, 1, -lm - l2j, std::nullopt});
    }
    auto n = awlab::g_norm_sq(GVector(std::move(es)), 5);
    CHECK(std::fabs(n.mid_double() - 1.4636111111111112) < 1e-12);
  }
  SECTION("additive over disjoint supports") {
    auto g1 = GVector::from_rationals({{1, mpq_class(1, 3)}});
    auto g2 = GVector::from_rationals({{2, mpq_class(-1, 7)}});
    auto both = GVector::from_rationals({{1, mpq_class(1, 3)},
                                         {2, mpq_class(-1, 7)}});
    auto n1 = awlab::g_norm_sq(g1, 4);
    auto n2 = awlab::g_norm_sq(g2, 4);
    auto nb = awlab::g_norm_sq(both, 4);
    CHECK(PrecReal::overlap(n1 + n2, nb));
  }
}

TEST_CASE("orbit bound anchor: x = 0, a(1) = 0.1") {
  auto a = GVector::from_rationals({{1, mpq_class(1, 10)}});
  auto rep = awlab::orbit_bound_check(ParamSequence::zero(), a, 5);
  REQUIRE(rep.bound_constant.has_value());
  CHECK(std::fabs(rep.majorant_sum.mid_double() - 0.02125701326351184) < 1e-12);
  CHECK(rep.g_norm_sq_value.contains_q(mpq_class(1, 50)));
  CHECK(std::fabs(rep.bound_constant->mid_double() - 1.0628506631755922) < 1e-10);
  CHECK(rep.all_dominated);

  SECTION("support in {1}: the report is stable in J") {
    auto rep1 = awlab::orbit_bound_check(ParamSequence::zero(), a, 1);
    CHECK(mpfr_equal_p(rep1.partial_sums.back().mid(),
                       rep.partial_sums.back().mid()));
    CHECK(mpfr_equal_p(rep1.majorant_sum.mid(), rep.majorant_sum.mid()));
  }
}

TEST_CASE("orbit bound: zero vector gives all zeros") {
  auto rep =
      awlab::orbit_bound_check(ParamSequence::zero(), GVector::zero(), 4);
  CHECK(mpfr_zero_p(rep.partial_sums.back().mid()));
  CHECK(mpfr_zero_p(rep.majorant_sum.mid()));
  CHECK(mpfr_zero_p(rep.g_norm_sq_value.mid()));
  CHECK_FALSE(rep.bound_constant.has_value());
}

TEST_CASE("orbit bound with deep G-vector entries stays in log space") {
  // a(6) with log2|a| = -6!/2 - 1 = -361: far below double range, fine here.
  std::vector<GVector::Entry> es;
  es.push_back(GVector::Entry{
      6, -1, PrecReal::from_rational(mpq_class(-361), 128), std::nullopt});
  GVector a(std::move(es));
  auto rep = awlab::orbit_bound_check(ParamSequence::zero(), a, 8);
  CHECK(rep.all_dominated);
  REQUIRE(rep.bound_constant.has_value());
  // g term log2 = 6! - 722 = -2; the ratio should land near
  // 2 (ln2 j! E / j!)^2 * (expm1(y)/y)^2 with y ~ 2^{-361}: ~ 2 ln2^2 j!^0...
  // measured K~ = majorant / g = 2 (ln2 e^{0})^2 (j! expm1(y)/ (j! y))^2 -> 2 ln2^2
  CHECK(std::fabs(rep.bound_constant->mid_double() - 2 * 0.6931471805599453 *
                                                         0.6931471805599453) <
        1e-6);
}

TEST_CASE("deep blocks stay in log space and dominate") {
  // x, x' differing by O(1) at j = 8: the multiplicity exponent 8! = 40320
  // makes u = 2^{-40320}-scale, yet the AW term stays O(1) because the
  // sqrt(1-lambda) difference carries u^{1/2} against a ratio u'/u far from
  // 1. The majorant blows up to ~2^{8!}: domination with enormous slack,
  // decided purely in log space.
  ParamSequence x({{8, mpq_class(1, 3)}});
  ParamSequence y({{8, mpq_class(-1, 5)}});
  auto rep = awlab::aw_partial_sum(x, y, 9);
  CHECK(rep.all_dominated);
  const auto& blk = rep.blocks[7];
  REQUIRE_FALSE(blk.aw.exact_zero());
  CHECK(std::fabs(rep.cauchy_increments[7].mid_double() - 0.0327157604) < 1e-9);
  CHECK(blk.majorant.log2_abs().cmp_q(mpq_class(40000)) == 1);
  CHECK(blk.majorant.log2_abs().cmp_q(mpq_class(41000)) == -1);
  // blocks 1..7 and 9 contribute exactly zero
  for (std::size_t i : {0ul, 3ul, 8ul}) CHECK(rep.blocks[i].aw.exact_zero());
}

TEST_CASE("K~ scaling stability under halving") {
  std::mt19937_64 rng(123);
  std::uniform_int_distribution<int> den(2, 40);
  for (int iter = 0; iter < 10; ++iter) {
    // rational entries with |a(j)/j!| <= 0.1 on a small support
    std::vector<std::pair<unsigned long, mpq_class>> vals;
    for (unsigned long j = 1; j <= 3; ++j) {
      mpq_class v(1, den(rng) * 10);
      if (iter % 2) v = -v;
      vals.push_back({j, v});
    }
    auto a1 = GVector::from_rationals(vals);
    for (auto& [j, v] : vals) v /= 2;
    auto a2 = GVector::from_rationals(vals);
    auto r1 = awlab::orbit_bound_check(ParamSequence::zero(), a1, 5);
    auto r2 = awlab::orbit_bound_check(ParamSequence::zero(), a2, 5);
    REQUIRE(r1.bound_constant.has_value());
    REQUIRE(r2.bound_constant.has_value());
    double k1 = r1.bound_constant->mid_double();
    double k2 = r2.bound_constant->mid_double();
    CHECK(std::fabs(k1 - k2) / k2 < 0.10);
  }
}

TEST_CASE("verdicts from increment decay") {
  // entries on {1,2} only: increments vanish beyond, giving finiteness
  ParamSequence x({{1, mpq_class(1, 9)}});
  ParamSequence y({{2, mpq_class(1, 11)}});
  auto rep = awlab::aw_partial_sum(x, y, 12);
  CHECK(rep.verdict == awlab::Verdict::ConvergenceEvidence);
}
