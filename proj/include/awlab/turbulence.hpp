#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "awlab/equivalence.hpp"
#include "awlab/param_sequence.hpp"
#include "awlab/prec_real.hpp"

namespace awlab {

// A sup-norm ball in c_0; the convex neighbourhoods the chains live in.
struct SupBall {
  ParamSequence center;
  mpq_class radius;
};

namespace detail {

// ||g||_G^2 as an exact rational. Only possible for exact entries with small
// support indices (2^{j!} must fit in an mpq).
inline std::optional<mpq_class> g_norm_sq_exact(const GVector& g) {
  if (!g.all_exact() || g.max_support() > 10) return std::nullopt;
  mpq_class acc(0);
  for (const auto& e : g.entries()) {
    mpz_class w;
    mpz_ui_pow_ui(w.get_mpz_t(), 2,
                  mpz_get_ui(factorial(e.j).get_mpz_t()));
    acc += mpq_class(w) * (*e.exact) * (*e.exact);
  }
  return acc;
}

// Ball for ||g||_G^2 at a given precision.
inline PrecReal g_norm_sq_ball(const GVector& g, mpfr_prec_t prec) {
  EquivPolicy pol;
  pol.prec = prec;
  unsigned long J = std::max<unsigned long>(g.max_support(), 1);
  return g_norm_sq(g, J, pol);
}

// Certain evaluation of ||g||^2 < q, escalating precision when the ball
// straddles the threshold. Exact balls decide equality outright.
inline bool norm_sq_certainly_less(const GVector& g, const mpq_class& q) {
  if (auto exact = g_norm_sq_exact(g)) return *exact < q;
  for (mpfr_prec_t prec = 256; prec <= 16384; prec *= 2) {
    PrecReal n = g_norm_sq_ball(g, prec);
    if (n.is_exact()) return mpfr_cmp_q(n.mid(), q.get_mpq_t()) < 0;
    auto c = n.cmp_q(q);
    if (c.has_value()) return *c < 0;
  }
  throw PrecisionExhausted("G-norm comparison unresolved at 16384 bits");
}

}  // namespace detail

// Condition (*): the least n >= 1 with ||g||_G / n strictly below radius_V.
inline unsigned long condition_star_n(const GVector& g,
                                      const mpq_class& radius_V) {
  if (radius_V <= 0) throw std::invalid_argument("radius_V must be positive");
  if (g.is_zero()) return 1;
  // ||g||/n < r  <=>  ||g||^2 < (r n)^2
  unsigned long n = 1;
  if (auto exact = detail::g_norm_sq_exact(g)) {
    // jump near the answer, then settle the boundary exactly
    double guess = std::sqrt(exact->get_d()) / radius_V.get_d();
    if (guess > 1.0) n = static_cast<unsigned long>(guess);
    while (n > 1 && *exact < radius_V * radius_V * mpq_class(n) * mpq_class(n))
      --n;
    while (!(*exact < radius_V * radius_V * mpq_class(n) * mpq_class(n))) ++n;
    return n;
  }
  for (;; ++n) {
    if (n > 100000000ul)
      throw PrecisionExhausted("condition_star_n: no n below 1e8");
    if (detail::norm_sq_certainly_less(g, radius_V * radius_V * mpq_class(n) *
                                              mpq_class(n)))
      return n;
  }
}

// One point x + coeff * g of a chain, with materialized coordinates on the
// union support. Coordinates are exact rationals whenever x, U and g are.
struct ChainPoint {
  mpq_class coeff;  // i/n
  std::vector<std::pair<unsigned long, PrecReal>> coords;
};

struct ChainWitness {
  ParamSequence x;
  GVector g;
  unsigned long n = 1;
  SupBall ball_U;
  mpq_class radius_V;
  std::vector<ChainPoint> points;

  bool steps_equal = false;     // x_{i+1} - x_i = g/n for every i
  bool step_in_V = false;       // ||g/n||_G < radius_V
  bool all_in_U = false;        // max_i ||x_i - center||_inf < radius_U
  bool endpoint_exact = false;  // x_n = x + g
  bool exact_arithmetic = false;

  bool verified() const {
    return steps_equal && step_in_V && all_in_U && endpoint_exact;
  }
};

namespace detail {

// Upper bound 2^k >= |value| of a G-entry as an exact rational, with the
// exponent clamped so the mpq stays small.
inline mpq_class entry_mag_bound(const GVector::Entry& e) {
  long k = e.log2_magnitude.hi_ceil_long();
  k = std::max(k, -4096L);
  mpq_class b(1);
  if (k >= 0) {
    mpz_class p;
    mpz_ui_pow_ui(p.get_mpz_t(), 2, static_cast<unsigned long>(k));
    b = mpq_class(p);
  } else {
    mpz_class p;
    mpz_ui_pow_ui(p.get_mpz_t(), 2, static_cast<unsigned long>(-k));
    b = mpq_class(1) / mpq_class(p);
  }
  return b;
}

// |x(j) + coeff*g(j) - c(j)| < radius, decided exactly for exact entries and
// through a rational magnitude bound otherwise. Returns nullopt only when
// undecidable (|r| + bound and |r| - bound straddle the radius).
inline std::optional<bool> coord_within(const mpq_class& r,
                                        const GVector::Entry* ge,
                                        const mpq_class& coeff,
                                        const mpq_class& radius) {
  if (!ge || coeff == 0) return ::abs(r) < radius;
  if (ge->exact) return ::abs(r + coeff * (*ge->exact)) < radius;
  mpq_class b = ::abs(coeff) * entry_mag_bound(*ge);
  if (::abs(r) + b < radius) return true;
  if (::abs(r) - b >= radius) return false;
  return std::nullopt;
}

}  // namespace detail

// Builds and verifies a finite local-orbit chain x, x + g/n, ..., x + g
// inside the convex sup-norm ball U, with steps in the G-ball of radius_V.
inline ChainWitness chain_witness(const ParamSequence& x, const GVector& g,
                                  const SupBall& U, const mpq_class& radius_V,
                                  mpfr_prec_t prec = 192) {
  if (U.radius <= 0) throw std::invalid_argument("radius_U must be positive");

  // union support for coordinate checks
  std::vector<unsigned long> js;
  for (const auto& e : x.support()) js.push_back(e.j);
  for (const auto& e : U.center.support()) js.push_back(e.j);
  for (const auto& e : g.entries()) js.push_back(e.j);
  std::sort(js.begin(), js.end());
  js.erase(std::unique(js.begin(), js.end()), js.end());

  auto endpoint_inside = [&](const mpq_class& coeff) -> bool {
    for (unsigned long j : js) {
      mpq_class r = x.at(j) - U.center.at(j);
      auto ok = detail::coord_within(r, g.find(j), coeff, U.radius);
      if (!ok.has_value())
        throw PrecisionExhausted("chain endpoint sits on the boundary of U");
      if (!*ok) return false;
    }
    return true;
  };
  if (!endpoint_inside(mpq_class(0)))
    throw std::invalid_argument("x lies outside U");
  if (!endpoint_inside(mpq_class(1)))
    throw TargetOutsideU("x + g lies outside U");

  ChainWitness w;
  w.x = x;
  w.g = g;
  w.ball_U = U;
  w.radius_V = radius_V;
  w.n = condition_star_n(g, radius_V);
  w.exact_arithmetic = g.all_exact();

  unsigned long points = g.is_zero() ? 1 : w.n + 1;
  for (unsigned long i = 0; i < points; ++i) {
    ChainPoint pt;
    pt.coeff = mpq_class(mpz_class(i), mpz_class(w.n));
    pt.coeff.canonicalize();
    for (unsigned long j : js) {
      mpq_class base = x.at(j);
      const GVector::Entry* ge = g.find(j);
      PrecReal v = PrecReal::from_rational(base, prec);
      if (ge && pt.coeff != 0) {
        if (ge->exact) {
          v = PrecReal::from_rational(base + pt.coeff * (*ge->exact), prec);
        } else {
          auto part = g.value_log(j).scale_q(pt.coeff).to_prec(prec, -65536);
          v = v + part.value;
        }
      }
      pt.coords.push_back({j, v});
    }
    w.points.push_back(std::move(pt));
  }

  // invariant 1: consecutive coefficient differences are exactly 1/n
  w.steps_equal = true;
  const mpq_class step_coeff(mpz_class(1), mpz_class(w.n));
  for (size_t i = 1; i < w.points.size(); ++i) {
    if (w.points[i].coeff - w.points[i - 1].coeff != step_coeff) {
      w.steps_equal = false;
      break;
    }
  }
  // for exact vectors, also check the materialized coordinates
  if (w.steps_equal && w.exact_arithmetic && w.points.size() > 1) {
    for (size_t i = 1; i < w.points.size() && w.steps_equal; ++i) {
      for (size_t c = 0; c < js.size(); ++c) {
        const GVector::Entry* ge = g.find(js[c]);
        mpq_class expect = ge ? *ge->exact / mpq_class(mpz_class(w.n))
                              : mpq_class(0);
        PrecReal diff =
            w.points[i].coords[c].second - w.points[i - 1].coords[c].second;
        if (!diff.contains_q(expect)) {
          w.steps_equal = false;
          break;
        }
      }
    }
  }

  // invariant 2: ||g/n||_G < radius_V, i.e. ||g||^2 < (r n)^2
  w.step_in_V =
      g.is_zero() ||
      [&] {
        mpq_class rn = radius_V * mpq_class(mpz_class(w.n));
        return detail::norm_sq_certainly_less(g, rn * rn);
      }();

  // invariant 3: every chain point inside U
  w.all_in_U = true;
  for (const auto& pt : w.points) {
    for (unsigned long j : js) {
      mpq_class r = x.at(j) - U.center.at(j);
      auto ok = detail::coord_within(r, g.find(j), pt.coeff, U.radius);
      if (!(ok.has_value() && *ok)) {
        w.all_in_U = false;
        break;
      }
    }
    if (!w.all_in_U) break;
  }

  // invariant 4: the last point carries coefficient 1 exactly
  w.endpoint_exact = w.points.back().coeff == (g.is_zero() ? 0 : 1);
  if (g.is_zero()) w.endpoint_exact = true;

  return w;
}

// Since both inputs have finite support, g = y - x reaches y exactly; the
// requested tolerance only gates the preconditions.
inline GVector dense_approximant(const ParamSequence& x, const ParamSequence& y,
                                 const mpq_class& eps) {
  if (eps <= 0) throw std::invalid_argument("eps must be positive");
  std::vector<std::pair<unsigned long, mpq_class>> diff;
  std::vector<unsigned long> js;
  for (const auto& e : x.support()) js.push_back(e.j);
  for (const auto& e : y.support()) js.push_back(e.j);
  std::sort(js.begin(), js.end());
  js.erase(std::unique(js.begin(), js.end()), js.end());
  for (unsigned long j : js) {
    mpq_class d = y.at(j) - x.at(j);
    if (d != 0) diff.push_back({j, d});
  }
  return GVector::from_rationals(diff);
}

}  // namespace awlab
