#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "awlab/errors.hpp"
#include "awlab/factor_model.hpp"
#include "awlab/param_sequence.hpp"
#include "awlab/prec_real.hpp"

namespace awlab {

// A finite truncation of a point of {0,1}^N. Coordinate 1 is the least
// significant digit, matching "adding one with carry" read left to right.
struct BitWord {
  std::vector<std::uint8_t> bits;

  static BitWord parse(const std::string& s) {
    if (s.empty()) throw std::invalid_argument("empty bit word");
    BitWord w;
    for (char c : s) {
      if (c != '0' && c != '1')
        throw std::invalid_argument("bit words consist of 0s and 1s");
      w.bits.push_back(c == '1' ? 1 : 0);
    }
    return w;
  }

  static BitWord zeros(std::size_t m) {
    BitWord w;
    w.bits.assign(m, 0);
    return w;
  }

  std::string to_string() const {
    std::string s;
    for (auto b : bits) s += b ? '1' : '0';
    return s;
  }

  std::size_t size() const { return bits.size(); }
  bool operator==(const BitWord& o) const { return bits == o.bits; }
};

// Adds one with carry from coordinate 1. The all-ones word wraps to all
// zeros and reports overflow; the infinite odometer is undefined there.
inline std::pair<BitWord, bool> odometer_step(const BitWord& w) {
  BitWord out = w;
  for (auto& b : out.bits) {
    if (b == 0) {
      b = 1;
      return {out, false};
    }
    b = 0;
  }
  return {out, true};  // wrapped
}

// Inverse step: subtract one with borrow; all-zeros wraps to all-ones.
inline std::pair<BitWord, bool> odometer_step_back(const BitWord& w) {
  BitWord out = w;
  for (auto& b : out.bits) {
    if (b == 1) {
      b = 0;
      return {out, false};
    }
    b = 1;
  }
  return {out, true};
}

namespace detail {

template <typename S>
struct MeasureOps;

template <>
struct MeasureOps<mpq_class> {
  static mpq_class one() { return mpq_class(1); }
  static mpq_class one_minus(const mpq_class& z) { return 1 - z; }
  static mpq_class mul(const mpq_class& a, const mpq_class& b) { return a * b; }
  static mpq_class div(const mpq_class& a, const mpq_class& b) { return a / b; }
  static bool in_open_unit(const mpq_class& z) { return z > 0 && z < 1; }
};

template <>
struct MeasureOps<PrecReal> {
  static PrecReal one() { return PrecReal::from_long(1, 96); }
  static PrecReal one_minus(const PrecReal& z) { return (-z).add_q(1); }
  static PrecReal mul(const PrecReal& a, const PrecReal& b) { return a * b; }
  static PrecReal div(const PrecReal& a, const PrecReal& b) { return a / b; }
  static bool in_open_unit(const PrecReal& z) {
    return z.certainly_positive() && z.cmp_q(mpq_class(1)) == -1;
  }
};

}  // namespace detail

// mu(cylinder of w) = prod_n (z(n) if w_n = 0 else 1 - z(n)).
template <typename S>
S cylinder_mass(const std::vector<S>& z, const BitWord& w) {
  if (w.size() > z.size())
    throw LengthMismatch("bit word longer than the measure");
  S acc = detail::MeasureOps<S>::one();
  for (std::size_t i = 0; i < w.size(); ++i) {
    acc = detail::MeasureOps<S>::mul(
        acc, w.bits[i] == 0 ? z[i] : detail::MeasureOps<S>::one_minus(z[i]));
  }
  return acc;
}

// Radon-Nikodym cocycle rho(n, w) = mu(sigma^n cyl(w)) / mu(cyl(w)), as the
// product of per-flip ratios along the orbit segment: a 1 -> 0 flip at
// coordinate k contributes z(k)/(1-z(k)), a 0 -> 1 flip the reciprocal.
// Crossing the wrap point raises OverflowOnOrbit unless explicitly allowed.
template <typename S>
S rn_cocycle(const std::vector<S>& z, const BitWord& w, long n_steps,
             bool allow_wrap = false) {
  if (w.size() > z.size())
    throw LengthMismatch("bit word longer than the measure");
  using Ops = detail::MeasureOps<S>;
  S acc = Ops::one();
  BitWord cur = w;
  for (long s = 0; s < (n_steps >= 0 ? n_steps : -n_steps); ++s) {
    auto [next, wrapped] =
        n_steps >= 0 ? odometer_step(cur) : odometer_step_back(cur);
    if (wrapped && !allow_wrap)
      throw OverflowOnOrbit("orbit segment crosses the all-ones wrap");
    for (std::size_t k = 0; k < cur.size(); ++k) {
      if (cur.bits[k] == next.bits[k]) continue;
      if (cur.bits[k] == 1)  // 1 -> 0
        acc = Ops::mul(acc, Ops::div(z[k], Ops::one_minus(z[k])));
      else  // 0 -> 1
        acc = Ops::mul(acc, Ops::div(Ops::one_minus(z[k]), z[k]));
    }
    cur = next;
  }
  return acc;
}

// A product measure on the covered coordinates: exact rationals when every
// covered block of the eigenvalue list has a zero parameter entry, balls
// otherwise.
class ProductMeasure {
 public:
  static ProductMeasure exact(std::vector<mpq_class> z) {
    validate<mpq_class>(z);
    ProductMeasure m;
    m.data_ = std::move(z);
    return m;
  }
  static ProductMeasure balls(std::vector<PrecReal> z) {
    validate<PrecReal>(z);
    ProductMeasure m;
    m.data_ = std::move(z);
    return m;
  }

  bool is_exact() const {
    return std::holds_alternative<std::vector<mpq_class>>(data_);
  }
  std::size_t size() const {
    return is_exact() ? rationals().size() : ball_values().size();
  }
  const std::vector<mpq_class>& rationals() const {
    return std::get<std::vector<mpq_class>>(data_);
  }
  const std::vector<PrecReal>& ball_values() const {
    return std::get<std::vector<PrecReal>>(data_);
  }

 private:
  template <typename S>
  static void validate(const std::vector<S>& z) {
    for (const auto& v : z)
      if (!detail::MeasureOps<S>::in_open_unit(v))
        throw std::invalid_argument("measure entries must lie in (0, 1)");
  }
  std::variant<std::vector<mpq_class>, std::vector<PrecReal>> data_;
};

// z_x(n) = lambda_n^x: the coordinate measure matching the eigenvalue list of
// M_x, with blocks of length N_j = 2^{j!}. n_max is capped because block
// boundaries outgrow every machine representation almost immediately.
inline ProductMeasure eigenvalues_to_measure(const ParamSequence& x,
                                             unsigned long n_max,
                                             unsigned long cap = 1ul << 20,
                                             mpfr_prec_t prec = 192) {
  if (n_max == 0) throw std::invalid_argument("n_max must be positive");
  if (n_max > cap)
    throw BlockOverflow("n_max " + std::to_string(n_max) +
                        " exceeds the configured cap " + std::to_string(cap));

  // per-coordinate block indices
  std::vector<unsigned long> block_of;
  block_of.reserve(n_max);
  mpz_class cum = 0;
  unsigned long j = 0;
  while (block_of.size() < n_max) {
    ++j;
    if (j > 10)
      throw BlockOverflow("block boundaries beyond representable range");
    mpz_class width;
    mpz_ui_pow_ui(width.get_mpz_t(), 2, mpz_get_ui(factorial(j).get_mpz_t()));
    cum += width;
    while (block_of.size() < n_max && mpz_class(block_of.size() + 1) <= cum)
      block_of.push_back(j);
  }

  bool exact = true;
  for (unsigned long b = block_of.front(); b <= block_of.back(); ++b)
    if (x.at(b) != 0) exact = false;

  if (exact) {
    std::vector<mpq_class> z;
    z.reserve(n_max);
    for (unsigned long n = 0; n < n_max; ++n) {
      mpz_class p;
      mpz_ui_pow_ui(p.get_mpz_t(), 2,
                    mpz_get_ui(factorial(block_of[n]).get_mpz_t()));
      z.push_back(mpq_class(p, p + 1));
    }
    return ProductMeasure::exact(std::move(z));
  }
  std::vector<PrecReal> z;
  z.reserve(n_max);
  for (unsigned long n = 0; n < n_max; ++n)
    z.push_back(lambda_value(x, block_of[n], prec));
  return ProductMeasure::balls(std::move(z));
}

}  // namespace awlab
