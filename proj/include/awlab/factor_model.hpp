#pragma once

#include <gmpxx.h>

#include <string>
#include <vector>

#include "awlab/angle.hpp"
#include "awlab/param_sequence.hpp"
#include "awlab/prec_real.hpp"
#include "awlab/rational.hpp"

namespace awlab {

// l_j^x = ln2 * j! * e^{x(j)/j!}. Always positive; exact tail factor for j
// beyond the support (the result is then just a scaled ln2 ball).
inline PrecReal l_value(const ParamSequence& x, unsigned long j,
                        mpfr_prec_t prec = 192) {
  if (j == 0) throw std::invalid_argument("j must be positive");
  mpz_class f = factorial(j);
  PrecReal l = PrecReal::ln2(prec);
  mpq_class xj = x.at(j);
  if (xj != 0) {
    mpq_class xf = xj / mpq_class(f);
    l = l * PrecReal::exp(PrecReal::from_rational(xf, prec));
  }
  return l.mul_z(f);
}

// log2 of e^{-l_j^x}, i.e. -j! e^{x(j)/j!}; the natural scale for lambda.
inline PrecReal neg_l_log2(const ParamSequence& x, unsigned long j,
                           mpfr_prec_t prec = 192) {
  mpz_class f = factorial(j);
  PrecReal m = PrecReal::from_integer(f, prec);
  mpq_class xj = x.at(j);
  if (xj != 0) {
    mpq_class xf = xj / mpq_class(f);
    m = m * PrecReal::exp(PrecReal::from_rational(xf, prec));
  }
  return -m;
}

// lambda_j^x = 1/(1 + e^{-l_j^x}), in (1/2, 1). Once e^{-l} underflows the
// float exponent range the ball collapses to 1 with the residual mass folded
// into the error bound.
inline PrecReal lambda_value(const ParamSequence& x, unsigned long j,
                             mpfr_prec_t prec = 192) {
  PrecReal m = neg_l_log2(x, j, prec);
  mpfr_t mhi;
  mpfr_init2(mhi, 64);
  m.bound_hi(mhi);
  bool representable = mpfr_cmp_si(mhi, mpfr_get_emin() + 64) > 0;
  mpfr_clear(mhi);
  if (!representable) {
    PrecReal one = PrecReal::from_long(1, prec);
    one.add_error_2exp(mpfr_get_emin() + 2);
    return one;
  }
  PrecReal u = PrecReal::exp2(m);
  return PrecReal::from_long(1, prec) / u.add_q(1);
}

// One block of the eigenvalue list: lambda is constant across the block and
// the multiplicity N_j = 2^{j!} is carried only through its exponent.
struct EigenvalueBlock {
  unsigned long j;
  PrecReal lambda;
  mpz_class log2_multiplicity;  // exactly j!
};

inline std::vector<EigenvalueBlock> eigenvalue_blocks(const ParamSequence& x,
                                                      unsigned long J,
                                                      mpfr_prec_t prec = 192) {
  if (J == 0) throw std::invalid_argument("J must be positive");
  std::vector<EigenvalueBlock> out;
  out.reserve(J);
  for (unsigned long j = 1; j <= J; ++j)
    out.push_back(EigenvalueBlock{j, lambda_value(x, j, prec), factorial(j)});
  return out;
}

// Evidence that sum_j N_j e^{-l_j^x} = sum_j w_j diverges: partial sums of
// the weights, the minimum l_j seen, and a flag that the weights stay
// bounded below on the tail window. Evidence, not proof.
struct TypeIIIReport {
  unsigned long horizon = 0;
  std::vector<PrecReal> partial_sums;   // of w_j = 2^{log2_weight(j)}
  std::vector<PrecReal> weights;
  PrecReal min_l;
  bool divergence_evidence = false;
  mpq_class weight_floor;  // the tail bound used for the flag
};

inline TypeIIIReport type_iii_evidence(const ParamSequence& x, unsigned long J,
                                       mpfr_prec_t prec = 192) {
  if (J == 0) throw std::invalid_argument("J must be positive");
  TypeIIIReport rep;
  rep.horizon = J;
  PrecReal acc(prec);
  for (unsigned long j = 1; j <= J; ++j) {
    PrecReal w = PrecReal::exp2(log2_weight(j, x.at(j), prec));
    acc = acc + w;
    rep.weights.push_back(w);
    rep.partial_sums.push_back(acc);
    PrecReal l = l_value(x, j, prec);
    if (j == 1 || PrecReal::certainly_less(l, rep.min_l)) rep.min_l = l;
  }
  // weights bounded below by 2^{-(sup|x| + 1)} on the tail window
  mpq_class floor_exp = -(x.sup_norm() + 1);
  rep.weight_floor = floor_exp;
  bool ok = true;
  for (unsigned long j = J / 2 + 1; j <= J; ++j) {
    auto c = log2_weight(j, x.at(j), prec).cmp_q(floor_exp);
    if (!c.has_value() || *c < 0) {
      ok = false;
      break;
    }
  }
  rep.divergence_evidence = ok;
  return rep;
}

}  // namespace awlab
