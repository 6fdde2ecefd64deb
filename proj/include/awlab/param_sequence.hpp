#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "awlab/log_real.hpp"
#include "awlab/prec_real.hpp"
#include "awlab/rational.hpp"

namespace awlab {

// A finitely supported sequence x in c_0 with exact rational entries. The
// zero tail is implied; entries are kept sorted by index with no duplicates
// and no stored zeros.
class ParamSequence {
 public:
  struct Entry {
    unsigned long j;
    mpq_class value;
  };

  ParamSequence() = default;

  explicit ParamSequence(std::vector<Entry> entries) {
    std::sort(entries.begin(), entries.end(),
              [](const Entry& a, const Entry& b) { return a.j < b.j; });
    for (auto& e : entries) {
      if (e.j == 0) throw std::invalid_argument("indices start at 1");
      if (!support_.empty() && support_.back().j == e.j)
        throw std::invalid_argument("duplicate index " + std::to_string(e.j));
      if (e.value != 0) support_.push_back(std::move(e));
    }
  }

  static ParamSequence zero() { return ParamSequence(); }

  static ParamSequence single(unsigned long j, mpq_class v) {
    return ParamSequence({Entry{j, std::move(v)}});
  }

  const std::vector<Entry>& support() const { return support_; }
  bool is_zero() const { return support_.empty(); }

  mpq_class at(unsigned long j) const {
    auto it = std::lower_bound(
        support_.begin(), support_.end(), j,
        [](const Entry& e, unsigned long v) { return e.j < v; });
    if (it != support_.end() && it->j == j) return it->value;
    return mpq_class(0);
  }

  unsigned long max_support() const {
    return support_.empty() ? 0 : support_.back().j;
  }

  mpq_class sup_norm() const {
    mpq_class m(0);
    for (const auto& e : support_) {
      mpq_class a = ::abs(e.value);
      if (a > m) m = a;
    }
    return m;
  }

  ParamSequence plus(const ParamSequence& o) const {
    std::vector<Entry> out;
    size_t i = 0, k = 0;
    while (i < support_.size() || k < o.support_.size()) {
      if (k == o.support_.size() ||
          (i < support_.size() && support_[i].j < o.support_[k].j)) {
        out.push_back(support_[i++]);
      } else if (i == support_.size() || o.support_[k].j < support_[i].j) {
        out.push_back(o.support_[k++]);
      } else {
        mpq_class s = support_[i].value + o.support_[k].value;
        if (s != 0) out.push_back(Entry{support_[i].j, s});
        ++i;
        ++k;
      }
    }
    ParamSequence r;
    r.support_ = std::move(out);
    return r;
  }

  bool operator==(const ParamSequence& o) const {
    if (support_.size() != o.support_.size()) return false;
    for (size_t i = 0; i < support_.size(); ++i)
      if (support_[i].j != o.support_[i].j ||
          support_[i].value != o.support_[i].value)
        return false;
    return true;
  }

 private:
  std::vector<Entry> support_;
};

// A finitely supported vector in the weighted Hilbert group G, held in
// signed log2 form: a(j) = sign * 2^{log2_magnitude}. Membership in G forces
// |a(j)| of the order 2^{-j!/2}, far below any fixed exponent range, which is
// why the magnitude is never materialized. Entries built from exact
// rationals remember them, enabling exact chain arithmetic downstream.
class GVector {
 public:
  struct Entry {
    unsigned long j;
    int sign;  // +1 or -1
    PrecReal log2_magnitude;
    std::optional<mpq_class> exact;
  };

  GVector() = default;

  explicit GVector(std::vector<Entry> entries) {
    std::sort(entries.begin(), entries.end(),
              [](const Entry& a, const Entry& b) { return a.j < b.j; });
    unsigned long prev = 0;
    for (auto& e : entries) {
      if (e.j == 0) throw std::invalid_argument("indices start at 1");
      if (prev == e.j)
        throw std::invalid_argument("duplicate index " + std::to_string(e.j));
      if (e.sign != 1 && e.sign != -1)
        throw std::invalid_argument("sign must be +1 or -1");
      prev = e.j;
      entries_.push_back(std::move(e));
    }
  }

  static GVector zero() { return GVector(); }

  static Entry entry_from_rational(unsigned long j, const mpq_class& v,
                                   mpfr_prec_t prec = 128) {
    if (v == 0) throw std::invalid_argument("zero entries are not stored");
    mpq_class a = v > 0 ? v : mpq_class(-v);
    return Entry{j, v > 0 ? 1 : -1,
                 PrecReal::log2(PrecReal::from_rational(a, prec)), v};
  }

  static GVector from_rationals(
      const std::vector<std::pair<unsigned long, mpq_class>>& vals,
      mpfr_prec_t prec = 128) {
    std::vector<Entry> es;
    for (const auto& [j, v] : vals)
      if (v != 0) es.push_back(entry_from_rational(j, v, prec));
    return GVector(std::move(es));
  }

  const std::vector<Entry>& entries() const { return entries_; }
  bool is_zero() const { return entries_.empty(); }
  unsigned long max_support() const {
    return entries_.empty() ? 0 : entries_.back().j;
  }

  // Every entry exact => chain arithmetic downstream is exact rational.
  bool all_exact() const {
    return std::all_of(entries_.begin(), entries_.end(),
                       [](const Entry& e) { return e.exact.has_value(); });
  }

  const Entry* find(unsigned long j) const {
    auto it = std::lower_bound(
        entries_.begin(), entries_.end(), j,
        [](const Entry& e, unsigned long v) { return e.j < v; });
    if (it != entries_.end() && it->j == j) return &*it;
    return nullptr;
  }

  LogReal value_log(unsigned long j) const {
    const Entry* e = find(j);
    if (!e) return LogReal::zero();
    return LogReal::from_log2(e->sign, e->log2_magnitude);
  }

 private:
  std::vector<Entry> entries_;
};

}  // namespace awlab
