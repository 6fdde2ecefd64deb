#pragma once

#include <gmpxx.h>

#include <cctype>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace awlab {

// Parses an exact rational from "p/q", integer, or decimal notation
// ("-3", "22/7", "0.125", "1e-3"). Decimals convert exactly
// (0.1 -> 1/10), never through binary floating point.
inline mpq_class parse_rational(const std::string& text) {
  if (text.empty()) throw std::invalid_argument("empty rational literal");

  if (text.find('/') != std::string::npos) {
    mpq_class q;
    if (q.set_str(text, 10) != 0)
      throw std::invalid_argument("bad rational literal: " + text);
    q.canonicalize();
    if (q.get_den() == 0) throw std::invalid_argument("zero denominator: " + text);
    return q;
  }

  std::string s = text;
  bool neg = false;
  std::size_t i = 0;
  if (s[i] == '+' || s[i] == '-') {
    neg = s[i] == '-';
    ++i;
  }

  std::string digits;
  long frac_digits = 0;
  bool seen_point = false, seen_digit = false;
  long exp10 = 0;
  for (; i < s.size(); ++i) {
    char c = s[i];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digits += c;
      seen_digit = true;
      if (seen_point) ++frac_digits;
    } else if (c == '.') {
      if (seen_point) throw std::invalid_argument("bad decimal: " + text);
      seen_point = true;
    } else if (c == 'e' || c == 'E') {
      exp10 = std::stol(s.substr(i + 1));
      break;
    } else {
      throw std::invalid_argument("bad decimal: " + text);
    }
  }
  if (!seen_digit) throw std::invalid_argument("bad decimal: " + text);
  if (digits.empty()) digits = "0";

  mpz_class num(digits, 10);
  if (neg) num = -num;
  mpq_class q(num);
  long shift = exp10 - frac_digits;
  if (shift > 0) {
    mpz_class p10;
    mpz_ui_pow_ui(p10.get_mpz_t(), 10, static_cast<unsigned long>(shift));
    q *= mpq_class(p10);
  } else if (shift < 0) {
    mpz_class p10;
    mpz_ui_pow_ui(p10.get_mpz_t(), 10, static_cast<unsigned long>(-shift));
    q /= mpq_class(p10);
  }
  q.canonicalize();
  return q;
}

// "p/q" when the denominator is not 1, plain integer otherwise.
inline std::string rational_to_string(const mpq_class& q) {
  return q.get_str();
}

inline mpz_class factorial(unsigned long j) {
  mpz_class f;
  mpz_fac_ui(f.get_mpz_t(), j);
  return f;
}

}  // namespace awlab
