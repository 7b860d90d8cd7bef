#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <cctype>
#include <string>
#include <string_view>

#include "pric3/errors.hpp"

namespace pric3 {

// Exact probability. Every frame value and transition probability is one of these.
using Probability = mpq_class;

inline const Probability& zero_probability() {
  static const Probability z(0);
  return z;
}

inline const Probability& one_probability() {
  static const Probability o(1);
  return o;
}

inline std::string to_string(const Probability& q) { return q.get_str(); }

inline double to_double(const Probability& q) { return q.get_d(); }

// Accepts "3", "-3", "5/9", "0.125", "1e-3", "2.5E+2". Decimals are converted exactly.
inline Probability parse_rational(std::string_view text) {
  auto fail = [&]() -> Probability {
    throw ModelError("not a rational number: '" + std::string(text) + "'");
  };
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  if (text.empty()) return fail();

  auto slash = text.find('/');
  if (slash != std::string_view::npos) {
    Probability num = parse_rational(text.substr(0, slash));
    Probability den = parse_rational(text.substr(slash + 1));
    if (den == 0) throw ModelError("division by zero in '" + std::string(text) + "'");
    Probability q = num / den;
    q.canonicalize();
    return q;
  }

  std::size_t pos = 0;
  bool negative = false;
  if (text[pos] == '+' || text[pos] == '-') negative = text[pos++] == '-';
  std::string digits;
  long exponent = 0;
  bool any = false;
  while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
    digits += text[pos++];
    any = true;
  }
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
      digits += text[pos++];
      --exponent;
      any = true;
    }
  }
  if (!any) return fail();
  if (pos < text.size() && (text[pos] == 'e' || text[pos] == 'E')) {
    ++pos;
    bool eneg = false;
    if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) eneg = text[pos++] == '-';
    std::string edigits;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) edigits += text[pos++];
    if (edigits.empty() || edigits.size() > 6) return fail();
    long e = std::stol(edigits);
    exponent += eneg ? -e : e;
  }
  if (pos != text.size()) return fail();

  mpz_class num(digits, 10);
  mpz_class scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(exponent < 0 ? -exponent : exponent));
  Probability q = exponent < 0 ? Probability(num, scale) : Probability(num * scale);
  q.canonicalize();
  if (negative) q = -q;
  return q;
}

// Closest rational with denominator <= max_den (continued-fraction walk).
inline Probability limit_denominator(const Probability& q, const mpz_class& max_den) {
  if (q.get_den() <= max_den) return q;
  mpz_class p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  mpz_class n = q.get_num(), d = q.get_den();
  while (true) {
    mpz_class a;
    mpz_fdiv_q(a.get_mpz_t(), n.get_mpz_t(), d.get_mpz_t());
    mpz_class q2 = q0 + a * q1;
    if (q2 > max_den) break;
    mpz_class p2 = p0 + a * p1;
    p0 = p1;
    q0 = q1;
    p1 = p2;
    q1 = q2;
    mpz_class r = n - a * d;
    n = d;
    d = r;
    if (d == 0) break;
  }
  mpz_class k = (max_den - q0) / q1;
  Probability bound1(p0 + k * p1, q0 + k * q1);
  Probability bound2(p1, q1);
  bound1.canonicalize();
  bound2.canonicalize();
  return abs(bound2 - q) <= abs(bound1 - q) ? bound2 : bound1;
}

inline Probability limit_denominator(const Probability& q, unsigned long max_den) {
  return limit_denominator(q, mpz_class(max_den));
}

// Exact value of a double, then limited to the given denominator.
inline Probability from_double(double d, unsigned long max_den) {
  Probability q(d);
  return limit_denominator(q, max_den);
}

// Rounds q down to at most `bits` significant bits; q itself when its denominator
// already fits in `bits` bits. Expects q >= 0.
inline Probability round_down_bits(const Probability& q, unsigned bits = 64) {
  if (q <= 0 || mpz_sizeinbase(q.get_den_mpz_t(), 2) <= bits) return q;
  const long mag = static_cast<long>(mpz_sizeinbase(q.get_num_mpz_t(), 2)) -
                   static_cast<long>(mpz_sizeinbase(q.get_den_mpz_t(), 2)) + 1;
  const long shift = std::max(0L, static_cast<long>(bits) - mag);
  mpz_class scaled = q.get_num();
  mpz_mul_2exp(scaled.get_mpz_t(), scaled.get_mpz_t(), static_cast<mp_bitcnt_t>(shift));
  mpz_fdiv_q(scaled.get_mpz_t(), scaled.get_mpz_t(), q.get_den_mpz_t());
  mpz_class den = 1;
  mpz_mul_2exp(den.get_mpz_t(), den.get_mpz_t(), static_cast<mp_bitcnt_t>(shift));
  Probability out(scaled, den);
  out.canonicalize();
  return out;
}

inline Probability clamp01(const Probability& q) {
  if (q < 0) return Probability(0);
  if (q > 1) return Probability(1);
  return q;
}

}  // namespace pric3
