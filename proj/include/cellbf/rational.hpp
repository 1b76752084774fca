#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace cellbf {

using Int = boost::multiprecision::cpp_int;
using Q = boost::multiprecision::cpp_rational;

inline Q q_of(long long n, long long d = 1) { return Q(n, d); }

// Parses "p", "-p/q" or "p/q" (whitespace not allowed).
inline Q parse_rational(const std::string& s) {
  auto slash = s.find('/');
  try {
    if (slash == std::string::npos) return Q(Int(s));
    Int num(s.substr(0, slash));
    Int den(s.substr(slash + 1));
    if (den == 0) throw std::invalid_argument("zero denominator");
    return Q(num, den);
  } catch (const std::exception&) {
    throw std::invalid_argument("bad rational literal: '" + s + "'");
  }
}

inline std::string rational_str(const Q& q) {
  std::string s = numerator(q).str();
  if (denominator(q) != 1) s += "/" + denominator(q).str();
  return s;
}

// Largest square divisor split: n = s^2 * r with r squarefree (n >= 0).
inline void split_square(const Int& n, Int& s, Int& r) {
  s = 1;
  r = n;
  if (n == 0) return;
  for (Int p = 2; p * p * p * p <= r || p <= 3; ++p) {
    if (p * p > r) break;
    while (r % (p * p) == 0) {
      r /= p * p;
      s *= p;
    }
  }
  // residual perfect square check
  Int root = sqrt(r);
  if (root * root == r) {
    s *= root;
    r = 1;
  }
}

// Value q * sqrt(r) with q rational, r a squarefree positive integer.
// Closed under multiplication when radicands match or multiply to squares.
struct SqrtQ {
  Q q;
  Int rad;  // squarefree, >= 1; value is q * sqrt(rad)

  SqrtQ() : q(0), rad(1) {}
  SqrtQ(Q v) : q(std::move(v)), rad(1) {}
  SqrtQ(Q v, Int r) : q(std::move(v)), rad(std::move(r)) { normalize(); }

  void normalize() {
    if (q == 0) {
      rad = 1;
      return;
    }
    Int s, r;
    split_square(rad, s, r);
    q *= s;
    rad = r;
  }

  bool is_rational() const { return rad == 1 || q == 0; }
  bool is_zero() const { return q == 0; }

  friend SqrtQ operator*(const SqrtQ& a, const SqrtQ& b) {
    SqrtQ out;
    out.q = a.q * b.q;
    out.rad = a.rad * b.rad;
    out.normalize();
    return out;
  }
  friend bool operator==(const SqrtQ& a, const SqrtQ& b) {
    return a.q == b.q && (a.q == 0 || a.rad == b.rad);
  }
  SqrtQ inverse() const {
    if (q == 0) throw std::domain_error("SqrtQ: inverse of zero");
    // 1/(q sqrt(r)) = sqrt(r)/(q r)
    return SqrtQ(Q(1) / (q * Q(rad)), rad);
  }
};

// sqrt of a rational as SqrtQ; sign of input must be >= 0.
inline SqrtQ sqrtq(const Q& v) {
  if (v < 0) throw std::domain_error("sqrtq: negative radicand");
  if (v == 0) return SqrtQ(Q(0));
  // sqrt(p/q) = sqrt(p q)/q
  Int p = numerator(v), d = denominator(v);
  return SqrtQ(Q(1, d), p * d);
}

inline std::string sqrtq_str(const SqrtQ& v) {
  if (v.is_rational()) return rational_str(v.q);
  return rational_str(v.q) + "*sqrt(" + v.rad.str() + ")";
}

}  // namespace cellbf
