#pragma once

#include <stdexcept>
#include <string>

#include "cellbf/rational.hpp"

namespace cellbf {

// Exact value  c * (2*pi)^(two_pi_eighths/8) * hbar^(hbar_eighths/8)
//            * exp(i*pi*phase32/16),
// with c = q*sqrt(rad) and the phase exponent mod 32. The eighth-units exist
// so that square roots of quarter-power monomials (half-densities, reduced
// states) stay representable. Equality is usually tested mod sign.
struct ScalarMono {
  SqrtQ coeff;
  int two_pi_eighths = 0;
  int hbar_eighths = 0;
  int phase32 = 0;  // exponent of exp(i*pi/16), mod 32

  ScalarMono() : coeff(Q(1)) {}
  explicit ScalarMono(Q q) : coeff(std::move(q)) {}
  explicit ScalarMono(SqrtQ c) : coeff(std::move(c)) {}
  // quarter-unit constructor (the units used throughout the xi bookkeeping)
  ScalarMono(SqrtQ c, int tp_quarters, int hb_quarters, int ph16)
      : coeff(std::move(c)),
        two_pi_eighths(2 * tp_quarters),
        hbar_eighths(2 * hb_quarters),
        phase32(mod32(2 * ph16)) {}

  static ScalarMono from_eighths(SqrtQ c, int tp8, int hb8, int ph32) {
    ScalarMono s(std::move(c));
    s.two_pi_eighths = tp8;
    s.hbar_eighths = hb8;
    s.phase32 = mod32(ph32);
    return s;
  }

  static int mod32(int p) { return ((p % 32) + 32) % 32; }
  int two_pi_quarters() const { return two_pi_eighths / 2; }
  int hbar_quarters() const { return hbar_eighths / 2; }
  int phase16() const { return phase32 / 2; }

  static ScalarMono one() { return ScalarMono(); }
  static ScalarMono zero() { return ScalarMono(Q(0)); }
  static ScalarMono hbar(int quarters = 4) { return ScalarMono(SqrtQ(Q(1)), 0, quarters, 0); }
  static ScalarMono two_pi(int quarters = 4) { return ScalarMono(SqrtQ(Q(1)), quarters, 0, 0); }
  static ScalarMono phase(int sixteenths) { return ScalarMono(SqrtQ(Q(1)), 0, 0, sixteenths); }
  static ScalarMono minus_i_hbar() { return ScalarMono(SqrtQ(Q(1)), 0, 4, -4); }

  bool is_zero() const { return coeff.is_zero(); }

  friend ScalarMono operator*(const ScalarMono& a, const ScalarMono& b) {
    if (a.is_zero() || b.is_zero()) return zero();
    return from_eighths(a.coeff * b.coeff, a.two_pi_eighths + b.two_pi_eighths,
                        a.hbar_eighths + b.hbar_eighths, a.phase32 + b.phase32);
  }
  friend ScalarMono operator*(const Q& c, const ScalarMono& b) {
    return ScalarMono(SqrtQ(c)) * b;
  }

  ScalarMono inverse() const {
    if (is_zero()) throw std::domain_error("ScalarMono: inverse of zero");
    return from_eighths(coeff.inverse(), -two_pi_eighths, -hbar_eighths, -phase32);
  }

  ScalarMono pow(int n) const {
    ScalarMono out = one();
    ScalarMono base = n >= 0 ? *this : inverse();
    int k = n >= 0 ? n : -n;
    for (int i = 0; i < k; ++i) out = out * base;
    return out;
  }

  // principal square root mod sign: |coeff|^(1/2), halved exponents; the
  // phase exponent must be even in 1/16-units (true for quarter-unit inputs)
  ScalarMono sqrt_mod_sign() const {
    if (is_zero()) return zero();
    if (two_pi_eighths % 2 || hbar_eighths % 2 || phase32 % 2)
      throw std::domain_error("ScalarMono: sqrt of an odd-eighth monomial");
    Q qa = coeff.q < 0 ? Q(-coeff.q) : coeff.q;
    SqrtQ c = sqrtq(qa);
    if (coeff.rad != 1) {
      // sqrt(q sqrt(r)) with r > 1 would need quartic radicals
      // value q * sqrt(r): square root exists in SqrtQ only if q^2 r is a
      // perfect square times a squarefree part, i.e. generally not; the
      // states in this model only take square roots of rational coordinates
      throw std::domain_error("ScalarMono: sqrt of an irrational coordinate");
    }
    return from_eighths(c, two_pi_eighths / 2, hbar_eighths / 2, phase32 / 2);
  }

  friend bool operator==(const ScalarMono& a, const ScalarMono& b) {
    if (a.is_zero() && b.is_zero()) return true;
    return a.coeff == b.coeff && a.two_pi_eighths == b.two_pi_eighths &&
           a.hbar_eighths == b.hbar_eighths && a.phase32 == b.phase32;
  }

  // equality modulo sign: coefficients up to sign, phase mod pi
  static bool equal_mod_sign(const ScalarMono& a, const ScalarMono& b) {
    if (a.is_zero() && b.is_zero()) return true;
    if (a.is_zero() || b.is_zero()) return false;
    if (a.two_pi_eighths != b.two_pi_eighths || a.hbar_eighths != b.hbar_eighths) return false;
    SqrtQ ca = a.coeff, cb = b.coeff;
    if (ca.rad != cb.rad) return false;
    bool coeff_flip = (ca.q == -cb.q);
    if (!coeff_flip && ca.q != cb.q) return false;
    int dp = mod32(a.phase32 - b.phase32);
    if (dp != 0 && dp != 16) return false;
    return true;
  }

  std::string str() const {
    if (is_zero()) return "0";
    std::string s = sqrtq_str(coeff);
    auto eighth = [](int v) {
      if (v % 8 == 0) return std::to_string(v / 8);
      if (v % 2 == 0) return std::to_string(v / 2) + "/4";
      return std::to_string(v) + "/8";
    };
    if (two_pi_eighths != 0) s += " * (2pi)^(" + eighth(two_pi_eighths) + ")";
    if (hbar_eighths != 0) s += " * hbar^(" + eighth(hbar_eighths) + ")";
    if (phase32 != 0) s += " * exp(i pi " + std::to_string(phase32) + "/16)";
    return s;
  }
};

}  // namespace cellbf
