#pragma once

#include <algorithm>
#include <climits>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "cellbf/rational.hpp"

namespace cellbf {

// Laurent polynomial in the formal variable h = -i hbar, exact coefficients.
struct HPoly {
  std::map<int, Q> c;

  HPoly() = default;
  explicit HPoly(Q v) {
    if (v != 0) c[0] = std::move(v);
  }
  static HPoly h_pow(int k, Q v = Q(1)) {
    HPoly p;
    if (v != 0) p.c[k] = std::move(v);
    return p;
  }
  bool is_zero() const { return c.empty(); }
  void trim() {
    for (auto it = c.begin(); it != c.end();)
      it = (it->second == 0) ? c.erase(it) : std::next(it);
  }
  friend HPoly operator+(const HPoly& a, const HPoly& b) {
    HPoly out = a;
    for (auto& [k, v] : b.c) out.c[k] += v;
    out.trim();
    return out;
  }
  friend HPoly operator-(const HPoly& a, const HPoly& b) {
    HPoly out = a;
    for (auto& [k, v] : b.c) out.c[k] -= v;
    out.trim();
    return out;
  }
  friend HPoly operator*(const HPoly& a, const HPoly& b) {
    HPoly out;
    for (auto& [k1, v1] : a.c)
      for (auto& [k2, v2] : b.c) out.c[k1 + k2] += v1 * v2;
    out.trim();
    return out;
  }
  friend HPoly operator*(const Q& s, const HPoly& b) {
    HPoly out;
    for (auto& [k, v] : b.c) {
      Q w = s * v;
      if (w != 0) out.c[k] = w;
    }
    return out;
  }
  friend bool operator==(const HPoly& a, const HPoly& b) { return a.c == b.c; }
  std::string str() const {
    if (c.empty()) return "0";
    std::string s;
    for (auto& [k, v] : c) {
      if (!s.empty()) s += " + ";
      s += rational_str(v);
      if (k != 0) s += "*h^" + std::to_string(k);
    }
    return s;
  }
};

// Graded polynomial variables; odd variables square to zero.
struct PolyVar {
  std::string name;
  int degree = 0;
};

struct VarTable {
  std::vector<PolyVar> vars;
  int add(const std::string& name, int degree) {
    vars.push_back({name, degree});
    return (int)vars.size() - 1;
  }
  int degree(int id) const { return vars[id].degree; }
  bool odd(int id) const { return vars[id].degree % 2 != 0; }
  int size() const { return (int)vars.size(); }
};

using Monomial = std::vector<int>;  // sorted variable ids, repetitions allowed for even vars

// Element of the truncated graded polynomial algebra with HPoly coefficients.
struct FieldPoly {
  const VarTable* vars = nullptr;
  int trunc = INT_MAX;  // monomials of length > trunc are dropped
  std::map<Monomial, HPoly> terms;

  FieldPoly() = default;
  explicit FieldPoly(const VarTable& v, int truncation = INT_MAX) : vars(&v), trunc(truncation) {}

  static FieldPoly constant(const VarTable& v, HPoly c, int truncation = INT_MAX) {
    FieldPoly p(v, truncation);
    if (!c.is_zero()) p.terms[{}] = std::move(c);
    return p;
  }
  static FieldPoly variable(const VarTable& v, int id, int truncation = INT_MAX) {
    FieldPoly p(v, truncation);
    if (truncation >= 1) p.terms[{id}] = HPoly(Q(1));
    return p;
  }

  bool is_zero() const { return terms.empty(); }

  void add_term(Monomial m, HPoly c) {
    if ((int)m.size() > trunc || c.is_zero()) return;
    auto it = terms.find(m);
    if (it == terms.end())
      terms.emplace(std::move(m), std::move(c));
    else {
      it->second = it->second + c;
      if (it->second.is_zero()) terms.erase(it);
    }
  }

  int internal_degree_of(const Monomial& m) const {
    int d = 0;
    for (int id : m) d += vars->degree(id);
    return d;
  }
  // true when every monomial has the same internal degree `deg`
  bool homogeneous(int deg) const {
    for (auto& [m, c] : terms)
      if (internal_degree_of(m) != deg) return false;
    return true;
  }

  friend FieldPoly operator+(const FieldPoly& a, const FieldPoly& b) {
    FieldPoly out = a;
    out.trunc = std::min(a.trunc, b.trunc);
    for (auto& [m, c] : b.terms) out.add_term(m, c);
    return out;
  }
  friend FieldPoly operator-(const FieldPoly& a, const FieldPoly& b) {
    FieldPoly out = a;
    out.trunc = std::min(a.trunc, b.trunc);
    for (auto& [m, c] : b.terms) out.add_term(m, Q(-1) * c);
    return out;
  }
  friend FieldPoly operator*(const HPoly& s, const FieldPoly& a) {
    FieldPoly out(*a.vars, a.trunc);
    for (auto& [m, c] : a.terms) out.add_term(m, s * c);
    return out;
  }
  friend FieldPoly operator*(const Q& s, const FieldPoly& a) { return HPoly(s) * a; }

  // Koszul sign of merging sorted monomial b into sorted monomial a; zero if
  // an odd variable repeats.
  static bool merge_monomials(const VarTable& vt, const Monomial& a, const Monomial& b,
                              Monomial& out, int& sign) {
    out.clear();
    out.reserve(a.size() + b.size());
    sign = 1;
    std::size_t i = 0, j = 0;
    int odd_tail = 0;  // number of odd vars of `a` not yet emitted
    for (int id : a) (void)id;
    // precompute: odd count of a suffix: iterate with two pointers, counting
    // how many odd elements of a remain to the right when we emit from b
    std::vector<int> odd_suffix(a.size() + 1, 0);
    for (int k = (int)a.size() - 1; k >= 0; --k)
      odd_suffix[k] = odd_suffix[k + 1] + (vt.odd(a[k]) ? 1 : 0);
    while (i < a.size() || j < b.size()) {
      bool take_a = j >= b.size() || (i < a.size() && a[i] <= b[j]);
      if (take_a) {
        out.push_back(a[i]);
        ++i;
      } else {
        int id = b[j];
        if (vt.odd(id) && odd_suffix[i] % 2 != 0) sign = -sign;
        out.push_back(id);
        ++j;
      }
    }
    (void)odd_tail;
    // reject odd squares
    for (std::size_t k = 1; k < out.size(); ++k)
      if (out[k] == out[k - 1] && vt.odd(out[k])) return false;
    return true;
  }

  friend FieldPoly operator*(const FieldPoly& a, const FieldPoly& b) {
    FieldPoly out(*a.vars, std::min(a.trunc, b.trunc));
    Monomial m;
    int sign;
    for (auto& [ma, ca] : a.terms)
      for (auto& [mb, cb] : b.terms) {
        if ((int)(ma.size() + mb.size()) > out.trunc) continue;
        if (!merge_monomials(*a.vars, ma, mb, m, sign)) continue;
        out.add_term(m, Q(sign) * (ca * cb));
      }
    return out;
  }
  friend bool operator==(const FieldPoly& a, const FieldPoly& b) { return a.terms == b.terms; }

  // left derivative d/dx
  FieldPoly dleft(int var) const {
    FieldPoly out(*vars, trunc);
    bool var_odd = vars->odd(var);
    for (auto& [m, c] : terms) {
      int sign = 1;
      for (std::size_t j = 0; j < m.size(); ++j) {
        if (m[j] == var) {
          // count multiplicity once for even vars: derivative of x^k is k x^{k-1};
          // handled by emitting one term per occurrence
          Monomial rest;
          rest.reserve(m.size() - 1);
          for (std::size_t k = 0; k < m.size(); ++k)
            if (k != j) rest.push_back(m[k]);
          out.add_term(std::move(rest), Q(sign) * c);
        }
        if (var_odd && vars->odd(m[j])) sign = -sign;
      }
    }
    return out;
  }

  // right derivative: f <- d/dx
  FieldPoly dright(int var) const {
    FieldPoly out(*vars, trunc);
    bool var_odd = vars->odd(var);
    for (auto& [m, c] : terms) {
      int sign = 1;
      for (int j = (int)m.size() - 1; j >= 0; --j) {
        if (m[j] == var) {
          Monomial rest;
          rest.reserve(m.size() - 1);
          for (int k = 0; k < (int)m.size(); ++k)
            if (k != j) rest.push_back(m[k]);
          out.add_term(std::move(rest), Q(sign) * c);
        }
        if (var_odd && vars->odd(m[j])) sign = -sign;
      }
    }
    return out;
  }

  // substitute each variable by a homogeneous polynomial of the same degree
  FieldPoly substitute(const std::function<const FieldPoly*(int)>& image) const {
    return substitute_into(*vars, image);
  }

  // cross-table substitution: every variable must have an image rooted in
  // `target` (of the same graded degree); the result lives in `target`
  FieldPoly substitute_into(const VarTable& target,
                            const std::function<const FieldPoly*(int)>& image) const {
    FieldPoly out(target, trunc);
    for (auto& [m, c] : terms) {
      FieldPoly acc = FieldPoly::constant(target, HPoly(Q(1)), trunc);
      bool dead = false;
      for (int id : m) {
        const FieldPoly* img = image(id);
        if (!img) {
          if (&target != vars)
            throw std::invalid_argument("substitute_into: missing image for " + vars->vars[id].name);
          acc = acc * FieldPoly::variable(target, id, trunc);
        } else {
          acc = acc * *img;
        }
        if (acc.is_zero()) {
          dead = true;
          break;
        }
      }
      if (dead) continue;
      for (auto& [m2, c2] : acc.terms) out.add_term(m2, c * c2);
    }
    return out;
  }

  // keep only monomials of length exactly w
  FieldPoly weight_part(int w) const {
    FieldPoly out(*vars, trunc);
    for (auto& [m, c] : terms)
      if ((int)m.size() == w) out.terms[m] = c;
    return out;
  }
  int max_weight() const {
    int w = 0;
    for (auto& [m, c] : terms) w = std::max(w, (int)m.size());
    return w;
  }
  // coefficient of h^k as a FieldPoly over plain rationals
  FieldPoly h_coeff(int k) const {
    FieldPoly out(*vars, trunc);
    for (auto& [m, c] : terms) {
      auto it = c.c.find(k);
      if (it != c.c.end() && it->second != 0) out.terms[m] = HPoly(it->second);
    }
    return out;
  }

  std::string str() const {
    if (terms.empty()) return "0";
    std::string s;
    for (auto& [m, c] : terms) {
      if (!s.empty()) s += "  +  ";
      s += "(" + c.str() + ")";
      for (int id : m) s += " " + vars->vars[id].name;
    }
    return s;
  }
};

// g-valued polynomial: one component per Lie-algebra basis vector.
using GPoly = std::vector<FieldPoly>;

inline GPoly gpoly_zero(const VarTable& vt, int dim, int trunc) {
  return GPoly(dim, FieldPoly(vt, trunc));
}

}  // namespace cellbf
