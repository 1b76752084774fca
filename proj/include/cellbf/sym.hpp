#pragma once

#include <functional>
#include <vector>

#include "cellbf/hpt.hpp"
#include "cellbf/poly.hpp"

namespace cellbf {

// ===========================================================================
// Induction data on (truncated) polynomial algebras: the transgression lift
// of linear induction data, i_Sym = p^*, p_Sym = i^*,
// K_Sym = int_0^1 ((1-t) + t ip + dt K)^*.
// ===========================================================================

// Linear substitution data on a set of polynomial variables: each variable id
// maps to a homogeneous linear combination of variable ids.
struct LinearSubst {
  std::map<int, std::vector<std::pair<int, Q>>> image;  // var -> sum coeff*var

  FieldPoly apply_var(const VarTable& vt, int id, int trunc) const {
    FieldPoly out(vt, trunc);
    auto it = image.find(id);
    if (it == image.end()) return out;
    for (auto& [id2, c] : it->second) out.add_term({id2}, HPoly(c));
    return out;
  }
  FieldPoly operator()(const FieldPoly& f) const {
    FieldPoly out(*f.vars, f.trunc);
    for (auto& [m, c] : f.terms) {
      FieldPoly acc = FieldPoly::constant(*f.vars, HPoly(Q(1)), f.trunc);
      bool dead = false;
      for (int id : m) {
        acc = acc * apply_var(*f.vars, id, f.trunc);
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
};

// Sym-level induction data built from substitution tables for ip and K* and
// for the inclusion/projection of the retract's variables.
struct SymRetraction {
  const VarTable* vt = nullptr;
  int trunc = 0;
  std::vector<int> big_vars;    // variables of the big algebra
  LinearSubst ip_star;          // y -> y o (ip), on big variables
  LinearSubst K_star;           // y -> y o K, degree -1 on big variables
  LinearSubst i_star;           // y -> y o i: big var -> retract vars (p_Sym)
  LinearSubst p_star;           // z -> z o p: retract var -> big vars (i_Sym)
  LinearSubst d_star;           // y -> y o d: the coboundary pullback (degree +1... gives Qlin)

  FieldPoly i_Sym(const FieldPoly& f) const { return p_star(f); }
  FieldPoly p_Sym(const FieldPoly& f) const { return i_star(f); }

  // the lifted differential: the odd derivation with Q(y) = y o d
  FieldPoly Q_lin(const FieldPoly& f) const { return derive_along(f, d_star); }

  // the odd derivation with generator images s(y):
  //   D(y_1..y_r) = sum_p (-1)^(|y_1|+...+|y_{p-1}|) y_1..y_{p-1} s(y_p) y_{p+1}..y_r
  FieldPoly derive_along(const FieldPoly& f, const LinearSubst& s) const {
    FieldPoly out(*vt, trunc);
    for (auto& [m, coeff] : f.terms) {
      int sgn = 1;
      for (std::size_t p = 0; p < m.size(); ++p) {
        FieldPoly img = s.apply_var(*vt, m[p], trunc);
        if (!img.is_zero()) {
          FieldPoly acc = FieldPoly::constant(*vt, HPoly(Q(sgn)), trunc);
          for (std::size_t l = 0; l < p; ++l)
            acc = acc * FieldPoly::variable(*vt, m[l], trunc);
          acc = acc * img;
          for (std::size_t l = p + 1; l < m.size(); ++l)
            acc = acc * FieldPoly::variable(*vt, m[l], trunc);
          for (auto& [m2, c2] : acc.terms) out.add_term(m2, coeff * c2);
        }
        if (vt->odd(m[p])) sgn = -sgn;
      }
    }
    return out;
  }

  // K_Sym by the transgression expansion: on a monomial y_1...y_w,
  //   sum_j (-1)^{|y_1|+...+|y_{j-1}|} sum_{S subset of the other slots}
  //   |S|!(w-1-|S|)!/w! * prod (slots in S -> ip* image, others -> identity,
  //   slot j -> K* image), product taken in the original slot order; the
  //   Koszul count moves the dt-factor of the integrand out to the left.
  FieldPoly K_Sym(const FieldPoly& f) const {
    FieldPoly out(*vt, trunc);
    for (auto& [m, coeff] : f.terms) {
      int w = (int)m.size();
      if (w == 0) continue;
      for (int j = 0; j < w; ++j) {
        FieldPoly kimg = K_star.apply_var(*vt, m[j], trunc);
        if (kimg.is_zero()) continue;
        int sgn = 1;
        for (int l = 0; l < j; ++l)
          if (vt->odd(m[l])) sgn = -sgn;
        // enumerate subsets of the remaining slots
        std::vector<int> rest;
        for (int l = 0; l < w; ++l)
          if (l != j) rest.push_back(l);
        int rn = (int)rest.size();
        for (std::uint32_t s = 0; s < (1u << rn); ++s) {
          int size_s = 0;
          for (int b = 0; b < rn; ++b)
            if (s & (1u << b)) ++size_s;
          // t-integral: int t^{|S|} (1-t)^{w-1-|S|} = |S|!(w-1-|S|)!/w!
          Int num = 1, den = 1;
          for (int k = 2; k <= size_s; ++k) num *= k;
          for (int k = 2; k <= w - 1 - size_s; ++k) num *= k;
          for (int k = 2; k <= w; ++k) den *= k;
          Q cint(num, den);
          FieldPoly acc = FieldPoly::constant(*vt, HPoly(Q(sgn) * cint), trunc);
          bool dead = false;
          for (int l = 0; l < w && !dead; ++l) {
            FieldPoly fac(*vt, trunc);
            if (l == j) {
              fac = kimg;
            } else {
              int pos = 0;
              for (int b = 0; b < rn; ++b)
                if (rest[b] == l) pos = b;
              if (s & (1u << pos))
                fac = ip_star.apply_var(*vt, m[l], trunc);
              else
                fac = FieldPoly::variable(*vt, m[l], trunc);
            }
            acc = acc * fac;
            if (acc.is_zero()) dead = true;
          }
          if (dead) continue;
          for (auto& [m2, c2] : acc.terms) out.add_term(m2, coeff * c2);
        }
      }
    }
    return out;
  }

  // perturbed homotopy and projection: delta is a weight-raising derivation
  // (given as an operator); series terminate at the truncation weight
  FieldPoly K_perturbed(const FieldPoly& x,
                        const std::function<FieldPoly(const FieldPoly&)>& delta) const {
    FieldPoly out(*vt, trunc);
    FieldPoly cur = K_Sym(x);
    int guard = 0;
    Q sign(1);
    while (!cur.is_zero() && guard++ <= trunc + 2) {
      out = out + sign * cur;
      sign = -sign;
      cur = K_Sym(delta(cur));
    }
    return out;
  }
  FieldPoly p_perturbed(const FieldPoly& x,
                        const std::function<FieldPoly(const FieldPoly&)>& delta) const {
    FieldPoly out = p_Sym(x);
    FieldPoly cur = x;
    int guard = 0;
    Q sign(-1);
    while (guard++ <= trunc + 2) {
      cur = delta(K_Sym(cur));
      if (cur.is_zero()) break;
      out = out + sign * p_Sym(cur);
      sign = -sign;
    }
    return out;
  }
};

// Builds the Sym retraction for linear induction data tensored with a
// coefficient space of dimension gdim: variables big_id(cell_slot, a) of the
// ambient table; retract variables z_id(j, a).
struct SymBuildSpec {
  const VarTable* vt = nullptr;
  int trunc = 0;
  int gdim = 1;
  // per degree: list of variable ids for the big complex, matching the
  // induction data's basis order: vars_of[k][slot * gdim + a]
  std::map<int, std::vector<int>> big_vars;
  std::map<int, std::vector<int>> small_vars;
};

inline SymRetraction make_sym_retraction(const InductionData& lin, const SymBuildSpec& spec) {
  SymRetraction R;
  R.vt = spec.vt;
  R.trunc = spec.trunc;
  int gd = spec.gdim;
  auto add_images = [&](LinearSubst& subst, const GradedMap& f, bool transpose_roles,
                        const std::map<int, std::vector<int>>& src_vars,
                        const std::map<int, std::vector<int>>& dst_vars, int shift) {
    // y_src o f: the variable dual to basis vector (slot) of the SOURCE of
    // the pullback... for a pullback along f : V -> W, coordinates y on W map
    // to y o f on V: image[y_W] = sum over V-basis of f-matrix entries.
    (void)transpose_roles;
    for (auto& [k, blk] : f.blocks) {
      // f.block(k): W-coords x V-coords at degree k (rows = target)
      auto itW = dst_vars.find(k + shift);
      auto itV = src_vars.find(k);
      if (itW == dst_vars.end() || itV == src_vars.end()) continue;
      for (std::size_t r = 0; r < blk.rows(); ++r)
        for (std::size_t c = 0; c < blk.cols(); ++c) {
          if (blk(r, c) == 0) continue;
          for (int a = 0; a < gd; ++a)
            subst.image[itW->second[r * gd + a]].push_back(
                {itV->second[c * gd + a], blk(r, c)});
        }
    }
  };
  // ip: C -> C degree 0
  GradedMap IP = lin.i * lin.p;
  add_images(R.ip_star, IP, false, spec.big_vars, spec.big_vars, 0);
  // K: C -> C degree -1; y_{C^{k-1}} o K needs K-matrix rows at degree k
  add_images(R.K_star, lin.K, false, spec.big_vars, spec.big_vars, -1);
  // i : C' -> C (p_Sym = i^*): big coordinate y o i = combination of small vars
  add_images(R.i_star, lin.i, false, spec.small_vars, spec.big_vars, 0);
  // p : C -> C' (i_Sym = p^*): small coordinate z o p = combination of big vars
  add_images(R.p_star, lin.p, false, spec.big_vars, spec.small_vars, 0);
  // d : C -> C degree +1
  add_images(R.d_star, lin.big.d, false, spec.big_vars, spec.big_vars, +1);
  for (auto& [k, ids] : spec.big_vars)
    for (int id : ids) R.big_vars.push_back(id);
  return R;
}

}  // namespace cellbf
