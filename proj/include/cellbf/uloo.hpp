#pragma once

#include <set>
#include <string>
#include <vector>

#include "cellbf/complex.hpp"
#include "cellbf/poly.hpp"

namespace cellbf {

// Finite-dimensional Lie algebra with exact rational structure constants
// [e_a, e_b] = sum_c f[a][b][c] e_c.
struct LieAlgebraData {
  int dim = 0;
  std::vector<std::vector<std::vector<Q>>> f;
  std::string name;

  void init(int n) {
    dim = n;
    f.assign(n, std::vector<std::vector<Q>>(n, std::vector<Q>(n, Q(0))));
  }
  void set(int a, int b, int c, Q v) {
    f[a][b][c] = v;
    f[b][a][c] = -v;
  }

  bool antisymmetric() const {
    for (int a = 0; a < dim; ++a)
      for (int b = 0; b < dim; ++b)
        for (int c = 0; c < dim; ++c)
          if (f[a][b][c] != -f[b][a][c]) return false;
    return true;
  }
  bool jacobi() const {
    for (int a = 0; a < dim; ++a)
      for (int b = 0; b < dim; ++b)
        for (int c = 0; c < dim; ++c)
          for (int e = 0; e < dim; ++e) {
            Q s(0);
            for (int x = 0; x < dim; ++x)
              s += f[a][b][x] * f[x][c][e] + f[b][c][x] * f[x][a][e] + f[c][a][x] * f[x][b][e];
            if (s != 0) return false;
          }
    return true;
  }
  bool unimodular() const {
    // tr(ad_b) = sum_a f[b][a][a]... with our indexing tr ad_{e_b} = sum_a f[b][a][a]
    for (int b = 0; b < dim; ++b) {
      Q tr(0);
      for (int a = 0; a < dim; ++a) tr += f[b][a][a];
      if (tr != 0) return false;
    }
    return true;
  }

  static LieAlgebraData abelian(int n) {
    LieAlgebraData g;
    g.init(n);
    g.name = "abelian" + std::to_string(n);
    return g;
  }
  static LieAlgebraData heisenberg3() {
    LieAlgebraData g;
    g.init(3);
    g.set(0, 1, 2, Q(1));
    g.name = "heis3";
    return g;
  }
  static LieAlgebraData so3() {
    LieAlgebraData g;
    g.init(3);
    g.set(0, 1, 2, Q(1));
    g.set(1, 2, 0, Q(1));
    g.set(2, 0, 1, Q(1));
    g.name = "so3";
    return g;
  }
  // 2-dimensional affine algebra [e0, e1] = e1: not unimodular
  static LieAlgebraData affine2() {
    LieAlgebraData g;
    g.init(2);
    g.set(0, 1, 1, Q(1));
    g.name = "affine2";
    return g;
  }
  // gl(n) with basis E_{ij} (row-major): [E_ij, E_kl] = d_jk E_il - d_li E_kj
  static LieAlgebraData gl(int n) {
    LieAlgebraData g;
    g.init(n * n);
    auto idx = [n](int i, int j) { return i * n + j; };
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) {
            int a = idx(i, j), b = idx(k, l);
            if (a >= b) continue;
            // [E_ij, E_kl]
            std::vector<Q> v(n * n, Q(0));
            if (j == k) v[idx(i, l)] += 1;
            if (l == i) v[idx(k, j)] -= 1;
            for (int c = 0; c < n * n; ++c)
              if (v[c] != 0) {
                g.f[a][b][c] = v[c];
                g.f[b][a][c] = -v[c];
              }
          }
    g.name = "gl" + std::to_string(n);
    return g;
  }
};

// ---------------------------------------------------------------------------
// BV algebra of functions on cellular fields
// ---------------------------------------------------------------------------

// Variables A_{e,a} (degree 1 - dim e) and B_{e,a} (degree dim e - 2) for the
// cells of a complex, with the odd pairing weighted by (-1)^(dim e). The
// bracket and Laplacian below are the operations generated by that pairing;
// the bracket signs are forced by the Leibniz-defect identity for Delta.
struct BVAlgebra {
  const CellComplex* X = nullptr;
  const LieAlgebraData* g = nullptr;
  VarTable vt;
  int W = INT_MAX;
  std::vector<int> A_id, B_id;  // [cell * dim + a]
  std::vector<int> pair_cells;  // cells whose (A,B) pair enters Delta/bracket

  BVAlgebra() = default;
  BVAlgebra(const CellComplex& X_, const LieAlgebraData& g_, int W_) : X(&X_), g(&g_), W(W_) {
    A_id.assign(X->num_cells() * g->dim, -1);
    B_id.assign(X->num_cells() * g->dim, -1);
    for (int e = 0; e < X->num_cells(); ++e) {
      int k = X->cell(e).dim;
      for (int a = 0; a < g->dim; ++a) {
        A_id[e * g->dim + a] = vt.add("A(" + X->cell(e).id + "," + std::to_string(a) + ")", 1 - k);
        B_id[e * g->dim + a] = vt.add("B(" + X->cell(e).id + "," + std::to_string(a) + ")", k - 2);
      }
      pair_cells.push_back(e);
    }
  }

  FieldPoly zero() const { return FieldPoly(vt, W); }
  FieldPoly cnst(Q v) const { return FieldPoly::constant(vt, HPoly(std::move(v)), W); }
  FieldPoly var(int id) const { return FieldPoly::variable(vt, id, W); }
  FieldPoly A(int cell, int a) const { return var(A_id[cell * g->dim + a]); }
  FieldPoly B(int cell, int a) const { return var(B_id[cell * g->dim + a]); }

  GPoly A_vec(int cell) const {
    GPoly v;
    for (int a = 0; a < g->dim; ++a) v.push_back(A(cell, a));
    return v;
  }
  GPoly zero_vec() const { return GPoly(g->dim, zero()); }

  // Lie bracket of g-valued polynomials: [x ox P, y ox Q] = [x,y] ox P Q.
  GPoly bracket_g(const GPoly& x, const GPoly& y) const {
    GPoly out = zero_vec();
    for (int a = 0; a < g->dim; ++a)
      for (int b = 0; b < g->dim; ++b) {
        if (x[a].is_zero() || y[b].is_zero()) continue;
        FieldPoly prod = x[a] * y[b];
        for (int c = 0; c < g->dim; ++c)
          if (g->f[a][b][c] != 0) out[c] = out[c] + g->f[a][b][c] * prod;
      }
    return out;
  }

  // <B_e, Y> = sum_a B_{e,a} Y_a
  FieldPoly pair_B(int cell, const GPoly& Y) const {
    FieldPoly out = zero();
    for (int a = 0; a < g->dim; ++a) out = out + B(cell, a) * Y[a];
    return out;
  }

  // BV Laplacian: sum over pairs of (-1)^(dim e) d/dB d/dA
  FieldPoly laplacian(const FieldPoly& fp, const std::vector<int>* cells = nullptr) const {
    FieldPoly out = zero();
    const std::vector<int>& cs = cells ? *cells : pair_cells;
    for (int e : cs) {
      int k = X->cell(e).dim;
      Q w = (k % 2 == 0) ? Q(1) : Q(-1);
      for (int a = 0; a < g->dim; ++a) {
        FieldPoly t = fp.dleft(A_id[e * g->dim + a]).dleft(B_id[e * g->dim + a]);
        if (!t.is_zero()) out = out + w * t;
      }
    }
    return out;
  }

  // Odd Poisson bracket of homogeneous f, g (arbitrary sums handled by
  // splitting). Signs are the ones generated by Delta as a Leibniz defect:
  //   Delta(fg) = (Delta f) g + (-1)^|f| f (Delta g) + (-1)^|f| {f,g}.
  FieldPoly bracket(const FieldPoly& f, const FieldPoly& gp,
                    const std::vector<int>* cells = nullptr) const {
    // split f by internal degree parity; the defect formula needs |f|
    FieldPoly out = zero();
    std::map<int, FieldPoly> parts;
    for (auto& [m, c] : f.terms) {
      int d = f.internal_degree_of(m);
      auto it = parts.find(d & 1);
      if (it == parts.end()) {
        FieldPoly p = zero();
        p.terms[m] = c;
        parts.emplace(d & 1, std::move(p));
      } else
        it->second.terms[m] = c;
    }
    for (auto& [par, fp] : parts) {
      Q sgn = (par == 0) ? Q(1) : Q(-1);
      FieldPoly defect = laplacian(fp * gp, cells) - laplacian(fp, cells) * gp -
                         sgn * (fp * laplacian(gp, cells));
      out = out + sgn * defect;
    }
    return out;
  }

  // QME residual 1/2 {S,S} - i hbar Delta S = 1/2 {S,S} + h Delta S,
  // truncated to weight W_check.
  FieldPoly qme_residual(const FieldPoly& S, int W_check,
                         const std::vector<int>* cells = nullptr) const {
    FieldPoly r = Q(1, 2) * bracket(S, S, cells) + HPoly::h_pow(1) * laplacian(S, cells);
    FieldPoly out = zero();
    for (auto& [m, c] : r.terms)
      if ((int)m.size() <= W_check) out.add_term(m, c);
    return out;
  }
};

// ---------------------------------------------------------------------------
// Unimodular L-infinity structures extracted from BF_infty actions
// ---------------------------------------------------------------------------

// Taylor data of S = <B, l(A)> - i hbar q(A): we keep the generating
// components ell_{e,a}(A) (coefficient of B_{e,a}) and q(A) (the h-linear
// B-free part). The homotopy Jacobi and unimodularity relations are checked
// in the superfield form.
struct ULooStructure {
  const BVAlgebra* F = nullptr;
  std::vector<FieldPoly> ell;  // [cell*dim+a], polynomial in A only
  FieldPoly q;                 // coefficient of h = -i hbar, polynomial in A only
};

inline bool is_A_only(const BVAlgebra& F, const FieldPoly& p) {
  for (auto& [m, c] : p.terms)
    for (int id : m)
      for (int bid : F.B_id)
        if (id == bid) return false;
  return true;
}

// Splits a BF_infty-ansatz action; throws when a term quadratic or higher in
// B is present.
inline ULooStructure extract_uloo(const BVAlgebra& F, const FieldPoly& S) {
  ULooStructure u;
  u.F = &F;
  u.ell.assign(F.A_id.size(), F.zero());
  u.q = F.zero();
  std::set<int> bset(F.B_id.begin(), F.B_id.end());
  for (auto& [m, c] : S.terms) {
    int bcount = 0;
    int bvar = -1;
    for (int id : m)
      if (bset.count(id)) {
        ++bcount;
        bvar = id;
      }
    if (bcount > 1) throw std::invalid_argument("extract_uloo: term quadratic in B");
    if (bcount == 1) {
      // S-term = coeff * (A-part with B inserted); strip B with its Koszul sign
      FieldPoly t = F.zero();
      t.terms[m] = c;
      FieldPoly stripped = t.dleft(bvar);
      // locate (cell, a) of this B variable
      int pos = -1;
      for (std::size_t i = 0; i < F.B_id.size(); ++i)
        if (F.B_id[i] == bvar) pos = (int)i;
      for (auto& [m2, c2] : stripped.terms) u.ell[pos].add_term(m2, c2);
    } else {
      // B-free: must be h-linear (the -i hbar q part) or absent
      for (auto& [k, v] : c.c) {
        if (k == 1) {
          FieldPoly t = F.zero();
          t.terms[m] = HPoly(v);
          u.q = u.q + t;
        } else if (v != 0) {
          throw std::invalid_argument("extract_uloo: B-free term not linear in h");
        }
      }
    }
  }
  return u;
}

// Rebuild the action from Taylor data (round trip used by the relation
// checker as an independent path).
inline FieldPoly rebuild_action(const ULooStructure& u) {
  const BVAlgebra& F = *u.F;
  FieldPoly S = F.zero();
  for (std::size_t i = 0; i < u.ell.size(); ++i) {
    if (u.ell[i].is_zero()) continue;
    FieldPoly b = FieldPoly::variable(F.vt, F.B_id[i], F.W);
    S = S + b * u.ell[i];
  }
  S = S + HPoly::h_pow(1) * u.q;
  return S;
}

// Homotopy Jacobi identities in superfield form: the odd vector field
// Q = <ell(A), d/dA> squares to zero, i.e. D_ell(ell) = 0 where
// (D_Y F)(A) = sum_{e,a} (dF/dA_{e,a}) * Y_{e,a} (left derivative, then
// right multiplication -- the ordering that makes D_Y F the derivation).
inline bool check_jacobi_relations(const ULooStructure& u, int W, std::string* why = nullptr) {
  const BVAlgebra& F = *u.F;
  for (std::size_t i = 0; i < u.ell.size(); ++i) {
    FieldPoly acc = F.zero();
    for (std::size_t j = 0; j < u.ell.size(); ++j) {
      if (u.ell[j].is_zero()) continue;
      FieldPoly d = u.ell[i].dleft(F.A_id[j]);
      if (!d.is_zero()) acc = acc + d * u.ell[j];
    }
    for (auto& [m, c] : acc.terms)
      if ((int)m.size() <= W && !c.is_zero()) {
        if (why)
          *why = "homotopy Jacobi fails in component " + std::to_string(i) + ": " + acc.str();
        return false;
      }
  }
  return true;
}

// Homotopy unimodularity: Str l(A, .) + D_ell q = 0, where the supertrace
// term is sum_{e,a} (-1)^{|A_{e,a}|} d ell_{e,a} / d A_{e,a}.
inline bool check_unimodularity_relations(const ULooStructure& u, int W,
                                          std::string* why = nullptr) {
  const BVAlgebra& F = *u.F;
  FieldPoly str = F.zero();
  for (std::size_t i = 0; i < u.ell.size(); ++i) {
    if (u.ell[i].is_zero()) continue;
    FieldPoly d = u.ell[i].dleft(F.A_id[i]);
    if (d.is_zero()) continue;
    int adeg = F.vt.degree(F.A_id[i]);
    str = str + ((adeg % 2 == 0) ? Q(1) : Q(-1)) * d;
  }
  FieldPoly dq = F.zero();
  for (std::size_t j = 0; j < u.ell.size(); ++j) {
    if (u.ell[j].is_zero()) continue;
    FieldPoly d = u.q.dleft(F.A_id[j]);
    if (!d.is_zero()) dq = dq + d * u.ell[j];
  }
  FieldPoly total = str + dq;
  for (auto& [m, c] : total.terms)
    if ((int)m.size() <= W && !c.is_zero()) {
      if (why) *why = "homotopy unimodularity fails: " + total.str();
      return false;
    }
  return true;
}

inline bool check_relations(const ULooStructure& u, int W, std::string* why = nullptr) {
  return check_jacobi_relations(u, W, why) && check_unimodularity_relations(u, W, why);
}

}  // namespace cellbf
