#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "cellbf/graded.hpp"
#include "cellbf/matrix.hpp"

namespace cellbf {

enum class CellKind { Simplicial, Cubical, Ball };

struct Cell {
  std::string id;
  int dim = 0;
};

// One codimension-1 incidence record cell > face. The same (cell,face) pair
// may appear several times (e.g. a circle with one vertex), each time with
// its own coefficient and parallel transport.
struct IncidenceRec {
  int cell = -1;
  int face = -1;
  int coeff = 0;
  int transport = -1;  // index into LocalSystem::transports, -1 = identity
};

class CellComplex {
 public:
  CellKind kind = CellKind::Ball;

  int add_cell(const std::string& id, int dim) {
    if (index_.count(id)) throw std::invalid_argument("duplicate cell id: " + id);
    index_[id] = (int)cells_.size();
    cells_.push_back({id, dim});
    return (int)cells_.size() - 1;
  }
  int add_incidence(int cell, int face, int coeff, int transport = -1) {
    incs_.push_back({cell, face, coeff, transport});
    return (int)incs_.size() - 1;
  }
  int add_incidence(const std::string& cell, const std::string& face, int coeff,
                    int transport = -1) {
    return add_incidence(cell_index(cell), cell_index(face), coeff, transport);
  }

  int cell_index(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw std::invalid_argument("unknown cell id: " + id);
    return it->second;
  }
  bool has_cell(const std::string& id) const { return index_.count(id) > 0; }

  const std::vector<Cell>& cells() const { return cells_; }
  const std::vector<IncidenceRec>& incidences() const { return incs_; }
  const Cell& cell(int i) const { return cells_[i]; }
  int num_cells() const { return (int)cells_.size(); }
  int top_dim() const {
    int n = 0;
    for (auto& c : cells_) n = std::max(n, c.dim);
    return n;
  }

  std::vector<int> cells_of_dim(int k) const {
    std::vector<int> out;
    for (int i = 0; i < (int)cells_.size(); ++i)
      if (cells_[i].dim == k) out.push_back(i);
    return out;
  }

  std::vector<int> records_of_cell(int c) const {
    std::vector<int> out;
    for (int r = 0; r < (int)incs_.size(); ++r)
      if (incs_[r].cell == c) out.push_back(r);
    return out;
  }
  std::vector<int> records_of_face(int f) const {
    std::vector<int> out;
    for (int r = 0; r < (int)incs_.size(); ++r)
      if (incs_[r].face == f) out.push_back(r);
    return out;
  }

  // All cells in the closure of `c` (including c), via incidence descent.
  std::set<int> closure(int c) const {
    std::set<int> out{c};
    std::vector<int> stack{c};
    while (!stack.empty()) {
      int cur = stack.back();
      stack.pop_back();
      for (auto& r : incs_)
        if (r.cell == cur && !out.count(r.face)) {
          out.insert(r.face);
          stack.push_back(r.face);
        }
    }
    return out;
  }

  // Closure of a set of cells.
  std::set<int> closure(const std::set<int>& cs) const {
    std::set<int> out;
    for (int c : cs) {
      auto cl = closure(c);
      out.insert(cl.begin(), cl.end());
    }
    return out;
  }

  bool is_subcomplex(const std::set<int>& cs) const { return closure(cs) == cs; }

  // Face poset relation e > f (strict, any codimension).
  bool poset_less(int f, int e) const {
    if (f == e) return false;
    auto cl = closure(e);
    return cl.count(f) > 0;
  }

  // Untwisted boundary matrix from k-cells to (k-1)-cells, entries summed
  // over incidence records.
  Mat boundary_matrix(int k) const {
    auto src = cells_of_dim(k), dst = cells_of_dim(k - 1);
    std::unordered_map<int, int> col, row;
    for (int j = 0; j < (int)src.size(); ++j) col[src[j]] = j;
    for (int i = 0; i < (int)dst.size(); ++i) row[dst[i]] = i;
    Mat m(dst.size(), src.size());
    for (auto& r : incs_) {
      auto itc = col.find(r.cell);
      auto itf = row.find(r.face);
      if (itc != col.end() && itf != row.end()) m(itf->second, itc->second) += r.coeff;
    }
    return m;
  }

 private:
  std::vector<Cell> cells_;
  std::vector<IncidenceRec> incs_;
  std::unordered_map<std::string, int> index_;
};

struct LocalSystem {
  int rank = 1;
  std::vector<Mat> transports;  // indexed by IncidenceRec::transport

  static LocalSystem trivial(int m = 1) {
    LocalSystem s;
    s.rank = m;
    return s;
  }
  int add_transport(Mat m) {
    transports.push_back(std::move(m));
    return (int)transports.size() - 1;
  }
  Mat of(const IncidenceRec& r) const {
    if (r.transport < 0) return Mat::identity(rank);
    return transports[r.transport];
  }
};

// Transport from the fiber over g up to the fiber over e, composed along any
// descending path of incidence records; in a functorial system the result is
// path-independent. Identity when e == g.
inline std::optional<Mat> derived_transport(const CellComplex& X, const LocalSystem& E, int e,
                                            int g) {
  if (e == g) return Mat::identity(E.rank);
  for (auto& r : X.incidences()) {
    if (r.cell != e) continue;
    auto rest = derived_transport(X, E, r.face, g);
    if (rest) return E.of(r) * (*rest);
  }
  return std::nullopt;
}

struct ValidationReport {
  bool ok = true;
  std::vector<std::string> issues;
  void fail(const std::string& msg) {
    ok = false;
    issues.push_back(msg);
  }
};

inline ValidationReport validate(const CellComplex& X, const LocalSystem* E = nullptr) {
  ValidationReport rep;
  // dimensions of faces drop by exactly one on records
  for (auto& r : X.incidences()) {
    if (X.cell(r.face).dim != X.cell(r.cell).dim - 1)
      rep.fail("incidence " + X.cell(r.cell).id + " > " + X.cell(r.face).id +
               " is not codimension 1");
    if (X.kind == CellKind::Ball && r.coeff != 1 && r.coeff != -1)
      rep.fail("ball complex has incidence coefficient " + std::to_string(r.coeff) + " on " +
               X.cell(r.cell).id + " > " + X.cell(r.face).id);
  }
  // del^2 = 0, untwisted
  for (int k = 2; k <= X.top_dim(); ++k) {
    Mat dd = X.boundary_matrix(k - 1) * X.boundary_matrix(k);
    if (!dd.is_zero()) {
      auto src = X.cells_of_dim(k);
      for (std::size_t j = 0; j < dd.cols(); ++j)
        for (std::size_t i = 0; i < dd.rows(); ++i)
          if (dd(i, j) != 0) {
            rep.fail("del^2 != 0 at cell " + X.cell(src[j]).id);
            goto next_k;
          }
    next_k:;
    }
  }
  if (E) {
    for (auto& r : X.incidences()) {
      Mat t = E->of(r);
      if (t.rows() != (std::size_t)E->rank || t.cols() != (std::size_t)E->rank) {
        rep.fail("transport on " + X.cell(r.cell).id + " > " + X.cell(r.face).id +
                 " has wrong shape");
        continue;
      }
      Q d = t.det();
      if (d != 1 && d != -1)
        rep.fail("transport on " + X.cell(r.cell).id + " > " + X.cell(r.face).id +
                 " has det != +-1");
    }
    // functoriality: all two-step descents between a fixed pair of cells
    // compose to the same transport
    for (int e = 0; e < X.num_cells(); ++e) {
      std::map<int, std::vector<Mat>> paths;  // grandface -> composed transports
      for (auto& r1 : X.incidences()) {
        if (r1.cell != e) continue;
        for (auto& r2 : X.incidences()) {
          if (r2.cell != r1.face) continue;
          paths[r2.face].push_back(E->of(r1) * E->of(r2));
        }
      }
      for (auto& [g, mats] : paths)
        for (std::size_t i = 1; i < mats.size(); ++i)
          if (!(mats[i] == mats[0])) {
            rep.fail("functoriality fails on " + X.cell(e).id + " > ... > " + X.cell(g).id);
            break;
          }
    }
    // twisted del^2 = 0 record-wise
    for (int e = 0; e < X.num_cells(); ++e) {
      std::map<int, Mat> acc;
      for (auto& r1 : X.incidences()) {
        if (r1.cell != e) continue;
        for (auto& r2 : X.incidences()) {
          if (r2.cell != r1.face) continue;
          Mat term = Q(r1.coeff * r2.coeff) * (E->of(r1) * E->of(r2));
          auto it = acc.find(r2.face);
          if (it == acc.end())
            acc[r2.face] = term;
          else
            it->second = it->second + term;
        }
      }
      for (auto& [g, m] : acc)
        if (!m.is_zero())
          rep.fail("twisted del^2 != 0 at cell " + X.cell(e).id + " over face " + X.cell(g).id);
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Cochain spaces and twisted coboundary
// ---------------------------------------------------------------------------

// Basis bookkeeping for C^bullet(X, E) relative to a subcomplex (excluded
// cells). Basis vectors are (cell, fiber coordinate), cells in index order.
struct CochainSpace {
  const CellComplex* X = nullptr;
  int rank = 1;
  std::set<int> excluded;
  // per degree: list of cell indices
  std::map<int, std::vector<int>> cells_by_deg;
  std::map<int, std::unordered_map<int, int>> pos;  // degree -> cell -> slot

  CochainSpace() = default;
  CochainSpace(const CellComplex& X_, int rank_, std::set<int> excl = {})
      : X(&X_), rank(rank_), excluded(std::move(excl)) {
    for (int i = 0; i < X->num_cells(); ++i) {
      if (excluded.count(i)) continue;
      int k = X->cell(i).dim;
      pos[k][i] = (int)cells_by_deg[k].size();
      cells_by_deg[k].push_back(i);
    }
  }

  GradedVS space() const {
    GradedVS v;
    for (auto& [k, cs] : cells_by_deg) v.dims[k] = cs.size() * rank;
    return v;
  }
  bool contains(int cell) const {
    int k = X->cell(cell).dim;
    auto it = pos.find(k);
    return it != pos.end() && it->second.count(cell);
  }
  int slot(int cell) const {  // offset within its degree
    int k = X->cell(cell).dim;
    return pos.at(k).at(cell) * rank;
  }
  int count(int k) const {
    auto it = cells_by_deg.find(k);
    return it == cells_by_deg.end() ? 0 : (int)it->second.size();
  }
};

// Twisted coboundary on a chosen cochain basis:
// (d a)_e = sum over records (e > f) of coeff * T * a_f.
inline GradedComplex cochain_complex_on(const CochainSpace& cs, const LocalSystem& E) {
  const CellComplex& X = *cs.X;
  GradedComplex C(cs.space());
  std::map<int, Mat> blocks;
  for (auto& [k, cells] : cs.cells_by_deg) {
    int rows = cs.count(k + 1) * E.rank;
    if (rows == 0) continue;
    blocks[k] = Mat::zero(rows, cells.size() * E.rank);
  }
  for (auto& r : X.incidences()) {
    if (!cs.contains(r.cell) || !cs.contains(r.face)) continue;
    int k = X.cell(r.face).dim;
    Mat t = E.of(r);
    Mat& b = blocks.at(k);
    int i0 = cs.slot(r.cell), j0 = cs.slot(r.face);
    for (int i = 0; i < E.rank; ++i)
      for (int j = 0; j < E.rank; ++j) b(i0 + i, j0 + j) += Q(r.coeff) * t((std::size_t)i, j);
  }
  for (auto& [k, m] : blocks) C.d.set_block(k, std::move(m));
  return C;
}

// Relative twisted cochain complex C(X, rel); rel is closed to a subcomplex.
inline GradedComplex cochain_complex(const CellComplex& X, const LocalSystem& E,
                                     const std::set<int>& rel = {}) {
  CochainSpace cs(X, E.rank, X.closure(rel));
  return cochain_complex_on(cs, E);
}

// Cochain complex of the subcomplex spanned by `kept`.
inline GradedComplex subcomplex_cochain(const CellComplex& X, const LocalSystem& E,
                                        const std::set<int>& kept) {
  std::set<int> excl;
  for (int c = 0; c < X.num_cells(); ++c)
    if (!kept.count(c)) excl.insert(c);
  CochainSpace cs(X, E.rank, excl);
  return cochain_complex_on(cs, E);
}

// ---------------------------------------------------------------------------
// Barycentric subdivision (nerve of the face poset)
// ---------------------------------------------------------------------------

inline std::pair<CellComplex, LocalSystem> barycentric_subdivide(const CellComplex& X,
                                                                 const LocalSystem& E) {
  CellComplex B;
  B.kind = CellKind::Simplicial;
  LocalSystem EB;
  EB.rank = E.rank;

  // chains in the face poset, k-cells are strictly increasing chains of k+1 cells
  std::vector<std::vector<int>> chains;
  std::map<std::vector<int>, int> chain_idx;
  auto chain_id = [&](const std::vector<int>& ch) {
    std::string s = "b";
    for (int c : ch) s += "." + X.cell(c).id;
    return s;
  };
  // enumerate chains by extension
  std::vector<std::vector<int>> frontier;
  for (int i = 0; i < X.num_cells(); ++i) frontier.push_back({i});
  while (!frontier.empty()) {
    std::vector<std::vector<int>> next;
    for (auto& ch : frontier) {
      if (!chain_idx.count(ch)) {
        chain_idx[ch] = B.add_cell(chain_id(ch), (int)ch.size() - 1);
        chains.push_back(ch);
        for (int j = 0; j < X.num_cells(); ++j)
          if (X.cell(j).dim > X.cell(ch.back()).dim && X.poset_less(ch.back(), j)) {
            auto ext = ch;
            ext.push_back(j);
            next.push_back(ext);
          }
      }
    }
    frontier = std::move(next);
  }
  // boundary: drop one entry with sign (-1)^i; transports relative to the top
  // cell of the chain
  for (auto& ch : chains) {
    if (ch.size() < 2) continue;
    int me = chain_idx.at(ch);
    for (std::size_t i = 0; i < ch.size(); ++i) {
      auto face = ch;
      face.erase(face.begin() + i);
      int coeff = (i % 2 == 0) ? 1 : -1;
      int tr = -1;
      if (i + 1 == ch.size()) {
        // top cell drops from ch[i] to ch[i-1]
        auto t = derived_transport(X, E, ch[i], ch[i - 1]);
        if (!t) throw std::logic_error("barycentric_subdivide: missing transport path");
        tr = EB.add_transport(*t);
      }
      B.add_incidence(me, chain_idx.at(face), coeff, tr);
    }
  }
  return {B, EB};
}

// ---------------------------------------------------------------------------
// Cobordisms and duals
// ---------------------------------------------------------------------------

struct Cobordism {
  CellComplex X;
  LocalSystem E;
  std::set<int> in_cells, out_cells;
  int n = 0;  // ambient dimension

  std::set<int> boundary_cells() const {
    std::set<int> b = in_cells;
    b.insert(out_cells.begin(), out_cells.end());
    return b;
  }
  bool is_bulk(int c) const { return !out_cells.count(c); }  // bulk = X - X_out here
};

// The unique bulk coboundary of an out-cell under the product-type
// assumption; returns record index, or -1 with count reporting.
inline int product_type_coboundary(const Cobordism& cob, int out_cell, int* count = nullptr) {
  int found = -1, cnt = 0;
  for (int r = 0; r < (int)cob.X.incidences().size(); ++r) {
    auto& rec = cob.X.incidences()[r];
    if (rec.face != out_cell) continue;
    if (cob.boundary_cells().count(rec.cell)) continue;  // only cells of X - X_bdry count
    ++cnt;
    found = r;
  }
  if (count) *count = cnt;
  return cnt == 1 ? found : -1;
}

inline ValidationReport validate_cobordism(const Cobordism& cob) {
  ValidationReport rep = validate(cob.X, &cob.E);
  for (int c : cob.in_cells)
    if (cob.out_cells.count(c)) rep.fail("cell " + cob.X.cell(c).id + " is both in and out");
  if (!cob.X.is_subcomplex(cob.in_cells)) rep.fail("in_cells is not a subcomplex");
  if (!cob.X.is_subcomplex(cob.out_cells)) rep.fail("out_cells is not a subcomplex");
  for (int c : cob.out_cells) {
    int cnt = 0;
    product_type_coboundary(cob, c, &cnt);
    if (cnt != 1)
      rep.fail("product type fails at out-cell " + cob.X.cell(c).id + " (cobounded by " +
               std::to_string(cnt) + " bulk cells)");
  }
  return rep;
}

// Module sign conventions, fixed once. pair_sign(k) weights the bulk pairing
// of a k-cochain of X against the matching dual cochain; the recursion
// pair_sign(k+1) = (-1)^k pair_sign(k) makes the cellular Stokes formula hold
// exactly. kappa_d_sign(k) is the incidence coefficient of kappa_d(e) in the
// boundary of kappa(e) for an in-cell e of dimension k.
inline int pair_sign(int k) { return (k % 4 == 2 || k % 4 == 3) ? -1 : 1; }
inline int kappa_d_sign(int k) { return k % 2 == 0 ? 1 : -1; }
inline int pair_sign_out(int k) { return pair_sign(k + 1); }
inline int pair_sign_in(int k) { return pair_sign(k); }

// Dual complex of a cobordism: kappa(e) for e in X - X_out, kappa_d(e) for e
// in X_in; incidences are transposed with dual-system transports. The dual of
// X_out (not itself part of the dual complex) is built alongside, as the
// target of the out-boundary pullback.
struct DualComplex {
  CellComplex dual;
  LocalSystem dual_sys;
  CellComplex out_dual;  // (X_out)^vee
  LocalSystem out_dual_sys;
  std::vector<int> kappa;      // X cell -> dual cell index (-1 if removed)
  std::vector<int> kappa_d;    // X cell -> dual cell index of kappa_d (in-cells only)
  std::vector<int> kappa_out;  // X cell -> out_dual index (out-cells only)
  std::vector<int> kappa_inv;  // dual cell -> X cell (via kappa or kappa_d)
  std::vector<bool> is_kappa_d;
  int n = 0;

  std::set<int> in_dual_cells() const {  // kappa_d cells = (X_in)^vee inside dual
    std::set<int> out;
    for (int i = 0; i < (int)is_kappa_d.size(); ++i)
      if (is_kappa_d[i]) out.insert(i);
    return out;
  }
};

inline DualComplex dual_cobordism(const Cobordism& cob) {
  auto rep = validate_cobordism(cob);
  if (!rep.ok) throw std::invalid_argument("dual_cobordism: invalid cobordism: " + rep.issues[0]);
  const CellComplex& X = cob.X;
  const LocalSystem& E = cob.E;
  DualComplex D;
  D.n = cob.n;
  D.dual.kind = CellKind::Ball;
  D.out_dual.kind = CellKind::Ball;
  D.dual_sys.rank = E.rank;
  D.out_dual_sys.rank = E.rank;
  D.kappa.assign(X.num_cells(), -1);
  D.kappa_d.assign(X.num_cells(), -1);
  D.kappa_out.assign(X.num_cells(), -1);

  for (int c = 0; c < X.num_cells(); ++c) {
    if (!cob.out_cells.count(c)) {
      int idx = D.dual.add_cell("k." + X.cell(c).id, cob.n - X.cell(c).dim);
      D.kappa[c] = idx;
      D.kappa_inv.push_back(c);
      D.is_kappa_d.push_back(false);
    }
  }
  for (int c : cob.in_cells) {
    int idx = D.dual.add_cell("kd." + X.cell(c).id, cob.n - X.cell(c).dim - 1);
    D.kappa_d[c] = idx;
    D.kappa_inv.push_back(c);
    D.is_kappa_d.push_back(true);
  }
  for (int c : cob.out_cells) {
    int idx = D.out_dual.add_cell("ko." + X.cell(c).id, cob.n - X.cell(c).dim - 1);
    D.kappa_out[c] = idx;
  }

  // bulk-bulk: record (f > e) in X gives (kappa(e) > kappa(f)) with the same
  // coefficient and transposed transport matrix
  for (auto& r : X.incidences()) {
    if (cob.out_cells.count(r.cell) || cob.out_cells.count(r.face)) continue;
    int tr = D.dual_sys.add_transport(E.of(r).transpose());
    D.dual.add_incidence(D.kappa[r.face], D.kappa[r.cell], r.coeff, tr);
  }
  // collar: kappa(e) > kappa_d(e) for in-cells, identity transport
  for (int c : cob.in_cells)
    D.dual.add_incidence(D.kappa[c], D.kappa_d[c], kappa_d_sign(X.cell(c).dim), -1);
  // kappa_d - kappa_d: transposed incidences of X_in
  for (auto& r : X.incidences()) {
    if (!cob.in_cells.count(r.cell) || !cob.in_cells.count(r.face)) continue;
    int tr = D.dual_sys.add_transport(E.of(r).transpose());
    D.dual.add_incidence(D.kappa_d[r.face], D.kappa_d[r.cell], r.coeff, tr);
  }
  // (X_out)^vee: transposed incidences of X_out
  for (auto& r : X.incidences()) {
    if (!cob.out_cells.count(r.cell) || !cob.out_cells.count(r.face)) continue;
    int tr = D.out_dual_sys.add_transport(E.of(r).transpose());
    D.out_dual.add_incidence(D.kappa_out[r.face], D.kappa_out[r.cell], r.coeff, tr);
  }
  return D;
}

// Closed-manifold dual: all boundary empty.
inline DualComplex dual_closed(const CellComplex& X, const LocalSystem& E, int n) {
  Cobordism cob;
  cob.X = X;
  cob.E = E;
  cob.n = n;
  return dual_cobordism(cob);
}

// ---------------------------------------------------------------------------
// Boundary pullbacks and the cellular Stokes formula
// ---------------------------------------------------------------------------

struct BoundaryMaps {
  // restriction of X-cochains to boundary subcomplexes
  GradedMap iota_out, iota_in;  // C(X) -> C(X_out), C(X) -> C(X_in)
  // pullbacks of dual-complex cochains to the boundary duals
  GradedMap iota_vee_in;   // C(X^vee) -> C((X_in)^vee), plain restriction to kappa_d cells
  GradedMap iota_vee_out;  // C(X^vee) -> C((X_out)^vee), transport across the collar
  // degree +1 connecting maps
  GradedMap phi;      // C(X_out) -> C(X, X_out)
  GradedMap phi_vee;  // C((X_in)^vee) -> C(X^vee, X^vee_in)
  // cochain spaces used to build them
  CochainSpace cs_X, cs_Xrel, cs_out, cs_in, cs_D, cs_Drel, cs_outdual, cs_indual;
};

inline void add_block_entry(std::map<int, Mat>& blocks, const GradedVS& tgt, const GradedVS& src,
                            int shift, int k, int i0, int j0, const Mat& t, const Q& c) {
  auto it = blocks.find(k);
  if (it == blocks.end())
    it = blocks.emplace(k, Mat::zero(tgt.dim(k + shift), src.dim(k))).first;
  for (std::size_t i = 0; i < t.rows(); ++i)
    for (std::size_t j = 0; j < t.cols(); ++j)
      if (t(i, j) != 0) it->second(i0 + i, j0 + j) += c * t(i, j);
}

inline GradedMap assemble(const GradedVS& src, const GradedVS& tgt, int shift,
                          std::map<int, Mat>& blocks) {
  GradedMap m(src, tgt, shift);
  for (auto& [k, b] : blocks) m.set_block(k, std::move(b));
  return m;
}

inline BoundaryMaps boundary_pullbacks(const Cobordism& cob, const DualComplex& D) {
  const CellComplex& X = cob.X;
  const LocalSystem& E = cob.E;
  int m = E.rank;
  BoundaryMaps B;
  B.cs_X = CochainSpace(X, m);
  B.cs_Xrel = CochainSpace(X, m, cob.out_cells);
  B.cs_out = CochainSpace(X, m, [&] {
    std::set<int> excl;
    for (int c = 0; c < X.num_cells(); ++c)
      if (!cob.out_cells.count(c)) excl.insert(c);
    return excl;
  }());
  B.cs_in = CochainSpace(X, m, [&] {
    std::set<int> excl;
    for (int c = 0; c < X.num_cells(); ++c)
      if (!cob.in_cells.count(c)) excl.insert(c);
    return excl;
  }());
  B.cs_D = CochainSpace(D.dual, m);
  B.cs_Drel = CochainSpace(D.dual, m, D.in_dual_cells());
  B.cs_outdual = CochainSpace(D.out_dual, m);
  B.cs_indual = CochainSpace(D.dual, m, [&] {
    std::set<int> excl;
    auto keep = D.in_dual_cells();
    for (int c = 0; c < D.dual.num_cells(); ++c)
      if (!keep.count(c)) excl.insert(c);
    return excl;
  }());

  Mat id = Mat::identity(m);

  // iota_out / iota_in: 0/1 selection
  {
    std::map<int, Mat> bo, bi;
    for (int c : cob.out_cells)
      add_block_entry(bo, B.cs_out.space(), B.cs_X.space(), 0, X.cell(c).dim, B.cs_out.slot(c),
                      B.cs_X.slot(c), id, Q(1));
    for (int c : cob.in_cells)
      add_block_entry(bi, B.cs_in.space(), B.cs_X.space(), 0, X.cell(c).dim, B.cs_in.slot(c),
                      B.cs_X.slot(c), id, Q(1));
    B.iota_out = assemble(B.cs_X.space(), B.cs_out.space(), 0, bo);
    B.iota_in = assemble(B.cs_X.space(), B.cs_in.space(), 0, bi);
  }

  // iota_vee_in: selection of kappa_d components
  {
    std::map<int, Mat> b;
    for (int c : cob.in_cells) {
      int dc = D.kappa_d[c];
      add_block_entry(b, B.cs_indual.space(), B.cs_D.space(), 0, D.dual.cell(dc).dim,
                      B.cs_indual.slot(dc), B.cs_D.slot(dc), id, Q(1));
    }
    B.iota_vee_in = assemble(B.cs_D.space(), B.cs_indual.space(), 0, b);
  }

  // iota_vee_out: for each out-cell e with unique bulk coboundary f, the
  // kappa(f) component lands on kappa_out(e), transported across the collar
  // and weighted by the incidence coefficient (absorbed into the dual
  // orientation convention).
  {
    std::map<int, Mat> b;
    for (int c : cob.out_cells) {
      int rec = product_type_coboundary(cob, c);
      if (rec < 0) throw std::logic_error("iota_vee_out: product type violated");
      auto& r = X.incidences()[rec];
      int df = D.kappa[r.cell];
      int tgt = D.kappa_out[c];
      add_block_entry(b, B.cs_outdual.space(), B.cs_D.space(), 0, D.dual.cell(df).dim,
                      B.cs_outdual.slot(tgt), B.cs_D.slot(df), E.of(r).transpose(), Q(r.coeff));
    }
    B.iota_vee_out = assemble(B.cs_D.space(), B.cs_outdual.space(), 0, b);
  }

  // phi: a_out -> d(extension by zero) - extension(d a_out), i.e. the part of
  // the coboundary escaping into bulk cells
  {
    std::map<int, Mat> b;
    for (auto& r : X.incidences()) {
      if (!cob.out_cells.count(r.face) || cob.out_cells.count(r.cell)) continue;
      add_block_entry(b, B.cs_Xrel.space(), B.cs_out.space(), +1, X.cell(r.face).dim,
                      B.cs_Xrel.slot(r.cell), B.cs_out.slot(r.face), E.of(r), Q(r.coeff));
    }
    B.phi = assemble(B.cs_out.space(), B.cs_Xrel.space(), +1, b);
  }

  // phi_vee: the part of the dual coboundary escaping kappa_d cells, i.e. the
  // collar incidences kappa(e) > kappa_d(e)
  {
    std::map<int, Mat> b;
    for (int c : cob.in_cells) {
      int src = D.kappa_d[c], tgt = D.kappa[c];
      add_block_entry(b, B.cs_Drel.space(), B.cs_indual.space(), +1, D.dual.cell(src).dim,
                      B.cs_Drel.slot(tgt), B.cs_indual.slot(src), id,
                      Q(kappa_d_sign(X.cell(c).dim)));
    }
    B.phi_vee = assemble(B.cs_indual.space(), B.cs_Drel.space(), +1, b);
  }
  return B;
}

// Bulk pairing <b, a> of b in C^(n-k)(X^vee) against a in C^k(X): the sum
// over bulk cells e of pair_sign(dim e) * b_{kappa(e)} . a_e.  Returns the
// matrix of the pairing as a map pairing(k) : C^k(X) x C^(n-k)(X^vee) -> Q,
// encoded as blocks P_k with (P_k)_{IJ} = <dual basis J, basis I>.
struct CobordismPairing {
  const Cobordism* cob = nullptr;
  const DualComplex* D = nullptr;
  CochainSpace cs_X, cs_D;

  CobordismPairing(const Cobordism& c, const DualComplex& d)
      : cob(&c), D(&d), cs_X(c.X, c.E.rank), cs_D(d.dual, c.E.rank) {}

  // <b, a> for full cochain vectors (maps per degree).
  Q eval(const std::map<int, std::vector<Q>>& b, const std::map<int, std::vector<Q>>& a) const {
    Q out(0);
    int m = cob->E.rank;
    for (int e = 0; e < cob->X.num_cells(); ++e) {
      if (cob->out_cells.count(e)) continue;
      int k = cob->X.cell(e).dim;
      int dk = cob->n - k;
      auto ita = a.find(k);
      auto itb = b.find(dk);
      if (ita == a.end() || itb == b.end()) continue;
      int sa = cs_X.slot(e), sb = cs_D.slot(D->kappa[e]);
      Q acc(0);
      for (int i = 0; i < m; ++i) acc += itb->second[sb + i] * ita->second[sa + i];
      out += Q(pair_sign(k)) * acc;
    }
    return out;
  }
};

// Boundary pairings <,>_out and <,>_in on the boundary complexes, with the
// sign tables induced by the Stokes identity.
inline Q boundary_pairing(const Cobordism& cob, const DualComplex& D, bool out_side,
                          const std::map<int, std::vector<Q>>& b,
                          const std::map<int, std::vector<Q>>& a, const BoundaryMaps& B) {
  Q outv(0);
  int m = cob.E.rank;
  const auto& cells = out_side ? cob.out_cells : cob.in_cells;
  for (int e : cells) {
    int k = cob.X.cell(e).dim;
    int dk = cob.n - 1 - k;
    auto ita = a.find(k);
    auto itb = b.find(dk);
    if (ita == a.end() || itb == b.end()) continue;
    int sa = out_side ? B.cs_out.slot(e) : B.cs_in.slot(e);
    int sb = out_side ? B.cs_outdual.slot(D.kappa_out[e]) : B.cs_indual.slot(D.kappa_d[e]);
    Q acc(0);
    for (int i = 0; i < m; ++i) acc += itb->second[sb + i] * ita->second[sa + i];
    outv += Q(out_side ? pair_sign_out(k) : pair_sign_in(k)) * acc;
  }
  return outv;
}

// Exact verification of the cellular Stokes formula on all basis pairs:
//   (-1)^(n + deg b) <db, a> + <b, da> = <b,a>_out - <b,a>_in
inline bool stokes_check(const Cobordism& cob, const DualComplex& D, std::string* witness = nullptr) {
  BoundaryMaps B = boundary_pullbacks(cob, D);
  CobordismPairing P(cob, D);
  GradedComplex CX = cochain_complex(cob.X, cob.E);
  LocalSystem ED = D.dual_sys;
  GradedComplex CD = cochain_complex(D.dual, ED);
  int n = cob.n;
  int m = cob.E.rank;

  auto basis_vec = [&](const CochainSpace& cs, int k, int idx) {
    std::map<int, std::vector<Q>> v;
    v[k] = std::vector<Q>(cs.count(k) * m, Q(0));
    v[k][idx] = 1;
    return v;
  };
  auto apply_d = [&](const GradedComplex& C, const std::map<int, std::vector<Q>>& v, int k) {
    std::map<int, std::vector<Q>> out;
    auto it = v.find(k);
    if (it == v.end()) return out;
    Mat blk = C.d.block(k);
    if (blk.rows() == 0) return out;
    out[k + 1] = blk.apply(it->second);
    return out;
  };
  auto apply_map = [&](const GradedMap& f, const std::map<int, std::vector<Q>>& v, int k) {
    std::map<int, std::vector<Q>> out;
    auto it = v.find(k);
    if (it == v.end()) return out;
    Mat blk = f.block(k);
    if (blk.rows() == 0) return out;
    out[k + f.shift] = blk.apply(it->second);
    return out;
  };

  for (int k = 0; k <= n; ++k) {
    int degb = n - k - 1;
    int na = B.cs_X.count(k) * m;
    int nb = B.cs_D.count(degb) * m;
    for (int ia = 0; ia < na; ++ia)
      for (int ib = 0; ib < nb; ++ib) {
        auto a = basis_vec(B.cs_X, k, ia);
        auto b = basis_vec(B.cs_D, degb, ib);
        auto da = apply_d(CX, a, k);
        auto db = apply_d(CD, b, degb);
        Q lhs = Q((n + degb) % 2 == 0 ? 1 : -1) * P.eval(db, a) + P.eval(b, da);
        auto b_out = apply_map(B.iota_vee_out, b, degb);
        auto b_in = apply_map(B.iota_vee_in, b, degb);
        auto a_out = apply_map(B.iota_out, a, k);
        auto a_in = apply_map(B.iota_in, a, k);
        Q rhs = boundary_pairing(cob, D, true, b_out, a_out, B) -
                boundary_pairing(cob, D, false, b_in, a_in, B);
        if (lhs != rhs) {
          if (witness)
            *witness = "Stokes fails at degree k=" + std::to_string(k) + " basis pair (" +
                       std::to_string(ia) + "," + std::to_string(ib) + ")";
          return false;
        }
      }
  }
  return true;
}

}  // namespace cellbf
