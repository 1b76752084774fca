#pragma once

// Shared example complexes for the test suites.

#include <random>

#include "cellbf/complex.hpp"

namespace testutil {

using namespace cellbf;

inline CellComplex point() {
  CellComplex X;
  X.add_cell("p", 0);
  return X;
}

// [0] -- [01] -- [1], del [01] = [1] - [0]
inline CellComplex interval() {
  CellComplex X;
  X.add_cell("v0", 0);
  X.add_cell("v1", 0);
  X.add_cell("e01", 1);
  X.add_incidence("e01", "v1", 1);
  X.add_incidence("e01", "v0", -1);
  return X;
}

// interval subdivided into n edges: v0 .. vn, ei = [v_{i-1}, v_i]
inline CellComplex path(int n) {
  CellComplex X;
  for (int i = 0; i <= n; ++i) X.add_cell("v" + std::to_string(i), 0);
  for (int i = 1; i <= n; ++i) {
    X.add_cell("e" + std::to_string(i), 1);
    X.add_incidence("e" + std::to_string(i), "v" + std::to_string(i), 1);
    X.add_incidence("e" + std::to_string(i), "v" + std::to_string(i - 1), -1);
  }
  return X;
}

// one vertex, one edge; both ends of the edge hit the vertex
inline std::pair<CellComplex, LocalSystem> circle_one_cell(const Mat& h) {
  CellComplex X;
  X.add_cell("p", 0);
  X.add_cell("c", 1);
  LocalSystem E;
  E.rank = (int)h.rows();
  int th = E.add_transport(h);
  X.add_incidence("c", "p", 1, th);
  X.add_incidence("c", "p", -1);
  return {X, E};
}

// circle as a ball complex with n >= 2 edges; holonomy h sits on one record
inline std::pair<CellComplex, LocalSystem> circle(int n, const Mat& h) {
  CellComplex X;
  LocalSystem E;
  E.rank = (int)h.rows();
  for (int i = 0; i < n; ++i) X.add_cell("v" + std::to_string(i), 0);
  int th = E.add_transport(h);
  for (int i = 0; i < n; ++i) {
    X.add_cell("e" + std::to_string(i), 1);
    int a = i, b = (i + 1) % n;
    X.add_incidence("e" + std::to_string(i), "v" + std::to_string(b), 1, i == 0 ? th : -1);
    X.add_incidence("e" + std::to_string(i), "v" + std::to_string(a), -1);
  }
  return {X, E};
}

// boundary of the triangle (circle with 3 edges), trivial system rank m
inline CellComplex triangle_boundary() {
  CellComplex X;
  X.kind = CellKind::Simplicial;
  X.add_cell("v0", 0);
  X.add_cell("v1", 0);
  X.add_cell("v2", 0);
  auto edge = [&](const char* id, const char* a, const char* b) {
    X.add_cell(id, 1);
    X.add_incidence(id, b, 1);
    X.add_incidence(id, a, -1);
  };
  edge("e01", "v0", "v1");
  edge("e12", "v1", "v2");
  edge("e02", "v0", "v2");
  return X;
}

// full 2-simplex
inline CellComplex triangle() {
  CellComplex X = triangle_boundary();
  X.add_cell("t", 2);
  X.add_incidence("t", "e12", 1);
  X.add_incidence("t", "e02", -1);
  X.add_incidence("t", "e01", 1);
  return X;
}

// square 2-cell with 4 boundary edges (cyclic)
inline CellComplex square() {
  CellComplex X;
  X.kind = CellKind::Cubical;
  for (int i = 0; i < 4; ++i) X.add_cell("v" + std::to_string(i), 0);
  for (int i = 0; i < 4; ++i) {
    X.add_cell("e" + std::to_string(i), 1);
    X.add_incidence("e" + std::to_string(i), "v" + std::to_string((i + 1) % 4), 1);
    X.add_incidence("e" + std::to_string(i), "v" + std::to_string(i), -1);
  }
  X.add_cell("f", 2);
  for (int i = 0; i < 4; ++i) X.add_incidence("f", "e" + std::to_string(i), 1);
  return X;
}

// disk decomposed as a cone over an n-gon; boundary is the rim
inline CellComplex disk_cone(int ngon) {
  CellComplex X;
  X.add_cell("o", 0);
  for (int i = 0; i < ngon; ++i) X.add_cell("r" + std::to_string(i), 0);
  for (int i = 0; i < ngon; ++i) {
    X.add_cell("b" + std::to_string(i), 1);  // rim edge i -> i+1
    X.add_incidence("b" + std::to_string(i), "r" + std::to_string((i + 1) % ngon), 1);
    X.add_incidence("b" + std::to_string(i), "r" + std::to_string(i), -1);
    X.add_cell("s" + std::to_string(i), 1);  // spoke o -> rim i
    X.add_incidence("s" + std::to_string(i), "r" + std::to_string(i), 1);
    X.add_incidence("s" + std::to_string(i), "o", -1);
  }
  for (int i = 0; i < ngon; ++i) {
    // del t_i = b_i - s_{i+1} + s_i
    X.add_cell("t" + std::to_string(i), 2);
    X.add_incidence("t" + std::to_string(i), "b" + std::to_string(i), 1);
    X.add_incidence("t" + std::to_string(i), "s" + std::to_string((i + 1) % ngon), -1);
    X.add_incidence("t" + std::to_string(i), "s" + std::to_string(i), 1);
  }
  return X;
}

// cylinder over an n-gon circle: two rim circles joined by vertical edges
inline CellComplex cylinder(int n) {
  CellComplex X;
  auto edge = [&](const std::string& id, const std::string& a, const std::string& b) {
    X.add_cell(id, 1);
    X.add_incidence(id, b, 1);
    X.add_incidence(id, a, -1);
  };
  for (int i = 0; i < n; ++i) X.add_cell("a" + std::to_string(i), 0);
  for (int i = 0; i < n; ++i) X.add_cell("b" + std::to_string(i), 0);
  for (int i = 0; i < n; ++i)
    edge("x" + std::to_string(i), "a" + std::to_string(i), "a" + std::to_string((i + 1) % n));
  for (int i = 0; i < n; ++i)
    edge("y" + std::to_string(i), "b" + std::to_string(i), "b" + std::to_string((i + 1) % n));
  for (int i = 0; i < n; ++i)
    edge("v" + std::to_string(i), "a" + std::to_string(i), "b" + std::to_string(i));
  for (int i = 0; i < n; ++i) {
    // face F_i with del = y_i - x_i + v_i - v_{i+1}
    X.add_cell("F" + std::to_string(i), 2);
    X.add_incidence("F" + std::to_string(i), "y" + std::to_string(i), 1);
    X.add_incidence("F" + std::to_string(i), "x" + std::to_string(i), -1);
    X.add_incidence("F" + std::to_string(i), "v" + std::to_string(i), 1);
    X.add_incidence("F" + std::to_string(i), "v" + std::to_string((i + 1) % n), -1);
  }
  return X;
}

inline std::set<int> cells_by_prefix(const CellComplex& X, const std::string& prefix) {
  std::set<int> out;
  for (int i = 0; i < X.num_cells(); ++i)
    if (X.cell(i).id.rfind(prefix, 0) == 0) out.insert(i);
  return out;
}

inline Cobordism interval_cobordism(bool in0, bool out1, const Mat& hol_edge_v0) {
  Cobordism cob;
  cob.X = interval();
  cob.E.rank = (int)hol_edge_v0.rows();
  cob.n = 1;
  if (!(hol_edge_v0 == Mat::identity(cob.E.rank))) {
    // place a nontrivial transport on the record e01 > v0
    CellComplex X;
    X.add_cell("v0", 0);
    X.add_cell("v1", 0);
    X.add_cell("e01", 1);
    int t = cob.E.add_transport(hol_edge_v0);
    X.add_incidence("e01", "v1", 1);
    X.add_incidence("e01", "v0", -1, t);
    cob.X = X;
  }
  if (in0) cob.in_cells.insert(cob.X.cell_index("v0"));
  if (out1) cob.out_cells.insert(cob.X.cell_index("v1"));
  return cob;
}

// random invertible rational matrix with det +-1 (unit upper/lower products)
inline Mat random_sl_pm(std::mt19937_64& rng, int m) {
  std::uniform_int_distribution<int> small(-2, 2);
  std::uniform_int_distribution<int> signd(0, 1);
  Mat L = Mat::identity(m), U = Mat::identity(m), Dg = Mat::identity(m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < i; ++j) {
      L(i, j) = Q(small(rng));
      U(j, i) = Q(small(rng), 1 + std::abs(small(rng)));
    }
  for (int i = 0; i < m; ++i) Dg(i, i) = signd(rng) ? Q(1) : Q(-1);
  return L * Dg * U;
}

}  // namespace testutil
