#pragma once

#include <map>
#include <string>

#include "cellbf/graded.hpp"
#include "cellbf/scalar.hpp"

namespace cellbf {

// Hodge-type splitting C^k = reps(H^k) + exact + coexact, chosen by a
// deterministic leftmost-pivot rule:
//   coex_k = standard basis vectors at the pivot columns of d_k,
//   ex_k   = d_{k-1} applied to coex_{k-1},
//   h_k    = kernel vectors extending ex_k to a basis of ker d_k.
struct HodgeData {
  GradedVS spaces;
  GradedVS h_dims;
  std::map<int, Mat> h, ex, coex;  // columns in the ambient basis per degree
  GradedMap incl;                  // H -> C, degree 0
  GradedMap proj;                  // C -> H, degree 0
  GradedMap K;                     // C -> C, degree -1
};

inline HodgeData hodge_decompose(const GradedComplex& C) {
  HodgeData out;
  out.spaces = C.spaces;
  int lo = C.spaces.lo(), hi = C.spaces.hi();

  std::map<int, std::vector<std::size_t>> pivots;
  for (int k = lo; k <= hi; ++k) {
    std::size_t nk = C.spaces.dim(k);
    Mat dk = C.d.block(k);
    Mat r = dk;
    pivots[k] = r.rref();
    // coexact: standard vectors at pivot columns
    Mat coex(nk, pivots[k].size());
    for (std::size_t j = 0; j < pivots[k].size(); ++j) coex(pivots[k][j], j) = 1;
    out.coex[k] = coex;
  }
  for (int k = lo; k <= hi; ++k) {
    std::size_t nk = C.spaces.dim(k);
    Mat ex = (k == lo) ? Mat(nk, 0) : C.d.block(k - 1) * out.coex[k - 1];
    out.ex[k] = ex;
    // kernel of d_k
    Mat Z = C.d.block(k).kernel_basis();
    // extend ex to a basis of ker d_k: pivot columns of [ex | Z] beyond rank(ex)
    Mat cand = Mat::hcat(ex, Z);
    Mat red = cand;
    auto piv = red.rref();
    std::size_t rk_ex = ex.cols();
    std::vector<std::size_t> hs;
    for (auto c : piv)
      if (c >= rk_ex) hs.push_back(c);
    Mat h(nk, hs.size());
    for (std::size_t j = 0; j < hs.size(); ++j)
      for (std::size_t i = 0; i < nk; ++i) h(i, j) = cand(i, hs[j]);
    out.h[k] = h;
    out.h_dims.dims[k] = hs.size();
  }
  // incl / proj / K from the block decomposition
  out.incl = GradedMap(out.h_dims, C.spaces, 0);
  out.proj = GradedMap(C.spaces, out.h_dims, 0);
  out.K = GradedMap(C.spaces, C.spaces, -1);
  for (int k = lo; k <= hi; ++k) {
    std::size_t nk = C.spaces.dim(k);
    if (nk == 0) continue;
    Mat M = Mat::hcat(Mat::hcat(out.h[k], out.ex[k]), out.coex[k]);
    auto Minv = M.inverse();
    if (!Minv) throw std::logic_error("hodge_decompose: basis assembly failed");
    std::size_t nh = out.h[k].cols(), ne = out.ex[k].cols();
    out.incl.set_block(k, out.h[k]);
    Mat p(nh, nk);
    for (std::size_t i = 0; i < nh; ++i)
      for (std::size_t j = 0; j < nk; ++j) p(i, j) = (*Minv)(i, j);
    out.proj.set_block(k, p);
    // K: kills h and coex parts, maps ex_k back through d: ex_k = d coex_{k-1}
    if (k > lo && ne > 0) {
      Mat sel(ne, nk);
      for (std::size_t i = 0; i < ne; ++i)
        for (std::size_t j = 0; j < nk; ++j) sel(i, j) = (*Minv)(nh + i, j);
      out.K.set_block(k, out.coex[k - 1] * sel);
    } else {
      out.K.set_block(k, Mat::zero(C.spaces.dim(k - 1), nk));
    }
  }
  return out;
}

struct CohomologyData {
  GradedVS dims;
  GradedMap incl;  // representatives
  GradedMap proj;  // canonical class map on cocycles, kills exact+coexact
};

inline CohomologyData cohomology(const GradedComplex& C) {
  auto h = hodge_decompose(C);
  return {h.h_dims, h.incl, h.proj};
}

// An element of Det H^bullet (mod sign downstream): a coordinate relative to
// the wedge of a declared reference basis of cohomology representatives.
struct DetLineElement {
  GradedVS h_dims;
  ScalarMono coord;
  std::string basis_tag;

  bool equal_mod_sign(const DetLineElement& o) const {
    return h_dims == o.h_dims && basis_tag == o.basis_tag &&
           ScalarMono::equal_mod_sign(coord, o.coord);
  }
};

// change-of-class matrix: expresses the classes of the columns of `reps` in
// the cohomology basis declared by `ref` (via ref's projection)
inline Q class_change_det(const HodgeData& mine, const GradedMap& ref_proj) {
  Q out(1);
  for (auto& [k, d] : mine.h_dims.dims) {
    if (!d) continue;
    Mat c = ref_proj.block(k) * mine.h.at(k);
    Q dk = c.det();
    if (dk == 0) throw std::logic_error("class_change_det: reference basis mismatch");
    if (k % 2 == 0)
      out *= dk;
    else
      out /= dk;
  }
  return out;
}

// The canonical map T : Det C -> Det H applied to the coordinate wedge of the
// ambient basis. Returns the coordinate of T(mu) relative to the cohomology
// basis of `ref` (defaults to the deterministic Hodge basis of C itself).
// With M_k = [h_k | ex_k | coex_k] the change of basis in degree k, the
// coordinate is prod_k det(M_k)^((-1)^(k+1)).
inline DetLineElement det_line_map(const GradedComplex& C, const CohomologyData* ref = nullptr,
                                   const std::string& basis_tag = "hodge") {
  if (!C.d_squared_zero()) throw std::invalid_argument("det_line_map: d^2 != 0");
  auto hd = hodge_decompose(C);
  Q val(1);
  for (auto& [k, nk] : C.spaces.dims) {
    if (!nk) continue;
    Mat M = Mat::hcat(Mat::hcat(hd.h[k], hd.ex[k]), hd.coex[k]);
    Q dk = M.det();
    if (k % 2 == 0)
      val /= dk;
    else
      val *= dk;
  }
  if (ref) {
    // re-express in the caller's cohomology basis
    val *= class_change_det(hd, ref->proj);
    if (!(hd.h_dims == ref->dims))
      throw std::invalid_argument("det_line_map: reference dims mismatch");
  }
  DetLineElement out;
  out.h_dims = hd.h_dims;
  out.coord = ScalarMono(SqrtQ(val));
  out.basis_tag = basis_tag;
  return out;
}

// Super-determinant of a degreewise-square invertible graded map.
inline ScalarMono sdet(const GradedMap& f) {
  int bad = 0;
  return ScalarMono(SqrtQ(graded_sdet(f, bad)));
}

}  // namespace cellbf
