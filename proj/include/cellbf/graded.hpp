#pragma once

#include <map>
#include <stdexcept>
#include <vector>

#include "cellbf/matrix.hpp"

namespace cellbf {

// Dimensions per integer degree; absent degrees are zero.
struct GradedVS {
  std::map<int, std::size_t> dims;

  std::size_t dim(int k) const {
    auto it = dims.find(k);
    return it == dims.end() ? 0 : it->second;
  }
  int lo() const { return dims.empty() ? 0 : dims.begin()->first; }
  int hi() const { return dims.empty() ? -1 : dims.rbegin()->first; }
  std::size_t total() const {
    std::size_t t = 0;
    for (auto& [k, d] : dims) t += d;
    return t;
  }
  friend bool operator==(const GradedVS& a, const GradedVS& b) {
    auto nz = [](const GradedVS& v) {
      std::map<int, std::size_t> m;
      for (auto& [k, d] : v.dims)
        if (d) m[k] = d;
      return m;
    };
    return nz(a) == nz(b);
  }
};

// Degree-homogeneous linear map: blocks[k] : source^k -> target^(k+shift).
struct GradedMap {
  GradedVS source, target;
  int shift = 0;
  std::map<int, Mat> blocks;

  GradedMap() = default;
  GradedMap(GradedVS s, GradedVS t, int sh) : source(std::move(s)), target(std::move(t)), shift(sh) {}

  static GradedMap zero(const GradedVS& s, const GradedVS& t, int sh) {
    GradedMap m(s, t, sh);
    return m;
  }
  static GradedMap identity(const GradedVS& v) {
    GradedMap m(v, v, 0);
    for (auto& [k, d] : v.dims)
      if (d) m.blocks[k] = Mat::identity(d);
    return m;
  }

  Mat block(int k) const {
    auto it = blocks.find(k);
    if (it != blocks.end()) return it->second;
    return Mat::zero(target.dim(k + shift), source.dim(k));
  }
  void set_block(int k, Mat m) {
    if (m.rows() != target.dim(k + shift) || m.cols() != source.dim(k))
      throw std::invalid_argument("GradedMap: block shape mismatch");
    blocks[k] = std::move(m);
  }

  friend GradedMap operator*(const GradedMap& f, const GradedMap& g) {
    // f after g
    GradedMap out(g.source, f.target, f.shift + g.shift);
    for (auto& [k, d] : g.source.dims) {
      if (!d) continue;
      Mat m = f.block(k + g.shift) * g.block(k);
      if (!m.is_zero()) out.blocks[k] = m;
      else out.blocks[k] = std::move(m);
    }
    return out;
  }
  friend GradedMap operator+(const GradedMap& f, const GradedMap& g) {
    GradedMap out(f.source, f.target, f.shift);
    if (!(f.source == g.source) || !(f.target == g.target) || f.shift != g.shift)
      throw std::invalid_argument("GradedMap: sum shape mismatch");
    for (auto& [k, d] : f.source.dims)
      if (d) out.blocks[k] = f.block(k) + g.block(k);
    return out;
  }
  friend GradedMap operator-(const GradedMap& f, const GradedMap& g) {
    GradedMap out(f.source, f.target, f.shift);
    if (!(f.source == g.source) || !(f.target == g.target) || f.shift != g.shift)
      throw std::invalid_argument("GradedMap: diff shape mismatch");
    for (auto& [k, d] : f.source.dims)
      if (d) out.blocks[k] = f.block(k) - g.block(k);
    return out;
  }
  friend GradedMap operator*(const Q& c, const GradedMap& f) {
    GradedMap out = f;
    for (auto& [k, m] : out.blocks) m = c * m;
    return out;
  }
  GradedMap operator-() const { return Q(-1) * *this; }

  bool is_zero() const {
    for (auto& [k, m] : blocks)
      if (!m.is_zero()) return false;
    return true;
  }
  friend bool operator==(const GradedMap& f, const GradedMap& g) {
    if (!(f.source == g.source) || !(f.target == g.target) || f.shift != g.shift) return false;
    for (auto& [k, d] : f.source.dims)
      if (d && !(f.block(k) == g.block(k))) return false;
    return true;
  }
};

// Cochain complex: spaces V^k with differential d : V^k -> V^{k+1}.
struct GradedComplex {
  GradedVS spaces;
  GradedMap d;  // shift +1

  GradedComplex() = default;
  explicit GradedComplex(GradedVS v) : spaces(v), d(v, v, +1) {}

  bool d_squared_zero() const {
    GradedMap dd = d * d;
    return dd.is_zero();
  }
};

inline bool is_chain_map(const GradedMap& f, const GradedComplex& src, const GradedComplex& dst) {
  // d' f = f d for degree-0 f (general shift handled by caller's sign conventions)
  GradedMap lhs = dst.d * f;
  GradedMap rhs = f * src.d;
  return lhs == rhs;
}

// Alternating product of block determinants det(blocks[k])^((-1)^k).
// Blocks must be square and invertible on the given grading.
inline Q graded_sdet(const GradedMap& f, int& bad_degree) {
  Q out(1);
  bad_degree = 0;
  for (auto& [k, dim] : f.source.dims) {
    if (!dim) continue;
    Mat b = f.block(k);
    if (b.rows() != b.cols()) {
      bad_degree = k;
      throw std::domain_error("sdet: non-square block at degree " + std::to_string(k));
    }
    Q dk = b.det();
    if (dk == 0) {
      bad_degree = k;
      throw std::domain_error("sdet: singular block at degree " + std::to_string(k));
    }
    if (k % 2 == 0)
      out *= dk;
    else
      out /= dk;
  }
  return out;
}

}  // namespace cellbf
