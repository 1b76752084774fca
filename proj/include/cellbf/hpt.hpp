#pragma once

#include <functional>
#include <string>

#include "cellbf/exact.hpp"
#include "cellbf/graded.hpp"

namespace cellbf {

// Retraction (i, p, K) between cochain complexes, subject to the seven
// identities pi=1, di=i d', p d=d' p, dK+Kd=1-ip, Ki=0, pK=0, K^2=0.
struct InductionData {
  GradedComplex big;    // C
  GradedComplex small;  // C'
  GradedMap i;          // C' -> C, degree 0
  GradedMap p;          // C -> C', degree 0
  GradedMap K;          // C -> C, degree -1

  static InductionData identity(const GradedComplex& C) {
    InductionData d;
    d.big = C;
    d.small = C;
    d.i = GradedMap::identity(C.spaces);
    d.p = GradedMap::identity(C.spaces);
    d.K = GradedMap::zero(C.spaces, C.spaces, -1);
    return d;
  }
};

// Returns the empty string when all seven axioms hold exactly, otherwise the
// name of the first failing identity.
inline std::string check_induction_axioms(const InductionData& D) {
  if (!(D.p * D.i == GradedMap::identity(D.small.spaces))) return "pi=id";
  if (!((D.big.d * D.i) == (D.i * D.small.d))) return "di=id'";
  if (!((D.p * D.big.d) == (D.small.d * D.p))) return "pd=d'p";
  GradedMap homo = D.big.d * D.K + D.K * D.big.d;
  GradedMap rhs = GradedMap::identity(D.big.spaces) - D.i * D.p;
  if (!(homo == rhs)) return "dK+Kd=id-ip";
  if (!((D.K * D.i).is_zero())) return "Ki=0";
  if (!((D.p * D.K).is_zero())) return "pK=0";
  if (!((D.K * D.K).is_zero())) return "K^2=0";
  return "";
}

// Deterministic retraction of a complex onto its cohomology; p restricted to
// cocycles is the canonical class projection.
inline InductionData retract_to_cohomology(const GradedComplex& C) {
  if (!C.d_squared_zero()) throw std::invalid_argument("retract_to_cohomology: d^2 != 0");
  auto h = hodge_decompose(C);
  InductionData D;
  D.big = C;
  D.small = GradedComplex(h.h_dims);  // zero differential
  D.i = h.incl;
  D.p = h.proj;
  D.K = h.K;
  return D;
}

// Homological perturbation lemma. delta is a degree +1 perturbation with
// (d + delta)^2 = 0; the series terminate because delta K must be nilpotent
// (checked, with iteration capped by the total dimension).
inline InductionData perturb(const InductionData& D, const GradedMap& delta) {
  GradedComplex big2 = D.big;
  big2.d = D.big.d + delta;
  if (!big2.d_squared_zero()) throw std::invalid_argument("perturb: (d+delta)^2 != 0");

  std::size_t cap = D.big.spaces.total() + 2;
  // sum_{r>=0} (-1)^r (delta K)^r delta, assembled iteratively
  GradedMap acc = delta;          // current term (delta K)^r delta
  GradedMap series = delta;      // partial sum
  bool terminated = false;
  for (std::size_t r = 1; r <= cap; ++r) {
    acc = Q(-1) * (delta * (D.K * acc));
    if (acc.is_zero()) {
      terminated = true;
      break;
    }
    series = series + acc;
  }
  if (!terminated) throw std::invalid_argument("perturb: series does not terminate (delta K not nilpotent)");

  InductionData out;
  out.big = big2;
  out.small = D.small;
  out.small.d = D.small.d + D.p * (series * D.i);
  out.i = D.i - D.K * (series * D.i);
  out.p = D.p - D.p * (series * D.K);
  out.K = D.K - D.K * (series * D.K);
  return out;
}

// Composition of retractions C0 -> C1 -> C2.
inline InductionData compose(const InductionData& d01, const InductionData& d12) {
  if (!(d01.small.spaces == d12.big.spaces) || !(d01.small.d == d12.big.d))
    throw std::invalid_argument("compose: middle complexes do not match");
  InductionData out;
  out.big = d01.big;
  out.small = d12.small;
  out.i = d01.i * d12.i;
  out.p = d12.p * d01.p;
  out.K = d01.K + d01.i * (d12.K * d01.p);
  return out;
}

// The dual complex with Poincare-style grading: (C*)^k = (C^{n-k})* with
// (d*)_k = (-1)^{n-k-1} (d_{n-k-1})^T.
inline GradedComplex dual_complex(const GradedComplex& C, int n) {
  GradedVS v;
  for (auto& [k, d] : C.spaces.dims) v.dims[n - k] = d;
  GradedComplex out(v);
  for (auto& [k, d] : v.dims) {
    if (!d) continue;
    Mat blk = C.d.block(n - k - 1).transpose();
    if ((n - k - 1) % 2 != 0) blk = Q(-1) * blk;
    if (blk.rows() != v.dim(k + 1)) blk = Mat::zero(v.dim(k + 1), d);
    out.d.set_block(k, blk);
  }
  return out;
}

// Dual induction data, i* = p^T, p* = i^T. The homotopy is transposed with
// the sign (K*)_k = (-1)^(k+n) (K_{n-k+1})^T; the extra (-1)^n relative to
// the usual display makes all seven identities hold on the nose for every
// ambient degree n (they otherwise only hold up to a global sign for odd n).
inline InductionData dualize(const InductionData& D, int n) {
  InductionData out;
  out.big = dual_complex(D.big, n);
  out.small = dual_complex(D.small, n);
  out.i = GradedMap(out.small.spaces, out.big.spaces, 0);
  out.p = GradedMap(out.big.spaces, out.small.spaces, 0);
  out.K = GradedMap(out.big.spaces, out.big.spaces, -1);
  for (auto& [k, d] : out.small.spaces.dims)
    if (d || out.big.spaces.dim(k)) out.i.set_block(k, D.p.block(n - k).transpose());
  for (auto& [k, d] : out.big.spaces.dims) {
    if (!d) continue;
    out.p.set_block(k, D.i.block(n - k).transpose());
    Mat kk = D.K.block(n - k + 1).transpose();
    if ((k + n) % 2 != 0) kk = Q(-1) * kk;
    if (kk.cols() != d || kk.rows() != out.big.spaces.dim(k - 1))
      kk = Mat::zero(out.big.spaces.dim(k - 1), d);
    out.K.set_block(k, kk);
  }
  return out;
}

// ---------------------------------------------------------------------------
// First-order deformations (nilpotent epsilon)
// ---------------------------------------------------------------------------

// Map with a first-order part: value + eps * variation, eps^2 = 0.
struct EpsMap {
  GradedMap a, b;  // a + eps b
  friend EpsMap operator*(const EpsMap& x, const EpsMap& y) {
    return {x.a * y.a, x.a * y.b + x.b * y.a};
  }
  friend EpsMap operator+(const EpsMap& x, const EpsMap& y) { return {x.a + y.a, x.b + y.b}; }
  friend EpsMap operator-(const EpsMap& x, const EpsMap& y) { return {x.a - y.a, x.b - y.b}; }
  bool is_zero() const { return a.is_zero() && b.is_zero(); }
  friend bool operator==(const EpsMap& x, const EpsMap& y) { return x.a == y.a && x.b == y.b; }
};

struct EpsInduction {
  GradedComplex big, small;
  EpsMap i, p, K;
};

inline std::string check_induction_axioms_eps(const EpsInduction& D) {
  EpsMap d{D.big.d, GradedMap::zero(D.big.spaces, D.big.spaces, +1)};
  EpsMap dp{D.small.d, GradedMap::zero(D.small.spaces, D.small.spaces, +1)};
  EpsMap id{GradedMap::identity(D.big.spaces), GradedMap::zero(D.big.spaces, D.big.spaces, 0)};
  EpsMap idp{GradedMap::identity(D.small.spaces),
             GradedMap::zero(D.small.spaces, D.small.spaces, 0)};
  if (!(D.p * D.i == idp)) return "pi=id";
  if (!(d * D.i == D.i * dp)) return "di=id'";
  if (!(D.p * d == dp * D.p)) return "pd=d'p";
  if (!(d * D.K + D.K * d == id - D.i * D.p)) return "dK+Kd=id-ip";
  if (!(D.K * D.i).is_zero()) return "Ki=0";
  if (!(D.p * D.K).is_zero()) return "pK=0";
  if (!(D.K * D.K).is_zero()) return "K^2=0";
  return "";
}

enum class DeformKind { I, II, III, IV };

// First-order deformation of induction data with the given generator; the
// generator must map between the Hodge pieces stated for its kind. Kind I:
// Lambda : C''_ex -> C''_{K-ex}, degree -2, extended by zero. Kind II:
// I : C' -> C''_{K-ex}, degree -1. Kind III: P : C''_ex -> C', degree -1.
// Kind IV: chi : C' -> C' a chain map, degree 0.
inline EpsInduction deform(const InductionData& D, DeformKind kind, const GradedMap& gen) {
  EpsInduction out;
  out.big = D.big;
  out.small = D.small;
  GradedMap z_i = GradedMap::zero(D.small.spaces, D.big.spaces, 0);
  GradedMap z_p = GradedMap::zero(D.big.spaces, D.small.spaces, 0);
  GradedMap z_K = GradedMap::zero(D.big.spaces, D.big.spaces, -1);
  switch (kind) {
    case DeformKind::I: {
      if (gen.shift != -2) throw std::invalid_argument("deform I: generator must have degree -2");
      GradedMap dK = D.big.d * gen - gen * D.big.d;
      out.i = {D.i, z_i};
      out.p = {D.p, z_p};
      out.K = {D.K, dK};
      break;
    }
    case DeformKind::II: {
      if (gen.shift != -1) throw std::invalid_argument("deform II: generator must have degree -1");
      out.i = {D.i, D.big.d * gen + gen * D.small.d};
      out.p = {D.p, z_p};
      out.K = {D.K, Q(-1) * (gen * D.p)};
      break;
    }
    case DeformKind::III: {
      if (gen.shift != -1)
        throw std::invalid_argument("deform III: generator must have degree -1");
      out.i = {D.i, z_i};
      out.p = {D.p, D.small.d * gen + gen * D.big.d};
      out.K = {D.K, Q(-1) * (D.i * gen)};
      break;
    }
    case DeformKind::IV: {
      if (gen.shift != 0) throw std::invalid_argument("deform IV: generator must have degree 0");
      out.i = {D.i, D.i * gen};
      out.p = {D.p, Q(-1) * (gen * D.p)};
      out.K = {D.K, z_K};
      break;
    }
  }
  return out;
}

// Projectors onto the Hodge pieces of a retraction (used to shape deformation
// generators): onto i(C'), onto exact, onto K-image.
inline GradedMap proj_onto_reps(const InductionData& D) { return D.i * D.p; }
inline GradedMap proj_onto_exact(const InductionData& D) { return D.big.d * D.K; }
inline GradedMap proj_onto_coexact(const InductionData& D) { return D.K * D.big.d; }

}  // namespace cellbf
