#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "cellbf/matrix.hpp"
#include "cellbf/rational.hpp"

namespace cellbf {

// Polynomial differential form on the standard N-simplex in the reduced
// coordinates t_1..t_N (t_0 = 1 - sum t_i eliminated). A monomial is
// t^alpha dt_S with S a bitmask over {1..N}.
struct PolyForm {
  int N = 0;
  // key: (alpha, dt bitmask); alpha has length N
  std::map<std::pair<std::vector<int>, std::uint32_t>, Q> terms;

  explicit PolyForm(int n = 0) : N(n) {}

  static PolyForm constant(int n, Q c) {
    PolyForm f(n);
    if (c != 0) f.terms[{std::vector<int>(n, 0), 0u}] = std::move(c);
    return f;
  }
  // coordinate t_i, 1 <= i <= N; t_0 = 1 - sum
  static PolyForm coord(int n, int i) {
    PolyForm f(n);
    if (i == 0) {
      f.terms[{std::vector<int>(n, 0), 0u}] = Q(1);
      for (int j = 1; j <= n; ++j) {
        std::vector<int> a(n, 0);
        a[j - 1] = 1;
        f.terms[{a, 0u}] = Q(-1);
      }
    } else {
      std::vector<int> a(n, 0);
      a[i - 1] = 1;
      f.terms[{a, 0u}] = Q(1);
    }
    return f;
  }
  // dt_i, 1 <= i <= N; dt_0 = -sum dt_j
  static PolyForm dcoord(int n, int i) {
    PolyForm f(n);
    if (i == 0) {
      for (int j = 1; j <= n; ++j) f.terms[{std::vector<int>(n, 0), 1u << (j - 1)}] = Q(-1);
    } else {
      f.terms[{std::vector<int>(n, 0), 1u << (i - 1)}] = Q(1);
    }
    return f;
  }

  bool is_zero() const { return terms.empty(); }
  void add(const std::vector<int>& a, std::uint32_t s, const Q& c) {
    if (c == 0) return;
    auto key = std::make_pair(a, s);
    auto it = terms.find(key);
    if (it == terms.end())
      terms.emplace(std::move(key), c);
    else {
      it->second += c;
      if (it->second == 0) terms.erase(it);
    }
  }

  friend PolyForm operator+(const PolyForm& x, const PolyForm& y) {
    PolyForm out = x;
    for (auto& [k, c] : y.terms) out.add(k.first, k.second, c);
    return out;
  }
  friend PolyForm operator-(const PolyForm& x, const PolyForm& y) {
    PolyForm out = x;
    for (auto& [k, c] : y.terms) out.add(k.first, k.second, -c);
    return out;
  }
  friend PolyForm operator*(const Q& s, const PolyForm& x) {
    PolyForm out(x.N);
    for (auto& [k, c] : x.terms) out.add(k.first, k.second, s * c);
    return out;
  }

  // sign of dt_S wedge dt_T (0 if overlap), and the merged mask
  static int wedge_sign(std::uint32_t s, std::uint32_t t) {
    if (s & t) return 0;
    int sign = 1;
    // count transpositions: for each bit of t, count higher bits of s before it
    for (int b = 0; b < 32; ++b)
      if (t & (1u << b)) {
        std::uint32_t higher = s >> (b + 1);
        int cnt = 0;
        while (higher) {
          cnt += higher & 1;
          higher >>= 1;
        }
        if (cnt % 2) sign = -sign;
      }
    return sign;
  }

  friend PolyForm operator^(const PolyForm& x, const PolyForm& y) {  // wedge
    PolyForm out(x.N);
    for (auto& [kx, cx] : x.terms)
      for (auto& [ky, cy] : y.terms) {
        int sgn = wedge_sign(kx.second, ky.second);
        if (!sgn) continue;
        std::vector<int> a = kx.first;
        for (int i = 0; i < x.N; ++i) a[i] += ky.first[i];
        out.add(a, kx.second | ky.second, Q(sgn) * cx * cy);
      }
    return out;
  }

  int degree_of(std::uint32_t mask) const {
    int d = 0;
    while (mask) {
      d += mask & 1;
      mask >>= 1;
    }
    return d;
  }
  // true if all monomials have form degree exactly k
  bool pure_degree(int k) const {
    for (auto& [key, c] : terms)
      if (degree_of(key.second) != k) return false;
    return true;
  }

  PolyForm d() const {
    PolyForm out(N);
    for (auto& [key, c] : terms) {
      const auto& a = key.first;
      std::uint32_t s = key.second;
      for (int i = 0; i < N; ++i) {
        if (a[i] == 0 || (s & (1u << i))) continue;
        std::vector<int> a2 = a;
        a2[i] -= 1;
        int sgn = wedge_sign(1u << i, s);
        out.add(a2, s | (1u << i), Q(sgn) * Q(a[i]) * c);
      }
    }
    return out;
  }

  friend bool operator==(const PolyForm& x, const PolyForm& y) { return x.terms == y.terms; }
};

// integral over the standard simplex: only top-degree parts contribute;
// int_{Delta^N} t^alpha dt_1..dt_N = prod(alpha_i!) / (N + sum alpha)!
inline Q integrate_top(const PolyForm& f) {
  if (f.N == 0) {
    // 0-simplex: evaluation of the constant
    Q out(0);
    for (auto& [key, c] : f.terms)
      if (key.second == 0) out += c;
    return out;
  }
  std::uint32_t full = (f.N >= 32) ? ~0u : ((1u << f.N) - 1);
  Q out(0);
  for (auto& [key, c] : f.terms) {
    if (key.second != full) continue;
    // sign: monomial stored as dt_{i1} ^ ... in increasing order = dt_1..dt_N
    Int num = 1, den = 1;
    long long tot = f.N;
    for (int i = 0; i < f.N; ++i) {
      for (int k = 2; k <= key.first[i]; ++k) num *= k;
      tot += key.first[i];
    }
    for (long long k = 2; k <= tot; ++k) den *= k;
    out += c * Q(num, den);
  }
  return out;
}

// faces of the N-simplex: nonempty sorted subsets of {0..N}
using Face = std::vector<int>;

inline std::vector<Face> simplex_faces(int N) {
  std::vector<Face> out;
  for (std::uint32_t s = 1; s < (1u << (N + 1)); ++s) {
    Face f;
    for (int v = 0; v <= N; ++v)
      if (s & (1u << v)) f.push_back(v);
    out.push_back(f);
  }
  return out;
}

// pullback along the affine inclusion of the face {v_0 < ... < v_k}
inline PolyForm pullback_to_face(const PolyForm& f, const Face& face) {
  int k = (int)face.size() - 1;
  PolyForm out(k);
  // coordinate images: t_i on Delta^N pulls back to s_j if i = face[j] (j>=1),
  // to 1 - sum s if i = face[0], and to 0 otherwise
  std::vector<PolyForm> timg(f.N + 1, PolyForm::constant(k, Q(0)));
  std::vector<PolyForm> dtimg(f.N + 1, PolyForm(k));
  for (int j = 0; j <= k; ++j) {
    timg[face[j]] = PolyForm::coord(k, j);
    dtimg[face[j]] = PolyForm::dcoord(k, j);
  }
  for (auto& [key, c] : f.terms) {
    PolyForm acc = PolyForm::constant(k, c);
    bool dead = false;
    for (int i = 1; i <= f.N && !dead; ++i) {
      for (int e = 0; e < key.first[i - 1]; ++e) {
        acc = acc ^ timg[i];
        if (acc.is_zero()) dead = true;
      }
    }
    if (dead) continue;
    for (int i = 1; i <= f.N && !dead; ++i)
      if (key.second & (1u << (i - 1))) {
        acc = acc ^ dtimg[i];
        if (acc.is_zero()) dead = true;
      }
    if (dead) continue;
    out = out + acc;
  }
  return out;
}

inline Q integrate_over_face(const PolyForm& f, const Face& face) {
  return integrate_top(pullback_to_face(f, face));
}

// Whitney form of the face {v_0 < ... < v_k}:
//   k! sum_j (-1)^j t_{v_j} dt_{v_0} ... (omit j) ... dt_{v_k}
inline PolyForm whitney(int N, const Face& face) {
  int k = (int)face.size() - 1;
  PolyForm out(N);
  Q fact(1);
  for (int j = 2; j <= k; ++j) fact *= j;
  for (int j = 0; j <= k; ++j) {
    PolyForm term = PolyForm::coord(N, face[j]);
    for (int l = 0; l <= k; ++l) {
      if (l == j) continue;
      term = term ^ PolyForm::dcoord(N, face[l]);
    }
    out = out + Q(j % 2 ? -1 : 1) * fact * term;
  }
  return out;
}

// contraction toward vertex v: fiber integration of the pullback along the
// dilation map (u, t) -> u e_v + (1-u) t. Degree -1; satisfies
// h d + d h = id - ev_v on polynomial forms (ev_v = pullback to the vertex).
inline PolyForm vertex_contraction(const PolyForm& f, int v) {
  // images: t_i -> (1-u) t_i + u delta_{iv}; dt_i -> (1-u) dt_i + (delta_{iv} - t_i) du.
  // We expand each monomial, keep the du-linear part, and integrate u over [0,1].
  // Bookkeeping: polynomial in u with coefficients (PolyForm, du-flag).
  struct UPoly {  // map u-exponent -> PolyForm, separately for du-free and du-linear parts
    std::map<int, PolyForm> plain, du;
  };
  PolyForm out(f.N);
  for (auto& [key, c] : f.terms) {
    // start with the constant c
    UPoly acc;
    acc.plain[0] = PolyForm::constant(f.N, c);
    auto mul_plain = [&](const std::map<int, PolyForm>& ups) {
      // multiply acc by a du-free u-polynomial with PolyForm coefficients
      UPoly nx;
      for (auto& [e1, f1] : acc.plain)
        for (auto& [e2, f2] : ups) {
          auto w = f1 ^ f2;
          if (w.is_zero()) continue;
          auto it = nx.plain.find(e1 + e2);
          if (it == nx.plain.end())
            nx.plain[e1 + e2] = w;
          else
            it->second = it->second + w;
        }
      for (auto& [e1, f1] : acc.du)
        for (auto& [e2, f2] : ups) {
          // du passes the form f2: f2 has fixed parity; du odd: sign (-1)^{deg f2}
          PolyForm w = f1 ^ f2;
          if (w.is_zero()) continue;
          auto it = nx.du.find(e1 + e2);
          if (it == nx.du.end())
            nx.du[e1 + e2] = w;
          else
            it->second = it->second + w;
        }
      acc = std::move(nx);
    };
    auto mul_mixed = [&](const std::map<int, PolyForm>& plain_part,
                         const std::map<int, PolyForm>& du_part, int du_deg_parity) {
      // multiply acc by (plain + du * du_part); du anticommutes with odd forms
      UPoly nx;
      auto addp = [&](std::map<int, PolyForm>& tgt, int e, const PolyForm& w) {
        if (w.is_zero()) return;
        auto it = tgt.find(e);
        if (it == tgt.end())
          tgt[e] = w;
        else
          it->second = it->second + w;
      };
      for (auto& [e1, f1] : acc.plain) {
        for (auto& [e2, f2] : plain_part) addp(nx.plain, e1 + e2, f1 ^ f2);
        for (auto& [e2, f2] : du_part) {
          // move du leftward past f1: sign (-1)^{deg f1}; f1 has mixed degrees,
          // so split by parity
          PolyForm even(f1.N), odd(f1.N);
          for (auto& [k2, c2] : f1.terms)
            ((f1.degree_of(k2.second) % 2 == 0) ? even : odd).add(k2.first, k2.second, c2);
          addp(nx.du, e1 + e2, (even ^ f2) - (odd ^ f2));
        }
      }
      for (auto& [e1, f1] : acc.du)
        for (auto& [e2, f2] : plain_part) addp(nx.du, e1 + e2, f1 ^ f2);
      // du * du = 0
      (void)du_deg_parity;
      acc = std::move(nx);
    };

    // t-part
    for (int i = 1; i <= f.N; ++i) {
      std::map<int, PolyForm> img;  // (1-u) t_i + u delta_{iv}
      img[0] = PolyForm::coord(f.N, i);
      img[1] = Q(-1) * PolyForm::coord(f.N, i);
      if (i == v) {
        auto it = img.find(1);
        it->second = it->second + PolyForm::constant(f.N, Q(1));
      }
      for (int e = 0; e < key.first[i - 1]; ++e) mul_plain(img);
    }
    // dt-part in mask order (increasing i = the stored orientation)
    for (int i = 1; i <= f.N; ++i) {
      if (!(key.second & (1u << (i - 1)))) continue;
      std::map<int, PolyForm> plain_img;  // (1-u) dt_i
      plain_img[0] = PolyForm::dcoord(f.N, i);
      plain_img[1] = Q(-1) * PolyForm::dcoord(f.N, i);
      std::map<int, PolyForm> du_img;  // (delta_{iv} - t_i)
      du_img[0] = Q(-1) * PolyForm::coord(f.N, i);
      if (i == v) du_img[0] = du_img[0] + PolyForm::constant(f.N, Q(1));
      mul_mixed(plain_img, du_img, 0);
    }
    // the v = 0 case needs no special handling: images above already encode
    // t_0 = 1 - sum t_i and the dilation fixes it automatically
    // integrate the du part over u in [0,1]; the overall sign is the fiber
    // orientation convention making h d + d h = id - ev_v
    for (auto& [e, w] : acc.du) {
      Q iu = Q(-1, e + 1);
      out = out + iu * w;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// The Whitney/Poincare/Dupont retraction on the closed N-simplex
// ---------------------------------------------------------------------------

// Operator view of a degree-preserving or degree-shifting map on forms.
using FormOp = std::function<PolyForm(const PolyForm&)>;

struct SimplexRetraction {
  int N;
  std::vector<Face> faces;            // all faces (cells of the closed simplex)
  std::map<Face, int> face_index;
  // i : cochains -> forms, p : forms -> cochains, K : forms -> forms
  PolyForm include(const std::vector<Q>& cochain) const {
    PolyForm out(N);
    for (std::size_t j = 0; j < faces.size(); ++j)
      if (cochain[j] != 0) out = out + cochain[j] * whitney(N, faces[j]);
    return out;
  }
  std::vector<Q> project(const PolyForm& f) const {
    std::vector<Q> out(faces.size(), Q(0));
    for (std::size_t j = 0; j < faces.size(); ++j) out[j] = integrate_over_face(f, faces[j]);
    return out;
  }
  PolyForm ip(const PolyForm& f) const { return include(project(f)); }

  // raw Dupont homotopy: s = sum over faces sigma = (v_0 < ... < v_k) of
  // (-1)^k w_sigma ^ (h_{v_k} o ... o h_{v_0}); satisfies d s + s d = id - ip
  PolyForm dupont_raw(const PolyForm& f) const {
    PolyForm out(N);
    for (auto& face : faces) {
      int k = (int)face.size() - 1;
      PolyForm cur = f;
      for (int j = 0; j <= k; ++j) cur = vertex_contraction(cur, face[j]);
      if (cur.is_zero()) continue;
      out = out + Q(k % 2 ? -1 : 1) * (whitney(N, face) ^ cur);
    }
    return out;
  }

  PolyForm K1(const PolyForm& x) const {
    PolyForm y = x - ip(x);
    PolyForm z = dupont_raw(y);
    return z - ip(z);
  }
  // side-condition corrected homotopy: K1 = (1-ip) s (1-ip), K = K1 d K1.
  // Satisfies all seven retraction identities on polynomial forms together
  // with (include, project).
  PolyForm K(const PolyForm& f) const { return K1(K1(f).d()); }
};

inline SimplexRetraction simplex_retraction(int N) {
  SimplexRetraction r;
  r.N = N;
  r.faces = simplex_faces(N);
  for (std::size_t j = 0; j < r.faces.size(); ++j) r.face_index[r.faces[j]] = (int)j;
  return r;
}

// ---------------------------------------------------------------------------
// The square via the tensor product of two interval retractions
// ---------------------------------------------------------------------------

// Forms on the square [0,1]^2: PolyForm with N = 2 reinterpreted in cube
// coordinates (x, y) = (t_1, t_2), no barycentric constraint. Faces are
// encoded as (xlo, xhi, ylo, yhi) interval specs per axis: each axis is
// either frozen at 0, frozen at 1, or free.
struct CubeFace {
  // per axis: 0 -> frozen at 0, 1 -> frozen at 1, 2 -> free
  std::array<int, 2> spec;
  int dim() const { return (spec[0] == 2) + (spec[1] == 2); }
  friend bool operator<(const CubeFace& a, const CubeFace& b) { return a.spec < b.spec; }
  friend bool operator==(const CubeFace& a, const CubeFace& b) { return a.spec == b.spec; }
};

inline std::vector<CubeFace> square_faces() {
  std::vector<CubeFace> out;
  for (int sx = 0; sx < 3; ++sx)
    for (int sy = 0; sy < 3; ++sy) out.push_back(CubeFace{{sx, sy}});
  return out;
}

// interval Whitney basis on an axis: 0 -> (1 - x), 1 -> x, 2 (edge) -> dx
inline PolyForm axis_whitney(int axis, int spec) {
  int i = axis + 1;
  if (spec == 0) return PolyForm::constant(2, Q(1)) - PolyForm::coord(2, i);
  if (spec == 1) return PolyForm::coord(2, i);
  return PolyForm::dcoord(2, i);
}

inline PolyForm cube_whitney(const CubeFace& f) {
  return axis_whitney(0, f.spec[0]) ^ axis_whitney(1, f.spec[1]);
}

// integral of a cube form over a face (cube measure)
inline Q integrate_cube_face(const PolyForm& f, const CubeFace& face) {
  Q out(0);
  for (auto& [key, c] : f.terms) {
    // required dt content: exactly the free axes
    std::uint32_t need = 0;
    for (int a = 0; a < 2; ++a)
      if (face.spec[a] == 2) need |= (1u << a);
    if (key.second != need) continue;
    Q val = c;
    for (int a = 0; a < 2; ++a) {
      int e = key.first[a];
      if (face.spec[a] == 2)
        val *= Q(1, e + 1);  // int_0^1 x^e dx
      else if (face.spec[a] == 0)
        val *= (e == 0) ? Q(1) : Q(0);
      // frozen at 1: x^e -> 1
    }
    out += val;
  }
  return out;
}

struct SquareRetraction {
  std::vector<CubeFace> faces = square_faces();

  PolyForm include(const std::vector<Q>& cochain) const {
    PolyForm out(2);
    for (std::size_t j = 0; j < faces.size(); ++j)
      if (cochain[j] != 0) out = out + cochain[j] * cube_whitney(faces[j]);
    return out;
  }
  std::vector<Q> project(const PolyForm& f) const {
    std::vector<Q> out(faces.size(), Q(0));
    for (std::size_t j = 0; j < faces.size(); ++j) out[j] = integrate_cube_face(f, faces[j]);
    return out;
  }
  PolyForm ip(const PolyForm& f) const { return include(project(f)); }

  // interval operations applied on one axis (tensor with identity, with the
  // Koszul sign for the second axis)
  static PolyForm axis_K1d(const PolyForm& f, int axis) {
    // homotopy for the interval on `axis`: h(x^e dx) = (x^{e+1} - x)/(e+1)...
    // realized as the vertex-0 dilation contraction + projection correction:
    // K1 = (1 - i p) h_0 (1 - i p) acting on the axis factor.
    // For the interval, h_0(x^e dx) = x^{e+1}/(e+1), h_0(x^e) = 0.
    PolyForm out(2);
    int i = axis + 1;
    for (auto& [key, c] : f.terms) {
      if (!(key.second & (1u << axis))) continue;
      // Koszul: remove dx_axis from its slot; sign of moving d/d(dx) past
      // earlier dt's (only axis 0 can precede axis 1)
      int sgn = 1;
      if (axis == 1 && (key.second & 1u)) sgn = -1;
      std::vector<int> a = key.first;
      int e = a[axis];
      a[axis] += 1;
      PolyForm term(2);
      term.add(a, key.second & ~(1u << axis), Q(sgn) * c * Q(1, e + 1));
      out = out + term;
    }
    // subtract i p parts: K1 = (1-ip_axis) h (the h image is a 0-form on the
    // axis; its axis-cochain part is the vertex values)
    // vertex values: at x=0 -> 0 (power >= 1), at x=1 -> sum of coeffs
    PolyForm proj(2);
    for (auto& [key, c] : out.terms) {
      // axis part x^e: i p picks (1-x) * value(0) + x * value(1)
      std::vector<int> a0 = key.first;
      int e = a0[axis];
      a0[axis] = 0;
      // value at 1 contributes c to the "x" Whitney; value at 0 only for e=0
      std::vector<int> a1 = a0;
      a1[axis] = 1;
      proj.add(a1, key.second, c);  // x * value(1)
      if (e == 0) {
        // (1-x)*c + x*c = c: constant function stays
        proj.add(a0, key.second, c);
        std::vector<int> am = a0;
        am[axis] = 1;
        proj.add(am, key.second, -c);
      }
      (void)i;
    }
    return out - proj;
  }

  // symmetrized tensor homotopy, then side-condition correction
  PolyForm K_raw(const PolyForm& f) const {
    // order (x then y): Kx ox 1 + (ip_x) ox Ky ; order (y then x): by symmetry
    auto ip_axis = [&](const PolyForm& g, int axis) {
      // project the axis factor to interval cochains and include back
      PolyForm out(2);
      for (auto& [key, c] : g.terms) {
        std::vector<int> a = key.first;
        int e = a[axis];
        if (key.second & (1u << axis)) {
          // dx-part: integral over the axis: x^e dx -> 1/(e+1) times edge Whitney dx
          std::vector<int> a2 = a;
          a2[axis] = 0;
          out.add(a2, key.second, c * Q(1, e + 1));
        } else {
          // function part: value(0) (1-x) + value(1) x
          std::vector<int> a0 = a, a1 = a;
          a0[axis] = 0;
          a1[axis] = 1;
          out.add(a1, key.second, c);
          if (e == 0) {
            out.add(a0, key.second, c);
            std::vector<int> am = a0;
            am[axis] = 1;
            out.add(am, key.second, -c);
          }
        }
      }
      return out;
    };
    PolyForm k12 = axis_K1d(f, 0) + axis_K1d(ip_axis(f, 0), 1);
    PolyForm k21 = axis_K1d(f, 1) + axis_K1d(ip_axis(f, 1), 0);
    return Q(1, 2) * (k12 + k21);
  }
  PolyForm K1(const PolyForm& f) const {
    PolyForm y = f - ip(f);
    PolyForm z = K_raw(y);
    return z - ip(z);
  }
  PolyForm K(const PolyForm& f) const { return K1(K1(f).d()); }
};

// ---------------------------------------------------------------------------
// Binary rooted trees and one-loop shapes
// ---------------------------------------------------------------------------

struct TreeShape {
  // -1 at internal nodes; leaf slot index at leaves; children indices
  struct Node {
    int left = -1, right = -1;  // -1 -> leaf
    int leaf = -1;
  };
  std::vector<Node> nodes;  // node 0 is the root
  int n_leaves = 0;

  static TreeShape leaf() {
    TreeShape t;
    t.nodes.push_back({-1, -1, 0});
    t.n_leaves = 1;
    return t;
  }
  static TreeShape join(const TreeShape& a, const TreeShape& b) {
    TreeShape t;
    t.nodes.push_back({1, 1 + (int)a.nodes.size(), -1});
    for (auto n : a.nodes) {
      if (n.left >= 0) {
        n.left += 1;
        n.right += 1;
      } else
        n.leaf += 0;
      t.nodes.push_back(n);
    }
    for (auto n : b.nodes) {
      if (n.left >= 0) {
        n.left += 1 + (int)a.nodes.size();
        n.right += 1 + (int)a.nodes.size();
      } else
        n.leaf += a.n_leaves;
      t.nodes.push_back(n);
    }
    t.n_leaves = a.n_leaves + b.n_leaves;
    return t;
  }

  std::string canon(int node = 0) const {
    const Node& n = nodes[node];
    if (n.left < 0) return "*";
    std::string l = canon(n.left), r = canon(n.right);
    if (r < l) std::swap(l, r);
    return "(" + l + r + ")";
  }
  // order of the automorphism group of the unordered shape
  long long aut(int node = 0) const {
    const Node& n = nodes[node];
    if (n.left < 0) return 1;
    long long a = aut(n.left), b = aut(n.right);
    return (canon(n.left) == canon(n.right)) ? 2 * a * b : a * b;
  }
};

// all planar binary trees with n leaves (Catalan many); abstract shapes are
// recovered by canon()
inline std::vector<TreeShape> planar_trees(int n) {
  if (n == 1) return {TreeShape::leaf()};
  std::vector<TreeShape> out;
  for (int k = 1; k < n; ++k)
    for (auto& a : planar_trees(k))
      for (auto& b : planar_trees(n - k)) out.push_back(TreeShape::join(a, b));
  return out;
}

// left comb with n leaves: join(leaf, join(leaf, ...))
inline TreeShape comb_tree(int n) {
  TreeShape t = TreeShape::leaf();
  for (int i = 1; i < n; ++i) t = TreeShape::join(TreeShape::leaf(), t);
  return t;
}

// Evaluate the commutative-forms weight of a decorated tree on the simplex:
// leaves -> Whitney forms of the decorating faces, internal vertices -> wedge,
// internal edges -> -K, root -> integration over out_face. Returns 0 when the
// degree balance fails.
inline Q tree_constant(const SimplexRetraction& r, const TreeShape& t,
                       const std::vector<Face>& leaves, const Face& out_face) {
  std::function<PolyForm(int, bool)> eval = [&](int node, bool root) -> PolyForm {
    const TreeShape::Node& n = t.nodes[node];
    PolyForm val(r.N);
    if (n.left < 0) {
      val = whitney(r.N, leaves[n.leaf]);
    } else {
      val = eval(n.left, false) ^ eval(n.right, false);
    }
    if (!root) return val;
    return val;
  };
  std::function<PolyForm(int)> eval2 = [&](int node) -> PolyForm {
    const TreeShape::Node& n = t.nodes[node];
    if (n.left < 0) return whitney(r.N, leaves[n.leaf]);
    PolyForm l = eval2(n.left), rgt = eval2(n.right);
    // children feed through -K unless they are leaves
    if (t.nodes[n.left].left >= 0) l = Q(-1) * r.K(l);
    if (t.nodes[n.right].left >= 0) rgt = Q(-1) * r.K(rgt);
    return l ^ rgt;
  };
  PolyForm top = eval2(0);
  (void)eval;
  return integrate_over_face(top, out_face);
}

}  // namespace cellbf
