#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "cellbf/uloo.hpp"
#include "helpers.hpp"

using namespace cellbf;
using namespace testutil;

namespace {

// <B, dA> as a FieldPoly in the canonical (chain B) picture
FieldPoly bda(const BVAlgebra& F) {
  FieldPoly S = F.zero();
  for (auto& r : F.X->incidences()) {
    GPoly Af = F.A_vec(r.face);
    for (auto& c : Af) c = Q(r.coeff) * c;
    S = S + F.pair_B(r.cell, Af);
  }
  return S;
}

FieldPoly point_block(const BVAlgebra& F, int cell) {
  GPoly A = F.A_vec(cell);
  return Q(1, 2) * F.pair_B(cell, F.bracket_g(A, A));
}

// standard interval building block from the Bernoulli closed form, expanded
// to the algebra's truncation weight
FieldPoly interval_block(const BVAlgebra& F, int edge, int v0, int v1, int order) {
  GPoly A0 = F.A_vec(v0), A1 = F.A_vec(v1), Ae = F.A_vec(edge);
  GPoly diff = F.zero_vec();
  for (int a = 0; a < F.g->dim; ++a) diff[a] = A1[a] - A0[a];
  GPoly sum = F.zero_vec();
  for (int a = 0; a < F.g->dim; ++a) sum[a] = A0[a] + A1[a];

  // sigma = diff + 1/2 [Ae, sum] + sum_{k>=2 even} B_k/k! ad_Ae^k(diff)
  std::map<int, Q> bern{{0, Q(1)},     {1, Q(-1, 2)}, {2, Q(1, 6)}, {3, Q(0)},
                        {4, Q(-1, 30)}, {5, Q(0)},     {6, Q(1, 42)}};
  GPoly sigma = diff;
  {
    GPoly br = F.bracket_g(Ae, sum);
    for (int a = 0; a < F.g->dim; ++a) sigma[a] = sigma[a] + Q(1, 2) * br[a];
  }
  GPoly adk = diff;
  Q fact(1);
  for (int k = 1; k <= order; ++k) {
    adk = F.bracket_g(Ae, adk);
    fact *= k;
    if (k >= 2 && bern[k] != 0) {
      Q coeff = bern[k] / fact;
      for (int a = 0; a < F.g->dim; ++a) sigma[a] = sigma[a] + coeff * adk[a];
    }
  }
  FieldPoly S = F.pair_B(edge, sigma);

  // quantum part: -i hbar tr log G(ad_Ae), log G(x) = x^2/24 - x^4/2880 + x^6/181440 - ...
  std::map<int, Q> logG{{2, Q(1, 24)}, {4, Q(-1, 2880)}, {6, Q(1, 181440)}};
  // tr(ad_Ae^k) = sum_b (ad^k)_{bb} with (ad_Ae)_{cb} = sum_a f[a][b][c] Ae_a
  int n = F.g->dim;
  std::vector<std::vector<FieldPoly>> ad(n, std::vector<FieldPoly>(n, F.zero()));
  for (int b = 0; b < n; ++b)
    for (int c = 0; c < n; ++c)
      for (int a = 0; a < n; ++a)
        if (F.g->f[a][b][c] != 0) ad[c][b] = ad[c][b] + F.g->f[a][b][c] * Ae[a];
  std::vector<std::vector<FieldPoly>> pw = ad;
  for (int k = 2; k <= order; ++k) {
    std::vector<std::vector<FieldPoly>> nx(n, std::vector<FieldPoly>(n, F.zero()));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l)
          if (!ad[i][l].is_zero() && !pw[l][j].is_zero()) nx[i][j] = nx[i][j] + ad[i][l] * pw[l][j];
    pw = nx;
    auto it = logG.find(k);
    if (it != logG.end() && it->second != 0) {
      FieldPoly tr = F.zero();
      for (int i = 0; i < n; ++i) tr = tr + pw[i][i];
      S = S + HPoly::h_pow(1, it->second) * tr;
    }
  }
  return S;
}

FieldPoly interval_action(const BVAlgebra& F, int order) {
  const CellComplex& X = *F.X;
  return point_block(F, X.cell_index("v0")) + point_block(F, X.cell_index("v1")) +
         interval_block(F, X.cell_index("e01"), X.cell_index("v0"), X.cell_index("v1"), order);
}

FieldPoly random_poly(const BVAlgebra& F, std::mt19937_64& rng, int terms, int wmax) {
  std::uniform_int_distribution<int> coin(-2, 2), len(1, wmax), pick(0, F.vt.size() - 1);
  FieldPoly out = F.zero();
  for (int t = 0; t < terms; ++t) {
    Monomial m;
    int L = len(rng);
    for (int i = 0; i < L; ++i) m.push_back(pick(rng));
    std::sort(m.begin(), m.end());
    bool bad = false;
    for (std::size_t i = 1; i < m.size(); ++i)
      if (m[i] == m[i - 1] && F.vt.odd(m[i])) bad = true;
    if (bad) continue;
    out.add_term(m, HPoly(Q(coin(rng))));
  }
  return out;
}

}  // namespace

TEST_CASE("graded polynomial algebra basics") {
  CellComplex X = interval();
  auto g = LieAlgebraData::heisenberg3();
  BVAlgebra F(X, g, 8);

  int v0 = X.cell_index("v0"), e = X.cell_index("e01");
  SECTION("odd variables square to zero, even do not") {
    FieldPoly Av = F.A(v0, 0);  // degree 1
    CHECK((Av * Av).is_zero());
    FieldPoly Ae = F.A(e, 0);  // degree 0
    CHECK(!(Ae * Ae).is_zero());
    FieldPoly Bv = F.B(v0, 0);  // degree -2, even
    CHECK(!(Bv * Bv).is_zero());
    FieldPoly Be = F.B(e, 0);  // degree -1, odd
    CHECK((Be * Be).is_zero());
  }
  SECTION("Koszul sign on transposition of odd variables") {
    FieldPoly Av = F.A(v0, 0), Aw = F.A(v0, 1);
    CHECK(Av * Aw == Q(-1) * (Aw * Av));
  }
  SECTION("derivatives") {
    FieldPoly Av = F.A(v0, 0), Aw = F.A(v0, 1);
    FieldPoly m = Av * Aw;  // odd * odd
    CHECK(m.dleft(F.A_id[v0 * 3 + 0]) == Aw);
    CHECK(m.dleft(F.A_id[v0 * 3 + 1]) == Q(-1) * Av);
    CHECK(m.dright(F.A_id[v0 * 3 + 1]) == Av);
    FieldPoly Ae = F.A(e, 0);
    CHECK((Ae * Ae).dleft(F.A_id[e * 3 + 0]) == Q(2) * Ae);
  }
  SECTION("graded commutativity of the product") {
    std::mt19937_64 rng(2);
    for (int t = 0; t < 10; ++t) {
      FieldPoly f = random_poly(F, rng, 4, 3), gp = random_poly(F, rng, 4, 3);
      // check on homogeneous pieces
      for (int df = -6; df <= 6; ++df)
        for (int dg = -6; dg <= 6; ++dg) {
          FieldPoly fh = F.zero(), gh = F.zero();
          for (auto& [m, c] : f.terms)
            if (f.internal_degree_of(m) == df) fh.terms[m] = c;
          for (auto& [m, c] : gp.terms)
            if (gp.internal_degree_of(m) == dg) gh.terms[m] = c;
          if (fh.is_zero() || gh.is_zero()) continue;
          Q s = (df % 2 != 0 && dg % 2 != 0) ? Q(-1) : Q(1);
          CHECK(fh * gh == s * (gh * fh));
        }
    }
  }
}

TEST_CASE("BV laplacian and bracket") {
  CellComplex X = interval();
  auto g = LieAlgebraData::so3();
  BVAlgebra F(X, g, 8);
  std::mt19937_64 rng(5);

  SECTION("Delta^2 = 0") {
    for (int t = 0; t < 12; ++t) {
      FieldPoly f = random_poly(F, rng, 6, 4);
      CHECK(F.laplacian(F.laplacian(f)).is_zero());
    }
  }
  SECTION("{A,B} pairing is constant") {
    int v0 = X.cell_index("v0");
    FieldPoly br = F.bracket(F.A(v0, 0), F.B(v0, 0));
    REQUIRE(br.terms.size() == 1);
    CHECK(br.terms.count(Monomial{}) == 1);
    // conjugate pairs with distinct Lie indices do not pair
    CHECK(F.bracket(F.A(v0, 0), F.B(v0, 1)).is_zero());
  }
  SECTION("bracket is a biderivation") {
    for (int t = 0; t < 8; ++t) {
      FieldPoly f = random_poly(F, rng, 3, 2);
      FieldPoly a = random_poly(F, rng, 3, 2), b = random_poly(F, rng, 3, 2);
      // test on homogeneous f, a
      for (int df : {-2, -1, 0, 1, 2}) {
        FieldPoly fh = F.zero();
        for (auto& [m, c] : f.terms)
          if (f.internal_degree_of(m) == df) fh.terms[m] = c;
        if (fh.is_zero()) continue;
        for (int da : {-2, -1, 0, 1, 2}) {
          FieldPoly ah = F.zero();
          for (auto& [m, c] : a.terms)
            if (a.internal_degree_of(m) == da) ah.terms[m] = c;
          if (ah.is_zero()) continue;
          FieldPoly lhs = F.bracket(fh, ah * b);
          Q s = ((df + 1) % 2 != 0 && da % 2 != 0) ? Q(-1) : Q(1);
          FieldPoly rhs = F.bracket(fh, ah) * b + s * (ah * F.bracket(fh, b));
          CHECK(lhs == rhs);
        }
      }
    }
  }
  SECTION("graded Jacobi for the odd bracket") {
    // [[f,g],h] identity on random degree-mixed triples at low weight
    for (int t = 0; t < 6; ++t) {
      FieldPoly f = random_poly(F, rng, 2, 2);
      FieldPoly gp = random_poly(F, rng, 2, 2);
      FieldPoly h = random_poly(F, rng, 2, 2);
      for (int df : {-1, 0, 1})
        for (int dg : {-1, 0, 1}) {
          FieldPoly fh = F.zero(), gh = F.zero();
          for (auto& [m, c] : f.terms)
            if (f.internal_degree_of(m) == df) fh.terms[m] = c;
          for (auto& [m, c] : gp.terms)
            if (gp.internal_degree_of(m) == dg) gh.terms[m] = c;
          if (fh.is_zero() || gh.is_zero()) continue;
          // {f,{g,h}} = {{f,g},h} + (-1)^((|f|+1)(|g|+1)) {g,{f,h}}
          FieldPoly lhs = F.bracket(fh, F.bracket(gh, h));
          Q s = ((df + 1) % 2 != 0 && (dg + 1) % 2 != 0) ? Q(-1) : Q(1);
          FieldPoly rhs = F.bracket(F.bracket(fh, gh), h) + s * F.bracket(gh, F.bracket(fh, h));
          CHECK(lhs == rhs);
        }
    }
  }
  SECTION("Delta of the point cubic vanishes by unimodularity") {
    for (auto gg : {LieAlgebraData::heisenberg3(), LieAlgebraData::so3(), LieAlgebraData::gl(2)}) {
      BVAlgebra Fg(X, gg, 6);
      FieldPoly S = point_block(Fg, X.cell_index("v0"));
      CHECK(Fg.laplacian(S).is_zero());
    }
    auto bad = LieAlgebraData::affine2();
    REQUIRE(!bad.unimodular());
    BVAlgebra Fb(X, bad, 6);
    FieldPoly S = point_block(Fb, X.cell_index("v0"));
    CHECK(!Fb.laplacian(S).is_zero());
  }
  SECTION("{<B,dA>, <B,dA>} = 0") {
    for (auto& Xc : {interval(), triangle(), square()}) {
      BVAlgebra Fc(Xc, g, 6);
      FieldPoly S2 = bda(Fc);
      CHECK(Fc.bracket(S2, S2).is_zero());
      CHECK(Fc.laplacian(S2).is_zero());
    }
  }
}

TEST_CASE("QME for hand-built actions") {
  SECTION("point action solves the QME exactly") {
    CellComplex P = point();
    for (auto gg : {LieAlgebraData::heisenberg3(), LieAlgebraData::so3(), LieAlgebraData::gl(2)}) {
      BVAlgebra F(P, gg, 8);
      FieldPoly S = point_block(F, 0);
      CHECK(F.qme_residual(S, 6).is_zero());
    }
  }
  SECTION("abelian <B,dA> solves the QME on any complex") {
    auto ab = LieAlgebraData::abelian(2);
    for (auto& Xc : {interval(), triangle_boundary(), square(), disk_cone(3)}) {
      BVAlgebra F(Xc, ab, 6);
      CHECK(F.qme_residual(bda(F), 4).is_zero());
    }
  }
  SECTION("interval Bernoulli action: QME to order 6 for so(3)") {
    CellComplex X = interval();
    auto g = LieAlgebraData::so3();
    BVAlgebra F(X, g, 9);
    FieldPoly S = interval_action(F, 8);  // the block already contains <B,dA>
    FieldPoly r = F.qme_residual(S, 7);
    INFO(r.str().substr(0, 400));
    CHECK(r.is_zero());
  }
  SECTION("interval action with Heisenberg: exact (series terminates)") {
    CellComplex X = interval();
    auto g = LieAlgebraData::heisenberg3();
    BVAlgebra F(X, g, 10);
    FieldPoly S = interval_action(F, 9);
    CHECK(F.qme_residual(S, 8).is_zero());
  }
  SECTION("perturbed action exhibits a nonzero residual") {
    CellComplex X = square();
    auto g = LieAlgebraData::so3();
    BVAlgebra F(X, g, 6);
    FieldPoly S = bda(F);
    // add eps <B_f, [A_f, A_f]> on the 2-cell: breaks the master equation
    int f2 = X.cell_index("f");
    GPoly Af = F.A_vec(f2);
    FieldPoly Spert = S + Q(1, 3) * F.pair_B(f2, F.bracket_g(Af, Af));
    CHECK(!F.qme_residual(Spert, 4).is_zero());
  }
}

TEST_CASE("uL-infinity extraction and relations") {
  SECTION("point: l2 = Lie bracket, relations hold") {
    CellComplex P = point();
    auto g = LieAlgebraData::so3();
    BVAlgebra F(P, g, 6);
    FieldPoly S = point_block(F, 0);
    auto u = extract_uloo(F, S);
    CHECK(rebuild_action(u) == S);
    std::string why;
    CHECK(check_relations(u, 5, &why));
    INFO(why);
  }
  SECTION("interval action: relations pass at W = 5") {
    CellComplex X = interval();
    auto g = LieAlgebraData::so3();
    BVAlgebra F(X, g, 8);
    FieldPoly S = interval_action(F, 7);
    auto u = extract_uloo(F, S);
    CHECK(rebuild_action(u) == S);
    std::string why;
    CHECK(check_jacobi_relations(u, 5, &why));
    INFO(why);
    CHECK(check_unimodularity_relations(u, 5, &why));
    INFO(why);
  }
  SECTION("non-unimodular coefficients are detected") {
    CellComplex P = point();
    auto bad = LieAlgebraData::affine2();
    BVAlgebra F(P, bad, 6);
    FieldPoly S = point_block(F, 0);
    auto u = extract_uloo(F, S);
    std::string why;
    CHECK(check_jacobi_relations(u, 4, &why));
    CHECK(!check_unimodularity_relations(u, 4, &why));
  }
  SECTION("B-quadratic terms are rejected") {
    CellComplex X = interval();
    auto g = LieAlgebraData::so3();
    BVAlgebra F(X, g, 6);
    int e = X.cell_index("e01");
    FieldPoly bad = F.B(e, 0) * F.B(X.cell_index("v0"), 0) * F.A(e, 0);
    CHECK_THROWS_AS(extract_uloo(F, bad), std::invalid_argument);
  }
}
