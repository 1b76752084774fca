#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "cellbf/abelianbf.hpp"
#include "helpers.hpp"

using namespace cellbf;
using namespace testutil;

namespace {

Cobordism disk_out(int ngon, int rank = 1) {
  Cobordism cob;
  cob.X = disk_cone(ngon);
  cob.E = LocalSystem::trivial(rank);
  cob.n = 2;
  for (int i = 0; i < ngon; ++i) {
    cob.out_cells.insert(cob.X.cell_index("r" + std::to_string(i)));
    cob.out_cells.insert(cob.X.cell_index("b" + std::to_string(i)));
  }
  return cob;
}

Cobordism cylinder_cob(int ngon) {
  Cobordism cc;
  cc.X = cylinder(ngon);
  cc.E = LocalSystem::trivial(1);
  cc.n = 2;
  for (auto p : {"a", "x"})
    for (int i : cells_by_prefix(cc.X, p)) cc.in_cells.insert(i);
  for (auto p : {"b", "y"})
    for (int i : cells_by_prefix(cc.X, p)) cc.out_cells.insert(i);
  return cc;
}

// chain of n edges as a cobordism {v0} -> {vn}
Cobordism path_cob(int n, const std::vector<Mat>& transports) {
  Cobordism cob;
  cob.n = 1;
  cob.E.rank = (int)transports[0].rows();
  CellComplex X;
  for (int i = 0; i <= n; ++i) X.add_cell("v" + std::to_string(i), 0);
  for (int i = 1; i <= n; ++i) {
    X.add_cell("e" + std::to_string(i), 1);
    int t = cob.E.add_transport(transports[(i - 1) % transports.size()]);
    X.add_incidence("e" + std::to_string(i), "v" + std::to_string(i), 1);
    X.add_incidence("e" + std::to_string(i), "v" + std::to_string(i - 1), -1, t);
  }
  cob.X = X;
  cob.in_cells.insert(0);
  cob.out_cells.insert(n);
  return cob;
}

}  // namespace

TEST_CASE("modified QME identities") {
  SECTION("closed complexes: both sides vanish") {
    Mat h{{Q(3), Q(1)}, {Q(2), Q(1)}};
    auto [X, E] = circle(3, h);
    Cobordism cob;
    cob.X = X;
    cob.E = E;
    cob.n = 1;
    CobordismSetup S(cob);
    std::string why;
    CHECK(mqme_check(S, &why));
    INFO(why);
    AbelianFields F(S);
    CHECK(F.boundary_action_pullback().is_zero());
  }
  SECTION("interval, 2-disk, cylinder") {
    Mat u{{Q(2), Q(1)}, {Q(1), Q(1)}};
    std::string why;
    CHECK(mqme_check(CobordismSetup(interval_cobordism(true, true, u)), &why));
    INFO(why);
    CHECK(mqme_check(CobordismSetup(disk_out(4)), &why));
    INFO(why);
    CHECK(mqme_check(CobordismSetup(cylinder_cob(3)), &why));
    INFO(why);
  }
  SECTION("random product-type cobordisms") {
    std::mt19937_64 rng(41);
    int done = 0;
    for (int t = 0; t < 40 && done < 20; ++t) {
      int kind = (int)(rng() % 3);
      Cobordism cob;
      if (kind == 0) {
        std::vector<Mat> ts{random_sl_pm(rng, 2), random_sl_pm(rng, 2)};
        cob = path_cob(1 + (int)(rng() % 3), ts);
      } else if (kind == 1) {
        cob = disk_out(3 + (int)(rng() % 3));
      } else {
        cob = cylinder_cob(3 + (int)(rng() % 2));
      }
      if (!validate_cobordism(cob).ok) continue;
      CobordismSetup S(cob);
      std::string why;
      INFO("trial " << t << " kind " << kind);
      CHECK(mqme_check(S, &why));
      INFO(why);
      ++done;
    }
    CHECK(done >= 20);
  }
}

TEST_CASE("z_closed") {
  SECTION("acyclic circle: pure scalar, oracle value") {
    Mat h{{Q(2), Q(0)}, {Q(0), Q(1, 2)}};
    auto [X, E] = circle(2, h);
    GaussianState Z = z_closed(X, E);
    CHECK(Z.exponent.empty());
    // xi^{H}=1, prefactor = tau = +-1/2
    CHECK(ScalarMono::equal_mod_sign(Z.prefactor, ScalarMono(SqrtQ(Q(1, 2)))));
  }
  SECTION("trivial rank-1 circle: (+- i hbar) times torsion coordinate") {
    Mat h{{Q(1)}};
    auto [X, E] = circle(2, h);
    GaussianState Z = z_closed(X, E);
    // xi^{H} with dims (1,1) = e^{-i pi/2} hbar; torsion coordinate rational
    CHECK(Z.prefactor.hbar_eighths == 8);
    CHECK((Z.prefactor.phase32 == 8 || Z.prefactor.phase32 == 24));
  }
  SECTION("subdivision invariance") {
    Mat h{{Q(2), Q(0)}, {Q(0), Q(1, 2)}};
    auto [X2, E2] = circle(2, h);
    auto [X5, E5] = circle(5, h);
    GaussianState Za = z_closed(X2, E2);
    GaussianState Zb = z_closed(X5, E5);
    CHECK(ScalarMono::equal_mod_sign(Za.prefactor, Zb.prefactor));
    auto [BX, BE] = barycentric_subdivide(X2, E2);
    GaussianState Zc = z_closed(BX, BE);
    CHECK(ScalarMono::equal_mod_sign(Za.prefactor, Zc.prefactor));
  }
}

TEST_CASE("z_cobordism") {
  SECTION("twisted interval: exponent matches the Berezin oracle") {
    Mat u{{Q(2), Q(1)}, {Q(1), Q(1)}};
    auto cob = interval_cobordism(true, true, u);
    CobordismSetup S(cob);
    GaussianState Z = z_cobordism(S);

    // oracle: expand exp((i/h) S) over the odd fluctuation pair and read the
    // top Berezin coefficient; S = <B,dA> + <B,A>_in with A_out, B_in as
    // parameters. Fluctuation variables: A at v0 (2 odd), B at kappa(e01)
    // (2 odd). All four are odd so the exponential truncates.
    AbelianFields F(S);
    FieldPoly act = F.action();
    int v0 = cob.X.cell_index("v0"), v1 = cob.X.cell_index("v1");
    int e01 = cob.X.cell_index("e01");
    int kap_e = S.D.kappa[e01], kap_v0 = S.D.kappa[v0];
    // exp((i/h)S) -> top coefficient of prod_a A(v0,a) B(kap_e,a)
    FieldPoly expS = FieldPoly::constant(F.vt, HPoly(Q(1)));
    FieldPoly pw = FieldPoly::constant(F.vt, HPoly(Q(1)));
    Q fact(1);
    for (int k = 1; k <= 6; ++k) {
      pw = pw * act;
      fact *= k;
      if (pw.is_zero()) break;
      expS = expS + (Q(1) / fact) * pw;  // powers of (i/h) tracked separately by weight
    }
    // extract the Berezin top part: monomials containing all four fluct vars
    std::set<int> fl{F.A_id[v0 * 2 + 0], F.A_id[v0 * 2 + 1], F.B_id[kap_e * 2 + 0],
                     F.B_id[kap_e * 2 + 1]};
    std::map<Monomial, HPoly> top;
    for (auto& [m, c] : expS.terms) {
      int cnt = 0;
      for (int id : m)
        if (fl.count(id)) ++cnt;
      if (cnt == 4) top[m] = c;
    }
    // the oracle exponent appears as top = const * (1 + (i/h)<B_in, u^{-1} A_out> + ...)
    // separate by external content
    // external quadratic part / constant part gives the exponent coefficients
    Q const_part(0);
    std::map<std::pair<int, int>, Q> quad;  // (B_in var, A_out var)
    for (auto& [m, c] : top) {
      std::vector<int> ext;
      for (int id : m)
        if (!fl.count(id)) ext.push_back(id);
      Q coeff(0);
      for (auto& [k, v] : c.c) coeff += v;  // powers of i/h folded (weights differ)
      if (ext.empty())
        const_part += coeff;
      else if (ext.size() == 2)
        quad[{ext[0], ext[1]}] += coeff;
    }
    REQUIRE(const_part != 0);
    // compare: quad / const must equal the z_cobordism exponent, with the
    // (i/h) bookkeeping: the quartic+external terms carry one more power of
    // (i/h) than the quartic vacuum term... on the Berezin side the counting
    // works out to an overall ratio equal to the exponent coefficient
    auto var_of = [&](const std::string& name) {
      for (int i = 0; i < F.vt.size(); ++i)
        if (F.vt.vars[i].name == name) return i;
      return -1;
    };
    for (auto& [key, cz] : Z.exponent) {
      // key = (Bin:v0:a, Aout:v1:b)
      int a = key.first.back() - '0';
      int b = key.second.back() - '0';
      int bvar = F.B_id[S.D.kappa_d[v0] * 2 + a];
      int avar = F.A_id[v1 * 2 + b];
      Q num(0);
      auto it = quad.find({std::min(avar, bvar), std::max(avar, bvar)});
      if (it != quad.end()) num = it->second;
      INFO(key.first << " " << key.second);
      CHECK((num == cz * const_part || num == -cz * const_part));
    }
    (void)kap_v0;
    (void)var_of;
  }
  SECTION("M_in empty: only the <B_res|out, A_out> term") {
    Cobordism cob = disk_out(3);
    CobordismSetup S(cob);
    GaussianState Z = z_cobordism(S);
    for (auto& [key, c] : Z.exponent) {
      CHECK(key.first.rfind("Bres:", 0) == 0);
      CHECK(key.second.rfind("Aout:", 0) == 0);
    }
    CHECK(!Z.exponent.empty());
  }
  SECTION("closed interval variant: constant prefactor only") {
    auto cob = interval_cobordism(false, false, Mat::identity(1));
    CobordismSetup S(cob);
    GaussianState Z = z_cobordism(S);
    for (auto& [key, c] : Z.exponent) {
      CHECK(key.first.rfind("Bres:", 0) == 0);
    }
  }
}

TEST_CASE("propagator") {
  SECTION("acyclic circle parametrix equations") {
    Mat h{{Q(2), Q(0)}, {Q(0), Q(1, 2)}};
    auto [X, E] = circle(2, h);
    Cobordism cob;
    cob.X = X;
    cob.E = E;
    cob.n = 1;
    CobordismSetup S(cob);
    std::string why;
    CHECK(propagator_check(S, &why));
    INFO(why);
    CHECK(!parametrix(S).entries.empty());
  }
  SECTION("d = 0 complex has zero parametrix") {
    CellComplex X;
    X.add_cell("p", 0);
    X.add_cell("q", 1);  // no incidences: d = 0
    Cobordism cob;
    cob.X = X;
    cob.E = LocalSystem::trivial(1);
    cob.n = 1;
    CobordismSetup S(cob);
    CHECK(parametrix(S).entries.empty());
    std::string why;
    CHECK(propagator_check(S, &why));
  }
  SECTION("cobordism propagator vanishes on the boundary") {
    Mat u{{Q(2), Q(1)}, {Q(1), Q(1)}};
    CobordismSetup S(interval_cobordism(true, true, u));
    std::string why;
    CHECK(propagator_check(S, &why));
    INFO(why);
  }
}

TEST_CASE("gluing") {
  SECTION("interval + interval = interval, exactly, with the glued gauge") {
    Mat uI{{Q(2), Q(1)}, {Q(1), Q(1)}};
    Mat uII{{Q(1), Q(2)}, {Q(1), Q(3)}};
    // piece I: v0 --e--> v1 (in v0, out v1), transport uI
    auto cobI = interval_cobordism(true, true, uI);
    auto cobII = interval_cobordism(true, true, uII);
    CobordismSetup SI(cobI), SII(cobII);
    // glued: path with 2 edges, transports uI then uII
    auto cobG = path_cob(2, {uI, uII});
    CobordismSetup SG(cobG);

    GluingData G;
    G.SI = &SI;
    G.SII = &SII;
    G.Sglued = &SG;
    G.interface_cells[cobI.X.cell_index("v1")] = cobII.X.cell_index("v0");
    G.glue_I[cobI.X.cell_index("v0")] = cobG.X.cell_index("v0");
    G.glue_I[cobI.X.cell_index("v1")] = cobG.X.cell_index("v1");
    G.glue_I[cobI.X.cell_index("e01")] = cobG.X.cell_index("e1");
    G.glue_II[cobII.X.cell_index("v0")] = cobG.X.cell_index("v1");
    G.glue_II[cobII.X.cell_index("v1")] = cobG.X.cell_index("v2");
    G.glue_II[cobII.X.cell_index("e01")] = cobG.X.cell_index("e2");

    // residual data: everything acyclic; gres is the trivial retraction
    GresData gres;
    gres.data.big = GradedComplex(GradedVS{});
    gres.data.small = GradedComplex(GradedVS{});
    gres.data.i = GradedMap(gres.data.small.spaces, gres.data.big.spaces, 0);
    gres.data.p = GradedMap(gres.data.big.spaces, gres.data.small.spaces, 0);
    gres.data.K = GradedMap(gres.data.big.spaces, gres.data.big.spaces, -1);

    InductionData Kg = glued_induction_data(G, gres);
    CHECK(check_induction_axioms(Kg).empty());

    GaussianState zI = qualify_residual_slots(z_cobordism(SI), "I");
    GaussianState zII = qualify_residual_slots(z_cobordism(SII), "II");
    // relabel piece boundary slots into glued complex names
    auto relabel = [&](GaussianState z, const Cobordism& piece, const std::map<int, int>& glue) {
      GaussianState out;
      out.prefactor = z.prefactor;
      auto fix = [&](const std::string& s) {
        for (auto& [pc, gc] : glue) {
          std::string froma = "Aout:" + piece.X.cell(pc).id + ":";
          std::string fromb = "Bin:" + piece.X.cell(pc).id + ":";
          std::string toa = "Aout:" + cobG.X.cell(gc).id + ":";
          std::string tob = "Bin:" + cobG.X.cell(gc).id + ":";
          // only boundary cells of the GLUED complex get renamed; interface
          // cells keep piece-local names for the contraction
          if (pc == cobI.X.cell_index("v1") && &piece == &cobI) continue;
          if (pc == cobII.X.cell_index("v0") && &piece == &cobII) continue;
          if (s.rfind(froma, 0) == 0) return toa + s.substr(froma.size());
          if (s.rfind(fromb, 0) == 0) return tob + s.substr(fromb.size());
        }
        return s;
      };
      for (auto& [key, c] : z.exponent) out.add_exp(fix(key.first), fix(key.second), c);
      for (auto& s : z.half_density) out.half_density.insert(fix(s));
      return out;
    };
    zI = relabel(zI, cobI, G.glue_I);
    zII = relabel(zII, cobII, G.glue_II);

    GaussianState glued = glue(zI, zII, G, gres);
    GaussianState direct = z_cobordism(SG, &Kg);
    INFO("glued:  " << glued.str());
    INFO("direct: " << direct.str());
    CHECK(glued.exponent == direct.exponent);
    CHECK(ScalarMono::equal_mod_sign(glued.prefactor, direct.prefactor));
    // sanity: the glued kernel is B_in u_II^{-1} u_I^{-1} A_out
    Mat comp = uII * uI;
    auto inv = comp.inverse();
    REQUIRE(inv);
    for (auto& [key, c] : direct.exponent) {
      int a = key.first.back() - '0';
      int b = key.second.back() - '0';
      CHECK(c == (*inv)(a, b));
    }
  }
}

TEST_CASE("reduced states") {
  SECTION("cylinder over a point is the identity kernel") {
    auto cob = interval_cobordism(true, true, Mat::identity(1));
    CobordismSetup S(cob);
    GaussianState Z = z_cobordism(S);
    ReducedBoundary rb = reduced_boundary(S);
    GaussianState Zr = reduce_state(Z, S, rb);
    REQUIRE(Zr.exponent.size() == 1);
    auto& [key, c] = *Zr.exponent.begin();
    CHECK(key.first.rfind("redB:", 0) == 0);
    CHECK(key.second.rfind("redA:", 0) == 0);
    CHECK((c == 1 || c == -1));
    // identity morphism: the prefactor is exactly the normalized reduced
    // measure, nothing else
    CHECK(ScalarMono::equal_mod_sign(Zr.prefactor, reduced_measure_norm(S, rb)));
  }
  SECTION("cylinder over the circle: identity on H(S^1)") {
    CobordismSetup S(cylinder_cob(3));
    GaussianState Z = z_cobordism(S);
    ReducedBoundary rb = reduced_boundary(S);
    GaussianState Zr = reduce_state(Z, S, rb);
    // kernel pairs each reduced A-class with exactly one reduced B-class
    std::map<std::string, int> acount, bcount;
    for (auto& [key, c] : Zr.exponent) {
      bcount[key.first]++;
      acount[key.second]++;
      CHECK(key.first.rfind("redB:", 0) == 0);
      CHECK(key.second.rfind("redA:", 0) == 0);
    }
    CHECK(Zr.exponent.size() == 2);  // H^0 and H^1 of the circle
  }
  SECTION("M_in empty reduction") {
    CobordismSetup S(disk_out(3));
    GaussianState Z = z_cobordism(S);
    ReducedBoundary rb = reduced_boundary(S);
    GaussianState Zr = reduce_state(Z, S, rb);
    for (auto& [key, c] : Zr.exponent) {
      CHECK(key.first.rfind("Bres:", 0) == 0);
      CHECK(key.second.rfind("redA:", 0) == 0);
    }
  }
}
